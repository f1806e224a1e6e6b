//! Small dense complex linear algebra: state vectors, density matrices,
//! Hermitian operators, eigendecomposition and the symmetric logarithmic
//! derivative (SLD) solve.
//!
//! Every matrix here is tiny (the largest is the joint sensor-pointer space,
//! 2(2j+1) for 2j <= 64), so all tolerances are absolute on max-abs entries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{MetrologyError, Result};

pub type ComplexAmplitude = Complex64;

/// Absolute Hermiticity tolerance accepted by the operator constructors
/// (scaled by the largest entry when that exceeds one).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Hermiticity tolerance accepted by [`eigendecompose_hermitian`].
pub const EIGEN_HERMITIAN_TOL: f64 = 1e-10;
/// Pairs of eigenvalues with `λ_i + λ_j` at or below this are treated as kernel by the SLD solve.
pub const SLD_RANK_THRESHOLD: f64 = 1e-10;
pub const NORMALIZATION_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> ComplexAmplitude {
    Complex64::new(re, im)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn check_square_finite(m: &DMatrix<Complex64>, what: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(MetrologyError::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(MetrologyError::DimensionMismatch {
            expected: 1,
            actual: 0,
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(MetrologyError::NonFinite(what));
    }
    Ok(())
}

fn hermitize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let adj = m.adjoint();
    (m + adj).scale(0.5)
}

fn check_hermitian(m: &DMatrix<Complex64>, tol: f64) -> Result<()> {
    let deviation = hermitian_deviation(m);
    if deviation > tol * max_abs(m).max(1.0) {
        return Err(MetrologyError::NotHermitian { deviation });
    }
    Ok(())
}

/// A pure-state amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<ComplexAmplitude>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(MetrologyError::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(MetrologyError::NonFinite("state vector"));
        }
        Ok(Self {
            amps: DVector::from_vec(amplitudes),
        })
    }

    /// Builds a state that must already be normalized within [`NORMALIZATION_TOL`].
    pub fn new_normalized(amplitudes: Vec<ComplexAmplitude>) -> Result<Self> {
        let v = Self::new(amplitudes)?;
        v.ensure_normalized(NORMALIZATION_TOL)?;
        Ok(v)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dimension {dim}"
        );
        let mut amps = DVector::zeros(dim);
        amps[index] = c(1.0, 0.0);
        Self { amps }
    }

    pub(crate) fn from_dvector(amps: DVector<Complex64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[ComplexAmplitude] {
        self.amps.as_slice()
    }

    pub fn amplitude(&self, index: usize) -> ComplexAmplitude {
        self.amps[index]
    }

    pub fn as_dvector(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn ensure_normalized(&self, tol: f64) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > tol {
            return Err(MetrologyError::NotNormalized { norm_sqr });
        }
        Ok(())
    }

    pub fn scaled(&self, factor: ComplexAmplitude) -> Self {
        Self {
            amps: self.amps.map(|z| z * factor),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self {
            amps: &self.amps + &other.amps,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self {
            amps: &self.amps - &other.amps,
        })
    }

    /// `|v⟩⟨v|`
    pub fn projector(&self) -> DensityMatrix {
        let m = &self.amps * self.amps.adjoint();
        DensityMatrix {
            entries: hermitize(m),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn same_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(MetrologyError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// `a ⊗ b` with `a` as the outer (major) index.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    let amps = a
        .amps
        .iter()
        .flat_map(|&x| b.amps.iter().map(move |&y| x * y))
        .collect::<Vec<_>>();
    StateVector::from_dvector(DVector::from_vec(amps))
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<ComplexAmplitude> {
    same_dim(a.dim(), b.dim())?;
    Ok(a.amps.dotc(&b.amps))
}

/// Access to the underlying square matrix of a Hermitian-valued type.
pub trait HermitianMatrix {
    fn matrix(&self) -> &DMatrix<Complex64>;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }

    fn trace(&self) -> f64 {
        self.matrix().trace().re
    }

    fn entry(&self, row: usize, col: usize) -> ComplexAmplitude {
        self.matrix()[(row, col)]
    }
}

/// Mixed state. Constructed values are Hermitian; trace and positivity are
/// checked by [`DensityMatrix::validate_state`] and by the operations that need them.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        check_square_finite(&entries, "density matrix")?;
        check_hermitian(&entries, HERMITIAN_TOL)?;
        Ok(Self {
            entries: hermitize(entries),
        })
    }

    pub fn from_rows(rows: &[&[ComplexAmplitude]]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub(crate) fn from_hermitian_unchecked(entries: DMatrix<Complex64>) -> Self {
        Self {
            entries: hermitize(entries),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    /// Checks unit trace and positivity within the absolute tolerances.
    pub fn validate_state(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(MetrologyError::TraceMismatch {
                expected: 1.0,
                actual: tr,
            });
        }
        let eig = eigendecompose_hermitian(self)?;
        let min_eigenvalue = eig.values[0];
        if min_eigenvalue < -PSD_TOL {
            return Err(MetrologyError::NotPositive { min_eigenvalue });
        }
        Ok(())
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }
}

impl HermitianMatrix for DensityMatrix {
    fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        check_square_finite(&entries, "Hermitian operator")?;
        check_hermitian(&entries, HERMITIAN_TOL)?;
        Ok(Self {
            entries: hermitize(entries),
        })
    }

    pub fn from_rows(rows: &[&[ComplexAmplitude]]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub(crate) fn from_hermitian_unchecked(entries: DMatrix<Complex64>) -> Self {
        Self {
            entries: hermitize(entries),
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            entries: DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)])),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn projector(state: &StateVector) -> Self {
        Self {
            entries: state.projector().entries,
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.kronecker(&other.entries),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.scale(factor),
        }
    }

    /// `exp(-i·angle·self)` built from the eigendecomposition.
    pub fn exp_i(&self, angle: f64) -> Result<Unitary> {
        let eig = eigendecompose_hermitian(self)?;
        let phases = DVector::from_iterator(
            eig.values.len(),
            eig.values
                .iter()
                .map(|&l| Complex64::from_polar(1.0, -angle * l)),
        );
        let v = &eig.basis;
        Ok(Unitary(v * DMatrix::from_diagonal(&phases) * v.adjoint()))
    }
}

impl HermitianMatrix for HermitianOperator {
    fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(pub DMatrix<Complex64>);

impl Unitary {
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        same_dim(self.0.ncols(), state.dim())?;
        Ok(StateVector::from_dvector(&self.0 * &state.amps))
    }
}

fn matrix_from_rows(rows: &[&[ComplexAmplitude]]) -> Result<DMatrix<Complex64>> {
    let n = rows.len();
    for r in rows {
        same_dim(n, r.len())?;
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Eigenpairs sorted by ascending eigenvalue; column `k` of `basis` is the
/// eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub basis: DMatrix<Complex64>,
}

impl HermitianEigen {
    pub fn eigenvectors(&self) -> Vec<StateVector> {
        self.basis
            .column_iter()
            .map(|col| StateVector::from_dvector(col.into_owned()))
            .collect()
    }

    /// `V Λ V†`
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let lambda =
            DVector::from_iterator(self.values.len(), self.values.iter().map(|&l| c(l, 0.0)));
        &self.basis * DMatrix::from_diagonal(&lambda) * self.basis.adjoint()
    }
}

pub fn eigendecompose_hermitian<M: HermitianMatrix + ?Sized>(m: &M) -> Result<HermitianEigen> {
    let a = m.matrix();
    check_square_finite(a, "eigendecomposition input")?;
    check_hermitian(a, EIGEN_HERMITIAN_TOL)?;
    let eig = hermitize(a.clone()).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let basis = DMatrix::from_fn(a.nrows(), a.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(HermitianEigen { values, basis })
}

/// Solves `Lρ + ρL = 2∂ρ` for the symmetric logarithmic derivative.
///
/// Works in the eigenbasis of `rho`: `L_ij = 2(∂ρ)_ij / (λ_i + λ_j)` where
/// `λ_i + λ_j` exceeds [`SLD_RANK_THRESHOLD`]; kernel-kernel entries are zero
/// (minimal-norm choice, traces against `rho` are unaffected).
pub fn solve_sld(rho: &DensityMatrix, drho: &HermitianOperator) -> Result<HermitianOperator> {
    let (eig, d) = sld_eigenframe(rho, drho)?;
    let n = eig.values.len();
    let l_eig = DMatrix::from_fn(n, n, |i, j| {
        let s = eig.values[i] + eig.values[j];
        if s > SLD_RANK_THRESHOLD {
            d[(i, j)] * (2.0 / s)
        } else {
            c(0.0, 0.0)
        }
    });
    let l = &eig.basis * l_eig * eig.basis.adjoint();
    Ok(HermitianOperator::from_hermitian_unchecked(l))
}

/// Max-abs entry of `Lρ + ρL − 2∂ρ` over the support-connected block
/// (eigenbasis pairs with `λ_i + λ_j` above the rank threshold).
pub fn sld_residual(
    rho: &DensityMatrix,
    drho: &HermitianOperator,
    sld: &HermitianOperator,
) -> Result<f64> {
    let (eig, d) = sld_eigenframe(rho, drho)?;
    same_dim(rho.dim(), sld.dim())?;
    let v = &eig.basis;
    let l = v.adjoint() * sld.matrix() * v;
    let n = eig.values.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if eig.values[i] + eig.values[j] > SLD_RANK_THRESHOLD {
                let r = l[(i, j)] * (eig.values[i] + eig.values[j]) - d[(i, j)] * 2.0;
                worst = worst.max(r.norm());
            }
        }
    }
    Ok(worst)
}

fn sld_eigenframe(
    rho: &DensityMatrix,
    drho: &HermitianOperator,
) -> Result<(HermitianEigen, DMatrix<Complex64>)> {
    same_dim(rho.dim(), drho.dim())?;
    let tr = rho.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(MetrologyError::TraceMismatch {
            expected: 1.0,
            actual: tr,
        });
    }
    let dtr = drho.trace();
    if dtr.abs() > TRACE_TOL {
        return Err(MetrologyError::TraceMismatch {
            expected: 0.0,
            actual: dtr,
        });
    }
    let eig = eigendecompose_hermitian(rho)?;
    if eig.values[0] < -PSD_TOL {
        return Err(MetrologyError::NotPositive {
            min_eigenvalue: eig.values[0],
        });
    }
    let d = eig.basis.adjoint() * drho.matrix() * &eig.basis;
    Ok((eig, d))
}

/// Max-abs entry of the difference of two equally sized matrices.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    max_abs(&(a - b))
}

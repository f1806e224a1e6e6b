//! Fisher information of the protocol, computed two ways.
//!
//! Closed forms (leading order in ω, evaluated at the parameters given) sit
//! next to model-independent routes: the pure-state QFI from the state
//! derivative, the SLD-based QFI matrix of the noisy pointer, and finite
//! differences of outcome probabilities. Numerical derivatives use a
//! five-point central stencil at `x ± h, x ± 2h`. Agreement between the two
//! routes is what the verification suite and the acceptance tests check.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{MetrologyError, Result};
use crate::linalg::{
    c, inner_product, solve_sld, DensityMatrix, HermitianMatrix, HermitianOperator, StateVector,
};
use crate::protocol::{
    phase_flip, postselect, postselected_unnormalized, NoiseParams, ProtocolParams, P_MIN,
};
use crate::spin::{kicked_states, PointerSpec, SpinQuantumNumber};

pub const DEFAULT_STEP: f64 = 1e-5;
pub const MIN_STEP: f64 = 1e-9;
pub const MAX_STEP: f64 = 1e-2;
/// Stencil states must be normalized to this tolerance.
const STENCIL_NORM_TOL: f64 = 1e-10;
/// Closed forms refuse denominators at or below this.
const LIMIT_DENOMINATOR: f64 = 1e-12;
const PROB_SUM_TOL: f64 = 1e-10;
const NEGLIGIBLE_PROB: f64 = 1e-14;
const NEGLIGIBLE_DERIVATIVE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FisherMethod {
    Analytic,
    StateDerivative,
    SldMatrix,
    FiniteDifference,
}

impl std::fmt::Display for FisherMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FisherMethod::Analytic => "analytic",
            FisherMethod::StateDerivative => "state_derivative",
            FisherMethod::SldMatrix => "sld_matrix",
            FisherMethod::FiniteDifference => "finite_difference",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FisherValue {
    Scalar(f64),
    /// Rows and columns ordered `(ω, ν)`.
    Matrix([[f64; 2]; 2]),
}

/// Inputs a Fisher quantity was computed from. Fields that do not apply are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamsEcho {
    pub j: Option<SpinQuantumNumber>,
    pub theta: Option<f64>,
    pub azimuth: Option<f64>,
    pub omega: Option<f64>,
    pub t: Option<f64>,
    pub g: Option<f64>,
    pub phi_post: Option<f64>,
    pub nu: Option<f64>,
    /// Parameter value for generic families.
    pub at: Option<f64>,
    pub step: Option<f64>,
}

impl ParamsEcho {
    fn protocol(spec: &PointerSpec, params: &ProtocolParams) -> Self {
        Self {
            j: Some(spec.j),
            theta: Some(spec.theta),
            azimuth: Some(spec.azimuth),
            omega: Some(params.omega),
            t: Some(params.t),
            g: Some(params.g),
            phi_post: Some(params.phi_post),
            ..Self::default()
        }
    }

    fn with_step(self, cfg: &DerivativeConfig) -> Self {
        Self {
            step: match cfg.scheme {
                DerivativeScheme::Central => Some(cfg.step),
                DerivativeScheme::Analytic => None,
            },
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherReport {
    pub value: FisherValue,
    pub method: FisherMethod,
    pub params: ParamsEcho,
}

impl FisherReport {
    pub fn scalar(&self) -> Option<f64> {
        match self.value {
            FisherValue::Scalar(v) => Some(v),
            FisherValue::Matrix(_) => None,
        }
    }

    pub fn matrix(&self) -> Option<[[f64; 2]; 2]> {
        match self.value {
            FisherValue::Matrix(m) => Some(m),
            FisherValue::Scalar(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeScheme {
    Central,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeConfig {
    step: f64,
    pub scheme: DerivativeScheme,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            scheme: DerivativeScheme::Central,
        }
    }
}

impl DerivativeConfig {
    pub fn central(step: f64) -> Result<Self> {
        if !(MIN_STEP..=MAX_STEP).contains(&step) {
            return Err(MetrologyError::InvalidStep { step });
        }
        Ok(Self {
            step,
            scheme: DerivativeScheme::Central,
        })
    }

    pub fn analytic() -> Self {
        Self {
            step: DEFAULT_STEP,
            scheme: DerivativeScheme::Analytic,
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

/// A one-parameter family of pure states, optionally with a known derivative.
pub trait StateFamily {
    fn state(&self, x: f64) -> Result<StateVector>;

    fn derivative(&self, _x: f64) -> Option<Result<StateVector>> {
        None
    }
}

impl<F> StateFamily for F
where
    F: Fn(f64) -> Result<StateVector>,
{
    fn state(&self, x: f64) -> Result<StateVector> {
        self(x)
    }
}

/// A one-parameter family of outcome distributions.
pub trait ProbabilityFamily {
    fn probabilities(&self, x: f64) -> Result<Vec<f64>>;

    fn derivative(&self, _x: f64) -> Option<Result<Vec<f64>>> {
        None
    }
}

impl<F> ProbabilityFamily for F
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    fn probabilities(&self, x: f64) -> Result<Vec<f64>> {
        self(x)
    }
}

/// The exposed sensor `(|0⟩ + e^{-iωt}|1⟩)/√2` as a function of ω.
#[derive(Debug, Clone, Copy)]
pub struct SensorFamily {
    pub t: f64,
}

impl StateFamily for SensorFamily {
    fn state(&self, omega: f64) -> Result<StateVector> {
        StateVector::new(vec![
            c(FRAC_1_SQRT_2, 0.0),
            Complex64::from_polar(FRAC_1_SQRT_2, -omega * self.t),
        ])
    }

    fn derivative(&self, omega: f64) -> Option<Result<StateVector>> {
        let d = Complex64::from_polar(FRAC_1_SQRT_2, -omega * self.t) * c(0.0, -self.t);
        Some(StateVector::new(vec![c(0.0, 0.0), d]))
    }
}

/// Normalized postselected pointer `|η(ω)⟩`.
#[derive(Debug, Clone, Copy)]
pub struct PostselectedPointerFamily {
    pub spec: PointerSpec,
    pub params: ProtocolParams,
}

impl PostselectedPointerFamily {
    /// `d|η̃⟩/dω` of the unnormalized pointer: `−it sin(φ/2) e^{-iωt}|ξ−⟩/√2`.
    fn raw_derivative(&self, omega: f64) -> StateVector {
        let params = self.params.at_omega(omega);
        let (_, minus) = kicked_states(&self.spec, params.g);
        let s = (params.phi_post / 2.0).sin();
        let factor =
            Complex64::from_polar(s * FRAC_1_SQRT_2, -omega * params.t) * c(0.0, -params.t);
        minus.scaled(factor)
    }

    /// `dp/dω = 2 Re⟨η̃|dη̃⟩`
    fn success_derivative(&self, omega: f64) -> f64 {
        let raw = postselected_unnormalized(&self.spec, &self.params.at_omega(omega));
        let d = self.raw_derivative(omega);
        2.0 * inner_product(&raw, &d).expect("same dimension").re
    }
}

impl StateFamily for PostselectedPointerFamily {
    fn state(&self, omega: f64) -> Result<StateVector> {
        Ok(postselect(&self.spec, &self.params.at_omega(omega))?.eta)
    }

    fn derivative(&self, omega: f64) -> Option<Result<StateVector>> {
        Some((|| {
            let params = self.params.at_omega(omega);
            let raw = postselected_unnormalized(&self.spec, &params);
            let p = raw.norm_sqr();
            if p <= P_MIN {
                return Err(MetrologyError::PostselectionImpossible { p });
            }
            let dp = self.success_derivative(omega);
            // d(η̃/√p) = dη̃/√p − η̃·p'/(2p^{3/2})
            let a = self.raw_derivative(omega).scaled(c(1.0 / p.sqrt(), 0.0));
            let b = raw.scaled(c(dp / (2.0 * p.powf(1.5)), 0.0));
            a.sub(&b)
        })())
    }
}

/// Outcome distribution of measuring the postselected pointer in the `|j, m⟩` basis.
#[derive(Debug, Clone, Copy)]
pub struct PointerMeasurementFamily {
    pub spec: PointerSpec,
    pub params: ProtocolParams,
}

impl ProbabilityFamily for PointerMeasurementFamily {
    fn probabilities(&self, omega: f64) -> Result<Vec<f64>> {
        let eta = postselect(&self.spec, &self.params.at_omega(omega))?.eta;
        Ok(eta.amplitudes().iter().map(|z| z.norm_sqr()).collect())
    }
}

/// Values at `x − 2h, x − h, x + h, x + 2h`.
fn stencil<T>(f: impl Fn(f64) -> Result<T>, x: f64, h: f64) -> Result<[T; 4]> {
    Ok([f(x - 2.0 * h)?, f(x - h)?, f(x + h)?, f(x + 2.0 * h)?])
}

/// Fourth-order central derivative from [`stencil`] values, written as
/// antisymmetric differences so constant families give exactly zero.
fn stencil_scalar(v: &[f64; 4], h: f64) -> f64 {
    (8.0 * (v[2] - v[1]) - (v[3] - v[0])) / (12.0 * h)
}

fn stencil_state(v: &[StateVector; 4], h: f64) -> Result<StateVector> {
    let inner = v[2].sub(&v[1])?.scaled(c(8.0, 0.0));
    let outer = v[3].sub(&v[0])?;
    Ok(inner.sub(&outer)?.scaled(c(1.0 / (12.0 * h), 0.0)))
}

fn stencil_matrix(v: &[DensityMatrix; 4], h: f64) -> Result<HermitianOperator> {
    let inner = (v[2].matrix() - v[1].matrix()).scale(8.0);
    let outer = v[3].matrix() - v[0].matrix();
    HermitianOperator::new((inner - outer).scale(1.0 / (12.0 * h)))
}

fn normalized_state<F: StateFamily + ?Sized>(family: &F, x: f64) -> Result<StateVector> {
    let s = family.state(x)?;
    s.ensure_normalized(STENCIL_NORM_TOL)?;
    Ok(s)
}

fn pure_qfi_value<F: StateFamily + ?Sized>(
    family: &F,
    at: f64,
    cfg: &DerivativeConfig,
) -> Result<f64> {
    let psi = normalized_state(family, at)?;
    let d = match cfg.scheme {
        DerivativeScheme::Central => {
            let h = cfg.step;
            stencil_state(&stencil(|x| normalized_state(family, x), at, h)?, h)?
        }
        DerivativeScheme::Analytic => family
            .derivative(at)
            .ok_or(MetrologyError::MissingAnalyticDerivative)??,
    };
    let dd = d.norm_sqr();
    let overlap = inner_product(&d, &psi)?;
    Ok(4.0 * (dd - overlap.norm_sqr()))
}

/// `Q = 4[⟨∂ψ|∂ψ⟩ − |⟨∂ψ|ψ⟩|²]` for a normalized pure-state family.
pub fn qfi_pure<F: StateFamily + ?Sized>(
    family: &F,
    at: f64,
    cfg: &DerivativeConfig,
) -> Result<FisherReport> {
    Ok(FisherReport {
        value: FisherValue::Scalar(pure_qfi_value(family, at, cfg)?),
        method: FisherMethod::StateDerivative,
        params: ParamsEcho {
            at: Some(at),
            ..ParamsEcho::default()
        }
        .with_step(cfg),
    })
}

/// `Q_m = p(ω) · Q[|η(ω)⟩]` from the state derivative of the normalized pointer.
pub fn measured_qfi(
    spec: &PointerSpec,
    params: &ProtocolParams,
    cfg: &DerivativeConfig,
) -> Result<FisherReport> {
    let outcome = postselect(spec, params)?;
    let family = PostselectedPointerFamily {
        spec: *spec,
        params: *params,
    };
    let q = pure_qfi_value(&family, params.omega, cfg)?;
    Ok(FisherReport {
        value: FisherValue::Scalar(outcome.p_success * q),
        method: FisherMethod::StateDerivative,
        params: ParamsEcho::protocol(spec, params).with_step(cfg),
    })
}

/// `1 − cos θ sin φ`, written to avoid cancellation near both of its zeros.
fn one_minus_cos_sin(theta: f64, phi: f64) -> f64 {
    let quarter = std::f64::consts::FRAC_PI_4 - phi / 2.0;
    if theta.cos() >= 0.0 {
        // (1 − sin φ) + sin φ (1 − cos θ)
        2.0 * quarter.sin().powi(2) + 2.0 * phi.sin() * (theta / 2.0).sin().powi(2)
    } else {
        // (1 + sin φ) − sin φ (1 + cos θ)
        2.0 * quarter.cos().powi(2) - 2.0 * phi.sin() * (theta / 2.0).cos().powi(2)
    }
}

/// `1 − sin θ sin φ`
fn one_minus_sin_sin(theta: f64, phi: f64) -> f64 {
    1.0 - theta.sin() * phi.sin()
}

fn require_half(spec: &PointerSpec) -> Result<()> {
    if !spec.j.is_half() {
        return Err(MetrologyError::QubitOnly { dim: spec.j.dim() });
    }
    Ok(())
}

fn halfspin_value(theta: f64, phi: f64, t: f64) -> Result<f64> {
    let den = one_minus_cos_sin(theta, phi);
    if den <= LIMIT_DENOMINATOR {
        return Err(MetrologyError::LimitPoint(
            "1 - cos(theta) sin(phi) vanishes",
        ));
    }
    let (st, sp) = (theta.sin(), phi.sin());
    Ok(t * t * st * st * sp * sp / (2.0 * den))
}

/// Qubit-pointer closed form `t² sin²θ sin²φ / [2(1 − cos θ sin φ)]`, leading order in ω.
pub fn measured_qfi_halfspin(spec: &PointerSpec, params: &ProtocolParams) -> Result<FisherReport> {
    require_half(spec)?;
    let q = halfspin_value(spec.theta, params.phi_post, params.t)?;
    Ok(FisherReport {
        value: FisherValue::Scalar(q),
        method: FisherMethod::Analytic,
        params: ParamsEcho::protocol(spec, params),
    })
}

/// Spin-j closed form at leading order in ω:
/// `t²{2 sin²(φ/2) − [sin²(φ/2) + (O/2) sin φ]² / p}` with `p = (1 + O sin φ)/2`
/// and `O = Σ_{m<j}|c_jm|² − cos(θ/2)^{4j}`.
///
/// Evaluated as the equivalent `2t² sin²φ x^{2j}(1 − x^{2j}) / (1 + O sin φ)`,
/// `x = cos²(θ/2)`, whose factors are all free of cancellation; the expanded
/// form loses every digit once `p` drops near machine epsilon.
pub fn measured_qfi_spinj(spec: &PointerSpec, params: &ProtocolParams) -> Result<FisherReport> {
    let (theta, phi) = (spec.theta, params.phi_post);
    let twice_j = spec.j.twice_j() as i32;
    let x = (theta / 2.0).cos().powi(2);
    let top = x.powi(twice_j);
    // 1 − x^{2j} = (1 − x)(1 + x + … + x^{2j−1})
    let rest = (theta / 2.0).sin().powi(2) * (0..twice_j).map(|k| x.powi(k)).sum::<f64>();
    let sp = phi.sin();
    let quarter = std::f64::consts::FRAC_PI_4 - phi / 2.0;
    // 1 + O sin φ with O = 1 − 2x^{2j} = 2(1 − x^{2j}) − 1
    let den = if sp < 0.0 {
        2.0 * quarter.cos().powi(2) - 2.0 * top * sp
    } else {
        2.0 * quarter.sin().powi(2) + 2.0 * sp * rest
    };
    if den <= 0.0 {
        return Err(MetrologyError::LimitPoint("1 + O sin(phi) vanishes"));
    }
    let q = 2.0 * params.t * params.t * sp * sp * top * rest / den;
    Ok(FisherReport {
        value: FisherValue::Scalar(q),
        method: FisherMethod::Analytic,
        params: ParamsEcho::protocol(spec, params),
    })
}

fn postselection_boundary(p: f64) -> Result<()> {
    if p <= P_MIN || p >= 1.0 - P_MIN {
        return Err(MetrologyError::ProbabilityBoundary { p });
    }
    Ok(())
}

/// `F_p = (dp/dω)² / [p(1 − p)]` for the success/failure statistics of postselection.
pub fn postselected_classical_fisher(
    spec: &PointerSpec,
    params: &ProtocolParams,
    cfg: &DerivativeConfig,
) -> Result<FisherReport> {
    let p = postselected_unnormalized(spec, params).norm_sqr();
    postselection_boundary(p)?;
    let dp = match cfg.scheme {
        DerivativeScheme::Central => {
            let h = cfg.step;
            let prob = |w: f64| postselect(spec, &params.at_omega(w)).map(|o| o.p_success);
            stencil_scalar(&stencil(prob, params.omega, h)?, h)
        }
        DerivativeScheme::Analytic => PostselectedPointerFamily {
            spec: *spec,
            params: *params,
        }
        .success_derivative(params.omega),
    };
    Ok(FisherReport {
        value: FisherValue::Scalar(dp * dp / (p * (1.0 - p))),
        method: match cfg.scheme {
            DerivativeScheme::Central => FisherMethod::FiniteDifference,
            DerivativeScheme::Analytic => FisherMethod::StateDerivative,
        },
        params: ParamsEcho::protocol(spec, params).with_step(cfg),
    })
}

/// Qubit-pointer `F_p` from `p = (1 − cos θ sin φ cos ωt)/2` and
/// `dp/dω = (t/2) cos θ sin φ sin ωt`.
pub fn postselected_classical_fisher_halfspin(
    spec: &PointerSpec,
    params: &ProtocolParams,
) -> Result<FisherReport> {
    require_half(spec)?;
    let (theta, phi, wt) = (spec.theta, params.phi_post, params.omega * params.t);
    let p = 0.5 * (1.0 - theta.cos() * phi.sin() * wt.cos());
    postselection_boundary(p)?;
    let dp = 0.5 * params.t * theta.cos() * phi.sin() * wt.sin();
    Ok(FisherReport {
        value: FisherValue::Scalar(dp * dp / (p * (1.0 - p))),
        method: FisherMethod::Analytic,
        params: ParamsEcho::protocol(spec, params),
    })
}

fn checked_distribution<F: ProbabilityFamily + ?Sized>(family: &F, x: f64) -> Result<Vec<f64>> {
    let probs = family.probabilities(x)?;
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < -NEGLIGIBLE_PROB {
            return Err(MetrologyError::NegativeProbability { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(MetrologyError::ProbabilitySum { sum });
    }
    Ok(probs)
}

/// `F = Σ_k (dp_k/dx)² / p_k`. Outcomes that are both impossible and
/// stationary contribute nothing and are skipped.
pub fn classical_fisher<F: ProbabilityFamily + ?Sized>(
    family: &F,
    at: f64,
    cfg: &DerivativeConfig,
) -> Result<FisherReport> {
    let probs = checked_distribution(family, at)?;
    let derivs = match cfg.scheme {
        DerivativeScheme::Central => {
            let h = cfg.step;
            let values = stencil(|x| checked_distribution(family, x), at, h)?;
            if let Some(bad) = values.iter().find(|v| v.len() != probs.len()) {
                return Err(MetrologyError::DimensionMismatch {
                    expected: probs.len(),
                    actual: bad.len(),
                });
            }
            (0..probs.len())
                .map(|k| stencil_scalar(&values.each_ref().map(|v| v[k]), h))
                .collect::<Vec<_>>()
        }
        DerivativeScheme::Analytic => family
            .derivative(at)
            .ok_or(MetrologyError::MissingAnalyticDerivative)??,
    };
    let mut total = 0.0;
    for (&p, &dp) in probs.iter().zip(&derivs) {
        if p < NEGLIGIBLE_PROB && dp.abs() < NEGLIGIBLE_DERIVATIVE {
            continue;
        }
        if p <= 0.0 {
            return Err(MetrologyError::ProbabilityBoundary { p });
        }
        total += dp * dp / p;
    }
    Ok(FisherReport {
        value: FisherValue::Scalar(total),
        method: FisherMethod::FiniteDifference,
        params: ParamsEcho {
            at: Some(at),
            ..ParamsEcho::default()
        }
        .with_step(cfg),
    })
}

/// Noisy qubit pointer `ρ'(ω, ν)` together with the success probability at ω.
fn noisy_pointer(
    spec: &PointerSpec,
    params: &ProtocolParams,
    nu: f64,
) -> Result<(DensityMatrix, f64)> {
    let outcome = postselect(spec, params)?;
    let rho = outcome.eta.projector();
    let noisy = phase_flip(&rho, NoiseParams::new_inclusive(nu)?)?;
    Ok((noisy, outcome.p_success))
}

/// Step for ν derivatives; the outer stencil points `ν ± 2h` stay within [0, 1].
pub fn nu_step(nu: f64, base: f64) -> f64 {
    base.min(nu / 2.0).min((1.0 - nu) / 2.0)
}

fn noisy_derivatives(
    spec: &PointerSpec,
    params: &ProtocolParams,
    nu: f64,
    cfg: &DerivativeConfig,
) -> Result<(HermitianOperator, HermitianOperator)> {
    match cfg.scheme {
        DerivativeScheme::Central => {
            let h = cfg.step;
            let rho_at_omega = |w: f64| noisy_pointer(spec, &params.at_omega(w), nu).map(|r| r.0);
            let d_omega = stencil_matrix(&stencil(rho_at_omega, params.omega, h)?, h)?;
            let hn = nu_step(nu, cfg.step);
            let rho_at_nu = |n: f64| noisy_pointer(spec, params, n).map(|r| r.0);
            let d_nu = stencil_matrix(&stencil(rho_at_nu, nu, hn)?, hn)?;
            Ok((d_omega, d_nu))
        }
        DerivativeScheme::Analytic => {
            let family = PostselectedPointerFamily {
                spec: *spec,
                params: *params,
            };
            let eta = family.state(params.omega)?;
            let d_eta = family
                .derivative(params.omega)
                .ok_or(MetrologyError::MissingAnalyticDerivative)??;
            let a = d_eta.as_dvector() * eta.as_dvector().adjoint();
            let mut d_rho = &a + a.adjoint();
            // the channel is linear: coherences shrink by (1 − 2ν)
            let shrink = 1.0 - 2.0 * nu;
            d_rho[(0, 1)] *= shrink;
            d_rho[(1, 0)] *= shrink;
            let rho = eta.projector();
            // ∂ν[(1−ν)ρ + νZρZ] = ZρZ − ρ: only the coherences change, by −2ρ_01
            let mut d_nu = DMatrix::zeros(2, 2);
            d_nu[(0, 1)] = rho.entry(0, 1) * -2.0;
            d_nu[(1, 0)] = rho.entry(1, 0) * -2.0;
            Ok((
                HermitianOperator::new(d_rho)?,
                HermitianOperator::new(d_nu)?,
            ))
        }
    }
}

/// QFI matrix `H_{αβ} = p(ω) Tr[ρ' (L_α L_β + L_β L_α)/2]` over `(ω, ν)` for
/// the qubit pointer under phase-flip noise, from SLD solves.
pub fn qfi_matrix_noisy(
    spec: &PointerSpec,
    params: &ProtocolParams,
    noise: NoiseParams,
    cfg: &DerivativeConfig,
) -> Result<FisherReport> {
    require_half(spec)?;
    let nu = noise.ensure_open()?.nu();
    let (rho, p) = noisy_pointer(spec, params, nu)?;
    let (d_omega, d_nu) = noisy_derivatives(spec, params, nu, cfg)?;
    let slds = [solve_sld(&rho, &d_omega)?, solve_sld(&rho, &d_nu)?];
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let la = slds[a].matrix();
            let lb = slds[b].matrix();
            let anti = (la * lb + lb * la).scale(0.5);
            h[a][b] = p * (rho.matrix() * anti).trace().re;
        }
    }
    Ok(FisherReport {
        value: FisherValue::Matrix(h),
        method: FisherMethod::SldMatrix,
        params: ParamsEcho {
            nu: Some(nu),
            ..ParamsEcho::protocol(spec, params)
        }
        .with_step(cfg),
    })
}

/// Which denominator the ωω entry of the noisy closed form carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OmegaDenominator {
    /// `1 − cos θ sin φ`, inherited from the noiseless qubit-pointer result.
    CosTheta,
    /// `1 − sin θ sin φ`
    SinTheta,
}

impl OmegaDenominator {
    pub const ALL: [OmegaDenominator; 2] = [OmegaDenominator::CosTheta, OmegaDenominator::SinTheta];

    pub fn label(self) -> &'static str {
        match self {
            OmegaDenominator::CosTheta => "1 - cos(theta) sin(phi)",
            OmegaDenominator::SinTheta => "1 - sin(theta) sin(phi)",
        }
    }
}

/// `(1−2ν)² t² sin²θ sin²φ / [2·den]` with the chosen denominator.
pub fn omega_entry_candidate(
    which: OmegaDenominator,
    spec: &PointerSpec,
    params: &ProtocolParams,
    noise: NoiseParams,
) -> Result<f64> {
    require_half(spec)?;
    let (theta, phi) = (spec.theta, params.phi_post);
    let den = match which {
        OmegaDenominator::CosTheta => one_minus_cos_sin(theta, phi),
        OmegaDenominator::SinTheta => one_minus_sin_sin(theta, phi),
    };
    if den <= LIMIT_DENOMINATOR {
        return Err(MetrologyError::LimitPoint(
            "omega-entry denominator vanishes",
        ));
    }
    let shrink = 1.0 - 2.0 * noise.nu();
    let (st, sp) = (theta.sin(), phi.sin());
    Ok(shrink * shrink * params.t * params.t * st * st * sp * sp / (2.0 * den))
}

/// `sin²θ cos²φ / [2(ν − ν²)(1 − cos θ sin φ)]`
pub fn nu_entry_analytic(
    spec: &PointerSpec,
    params: &ProtocolParams,
    noise: NoiseParams,
) -> Result<f64> {
    require_half(spec)?;
    let nu = noise.ensure_open()?.nu();
    let den = one_minus_cos_sin(spec.theta, params.phi_post);
    if den <= LIMIT_DENOMINATOR {
        return Err(MetrologyError::LimitPoint(
            "1 - cos(theta) sin(phi) vanishes",
        ));
    }
    let (st, cp) = (spec.theta.sin(), params.phi_post.cos());
    Ok(st * st * cp * cp / (2.0 * (nu - nu * nu) * den))
}

/// Closed-form noisy QFI matrix at leading order in ω: diagonal, with the ωω
/// entry `(1−2ν)²` times the noiseless qubit-pointer value.
pub fn qfi_matrix_analytic(
    spec: &PointerSpec,
    params: &ProtocolParams,
    noise: NoiseParams,
) -> Result<FisherReport> {
    let noise = noise.ensure_open()?;
    let ww = omega_entry_candidate(OmegaDenominator::CosTheta, spec, params, noise)?;
    let nn = nu_entry_analytic(spec, params, noise)?;
    Ok(FisherReport {
        value: FisherValue::Matrix([[ww, 0.0], [0.0, nn]]),
        method: FisherMethod::Analytic,
        params: ParamsEcho {
            nu: Some(noise.nu()),
            ..ParamsEcho::protocol(spec, params)
        },
    })
}

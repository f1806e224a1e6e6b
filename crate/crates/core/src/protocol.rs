//! The sensor-pointer protocol: sensor preparation and exposure, the
//! `σ_z ⊗ |j,+j⟩⟨j,+j|` coupling, postselection of the sensor, the modular
//! value and the phase-flip channel acting on a qubit pointer.
//!
//! The joint space is ordered sensor-major: index `s·(2j+1) + k` for sensor
//! basis state `s ∈ {0, 1}` and pointer index `k`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;

use crate::error::{MetrologyError, Result};
use crate::linalg::{
    c, inner_product, tensor_product, ComplexAmplitude, DensityMatrix, HermitianMatrix,
    HermitianOperator, StateVector,
};
use crate::spin::{coherent_state, kicked_overlap_closed_form, kicked_states, PointerSpec};

/// Postselection is refused at or below this success probability.
pub const P_MIN: f64 = 1e-14;
/// `|⟨ψ_f|ψ_i(ω)⟩|` at or below this makes the modular value undefined.
pub const ORTHOGONALITY_CUTOFF: f64 = 1e-14;
pub const DEFAULT_COUPLING: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Field strength to be estimated.
    pub omega: f64,
    /// Exposure time.
    pub t: f64,
    /// Integrated coupling strength.
    pub g: f64,
    /// Postselection angle: `|ψ_f⟩ = cos(φ/2)|0⟩ + sin(φ/2)|1⟩`.
    pub phi_post: f64,
}

impl ProtocolParams {
    /// Coupling fixed at `g = π/2`.
    pub fn new(omega: f64, t: f64, phi_post: f64) -> Result<Self> {
        Self::with_coupling(omega, t, DEFAULT_COUPLING, phi_post)
    }

    pub fn with_coupling(omega: f64, t: f64, g: f64, phi_post: f64) -> Result<Self> {
        for (name, v) in [("omega", omega), ("t", t), ("g", g), ("phi", phi_post)] {
            if !v.is_finite() {
                return Err(MetrologyError::InvalidParams(format!(
                    "{name} = {v} is not finite"
                )));
            }
        }
        if t <= 0.0 {
            return Err(MetrologyError::InvalidParams(format!(
                "exposure time t = {t} must be positive"
            )));
        }
        Ok(Self {
            omega,
            t,
            g,
            phi_post,
        })
    }

    pub fn at_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    pub fn at_phi(self, phi_post: f64) -> Self {
        Self { phi_post, ..self }
    }

    /// Phase `e^{-iωt}` accumulated by the `|1⟩` sensor component.
    fn exposure_phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.omega * self.t)
    }
}

/// Normalized pointer state after successful postselection, with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectionOutcome {
    pub eta: StateVector,
    pub p_success: f64,
}

/// Phase-flip probability `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    nu: f64,
}

impl NoiseParams {
    /// Requires `0 < ν < 1`.
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(MetrologyError::NoiseOutOfRange { nu });
        }
        Ok(Self { nu })
    }

    /// Also admits the endpoints `ν ∈ {0, 1}`, for channel limit checks.
    pub fn new_inclusive(nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(MetrologyError::NoiseOutOfRange { nu });
        }
        Ok(Self { nu })
    }

    pub fn nu(self) -> f64 {
        self.nu
    }

    pub(crate) fn ensure_open(self) -> Result<Self> {
        Self::new(self.nu)
    }
}

/// `(|0⟩ + |1⟩)/√2`
pub fn sensor_initial() -> StateVector {
    StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).expect("finite")
}

/// `(|0⟩ + e^{-iωt}|1⟩)/√2`
pub fn sensor_evolved(params: &ProtocolParams) -> StateVector {
    StateVector::new(vec![
        c(FRAC_1_SQRT_2, 0.0),
        params.exposure_phase() * FRAC_1_SQRT_2,
    ])
    .expect("finite")
}

/// `|ψ_f⟩ = cos(φ/2)|0⟩ + sin(φ/2)|1⟩`
pub fn postselection_state(phi_post: f64) -> StateVector {
    let (s, co) = (phi_post / 2.0).sin_cos();
    StateVector::from_real(&[co, s]).expect("finite")
}

/// `(|0⟩⊗|ξ+⟩ + e^{-iωt}|1⟩⊗|ξ−⟩)/√2`, built from the kicked pointer states.
pub fn joint_state(spec: &PointerSpec, params: &ProtocolParams) -> StateVector {
    let (plus, minus) = kicked_states(spec, params.g);
    let amps = plus
        .amplitudes()
        .iter()
        .map(|&a| a * FRAC_1_SQRT_2)
        .chain(
            minus
                .amplitudes()
                .iter()
                .map(|&a| a * params.exposure_phase() * FRAC_1_SQRT_2),
        )
        .collect();
    StateVector::new(amps).expect("finite")
}

/// The same joint state obtained by exponentiating the full coupling
/// Hamiltonian `σ_z ⊗ |j,+j⟩⟨j,+j|` and applying it to the product state.
pub fn joint_state_via_unitary(spec: &PointerSpec, params: &ProtocolParams) -> Result<StateVector> {
    let top = StateVector::basis(spec.j.dim(), spec.j.top_index());
    let coupling = HermitianOperator::pauli_z().kron(&HermitianOperator::projector(&top));
    let product = tensor_product(&sensor_evolved(params), &coherent_state(spec));
    coupling.exp_i(params.g)?.apply(&product)
}

/// `(⟨ψ_f| ⊗ 1)|Ψ⟩`, unnormalized.
pub fn project_sensor(joint: &StateVector, sensor_bra: &StateVector) -> Result<StateVector> {
    if sensor_bra.dim() != 2 || !joint.dim().is_multiple_of(2) {
        return Err(MetrologyError::DimensionMismatch {
            expected: 2,
            actual: sensor_bra.dim(),
        });
    }
    let n = joint.dim() / 2;
    let a = joint.amplitudes();
    let (b0, b1) = (
        sensor_bra.amplitude(0).conj(),
        sensor_bra.amplitude(1).conj(),
    );
    StateVector::new((0..n).map(|k| b0 * a[k] + b1 * a[n + k]).collect())
}

/// Unnormalized postselected pointer `(cos(φ/2)|ξ+⟩ + sin(φ/2)e^{-iωt}|ξ−⟩)/√2`.
pub(crate) fn postselected_unnormalized(
    spec: &PointerSpec,
    params: &ProtocolParams,
) -> StateVector {
    let (plus, minus) = kicked_states(spec, params.g);
    let (s, co) = (params.phi_post / 2.0).sin_cos();
    plus.scaled(c(co * FRAC_1_SQRT_2, 0.0))
        .add(&minus.scaled(params.exposure_phase() * (s * FRAC_1_SQRT_2)))
        .expect("same dimension")
}

pub fn postselect(spec: &PointerSpec, params: &ProtocolParams) -> Result<PostselectionOutcome> {
    let raw = postselected_unnormalized(spec, params);
    let p_success = raw.norm_sqr();
    if p_success <= P_MIN {
        return Err(MetrologyError::PostselectionImpossible { p: p_success });
    }
    Ok(PostselectionOutcome {
        eta: raw.scaled(c(1.0 / p_success.sqrt(), 0.0)),
        p_success,
    })
}

/// `p(ω) = (1 − cos θ sin φ cos ωt)/2` for the qubit pointer at `g = π/2`.
pub fn success_probability_halfspin(theta: f64, params: &ProtocolParams) -> f64 {
    0.5 * (1.0 - theta.cos() * params.phi_post.sin() * (params.omega * params.t).cos())
}

/// `p(ω) = (1 + O sin φ cos ωt)/2` for a spin-j pointer at `g = π/2`, with `O`
/// from [`kicked_overlap_closed_form`]. Reduces to the qubit form at j = 1/2.
pub fn success_probability_spinj(spec: &PointerSpec, params: &ProtocolParams) -> f64 {
    let overlap = kicked_overlap_closed_form(spec);
    0.5 * (1.0 + overlap * params.phi_post.sin() * (params.omega * params.t).cos())
}

/// `(σ_z)_m = ⟨ψ_f|e^{-igσ_z}|ψ_i(ω)⟩ / ⟨ψ_f|ψ_i(ω)⟩`; independent of the pointer.
pub fn modular_value(params: &ProtocolParams) -> Result<ComplexAmplitude> {
    let psi = sensor_evolved(params);
    let psi_f = postselection_state(params.phi_post);
    let denominator = inner_product(&psi_f, &psi)?;
    if denominator.norm() <= ORTHOGONALITY_CUTOFF {
        return Err(MetrologyError::OrthogonalPostselection);
    }
    let kicked = StateVector::new(vec![
        psi.amplitude(0) * Complex64::from_polar(1.0, -params.g),
        psi.amplitude(1) * Complex64::from_polar(1.0, params.g),
    ])?;
    Ok(inner_product(&psi_f, &kicked)? / denominator)
}

/// `ρ' = (1−ν)ρ + ν σ_z ρ σ_z` on the qubit pointer.
pub fn phase_flip(rho: &DensityMatrix, noise: NoiseParams) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(MetrologyError::QubitOnly { dim: rho.dim() });
    }
    let mut out = rho.matrix().clone();
    // σ_z ρ σ_z flips the sign of the coherences; mixing scales them by (1 − 2ν)
    let shrink = 1.0 - 2.0 * noise.nu();
    out[(0, 1)] *= shrink;
    out[(1, 0)] *= shrink;
    Ok(DensityMatrix::from_hermitian_unchecked(out))
}

/// Reference operator-sum form `(1−ν)ρ + ν ZρZ`, evaluated with explicit products.
pub fn phase_flip_kraus(rho: &DensityMatrix, noise: NoiseParams) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(MetrologyError::QubitOnly { dim: rho.dim() });
    }
    let z = HermitianOperator::pauli_z();
    let r = rho.matrix();
    let flipped = z.matrix() * r * z.matrix();
    let mixed = r.scale(1.0 - noise.nu()) + flipped.scale(noise.nu());
    Ok(DensityMatrix::from_hermitian_unchecked(mixed))
}

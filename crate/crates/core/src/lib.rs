//! Modular-value metrology with spin-j coherent pointers.
//!
//! A qubit sensor picks up a phase `ωt`, is coupled to a spin-j coherent
//! pointer through `σ_z ⊗ |j,+j⟩⟨j,+j|`, and is postselected. This crate
//! builds those states, evaluates every Fisher quantity of the protocol both
//! from closed forms and from independent numerical routes, and produces the
//! sweep and figure data the CLI writes out.

pub mod error;
pub mod fisher;
pub mod linalg;
pub mod protocol;
pub mod spin;
pub mod sweep;
pub mod verify;

pub use error::{MetrologyError, Result};
pub use fisher::{
    classical_fisher, measured_qfi, measured_qfi_halfspin, measured_qfi_spinj,
    postselected_classical_fisher, qfi_matrix_analytic, qfi_matrix_noisy, qfi_pure,
    DerivativeConfig, DerivativeScheme, FisherMethod, FisherReport, FisherValue, OmegaDenominator,
};
pub use linalg::{
    eigendecompose_hermitian, inner_product, solve_sld, tensor_product, ComplexAmplitude,
    DensityMatrix, HermitianMatrix, HermitianOperator, StateVector,
};
pub use protocol::{
    joint_state, modular_value, phase_flip, postselect, sensor_evolved, sensor_initial,
    success_probability_halfspin, success_probability_spinj, NoiseParams, PostselectionOutcome,
    ProtocolParams,
};
pub use spin::{
    coefficient_cjm, coherent_state, kicked_overlap, kicked_states, PointerSpec, SpinQuantumNumber,
};

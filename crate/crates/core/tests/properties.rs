//! Property tests over random states, operators and protocol parameters.

use std::f64::consts::{PI, TAU};

use metrology_core::fisher::{
    classical_fisher, measured_qfi_halfspin, measured_qfi_spinj, PointerMeasurementFamily,
};
use metrology_core::linalg::{c, max_abs_diff};
use metrology_core::protocol::phase_flip_kraus;
use metrology_core::{
    coherent_state, eigendecompose_hermitian, inner_product, measured_qfi, modular_value,
    phase_flip, postselect, solve_sld, tensor_product, DensityMatrix, DerivativeConfig,
    HermitianMatrix, HermitianOperator, NoiseParams, PointerSpec, ProtocolParams,
    SpinQuantumNumber, StateVector,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = random_matrix(rng, n);
    (&a + a.adjoint()).scale(0.5)
}

/// `A A† + εI`, trace-normalized: full rank with eigenvalues bounded below.
fn random_full_rank_state(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
    let a = random_matrix(rng, n);
    let m = &a * a.adjoint() + DMatrix::identity(n, n).scale(0.05);
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr)).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let amps = (0..n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let v = StateVector::new(amps).unwrap();
    v.scaled(c(1.0 / v.norm(), 0.0))
}

fn spin() -> impl Strategy<Value = SpinQuantumNumber> {
    (1u32..=8).prop_map(|tj| SpinQuantumNumber::from_twice(tj).unwrap())
}

/// θ and φ kept away from the two singular corners.
fn regular_angles() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=PI, 0.0..TAU).prop_filter("singular corner", |&(theta, phi)| {
        let near = |t0: f64, p0: f64| (theta - t0).abs().max((phi - p0).abs()) < 1e-3;
        !near(0.0, PI / 2.0) && !near(PI, 1.5 * PI)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_norm_is_multiplicative(seed: u64, n in 1usize..6, m in 1usize..6, sa in 0.1f64..3.0, sb in 0.1f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(&mut rng, n).scaled(c(sa, 0.0));
        let b = random_state(&mut rng, m).scaled(c(sb, 0.0));
        let ab = tensor_product(&a, &b);
        prop_assert_eq!(ab.dim(), n * m);
        prop_assert!((ab.norm() - a.norm() * b.norm()).abs() < 1e-12 * (1.0 + a.norm() * b.norm()));
    }

    #[test]
    fn eigendecomposition_reconstructs(seed: u64, n in 1usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = HermitianOperator::new(random_hermitian(&mut rng, n)).unwrap();
        let eig = eigendecompose_hermitian(&h).unwrap();
        prop_assert!(max_abs_diff(&eig.reconstruct(), h.matrix()) < 1e-10);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = eig.basis.adjoint() * &eig.basis;
        prop_assert!(max_abs_diff(&gram, &DMatrix::identity(n, n)) < 1e-10);
    }

    #[test]
    fn sld_solves_lyapunov_equation(seed: u64, n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_full_rank_state(&mut rng, n);
        let mut d = random_hermitian(&mut rng, n);
        let shift = d.trace() / c(n as f64, 0.0);
        for k in 0..n {
            d[(k, k)] -= shift;
        }
        let drho = HermitianOperator::new(d).unwrap();
        let l = solve_sld(&rho, &drho).unwrap();
        let lhs = l.matrix() * rho.matrix() + rho.matrix() * l.matrix();
        prop_assert!(max_abs_diff(&lhs, &drho.matrix().scale(2.0)) < 1e-8);
        prop_assert!(max_abs_diff(l.matrix(), &l.matrix().adjoint()) < 1e-12);
    }

    #[test]
    fn phase_flip_is_a_channel(seed: u64, nu in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_full_rank_state(&mut rng, 2);
        let noise = NoiseParams::new_inclusive(nu).unwrap();
        let out = phase_flip(&rho, noise).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        let eig = eigendecompose_hermitian(&out).unwrap();
        prop_assert!(eig.values[0] > -1e-12);
        let kraus = phase_flip_kraus(&rho, noise).unwrap();
        prop_assert!(max_abs_diff(out.matrix(), kraus.matrix()) < 1e-14);
        // populations are untouched
        prop_assert!((out.entry(0, 0) - rho.entry(0, 0)).norm() < 1e-15);
    }

    #[test]
    fn coherent_states_are_normalized(j in spin(), theta in 0.0..=PI, azimuth in 0.0..=TAU) {
        let spec = PointerSpec::new(j, theta, azimuth).unwrap();
        prop_assert!((coherent_state(&spec).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn postselection_outcomes_complete(j in spin(), theta in 0.0..=PI, phi in 0.0..TAU, omega in -3.0f64..3.0, t in 0.1f64..3.0, g in -PI..PI) {
        let spec = PointerSpec::new(j, theta, 0.0).unwrap();
        let params = ProtocolParams::with_coupling(omega, t, g, phi).unwrap();
        // |ψ_f(φ + π)⟩ is the orthogonal sensor outcome
        let p = |params: &ProtocolParams| postselect(&spec, params).map(|o| o.p_success).unwrap_or(0.0);
        let total = p(&params) + p(&params.at_phi(phi + PI));
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measured_qfi_respects_bounds(j in spin(), (theta, phi) in regular_angles(), t in 0.2f64..3.0) {
        let params = ProtocolParams::new(0.0, t, phi).unwrap();
        let q_half = measured_qfi_halfspin(&PointerSpec::half(theta, 0.0).unwrap(), &params)
            .unwrap().scalar().unwrap();
        prop_assert!(q_half <= t * t * (1.0 + 1e-9));
        let q_j = measured_qfi_spinj(&PointerSpec::new(j, theta, 0.0).unwrap(), &params)
            .unwrap().scalar().unwrap();
        prop_assert!(q_j <= (j.twice_j() as f64) * q_half + 1e-9 * t * t);
        prop_assert!(q_j >= -1e-15);
    }

    #[test]
    fn measured_qfi_ignores_azimuth(j in spin(), theta in 0.2f64..2.9, phi in 0.2f64..1.3, azimuth in 0.0..=TAU) {
        let cfg = DerivativeConfig::default();
        let params = ProtocolParams::new(0.0, 1.0, phi).unwrap();
        let q = |az: f64| measured_qfi(&PointerSpec::new(j, theta, az).unwrap(), &params, &cfg)
            .unwrap().scalar().unwrap();
        prop_assert!((q(azimuth) - q(0.0)).abs() < 1e-9);
    }

    #[test]
    fn pointer_measurement_below_measured_qfi(twice_j in 1u32..=4, theta in 0.2f64..2.9, phi in 0.2f64..6.0, omega in 0.05f64..1.0) {
        let cfg = DerivativeConfig::default();
        let spec = PointerSpec::new(SpinQuantumNumber::from_twice(twice_j).unwrap(), theta, 0.0).unwrap();
        let params = ProtocolParams::new(omega, 1.0, phi).unwrap();
        let Ok(outcome) = postselect(&spec, &params) else { return Ok(()) };
        prop_assume!(outcome.p_success > 1e-3);
        let family = PointerMeasurementFamily { spec, params };
        let f = classical_fisher(&family, omega, &cfg).unwrap().scalar().unwrap();
        let q = measured_qfi(&spec, &params, &cfg).unwrap().scalar().unwrap();
        // Fisher of the normalized pointer against its QFI (Q_m / p)
        prop_assert!(f <= q / outcome.p_success + 1e-7);
    }

    #[test]
    fn modular_value_matches_direct_formula(omega in -2.0f64..2.0, t in 0.1f64..2.0, phi in 0.0..TAU) {
        let params = ProtocolParams::new(omega, t, phi).unwrap();
        let psi_f = metrology_core::protocol::postselection_state(phi);
        let psi = metrology_core::sensor_evolved(&params);
        let overlap = inner_product(&psi_f, &psi).unwrap();
        prop_assume!(overlap.norm() > 1e-6);
        let mv = modular_value(&params).unwrap();
        // at g = π/2, e^{-igσ_z} = -iσ_z
        let z_psi = StateVector::new(vec![psi.amplitude(0), -psi.amplitude(1)]).unwrap();
        let expected = c(0.0, -1.0) * inner_product(&psi_f, &z_psi).unwrap() / overlap;
        prop_assert!((mv - expected).norm() < 1e-9 * (1.0 + expected.norm()));
    }
}

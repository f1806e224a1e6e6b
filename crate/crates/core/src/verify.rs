//! The invariant suite behind `metrology verify`.
//!
//! Each check recomputes a property from scratch and reports the worst
//! deviation it saw next to the tolerance it was held to.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use crate::error::Result;
use crate::fisher::{
    classical_fisher, measured_qfi, measured_qfi_halfspin, measured_qfi_spinj,
    omega_entry_candidate, postselected_classical_fisher, qfi_matrix_noisy, qfi_pure,
    DerivativeConfig, OmegaDenominator, PointerMeasurementFamily, SensorFamily,
};
use crate::protocol::{
    joint_state, joint_state_via_unitary, modular_value, postselect, NoiseParams, ProtocolParams,
};
use crate::spin::{coherent_state, kicked_overlap, PointerSpec, SpinQuantumNumber};
use crate::sweep::{fig3_value, linspace, SweepGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<CheckOutcome>,
    /// ωω-entry denominators that matched the SLD oracle over the whole grid.
    pub omega_denominator_matches: Vec<OmegaDenominator>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Test-only perturbations used to confirm that the suite can fail.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyHooks {
    /// Multiplies every qubit-pointer closed-form value the suite consumes.
    pub analytic_scale: f64,
}

impl Default for VerifyHooks {
    fn default() -> Self {
        Self {
            analytic_scale: 1.0,
        }
    }
}

struct Ctx {
    hooks: VerifyHooks,
    cfg: DerivativeConfig,
}

impl Ctx {
    fn eq7(&self, theta: f64, params: &ProtocolParams) -> Result<f64> {
        let q = measured_qfi_halfspin(&half(theta)?, params)?
            .scalar()
            .expect("scalar");
        Ok(q * self.hooks.analytic_scale)
    }
}

fn half(theta: f64) -> Result<PointerSpec> {
    PointerSpec::half(theta, 0.0)
}

fn spin(twice_j: u32, theta: f64, azimuth: f64) -> Result<PointerSpec> {
    PointerSpec::new(SpinQuantumNumber::from_twice(twice_j)?, theta, azimuth)
}

fn at_phi(phi: f64) -> ProtocolParams {
    ProtocolParams::new(0.0, 1.0, phi).expect("valid params")
}

/// Turns a fallible measurement into an outcome: errors are failures.
fn outcome(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    match body() {
        Ok((passed, detail)) => CheckOutcome {
            name,
            passed,
            detail,
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn within(worst: f64, tol: f64) -> (bool, String) {
    (
        worst <= tol,
        format!("max deviation {worst:.3e} (tol {tol:.0e})"),
    )
}

pub fn run_verification() -> VerificationReport {
    run_verification_with(VerifyHooks::default())
}

#[doc(hidden)]
pub fn run_verification_with(hooks: VerifyHooks) -> VerificationReport {
    let ctx = Ctx {
        hooks,
        cfg: DerivativeConfig::default(),
    };
    let mut checks = vec![
        q0_reproduction(&ctx),
        eq7_vs_oracle(&ctx),
        spinj_vs_oracle(&ctx),
        spinj_reduces_to_half(&ctx),
        standard_limit_bound(&ctx),
        spin_enhancement(&ctx),
        inset_bound(&ctx),
        postselected_fisher_quadratic(&ctx),
        classical_below_quantum(&ctx),
        noisy_identity(&ctx),
        noisy_off_diagonal(&ctx),
        monotone_information_loss(&ctx),
    ];
    let (disambiguation, matches) = omega_denominator(&ctx);
    checks.push(disambiguation);
    checks.extend([
        nu_entry_value(&ctx),
        fig3_structure(),
        joint_state_oracle(),
        completeness(),
        modular_value_pointer_independence(),
        coherent_normalization(),
        overlap_reduction(),
        azimuth_invariance(),
        step_stability(&ctx),
    ]);
    VerificationReport {
        checks,
        omega_denominator_matches: matches,
    }
}

fn grid(n: usize) -> SweepGrid {
    SweepGrid::new(n, n).expect("valid grid")
}

fn q0_reproduction(ctx: &Ctx) -> CheckOutcome {
    outcome("q0_equals_t_squared", || {
        let mut worst: f64 = 0.0;
        for t in [0.5, 1.0, 2.0] {
            let q = qfi_pure(&SensorFamily { t }, 0.0, &ctx.cfg)?
                .scalar()
                .expect("scalar");
            worst = worst.max((q - t * t).abs());
        }
        Ok(within(worst, 1e-10))
    })
}

fn eq7_vs_oracle(ctx: &Ctx) -> CheckOutcome {
    outcome("qubit_closed_form_vs_oracle", || {
        let mut worst: f64 = 0.0;
        for (theta, phi) in grid(30).points() {
            let params = at_phi(phi);
            let oracle = measured_qfi(&half(theta)?, &params, &ctx.cfg)?
                .scalar()
                .expect("scalar");
            worst = worst.max((ctx.eq7(theta, &params)? - oracle).abs());
        }
        Ok(within(worst, 1e-8))
    })
}

fn spinj_vs_oracle(ctx: &Ctx) -> CheckOutcome {
    outcome("spin_j_closed_form_vs_oracle", || {
        let mut worst: f64 = 0.0;
        for twice_j in [2, 3, 4] {
            for (theta, phi) in grid(30).points() {
                let spec = spin(twice_j, theta, 0.0)?;
                let params = at_phi(phi);
                let analytic = measured_qfi_spinj(&spec, &params)?
                    .scalar()
                    .expect("scalar");
                let oracle = measured_qfi(&spec, &params, &ctx.cfg)?
                    .scalar()
                    .expect("scalar");
                worst = worst.max((analytic - oracle).abs());
            }
        }
        Ok(within(worst, 1e-8))
    })
}

fn spinj_reduces_to_half(ctx: &Ctx) -> CheckOutcome {
    outcome("spin_j_reduces_at_half", || {
        let mut worst: f64 = 0.0;
        for (theta, phi) in grid(30).points() {
            let params = at_phi(phi);
            let general = measured_qfi_spinj(&half(theta)?, &params)?
                .scalar()
                .expect("scalar");
            worst = worst.max((general - ctx.eq7(theta, &params)?).abs());
        }
        Ok(within(worst, 1e-12))
    })
}

fn standard_limit_bound(ctx: &Ctx) -> CheckOutcome {
    outcome("qubit_standard_limit", || {
        let mut max_ratio: f64 = 0.0;
        for (theta, phi) in grid(30).points() {
            max_ratio = max_ratio.max(ctx.eq7(theta, &at_phi(phi))?);
        }
        let near_a = ctx.eq7(1e-4, &at_phi(FRAC_PI_2))?;
        let near_b = ctx.eq7(PI - 1e-4, &at_phi(3.0 * FRAC_PI_2))?;
        let passed = max_ratio <= 1.0 + 1e-9 && near_a > 1.0 - 1e-6 && near_b > 1.0 - 1e-6;
        Ok((
            passed,
            format!(
                "max Q/Q0 {max_ratio:.12}; at (1e-4, pi/2) {near_a:.12}; at (pi-1e-4, 3pi/2) {near_b:.12}"
            ),
        ))
    })
}

/// `Q^(j)/Q^(1/2)` over the grid, skipping points where the qubit value vanishes.
fn max_ratio_on_grid(twice_j: u32, points: &[(f64, f64)], ctx: &Ctx) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for &(theta, phi) in points {
        let params = at_phi(phi);
        let base = ctx.eq7(theta, &params)?;
        if base <= 1e-12 {
            continue;
        }
        let q = measured_qfi_spinj(&spin(twice_j, theta, 0.0)?, &params)?
            .scalar()
            .expect("scalar");
        worst = worst.max(q / base);
    }
    Ok(worst)
}

fn spin_enhancement(ctx: &Ctx) -> CheckOutcome {
    outcome("spin_j_enhancement_2j", || {
        let points = grid(30).points();
        let mut passed = true;
        let mut parts = Vec::new();
        for twice_j in [2, 3, 4] {
            let bound = twice_j as f64;
            let params = at_phi(3.0 * FRAC_PI_2);
            let q = measured_qfi_spinj(&spin(twice_j, 1e-3, 0.0)?, &params)?
                .scalar()
                .expect("scalar");
            let limit = q / ctx.eq7(1e-3, &params)?;
            let grid_max = max_ratio_on_grid(twice_j, &points, ctx)?;
            passed &= (limit - bound).abs() <= 1e-4 && grid_max <= bound + 1e-6;
            parts.push(format!(
                "2j={twice_j}: limit {limit:.8}, grid max {grid_max:.8}"
            ));
        }
        Ok((passed, parts.join("; ")))
    })
}

fn inset_bound(ctx: &Ctx) -> CheckOutcome {
    outcome("inset_ratio_at_most_one", || {
        let thetas = linspace((1e-3, PI - 1e-3), 200);
        let points: Vec<_> = thetas.iter().map(|&t| (t, FRAC_PI_2)).collect();
        let mut worst = f64::NEG_INFINITY;
        for twice_j in [2, 3, 4] {
            worst = worst.max(max_ratio_on_grid(twice_j, &points, ctx)?);
        }
        Ok((
            worst <= 1.0 + 1e-9,
            format!("max ratio at phi=pi/2 {worst:.12}"),
        ))
    })
}

fn postselected_fisher_quadratic(ctx: &Ctx) -> CheckOutcome {
    outcome("postselected_fisher_order_w2", || {
        let mut passed = true;
        let mut parts = Vec::new();
        for (theta, phi) in [(0.7, 2.0), (1.2, 4.0), (2.5, 0.9)] {
            let spec = half(theta)?;
            let f = |w: f64| -> Result<f64> {
                let params = ProtocolParams::new(w, 1.0, phi)?;
                Ok(postselected_classical_fisher(&spec, &params, &ctx.cfg)?
                    .scalar()
                    .expect("scalar"))
            };
            let at0 = f(0.0)?;
            let ratio = f(2e-3)? / f(1e-3)?;
            passed &= at0 <= 1e-12 && (ratio - 4.0).abs() <= 1e-2;
            parts.push(format!("F(0)={at0:.1e} ratio={ratio:.6}"));
        }
        Ok((passed, parts.join("; ")))
    })
}

fn classical_below_quantum(ctx: &Ctx) -> CheckOutcome {
    outcome("pointer_fisher_below_qfi", || {
        let mut worst = f64::NEG_INFINITY;
        for twice_j in [1, 2, 3] {
            for (theta, phi) in grid(8).points() {
                let spec = spin(twice_j, theta, 0.0)?;
                let params = ProtocolParams::new(0.2, 1.0, phi)?;
                let family = PointerMeasurementFamily { spec, params };
                let outcome = postselect(&spec, &params)?;
                let classical = classical_fisher(&family, params.omega, &ctx.cfg)?
                    .scalar()
                    .expect("scalar");
                let quantum = measured_qfi(&spec, &params, &ctx.cfg)?
                    .scalar()
                    .expect("scalar");
                worst = worst.max(outcome.p_success * classical - quantum);
            }
        }
        Ok((worst <= 1e-8, format!("max p*F - Q_m {worst:.3e}")))
    })
}

fn noisy_omega_entry(ctx: &Ctx, theta: f64, phi: f64, nu: f64) -> Result<[[f64; 2]; 2]> {
    let h = qfi_matrix_noisy(&half(theta)?, &at_phi(phi), NoiseParams::new(nu)?, &ctx.cfg)?;
    Ok(h.matrix().expect("matrix"))
}

fn noisy_identity(ctx: &Ctx) -> CheckOutcome {
    outcome("noisy_omega_identity", || {
        let mut worst: f64 = 0.0;
        let mut dephased: f64 = 0.0;
        for (theta, phi) in grid(10).points() {
            for nu in [0.1, 0.25, 0.4] {
                let h = noisy_omega_entry(ctx, theta, phi, nu)?;
                let expected = (1.0 - 2.0 * nu).powi(2) * ctx.eq7(theta, &at_phi(phi))?;
                worst = worst.max((h[0][0] - expected).abs());
            }
            dephased = dephased.max(noisy_omega_entry(ctx, theta, phi, 0.5)?[0][0].abs());
        }
        Ok((
            worst <= 1e-7 && dephased <= 1e-10,
            format!("max |H_ww - (1-2nu)^2 Q| {worst:.3e} (tol 1e-7); max |H_ww| at nu=1/2 {dephased:.3e} (tol 1e-10)"),
        ))
    })
}

fn noisy_off_diagonal(ctx: &Ctx) -> CheckOutcome {
    outcome("noisy_matrix_diagonal", || {
        let mut worst: f64 = 0.0;
        for (theta, phi) in grid(10).points() {
            for nu in [0.1, 0.25, 0.4] {
                let h = noisy_omega_entry(ctx, theta, phi, nu)?;
                worst = worst.max(h[0][1].abs()).max(h[1][0].abs());
            }
        }
        Ok(within(worst, 1e-8))
    })
}

fn monotone_information_loss(ctx: &Ctx) -> CheckOutcome {
    outcome("omega_information_monotone", || {
        let nus = linspace((0.02, 0.5), 25);
        let mut violations = 0;
        for (theta, phi) in grid(6).points() {
            let mut prev = f64::INFINITY;
            for &nu in &nus {
                let h = noisy_omega_entry(ctx, theta, phi, nu)?[0][0];
                if h > prev + 1e-10 {
                    violations += 1;
                }
                prev = h;
            }
        }
        Ok((
            violations == 0,
            format!("{violations} increases of H_ww along nu"),
        ))
    })
}

fn omega_denominator(ctx: &Ctx) -> (CheckOutcome, Vec<OmegaDenominator>) {
    let mut matches = Vec::new();
    let check = outcome("omega_entry_denominator", || {
        let mut worst = [0.0f64; 2];
        let nus = [0.1, 0.25, 0.4];
        for (theta, phi) in grid(10).points() {
            for nu in nus {
                let noise = NoiseParams::new(nu)?;
                let oracle = noisy_omega_entry(ctx, theta, phi, nu)?[0][0];
                for (k, which) in OmegaDenominator::ALL.into_iter().enumerate() {
                    let scale = match which {
                        OmegaDenominator::CosTheta => ctx.hooks.analytic_scale,
                        OmegaDenominator::SinTheta => 1.0,
                    };
                    let dev = match omega_entry_candidate(which, &half(theta)?, &at_phi(phi), noise)
                    {
                        Ok(v) => (v * scale - oracle).abs(),
                        Err(_) => f64::INFINITY,
                    };
                    worst[k] = worst[k].max(dev);
                }
            }
        }
        for (k, which) in OmegaDenominator::ALL.into_iter().enumerate() {
            if worst[k] <= 1e-7 {
                matches.push(which);
            }
        }
        let detail = OmegaDenominator::ALL
            .iter()
            .zip(worst)
            .map(|(w, d)| format!("[{}] max dev {d:.3e}", w.label()))
            .collect::<Vec<_>>()
            .join("; ");
        let verdict = match matches.as_slice() {
            [one] => format!("matching candidate: {}; {detail}", one.label()),
            _ => format!("{} candidates match; {detail}", matches.len()),
        };
        Ok((matches.len() == 1, verdict))
    });
    (check, matches)
}

fn nu_entry_value(ctx: &Ctx) -> CheckOutcome {
    outcome("nu_entry_at_equator", || {
        let h = noisy_omega_entry(ctx, FRAC_PI_2, 0.0, 0.25)?;
        let dev = (h[1][1] - 8.0 / 3.0).abs();
        Ok((
            dev <= 1e-7,
            format!("H_nn = {:.12} (expected 8/3, tol 1e-7)", h[1][1]),
        ))
    })
}

fn fig3_structure() -> CheckOutcome {
    outcome("nu_channel_structure", || {
        let g = grid(31);
        let mut nu_spread: f64 = 0.0;
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for (theta, phi) in g.points() {
            let values: Vec<f64> = [0.1, 0.25, 0.4]
                .iter()
                .map(|&nu| fig3_value(theta, phi, nu))
                .collect::<Result<_>>()?;
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            nu_spread = nu_spread.max(hi - lo);
            if values[1] > best.0 + 1e-12 {
                best = (values[1], theta, phi);
            }
        }
        let mut zero_dev: f64 = 0.0;
        for theta in g.thetas() {
            for phi in [FRAC_PI_2, 3.0 * FRAC_PI_2] {
                if g.is_excluded(theta, phi) {
                    continue;
                }
                zero_dev = zero_dev.max(fig3_value(theta, phi, 0.25)?.abs());
            }
        }
        let (_, bt, bp) = best;
        let at_max = (bt - FRAC_PI_2).abs() < 1e-12
            && [0.0, PI, TAU].iter().any(|&p| (bp - p).abs() < 1e-12);
        Ok((
            nu_spread <= 1e-8 && zero_dev <= 1e-10 && at_max,
            format!(
                "nu spread {nu_spread:.2e}; max |value| at cos(phi)=0 {zero_dev:.2e}; grid max {:.6} at ({bt:.6}, {bp:.6})",
                best.0
            ),
        ))
    })
}

fn joint_state_oracle() -> CheckOutcome {
    outcome("joint_state_vs_unitary", || {
        let mut worst: f64 = 0.0;
        let mut combos = 0;
        for twice_j in [1, 2, 3, 4] {
            for theta in [0.3, 1.4, 2.6] {
                for phi in [0.5, 2.9, 4.4] {
                    for wt in [0.0, 0.3, 1.0] {
                        let spec = spin(twice_j, theta, 0.8)?;
                        let params = ProtocolParams::new(wt, 1.0, phi)?;
                        let direct = joint_state(&spec, &params);
                        let oracle = joint_state_via_unitary(&spec, &params)?;
                        worst = worst.max(direct.max_abs_diff(&oracle));
                        combos += 1;
                    }
                }
            }
        }
        let (ok, detail) = within(worst, 1e-12);
        Ok((ok, format!("{detail} over {combos} cases")))
    })
}

fn completeness() -> CheckOutcome {
    outcome("postselection_completeness", || {
        let mut worst: f64 = 0.0;
        for twice_j in [1, 2, 3, 4] {
            for theta in linspace((0.1, PI - 0.1), 7) {
                for phi in linspace((0.0, TAU), 9) {
                    let spec = spin(twice_j, theta, 0.0)?;
                    let params = ProtocolParams::new(0.4, 1.0, phi)?;
                    let a = postselect(&spec, &params)?.p_success;
                    let b = postselect(&spec, &params.at_phi(phi + PI))?.p_success;
                    worst = worst.max((a + b - 1.0).abs());
                }
            }
        }
        Ok(within(worst, 1e-12))
    })
}

fn modular_value_pointer_independence() -> CheckOutcome {
    // the modular value takes no pointer input; check it against the ratio
    // read off the postselected pointer's |j,+j⟩ and |j,m<j⟩ amplitudes
    outcome("modular_value_pointer_free", || {
        let mut worst: f64 = 0.0;
        for (twice_j, theta) in [(1, 0.7), (2, 1.9), (4, 2.4)] {
            let spec = spin(twice_j, theta, 0.0)?;
            for phi in [0.3, 2.0, 4.0] {
                let params = ProtocolParams::new(0.25, 1.0, phi)?;
                let mv = modular_value(&params)?;
                let raw = crate::protocol::postselected_unnormalized(&spec, &params);
                let xi = coherent_state(&spec);
                let top = spec.j.top_index();
                // ⟨ψ_f|ψ_i⟩ c_{j,-j} and ⟨ψ_f|ψ_i⟩ (σ_z)_m c_{j,j}
                let lower = raw.amplitude(0) / xi.amplitude(0);
                let upper = raw.amplitude(top) / xi.amplitude(top);
                worst = worst.max((upper / lower - mv).norm());
            }
        }
        Ok(within(worst, 1e-12))
    })
}

fn coherent_normalization() -> CheckOutcome {
    outcome("coherent_state_normalized", || {
        let mut worst: f64 = 0.0;
        for twice_j in 1..=16 {
            for theta in linspace((0.0, PI), 20) {
                for azimuth in linspace((0.0, TAU), 20) {
                    let norm = coherent_state(&spin(twice_j, theta, azimuth)?).norm_sqr();
                    worst = worst.max((norm - 1.0).abs());
                }
            }
        }
        Ok(within(worst, 1e-12))
    })
}

fn overlap_reduction() -> CheckOutcome {
    outcome("kicked_overlap_real", || {
        let mut worst_imag: f64 = 0.0;
        let mut worst_half: f64 = 0.0;
        for theta in linspace((0.0, PI), 25) {
            for twice_j in 1..=8 {
                let o = kicked_overlap(&spin(twice_j, theta, 1.3)?, FRAC_PI_2);
                worst_imag = worst_imag.max(o.im.abs());
                if twice_j == 1 {
                    worst_half = worst_half.max((o.re + theta.cos()).abs());
                }
            }
        }
        Ok(within(worst_imag.max(worst_half), 1e-12))
    })
}

fn azimuth_invariance() -> CheckOutcome {
    outcome("azimuth_invariance", || {
        let mut worst: f64 = 0.0;
        for twice_j in [1, 2, 3] {
            for theta in [0.4, 1.5, 2.7] {
                let mut probs = Vec::new();
                let mut overlaps = Vec::new();
                for azimuth in [0.0, PI / 3.0, 1.7, TAU - 0.1] {
                    let spec = spin(twice_j, theta, azimuth)?;
                    let params = ProtocolParams::new(0.3, 1.0, 2.2)?;
                    probs.push(postselect(&spec, &params)?.p_success);
                    overlaps.push(kicked_overlap(&spec, FRAC_PI_2).norm());
                }
                for v in [&probs, &overlaps] {
                    let spread = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                        - v.iter().cloned().fold(f64::INFINITY, f64::min);
                    worst = worst.max(spread);
                }
            }
        }
        Ok(within(worst, 1e-12))
    })
}

fn step_stability(ctx: &Ctx) -> CheckOutcome {
    outcome("finite_difference_stability", || {
        let coarse = ctx.cfg;
        let fine = DerivativeConfig::central(coarse.step() / 2.0)?;
        let mut worst: f64 = 0.0;
        for (theta, phi) in grid(8).points() {
            let spec = half(theta)?;
            let params = at_phi(phi);
            let a = measured_qfi(&spec, &params, &coarse)?
                .scalar()
                .expect("scalar");
            let b = measured_qfi(&spec, &params, &fine)?
                .scalar()
                .expect("scalar");
            worst = worst.max((a - b).abs());
            let noise = NoiseParams::new(0.3)?;
            let ha = qfi_matrix_noisy(&spec, &params, noise, &coarse)?
                .matrix()
                .expect("matrix");
            let hb = qfi_matrix_noisy(&spec, &params, noise, &fine)?
                .matrix()
                .expect("matrix");
            for r in 0..2 {
                for c in 0..2 {
                    worst = worst.max((ha[r][c] - hb[r][c]).abs());
                }
            }
        }
        let sensor = SensorFamily { t: 1.0 };
        let qa = qfi_pure(&sensor, 0.1, &coarse)?.scalar().expect("scalar");
        let qb = qfi_pure(&sensor, 0.1, &fine)?.scalar().expect("scalar");
        worst = worst.max((qa - qb).abs());
        Ok(within(worst, 1e-7))
    })
}

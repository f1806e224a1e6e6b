//! Text report for `metrology qfi`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;

use metrology_core::fisher::{measured_qfi_halfspin, measured_qfi_spinj};
use metrology_core::sweep::{format_number, RunConfig};
use metrology_core::{
    measured_qfi, modular_value, postselect, qfi_matrix_analytic, qfi_matrix_noisy,
    success_probability_spinj, DerivativeConfig, MetrologyError,
};

use crate::CliError;

const ORTHOGONAL: &str = "undefined (orthogonal postselection)";

pub fn qfi_report(config: &RunConfig) -> Result<String, CliError> {
    let spec = config.pointer()?;
    let params = config.protocol()?;
    let cfg = DerivativeConfig::default();
    // the closed forms are derived for the g = pi/2 coupling only
    let closed_form = (params.g - FRAC_PI_2).abs() < 1e-12;

    let mut out = String::new();
    let w = &mut out;
    line(w, "j", &spec.j.to_string());
    for (name, v) in [
        ("theta", spec.theta),
        ("phi", params.phi_post),
        ("azimuth", spec.azimuth),
        ("omega", params.omega),
        ("t", params.t),
        ("g", params.g),
    ] {
        line(w, name, &format_number(v));
    }

    let p_oracle = postselect(&spec, &params)?.p_success;
    let p_analytic = closed_form.then(|| success_probability_spinj(&spec, &params));
    compare(w, "p_success", p_analytic, p_oracle);

    let modular = match modular_value(&params) {
        Ok(z) => format!(
            "{} {} {}i",
            format_number(z.re),
            if z.im < 0.0 { "-" } else { "+" },
            format_number(z.im.abs())
        ),
        Err(MetrologyError::OrthogonalPostselection) => ORTHOGONAL.to_string(),
        Err(e) => return Err(e.into()),
    };
    line(w, "modular_value", &modular);

    let q_oracle = measured_qfi(&spec, &params, &cfg)?
        .scalar()
        .expect("scalar report");
    let q_analytic = if !closed_form {
        None
    } else if spec.j.is_half() {
        measured_qfi_halfspin(&spec, &params)?.scalar()
    } else {
        measured_qfi_spinj(&spec, &params)?.scalar()
    };
    compare(w, "Q_m", q_analytic, q_oracle);
    line(w, "Q_0", &format_number(params.t * params.t));

    if let Some(noise) = config.noise()? {
        let sld = qfi_matrix_noisy(&spec, &params, noise, &cfg)?
            .matrix()
            .expect("matrix report");
        let analytic = if closed_form {
            qfi_matrix_analytic(&spec, &params, noise)?.matrix()
        } else {
            None
        };
        line(w, "nu", &format_number(noise.nu()));
        for (a, b, name) in [(0, 0, "H_ww"), (0, 1, "H_wn"), (1, 1, "H_nn")] {
            compare(w, name, analytic.map(|m| m[a][b]), sld[a][b]);
        }
    }
    if !closed_form {
        line(
            w,
            "note",
            "closed forms assume g = pi/2; analytic columns omitted",
        );
    }
    if params.omega != 0.0 {
        line(
            w,
            "note",
            "closed forms are leading order in omega; oracle is exact",
        );
    }
    Ok(out)
}

fn line(w: &mut String, name: &str, value: &str) {
    let _ = writeln!(w, "{name:<14} {value}");
}

fn compare(w: &mut String, name: &str, analytic: Option<f64>, oracle: f64) {
    match analytic {
        Some(a) => line(
            w,
            name,
            &format!(
                "analytic {}  oracle {}  |diff| {}",
                format_number(a),
                format_number(oracle),
                format_number((a - oracle).abs())
            ),
        ),
        None => line(w, name, &format!("oracle {}", format_number(oracle))),
    }
}

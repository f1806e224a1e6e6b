//! `key = value` config files and flag overrides.
//!
//! Recognised keys: `j`, `theta`, `phi`, `azimuth`, `omega`, `t`, `g`, `nu`,
//! `grid` (as `NxM`), `margin`, `out`. Angles are radians. Text after `#` is
//! a comment.

use std::path::Path;

use metrology_core::sweep::{RunConfig, SweepGrid};
use metrology_core::SpinQuantumNumber;

use crate::CliError;

/// Every setting the file or flags may supply; `None` leaves the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub j: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub azimuth: Option<f64>,
    pub omega: Option<f64>,
    pub t: Option<f64>,
    pub g: Option<f64>,
    pub nu: Option<f64>,
    pub grid: Option<(usize, usize)>,
    pub margin: Option<f64>,
    pub out: Option<String>,
}

impl Settings {
    /// Values set in `over` win.
    pub fn merged(self, over: Settings) -> Settings {
        Settings {
            j: over.j.or(self.j),
            theta: over.theta.or(self.theta),
            phi: over.phi.or(self.phi),
            azimuth: over.azimuth.or(self.azimuth),
            omega: over.omega.or(self.omega),
            t: over.t.or(self.t),
            g: over.g.or(self.g),
            nu: over.nu.or(self.nu),
            grid: over.grid.or(self.grid),
            margin: over.margin.or(self.margin),
            out: over.out.or(self.out),
        }
    }

    pub fn into_run_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(j) = self.j {
            cfg.j = SpinQuantumNumber::from_j(j).map_err(CliError::config)?;
        }
        cfg.theta = self.theta.unwrap_or(cfg.theta);
        cfg.phi = self.phi.unwrap_or(cfg.phi);
        cfg.azimuth = self.azimuth.unwrap_or(cfg.azimuth);
        cfg.omega = self.omega.unwrap_or(cfg.omega);
        cfg.t = self.t.unwrap_or(cfg.t);
        cfg.g = self.g.unwrap_or(cfg.g);
        cfg.nu = self.nu;
        if let Some((n, m)) = self.grid {
            cfg.grid = SweepGrid {
                theta_points: n,
                phi_points: m,
                ..SweepGrid::default()
            };
        }
        if let Some(margin) = self.margin {
            cfg.grid.exclusion_margin = margin;
        }
        cfg.output_path = self.out;
        cfg.validate().map_err(CliError::config)?;
        if cfg.nu.is_some() && !cfg.j.is_half() {
            return Err(CliError::Config(format!(
                "nu is only supported for the j = 1/2 pointer (got j = {})",
                cfg.j
            )));
        }
        Ok(cfg)
    }
}

pub fn load_file(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))
}

pub fn parse(text: &str) -> Result<Settings, String> {
    let mut s = Settings::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected `key = value`", lineno + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        let at = |e: String| format!("line {}: {e}", lineno + 1);
        let real = || parse_real(key, value).map_err(at);
        match key {
            "j" => s.j = Some(real()?),
            "theta" => s.theta = Some(real()?),
            "phi" => s.phi = Some(real()?),
            "azimuth" => s.azimuth = Some(real()?),
            "omega" => s.omega = Some(real()?),
            "t" => s.t = Some(real()?),
            "g" => s.g = Some(real()?),
            "nu" => s.nu = Some(real()?),
            "margin" => s.margin = Some(real()?),
            "grid" => s.grid = Some(parse_grid(value).map_err(at)?),
            "out" => {
                if value.is_empty() {
                    return Err(at("out needs a path".into()));
                }
                s.out = Some(value.to_string());
            }
            other => return Err(at(format!("unknown key `{other}`"))),
        }
    }
    Ok(s)
}

fn parse_real(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("{key} = `{value}` is not a number"))
}

/// `NxM`, e.g. `30x30`.
pub fn parse_grid(value: &str) -> Result<(usize, usize), String> {
    let err = || format!("grid `{value}` must look like NxM");
    let (n, m) = value.split_once(['x', 'X']).ok_or_else(err)?;
    let n = n.trim().parse().map_err(|_| err())?;
    let m = m.trim().parse().map_err(|_| err())?;
    Ok((n, m))
}

//! Parameter grids, sweep rows and figure data, plus the CSV layout they are
//! written in.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{self, Write};

use crate::error::{MetrologyError, Result};
use crate::fisher::{
    measured_qfi, measured_qfi_halfspin, measured_qfi_spinj, nu_entry_analytic, qfi_matrix_noisy,
    DerivativeConfig,
};
use crate::protocol::{postselect, NoiseParams, ProtocolParams, DEFAULT_COUPLING};
use crate::spin::{PointerSpec, SpinQuantumNumber};

pub const DEFAULT_MARGIN: f64 = 1e-3;
/// `(θ, φ)` where `p(ω=0)` vanishes for every j.
pub const SINGULAR_POINTS: [(f64, f64); 2] = [(0.0, FRAC_PI_2), (PI, 3.0 * FRAC_PI_2)];
/// Noise level the ν-channel figure is emitted at; the plotted quantity does not depend on it.
pub const FIG3_NU: f64 = 0.25;
pub const FIG2_SPINS: [u32; 3] = [2, 3, 4];

/// Evenly spaced inclusive grid over `(θ, φ)`, with the neighbourhoods of
/// [`SINGULAR_POINTS`] removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub theta_points: usize,
    pub phi_points: usize,
    pub theta_range: (f64, f64),
    pub phi_range: (f64, f64),
    pub exclusion_margin: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            theta_points: 30,
            phi_points: 30,
            theta_range: (0.0, PI),
            phi_range: (0.0, TAU),
            exclusion_margin: DEFAULT_MARGIN,
        }
    }
}

impl SweepGrid {
    pub fn new(theta_points: usize, phi_points: usize) -> Result<Self> {
        Self {
            theta_points,
            phi_points,
            ..Self::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |msg: String| Err(MetrologyError::InvalidParams(msg));
        if self.theta_points < 2 || self.phi_points < 2 {
            return bad(format!(
                "grid needs at least 2 points per axis (got {}x{})",
                self.theta_points, self.phi_points
            ));
        }
        let (tl, th) = self.theta_range;
        let (pl, ph) = self.phi_range;
        if !(0.0 <= tl && tl < th && th <= PI) {
            return bad(format!(
                "theta range [{tl}, {th}] must be ordered within [0, pi]"
            ));
        }
        if !(0.0 <= pl && pl < ph && ph <= TAU) {
            return bad(format!(
                "phi range [{pl}, {ph}] must be ordered within [0, 2pi]"
            ));
        }
        if !(self.exclusion_margin >= 0.0 && self.exclusion_margin.is_finite()) {
            return bad(format!(
                "exclusion margin {} must be >= 0",
                self.exclusion_margin
            ));
        }
        Ok(self)
    }

    pub fn thetas(&self) -> Vec<f64> {
        linspace(self.theta_range, self.theta_points)
    }

    pub fn phis(&self) -> Vec<f64> {
        linspace(self.phi_range, self.phi_points)
    }

    pub fn is_excluded(&self, theta: f64, phi: f64) -> bool {
        SINGULAR_POINTS.iter().any(|&(ts, ps)| {
            (theta - ts).abs() < self.exclusion_margin && (phi - ps).abs() < self.exclusion_margin
        }) || SINGULAR_POINTS
            .iter()
            .any(|&(ts, ps)| theta == ts && phi == ps)
    }

    /// Theta-major list of retained grid points.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let phis = self.phis();
        self.thetas()
            .into_iter()
            .flat_map(|theta| phis.iter().map(move |&phi| (theta, phi)))
            .filter(|&(theta, phi)| !self.is_excluded(theta, phi))
            .collect()
    }
}

pub fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Everything a CLI invocation needs. Angles are in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub j: SpinQuantumNumber,
    pub theta: f64,
    pub phi: f64,
    pub azimuth: f64,
    pub t: f64,
    pub g: f64,
    pub omega: f64,
    pub nu: Option<f64>,
    pub grid: SweepGrid,
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            j: SpinQuantumNumber::HALF,
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
            azimuth: 0.0,
            t: 1.0,
            g: DEFAULT_COUPLING,
            omega: 0.0,
            nu: None,
            grid: SweepGrid::default(),
            output_path: None,
        }
    }
}

impl RunConfig {
    /// Checks every field against the domain preconditions.
    pub fn validate(&self) -> Result<()> {
        self.pointer()?;
        self.protocol()?;
        self.noise()?;
        self.grid.validated()?;
        Ok(())
    }

    pub fn pointer(&self) -> Result<PointerSpec> {
        PointerSpec::new(self.j, self.theta, self.azimuth)
    }

    pub fn pointer_at(&self, theta: f64) -> Result<PointerSpec> {
        PointerSpec::new(self.j, theta, self.azimuth)
    }

    pub fn protocol(&self) -> Result<ProtocolParams> {
        ProtocolParams::with_coupling(self.omega, self.t, self.g, self.phi)
    }

    pub fn noise(&self) -> Result<Option<NoiseParams>> {
        self.nu.map(NoiseParams::new).transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub phi: f64,
    pub p_success: f64,
    pub qm_analytic: f64,
    pub qm_oracle: f64,
    /// `(H_ωω, H_νν)` from the SLD route, when noise is configured.
    pub noisy: Option<(f64, f64)>,
}

impl SweepRow {
    pub fn abs_diff(&self) -> f64 {
        (self.qm_analytic - self.qm_oracle).abs()
    }
}

/// Full grid dump in theta-major order.
pub fn sweep_rows(config: &RunConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let noise = config.noise()?;
    let cfg = DerivativeConfig::default();
    let base = config.protocol()?;
    config
        .grid
        .points()
        .into_iter()
        .map(|(theta, phi)| {
            let spec = config.pointer_at(theta)?;
            let params = base.at_phi(phi);
            let p_success = postselect(&spec, &params)?.p_success;
            let qm_analytic = measured_qfi_spinj(&spec, &params)?
                .scalar()
                .unwrap_or(f64::NAN);
            let qm_oracle = measured_qfi(&spec, &params, &cfg)?
                .scalar()
                .unwrap_or(f64::NAN);
            let noisy = match noise {
                Some(n) => {
                    let h = qfi_matrix_noisy(&spec, &params, n, &cfg)?
                        .matrix()
                        .expect("matrix report");
                    Some((h[0][0], h[1][1]))
                }
                None => None,
            };
            Ok(SweepRow {
                theta,
                phi,
                p_success,
                qm_analytic,
                qm_oracle,
                noisy,
            })
        })
        .collect()
}

/// A CSV table: header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn sweep_table(config: &RunConfig) -> Result<Table> {
    let rows = sweep_rows(config)?;
    let noisy = config.nu.is_some();
    let mut header = vec![
        "theta",
        "phi",
        "p_success",
        "qm_analytic",
        "qm_oracle",
        "abs_diff",
    ];
    if noisy {
        header.extend(["h_ww", "h_nn"]);
    }
    let mut table = Table::new("sweep", &header);
    for r in rows {
        let mut row = vec![
            r.theta,
            r.phi,
            r.p_success,
            r.qm_analytic,
            r.qm_oracle,
            r.abs_diff(),
        ];
        if let Some((ww, nn)) = r.noisy {
            row.extend([ww, nn]);
        }
        table.rows.push(row);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Qubit-pointer `Q_m / Q_0` over `(θ, φ)`.
    Fig1,
    /// `Q_m^(j) / Q_m^(1/2)` against θ for j = 1, 3/2, 2 at φ = 3π/2 (and φ = π/2).
    Fig2,
    /// `(ν − ν²)·H_νν` over `(θ, φ)`.
    Fig3,
}

impl std::str::FromStr for Figure {
    type Err = MetrologyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            other => Err(MetrologyError::InvalidParams(format!(
                "unknown figure '{other}' (expected fig1, fig2 or fig3)"
            ))),
        }
    }
}

fn qubit(theta: f64) -> Result<PointerSpec> {
    PointerSpec::half(theta, 0.0)
}

pub fn fig1_table(config: &RunConfig) -> Result<Table> {
    let base = config.protocol()?;
    let mut table = Table::new("fig1", &["theta", "phi", "ratio"]);
    for (theta, phi) in config.grid.validated()?.points() {
        let q = measured_qfi_halfspin(&qubit(theta)?, &base.at_phi(phi))?
            .scalar()
            .expect("scalar");
        table.rows.push(vec![theta, phi, q / (base.t * base.t)]);
    }
    Ok(table)
}

/// Main panel at φ = 3π/2 and the φ = π/2 inset. θ runs over the grid's
/// theta range pulled in by the exclusion margin at both ends.
pub fn fig2_tables(config: &RunConfig) -> Result<(Table, Table)> {
    let grid = config.grid.validated()?;
    let m = grid.exclusion_margin;
    let (lo, hi) = grid.theta_range;
    let thetas = linspace((lo.max(m), hi.min(PI - m)), grid.theta_points);
    let base = config.protocol()?;
    let header = ["theta", "ratio_j1", "ratio_j1.5", "ratio_j2"];
    let panel = |name: &str, phi: f64| -> Result<Table> {
        let mut table = Table::new(name, &header);
        let params = base.at_phi(phi);
        for &theta in &thetas {
            let half = measured_qfi_halfspin(&qubit(theta)?, &params)?
                .scalar()
                .expect("scalar");
            let mut row = vec![theta];
            for twice_j in FIG2_SPINS {
                let spec = PointerSpec::new(SpinQuantumNumber::from_twice(twice_j)?, theta, 0.0)?;
                let q = measured_qfi_spinj(&spec, &params)?
                    .scalar()
                    .expect("scalar");
                row.push(q / half);
            }
            table.rows.push(row);
        }
        Ok(table)
    };
    Ok((
        panel("fig2", 3.0 * FRAC_PI_2)?,
        panel("fig2_inset", FRAC_PI_2)?,
    ))
}

pub fn fig3_value(theta: f64, phi: f64, nu: f64) -> Result<f64> {
    let params = ProtocolParams::new(0.0, 1.0, phi)?;
    let noise = NoiseParams::new(nu)?;
    Ok((nu - nu * nu) * nu_entry_analytic(&qubit(theta)?, &params, noise)?)
}

pub fn fig3_table(config: &RunConfig) -> Result<Table> {
    let mut table = Table::new("fig3", &["theta", "phi", "value"]);
    for (theta, phi) in config.grid.validated()?.points() {
        table
            .rows
            .push(vec![theta, phi, fig3_value(theta, phi, FIG3_NU)?]);
    }
    Ok(table)
}

pub fn figure_tables(which: Figure, config: &RunConfig) -> Result<Vec<Table>> {
    Ok(match which {
        Figure::Fig1 => vec![fig1_table(config)?],
        Figure::Fig2 => {
            let (main, inset) = fig2_tables(config)?;
            vec![main, inset]
        }
        Figure::Fig3 => vec![fig3_table(config)?],
    })
}

//! Spin-j coherent pointer states and their kicked variants.
//!
//! Basis ordering is fixed crate-wide: index `k = 0..=2j` holds `|j, m⟩` with
//! `m = -j + k`, so the `|j, +j⟩` amplitude is always the last entry.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{MetrologyError, Result};
use crate::linalg::{inner_product, ComplexAmplitude, StateVector};

pub const MAX_TWICE_J: u32 = 64;

/// Spin quantum number stored as the positive integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinQuantumNumber {
    twice_j: u32,
}

impl SpinQuantumNumber {
    pub const HALF: Self = Self { twice_j: 1 };

    pub fn from_twice(twice_j: u32) -> Result<Self> {
        if twice_j == 0 || twice_j > MAX_TWICE_J {
            return Err(MetrologyError::InvalidSpin { twice_j });
        }
        Ok(Self { twice_j })
    }

    /// Accepts `j` as a real number; it must be a positive half-integer.
    pub fn from_j(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 || twice.round() < 1.0 {
            return Err(MetrologyError::InvalidParams(format!(
                "j = {j} is not a positive half-integer"
            )));
        }
        Self::from_twice(twice.round() as u32)
    }

    pub fn twice_j(self) -> u32 {
        self.twice_j
    }

    pub fn j(self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    /// Pointer dimension `2j + 1`.
    pub fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn is_half(self) -> bool {
        self.twice_j == 1
    }

    /// Basis index of `|j, m⟩` given `2m`.
    pub fn index_of(self, twice_m: i32) -> Result<usize> {
        let tj = self.twice_j as i32;
        if twice_m < -tj || twice_m > tj || (twice_m + tj) % 2 != 0 {
            return Err(MetrologyError::MagneticOutOfRange {
                twice_j: self.twice_j,
                twice_m,
            });
        }
        Ok(((twice_m + tj) / 2) as usize)
    }

    /// Index of the `|j, +j⟩` amplitude.
    pub fn top_index(self) -> usize {
        self.twice_j as usize
    }
}

impl std::fmt::Display for SpinQuantumNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice_j.is_multiple_of(2) {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

/// Coherent pointer: spin `j` pointing along polar angle `theta` and azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerSpec {
    pub j: SpinQuantumNumber,
    pub theta: f64,
    pub azimuth: f64,
}

impl PointerSpec {
    pub fn new(j: SpinQuantumNumber, theta: f64, azimuth: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, PI)?;
        check_range("azimuth", azimuth, 0.0, TAU)?;
        Ok(Self { j, theta, azimuth })
    }

    pub fn half(theta: f64, azimuth: f64) -> Result<Self> {
        Self::new(SpinQuantumNumber::HALF, theta, azimuth)
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&value) {
        return Err(MetrologyError::AngleOutOfRange {
            name,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Exact `C(n, k)` for `n <= 64`.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    // each partial product is itself a binomial coefficient, so the division is exact
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `c_jm = √C(2j, j+m) · cos(θ/2)^(j+m) · (sin(θ/2) e^{-i·azimuth})^(j-m)`, with `m` given as `2m`.
pub fn coefficient_cjm(spec: &PointerSpec, twice_m: i32) -> Result<ComplexAmplitude> {
    let k = spec.j.index_of(twice_m)? as u32;
    let tj = spec.j.twice_j();
    // k = j + m, tj - k = j - m
    Ok(coefficient_at(tj, k, spec.theta, spec.azimuth))
}

fn coefficient_at(twice_j: u32, k: u32, theta: f64, azimuth: f64) -> ComplexAmplitude {
    let (s, co) = (theta / 2.0).sin_cos();
    let down = twice_j - k;
    let magnitude = (binomial(twice_j, k) as f64).sqrt() * co.powi(k as i32) * s.powi(down as i32);
    Complex64::from_polar(magnitude, -azimuth * down as f64)
}

/// `|ξ⟩`, amplitudes ordered from `m = -j` to `m = +j`.
pub fn coherent_state(spec: &PointerSpec) -> StateVector {
    let tj = spec.j.twice_j();
    let amps = (0..=tj)
        .map(|k| coefficient_at(tj, k, spec.theta, spec.azimuth))
        .collect();
    StateVector::new(amps).expect("coherent state amplitudes are finite")
}

/// `|ξ±⟩ = exp(∓ i g |j,+j⟩⟨j,+j|) |ξ⟩`: the top amplitude picks up `e^{∓ig}`.
pub fn kicked_states(spec: &PointerSpec, g: f64) -> (StateVector, StateVector) {
    let xi = coherent_state(spec);
    let top = spec.j.top_index();
    let kick = |sign: f64| {
        let mut amps = xi.amplitudes().to_vec();
        amps[top] *= Complex64::from_polar(1.0, -sign * g);
        StateVector::new(amps).expect("finite")
    };
    (kick(1.0), kick(-1.0))
}

/// `⟨ξ+|ξ−⟩`; real for `g = π/2`, and `−cos θ` for `j = 1/2`.
pub fn kicked_overlap(spec: &PointerSpec, g: f64) -> ComplexAmplitude {
    let (plus, minus) = kicked_states(spec, g);
    inner_product(&plus, &minus).expect("kicked states share a dimension")
}

/// Closed form of the `g = π/2` overlap: `Σ_{m<j} |c_jm|² − cos(θ/2)^{4j}`.
pub fn kicked_overlap_closed_form(spec: &PointerSpec) -> f64 {
    let tj = spec.j.twice_j();
    let lower: f64 = (0..tj)
        .map(|k| coefficient_at(tj, k, spec.theta, spec.azimuth).norm_sqr())
        .sum();
    lower - (spec.theta / 2.0).cos().powi(2 * tj as i32)
}

//! Parameter types shared by the rest of the crate.
//!
//! Every constructor validates its input, so a value of any of these types
//! always satisfies its invariants. Frequencies are dimensionless (units of
//! the cavity frequency ω_c).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduce a phase to (−π/2, π/2]. The phase factor χ_c only depends on 2φ,
/// so this is the canonical representative.
pub fn reduce_phase(phi: f64) -> f64 {
    let mut r = phi - PI * (phi / PI).round();
    if r <= -FRAC_PI_2 {
        r += PI;
    }
    if r > FRAC_PI_2 {
        r -= PI;
    }
    r
}

fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveFrequency { what, value })
    }
}

/// One cavity quasinormal mode, reduced to the four scalars that enter the
/// decay rate: resonance ω_μ, linewidth κ_μ, dipole-gauge coupling |g̃_d| and
/// the phase φ of the mode field at the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QnmMode {
    omega: f64,
    kappa: f64,
    g: f64,
    phi: f64,
}

impl QnmMode {
    pub fn new(omega: f64, kappa: f64, g: f64, phi: f64) -> Result<Self> {
        let omega = positive("mode frequency", omega)?;
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::NonPositiveLinewidth(kappa));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::NegativeCoupling(g));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("phase must be finite, got {phi}")));
        }
        let q = omega / kappa;
        if q <= 0.5 {
            return Err(Error::OverdampedMode { q });
        }
        Ok(Self { omega, kappa, g, phi: reduce_phase(phi) })
    }

    /// Build from a quality factor instead of a linewidth.
    pub fn with_quality(omega: f64, q: f64, g: f64, phi: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::NonPositiveLinewidth(omega / q));
        }
        Self::new(omega, omega / q, g, phi)
    }

    /// Build a mode whose phase gives the requested product 2Q·tan(2φ).
    pub fn with_tan_product(omega: f64, q: f64, g: f64, product: f64) -> Result<Self> {
        let phi = 0.5 * (product / (2.0 * q)).atan();
        Self::with_quality(omega, q, g, phi)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Phase reduced to (−π/2, π/2].
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn q(&self) -> f64 {
        self.omega / self.kappa
    }

    /// 2Q·tan(2φ), the dimensionless slope correction of the normalized rate.
    pub fn tan_product(&self) -> f64 {
        2.0 * self.q() * (2.0 * self.phi).tan()
    }

    /// Complex resonance ω − iκ/2 as (re, im).
    pub fn complex_frequency(&self) -> (f64, f64) {
        (self.omega, -0.5 * self.kappa)
    }
}

/// Two-level emitter. Stores the transition frequency ω₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TlsParams {
    omega_0: f64,
}

impl TlsParams {
    pub fn new(omega_0: f64) -> Result<Self> {
        Ok(Self { omega_0: positive("TLS frequency", omega_0)? })
    }

    /// From the detuning Δ = ω₀ − ω_c.
    pub fn from_detuning(delta: f64, omega_c: f64) -> Result<Self> {
        Self::new(omega_c + delta)
    }

    pub fn omega_0(&self) -> f64 {
        self.omega_0
    }

    pub fn delta(&self, omega_c: f64) -> f64 {
        self.omega_0 - omega_c
    }
}

/// Light-matter gauge of the system Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    Dipole,
    Coulomb,
}

impl Gauge {
    /// Coupling entering the system Hamiltonian: g_d in the dipole gauge,
    /// g_c = (ω₀/ω_c)·g_d in the Coulomb gauge.
    pub fn coupling(self, g_d: f64, omega_0: f64, omega_c: f64) -> f64 {
        match self {
            Gauge::Dipole => g_d,
            Gauge::Coulomb => g_d * omega_0 / omega_c,
        }
    }

    /// Power-law exponent n of Λ(ω) ∝ (ω/ω_c)^n that reproduces the QNM rate
    /// for a real mode field in this gauge.
    pub fn matched_exponent(self) -> f64 {
        match self {
            Gauge::Dipole => 0.5,
            Gauge::Coulomb => -0.5,
        }
    }

    pub fn is_matched(self, exponent_n: f64) -> bool {
        (exponent_n - self.matched_exponent()).abs() < 1e-12
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gauge::Dipole => "dipole",
            Gauge::Coulomb => "coulomb",
        })
    }
}

impl FromStr for Gauge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dipole" | "d" => Ok(Gauge::Dipole),
            "coulomb" | "c" => Ok(Gauge::Coulomb),
            other => Err(Error::InvalidParameter(format!("unknown gauge `{other}`"))),
        }
    }
}

/// Uniform grid of `count` points on [min, max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    min: f64,
    max: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::BadGrid(format!("need at least 2 points, got {count}")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::BadGrid(format!("need finite min < max, got [{min}, {max}]")));
        }
        Ok(Self { min, max, count })
    }

    /// Same as [`FrequencyGrid::new`] but also requires min > 0.
    pub fn positive(min: f64, max: f64, count: usize) -> Result<Self> {
        let grid = Self::new(min, max, count)?;
        if min <= 0.0 {
            return Err(Error::BadGrid(format!("frequencies must be positive, got min = {min}")));
        }
        Ok(grid)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 })
            .collect()
    }
}

/// Numerical settings for master-equation runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub fock_cutoff: usize,
    pub pump_rate: f64,
    pub tolerance: f64,
    pub t_max: f64,
    pub grid: FrequencyGrid,
}

impl SimConfig {
    pub fn new(
        fock_cutoff: usize,
        pump_rate: f64,
        tolerance: f64,
        t_max: f64,
        grid: FrequencyGrid,
    ) -> Result<Self> {
        if fock_cutoff < 1 {
            return Err(Error::InvalidParameter("fock_cutoff must be >= 1".into()));
        }
        if !(pump_rate.is_finite() && pump_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("pump_rate must be >= 0, got {pump_rate}")));
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tolerance}")));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be > 0, got {t_max}")));
        }
        Ok(Self { fock_cutoff, pump_rate, tolerance, t_max, grid })
    }
}

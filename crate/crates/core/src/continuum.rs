//! Decay rates from the quasinormal-mode expansion of the transverse Green's
//! function.
//!
//! With G⊥(r₀, r₀, ω) = Σ_μ A_μ(ω) f̃_μ f̃_μ and A_μ(ω) = ω / [2(ω̃_μ − ω)], the
//! emitter's decay rate (2/ε₀)·d·Im G⊥·d becomes a sum over modes. Each mode
//! enters only through its complex frequency, its coupling |g̃_μ| and the
//! phase φ_μ of the field at the emitter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FrequencyGrid, QnmMode};
use crate::spectral_density::chi_c;
use crate::table::Table;

fn check_frequency(omega0: f64) -> Result<()> {
    if omega0.is_finite() && omega0 > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveFrequency { what: "emitter frequency", value: omega0 })
    }
}

/// Closed-form single-mode rate,
/// γ(ω₀) = (4g²/κ)·(ω₀/ω_c)·(κ²/4)/(κ²/4 + (ω₀ − ω_c)²)·χ_c(φ₀, ω₀).
///
/// Not clamped: far from resonance χ_c (and hence γ) can be negative.
pub fn single_mode_rate(mode: &QnmMode, omega0: f64) -> Result<f64> {
    check_frequency(omega0)?;
    let (wc, k, g) = (mode.omega(), mode.kappa(), mode.g());
    let hw2 = 0.25 * k * k;
    let detuning = omega0 - wc;
    let lorentz = hw2 / (hw2 + detuning * detuning);
    Ok(4.0 * g * g / k * (omega0 / wc) * lorentz * chi_c(mode.phi(), mode.q(), omega0, wc))
}

/// Contribution of one mode to (2/ε₀)·d·Im G⊥·d, written directly from the
/// expansion coefficient rather than through χ_c.
fn mode_contribution(mode: &QnmMode, omega0: f64) -> f64 {
    let (wm, k, g) = (mode.omega(), mode.kappa(), mode.g());
    let x = wm - omega0;
    let (s, c) = (2.0 * mode.phi()).sin_cos();
    2.0 * g * g * (omega0 / wm) * (s * x + 0.5 * k * c) / (x * x + 0.25 * k * k)
}

/// Lorentzian envelope L(ω₀) = γ_ref·(κ²/4)/(κ²/4 + (ω₀ − ω_c)²).
pub fn lorentzian(mode: &QnmMode, reference_rate: f64, omega0: f64) -> f64 {
    let hw2 = 0.25 * mode.kappa() * mode.kappa();
    let d = omega0 - mode.omega();
    reference_rate * hw2 / (hw2 + d * d)
}

/// L(ω₀) with γ(ω_c) taken from [`single_mode_rate`].
pub fn lorentzian_envelope(mode: &QnmMode, omega0: f64) -> Result<f64> {
    let gamma_c = single_mode_rate(mode, mode.omega())?;
    Ok(lorentzian(mode, gamma_c, omega0))
}

/// First-order factor 1 + δ(1 − 2Q_c·tan 2φ₀) of γ(ω₀)/L(ω₀), with
/// δ = ω₀/ω_c − 1. Only meaningful for small |δ|.
pub fn linearized_ratio(mode: &QnmMode, omega0: f64) -> Result<f64> {
    let two_phi = 2.0 * mode.phi();
    if two_phi.cos().abs() < 1e-12 {
        return Err(Error::PhaseSingular { phi: mode.phi() });
    }
    let delta = omega0 / mode.omega() - 1.0;
    Ok(1.0 + delta * (1.0 - mode.tan_product()))
}

/// Ordered list of modes; mode 0 is the cavity mode used for normalization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QnmExpansion {
    modes: Vec<QnmMode>,
}

impl QnmExpansion {
    pub fn new(modes: Vec<QnmMode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("expansion needs at least one mode".into()));
        }
        Ok(Self { modes })
    }

    pub fn single(mode: QnmMode) -> Self {
        Self { modes: vec![mode] }
    }

    pub fn modes(&self) -> &[QnmMode] {
        &self.modes
    }

    pub fn cavity(&self) -> &QnmMode {
        &self.modes[0]
    }

    /// Multi-mode rate Σ_μ 2g_μ²(ω₀/ω_μ)[sin(2φ_μ)(ω_μ − ω₀) + cos(2φ_μ)κ_μ/2]
    /// / [(ω_μ − ω₀)² + κ_μ²/4].
    pub fn rate(&self, omega0: f64) -> Result<f64> {
        check_frequency(omega0)?;
        Ok(self.modes.iter().map(|m| mode_contribution(m, omega0)).sum())
    }

    /// Rate normalized by the Lorentzian of the cavity mode, scaled so that
    /// the ratio is 1 at ω₀ = ω_c.
    pub fn normalized_rate(&self, omega0: f64) -> Result<f64> {
        let gamma_c = self.rate(self.cavity().omega())?;
        Ok(self.rate(omega0)? / lorentzian(self.cavity(), gamma_c, omega0))
    }

    /// Central-difference slope of γ/L with respect to δ at δ = 0.
    pub fn normalized_slope(&self, h: f64) -> Result<f64> {
        let wc = self.cavity().omega();
        let up = self.normalized_rate(wc * (1.0 + h))?;
        let down = self.normalized_rate(wc * (1.0 - h))?;
        Ok((up - down) / (2.0 * h))
    }
}

/// Convenience wrapper over [`QnmExpansion::rate`].
pub fn multi_mode_rate(expansion: &QnmExpansion, omega0: f64) -> Result<f64> {
    expansion.rate(omega0)
}

/// Summary of a rate sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RateSweep {
    pub table: Table,
    pub gamma_at_resonance: f64,
    pub slope_at_resonance: f64,
    pub expected_slope: f64,
    pub negative_points: usize,
}

/// Evaluate the multi-mode rate on a grid of emitter frequencies.
///
/// Columns: ω₀, γ, γ/L, γ(ω₀)/γ(ω_c), the cavity-mode χ_c, a flag that is 1
/// where the truncated expansion gives a negative rate, the local slope
/// d(γ/L)/dω₀ (central difference) and the linearized factor.
pub fn rate_sweep(expansion: &QnmExpansion, grid: &FrequencyGrid) -> Result<RateSweep> {
    let cavity = *expansion.cavity();
    let gamma_c = expansion.rate(cavity.omega())?;
    let mut table = Table::new([
        "omega0",
        "gamma",
        "gamma_over_L",
        "gamma_over_gamma_res",
        "chi_c",
        "negative_rate_flag",
        "slope_gamma_over_L",
        "linearized",
    ]);
    table.comment("decay rate from the quasinormal-mode expansion; frequencies in units of omega_c");
    table.comment("gamma_over_gamma_res = gamma(omega0)/gamma(omega_c) (free-space normalization not available)");
    for (i, m) in expansion.modes().iter().enumerate() {
        table.comment(format!(
            "mode {i}: omega = {}, kappa = {}, g = {}, phi = {}, Q = {}, 2Q tan(2phi) = {}",
            m.omega(),
            m.kappa(),
            m.g(),
            m.phi(),
            m.q(),
            m.tan_product()
        ));
    }
    table.comment(format!("grid = [{}, {}] x {}", grid.min(), grid.max(), grid.count()));

    let mut negative_points = 0;
    for w in grid.points() {
        let gamma = expansion.rate(w)?;
        if gamma < 0.0 {
            negative_points += 1;
        }
        let linear = linearized_ratio(&cavity, w).unwrap_or(f64::NAN);
        let h = 1e-4 * cavity.omega();
        let slope = (expansion.normalized_rate(w + h)? - expansion.normalized_rate(w - h)?) / (2.0 * h);
        table.push_row(vec![
            w,
            gamma,
            gamma / lorentzian(&cavity, gamma_c, w),
            gamma / gamma_c,
            chi_c(cavity.phi(), cavity.q(), w, cavity.omega()),
            if gamma < 0.0 { 1.0 } else { 0.0 },
            slope * cavity.omega(),
            linear,
        ])?;
    }
    if negative_points > 0 {
        log::warn!("{negative_points} grid points have a negative single-expansion rate");
    }
    Ok(RateSweep {
        table,
        gamma_at_resonance: gamma_c,
        slope_at_resonance: expansion.normalized_slope(1e-4)?,
        expected_slope: 1.0 - cavity.tan_product(),
        negative_points,
    })
}

//! The cavity-reservoir coupling function Λ(ω) and spectral density
//! J(ω) = 2π·Λ(ω)².
//!
//! Two families are supported: the power law Λ(ω) = √(κ_c/2π)·(ω/ω_c)^n, and
//! the same power law multiplied by √χ_c(φ₀, ω), which folds the mode phase at
//! the emitter into the reservoir. With n = −1/2 the latter is the
//! position-dependent sub-Ohmic form.
//!
//! Internally J is evaluated first and Λ derived from it, so J(ω_c) = κ_c
//! holds exactly for every power law.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::FrequencyGrid;
use crate::table::Table;

/// Phase factor χ_c(φ₀, ω) = cos(2φ₀) − 2Q_c·sin(2φ₀)·(ω/ω_c − 1).
///
/// Affine in ω and may be negative away from resonance.
pub fn chi_c(phi0: f64, q_c: f64, omega: f64, omega_c: f64) -> f64 {
    let two_phi = 2.0 * phi0;
    two_phi.cos() - 2.0 * q_c * two_phi.sin() * (omega / omega_c - 1.0)
}

/// Frequency above (φ₀ > 0) or below (φ₀ < 0) which χ_c turns negative.
/// `None` for sin(2φ₀) = 0.
pub fn chi_root(phi0: f64, q_c: f64, omega_c: f64) -> Option<f64> {
    let two_phi = 2.0 * phi0;
    let s = two_phi.sin();
    if s == 0.0 {
        return None;
    }
    Some(omega_c * (1.0 + two_phi.cos() / (2.0 * q_c * s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NegativeChiPolicy {
    #[default]
    ClampToZero,
    Error,
}

impl std::str::FromStr for NegativeChiPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "clamp" | "clamp_to_zero" | "clamptozero" => Ok(Self::ClampToZero),
            "error" => Ok(Self::Error),
            other => Err(Error::InvalidParameter(format!("unknown negative-chi policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCorrection {
    pub phi0: f64,
    pub q_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemBathCoupling {
    kappa_c: f64,
    omega_c: f64,
    exponent_n: f64,
    phase_correction: Option<PhaseCorrection>,
    negative_chi_policy: NegativeChiPolicy,
}

impl SystemBathCoupling {
    pub fn power_law(kappa_c: f64, omega_c: f64, exponent_n: f64) -> Result<Self> {
        if !(kappa_c.is_finite() && kappa_c > 0.0) {
            return Err(Error::NonPositiveLinewidth(kappa_c));
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::NonPositiveFrequency { what: "cavity frequency", value: omega_c });
        }
        if !exponent_n.is_finite() {
            return Err(Error::InvalidParameter(format!("exponent must be finite, got {exponent_n}")));
        }
        Ok(Self {
            kappa_c,
            omega_c,
            exponent_n,
            phase_correction: None,
            negative_chi_policy: NegativeChiPolicy::default(),
        })
    }

    /// Λ_R(ω) = √((κ_c/2π)(ω_c/ω)).
    pub fn sub_ohmic(kappa_c: f64, omega_c: f64) -> Result<Self> {
        Self::power_law(kappa_c, omega_c, -0.5)
    }

    /// Λ_R(ω)·√χ_c(φ₀, ω).
    pub fn phase_corrected(kappa_c: f64, omega_c: f64, phi0: f64, q_c: f64) -> Result<Self> {
        Self::sub_ohmic(kappa_c, omega_c)?.with_phase_correction(phi0, q_c)
    }

    /// Multiply the current power law by √χ_c(φ₀, ω).
    pub fn with_phase_correction(mut self, phi0: f64, q_c: f64) -> Result<Self> {
        if !(q_c.is_finite() && q_c > 0.0) {
            return Err(Error::InvalidParameter(format!("q_c must be positive, got {q_c}")));
        }
        if !phi0.is_finite() {
            return Err(Error::InvalidParameter(format!("phi0 must be finite, got {phi0}")));
        }
        self.phase_correction = Some(PhaseCorrection { phi0, q_c });
        Ok(self)
    }

    pub fn with_policy(mut self, policy: NegativeChiPolicy) -> Self {
        self.negative_chi_policy = policy;
        self
    }

    pub fn kappa_c(&self) -> f64 {
        self.kappa_c
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn exponent_n(&self) -> f64 {
        self.exponent_n
    }

    pub fn phase_correction(&self) -> Option<PhaseCorrection> {
        self.phase_correction
    }

    pub fn negative_chi_policy(&self) -> NegativeChiPolicy {
        self.negative_chi_policy
    }

    /// χ_c at ω, or 1 when no phase correction is attached.
    pub fn chi(&self, omega: f64) -> f64 {
        match self.phase_correction {
            Some(pc) => chi_c(pc.phi0, pc.q_c, omega, self.omega_c),
            None => 1.0,
        }
    }

    /// True when J(ω) would be clamped to zero by the negative-χ policy.
    pub fn is_clamped(&self, omega: f64) -> bool {
        self.chi(omega) < 0.0
    }

    /// J(ω) = κ_c·(ω/ω_c)^{2n}·χ_c(φ₀, ω).
    pub fn spectral_density(&self, omega: f64) -> Result<f64> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::NonPositiveFrequency { what: "bath frequency", value: omega });
        }
        let power = self.kappa_c * (omega / self.omega_c).powf(2.0 * self.exponent_n);
        let chi = self.chi(omega);
        if chi >= 0.0 {
            return Ok(power * chi);
        }
        match self.negative_chi_policy {
            NegativeChiPolicy::ClampToZero => Ok(0.0),
            NegativeChiPolicy::Error => Err(Error::NegativeSpectralDensity { omega, chi }),
        }
    }

    /// Λ(ω) ≥ 0.
    pub fn lambda(&self, omega: f64) -> Result<f64> {
        Ok((self.spectral_density(omega)? / (2.0 * PI)).sqrt())
    }

    /// Λ(ω)², evaluated without the square root round trip.
    pub fn lambda_squared(&self, omega: f64) -> Result<f64> {
        Ok(self.spectral_density(omega)? / (2.0 * PI))
    }
}

/// J(ω)/κ_c on `grid` (in units of ω_c) for the phase-corrected sub-Ohmic
/// coupling, one column per φ₀.
pub fn spectral_density_curves(q_c: f64, phis: &[f64], grid: &FrequencyGrid) -> Result<Table> {
    let omega_c = 1.0;
    let kappa_c = omega_c / q_c;
    let couplings = phis
        .iter()
        .map(|&phi| SystemBathCoupling::phase_corrected(kappa_c, omega_c, phi, q_c))
        .collect::<Result<Vec<_>>>()?;

    let mut columns = vec!["omega_over_omegac".to_string()];
    columns.extend(phis.iter().map(|phi| format!("J_over_kappa_phi0_{phi}")));
    let mut table = Table::new(columns);
    table.comment("spectral density J(w)/kappa_c = (w_c/w) * max(chi_c(phi0, w), 0)");
    table.comment(format!("q_c = {q_c}"));
    table.comment(format!("phi0 = {phis:?}"));
    table.comment(format!("grid = [{}, {}] x {}", grid.min(), grid.max(), grid.count()));

    for x in grid.points() {
        if x <= 0.0 {
            return Err(Error::NonPositiveFrequency { what: "grid frequency", value: x });
        }
        let mut row = vec![x];
        for c in &couplings {
            row.push(c.spectral_density(x * omega_c)? / kappa_c);
        }
        table.push_row(row)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KAPPA: f64 = 0.05;

    #[test]
    fn chi_for_real_mode_is_one() {
        assert_eq!(chi_c(0.0, 20.0, 1.3, 1.0), 1.0);
    }

    #[test]
    fn chi_at_resonance() {
        // cos(0.06)
        let expected = 0.998_200_539_935_204_4;
        assert!((chi_c(0.03, 20.0, 1.0, 1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn chi_linear_slope_from_tan_product() {
        // 2Q tan(2φ) = 0.72 ⇒ χ/cos(2φ) = 1 − 0.72 δ exactly (χ is affine).
        let q = 20.0;
        let phi = 0.5 * (0.72f64 / (2.0 * q)).atan();
        for delta in [1e-4, 1e-3, -2e-3] {
            let ratio = chi_c(phi, q, 1.0 + delta, 1.0) / (2.0 * phi).cos();
            assert!((ratio - (1.0 - 0.72 * delta)).abs() < 1e-13);
        }
    }

    #[test]
    fn power_law_values() {
        let base = (KAPPA / (2.0 * PI)).sqrt();
        for n in [-1.0, -0.5, 0.0, 0.5, 2.0] {
            let c = SystemBathCoupling::power_law(KAPPA, 1.0, n).unwrap();
            assert_eq!(c.lambda(1.0).unwrap(), base);
            assert_eq!(c.spectral_density(1.0).unwrap(), KAPPA);
        }
        let c = SystemBathCoupling::sub_ohmic(KAPPA, 1.0).unwrap();
        assert!((c.lambda(4.0).unwrap() - 0.5 * base).abs() < 1e-16);
        assert!((c.spectral_density(2.0).unwrap() - KAPPA / 2.0).abs() < 1e-17);
        let flat = SystemBathCoupling::power_law(KAPPA, 1.0, 0.0).unwrap();
        for w in [0.1, 0.7, 1.0, 3.0] {
            assert_eq!(flat.spectral_density(w).unwrap(), KAPPA);
        }
    }

    #[test]
    fn non_positive_frequency_rejected() {
        let c = SystemBathCoupling::sub_ohmic(KAPPA, 1.0).unwrap();
        assert!(matches!(c.lambda(0.0), Err(Error::NonPositiveFrequency { .. })));
        assert!(matches!(c.lambda(-1.0), Err(Error::NonPositiveFrequency { .. })));
    }

    #[test]
    fn phase_corrected_clamps_beyond_root() {
        let (phi, q) = (0.03, 20.0);
        let root = chi_root(phi, q, 1.0).unwrap();
        // ω_c(1 + cot(2φ)/(2Q))
        let expected = 1.0 + 1.0 / ((2.0 * phi).tan() * 2.0 * q);
        assert!((root - expected).abs() < 1e-14);
        assert!(chi_c(phi, q, root, 1.0).abs() < 1e-13);

        let c = SystemBathCoupling::phase_corrected(KAPPA, 1.0, phi, q).unwrap();
        assert!(c.lambda(root * 0.99).unwrap() > 0.0);
        assert_eq!(c.lambda(root * 1.01).unwrap(), 0.0);
        assert!(c.is_clamped(root * 1.01));

        let strict = c.with_policy(NegativeChiPolicy::Error);
        assert!(matches!(
            strict.lambda(root * 1.01),
            Err(Error::NegativeSpectralDensity { .. })
        ));
    }

    #[test]
    fn phase_corrected_normalization_is_cos_two_phi() {
        let c = SystemBathCoupling::phase_corrected(KAPPA, 1.0, 0.03, 20.0).unwrap();
        let j = c.spectral_density(1.0).unwrap();
        assert!((j - KAPPA * 0.06f64.cos()).abs() < 1e-17);
    }

    #[test]
    fn curves_table() {
        let grid = FrequencyGrid::positive(0.5, 1.5, 101).unwrap();
        let t = spectral_density_curves(20.0, &[0.0, 0.01, 0.03], &grid).unwrap();
        assert_eq!(t.columns.len(), 4);
        let xs = t.column("omega_over_omegac").unwrap();
        let flat = t.column("J_over_kappa_phi0_0").unwrap();
        for (x, j) in xs.iter().zip(&flat) {
            assert!((j - 1.0 / x).abs() <= 2.0 * f64::EPSILON * j);
        }
        let root = chi_root(0.03, 20.0, 1.0).unwrap();
        let col = t.column("J_over_kappa_phi0_0.03").unwrap();
        for (x, j) in xs.iter().zip(&col) {
            if *x > root {
                assert_eq!(*j, 0.0);
            }
        }
        let at_res = xs.iter().position(|x| (*x - 1.0).abs() < 1e-12).unwrap();
        assert!((col[at_res] - 0.06f64.cos()).abs() < 1e-14);
        assert!(t.comments.iter().any(|c| c.contains("q_c = 20")));
    }

    proptest! {
        #[test]
        fn reduction_to_sub_ohmic(omega in 0.05f64..5.0, q in 1.0f64..500.0) {
            let corrected = SystemBathCoupling::phase_corrected(KAPPA, 1.0, 0.0, q).unwrap();
            let plain = SystemBathCoupling::sub_ohmic(KAPPA, 1.0).unwrap();
            prop_assert_eq!(corrected.lambda(omega).unwrap(), plain.lambda(omega).unwrap());
        }

        #[test]
        fn monotonic_in_frequency(n in -2.0f64..2.0, a in 0.1f64..3.0, b in 0.1f64..3.0) {
            prop_assume!((a - b).abs() > 1e-6 && n.abs() > 1e-3);
            let c = SystemBathCoupling::power_law(KAPPA, 1.0, n).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (jl, jh) = (c.spectral_density(lo).unwrap(), c.spectral_density(hi).unwrap());
            if n > 0.0 { prop_assert!(jh > jl); } else { prop_assert!(jh < jl); }
        }

        #[test]
        fn chi_is_affine(phi in -0.7f64..0.7, q in 1.0f64..500.0, w in 0.2f64..2.0, h in 1e-3f64..0.1) {
            let f = |x: f64| chi_c(phi, q, x, 1.0);
            let second = f(w + h) - 2.0 * f(w) + f(w - h);
            let scale = f(w + h).abs() + 2.0 * f(w).abs() + f(w - h).abs() + 1.0;
            prop_assert!(second.abs() <= 8.0 * f64::EPSILON * scale);
        }

        #[test]
        fn lambda_non_negative(phi in -1.5f64..1.5, q in 1.0f64..100.0, w in 0.05f64..5.0, n in -1.0f64..1.0) {
            let c = SystemBathCoupling::power_law(KAPPA, 1.0, n).unwrap().with_phase_correction(phi, q).unwrap();
            prop_assert!(c.lambda(w).unwrap() >= 0.0);
        }
    }
}

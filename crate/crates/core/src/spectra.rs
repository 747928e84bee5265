//! Steady-state cavity emission spectra under incoherent emitter pumping.
//!
//! The first-order correlation comes from the quantum regression theorem,
//! C(τ) = ⟨a†(τ)a(0)⟩ = Tr[a†·e^{𝓛τ}(aρ_ss)], propagated with the same
//! generator as the state. In the frame rotating at ω_c a line at detuning ν
//! contributes C ∝ e^{+iντ}, so the spectrum is
//! S(Δω) = Re ∫₀^∞ C(τ) e^{−iΔωτ} dτ, which peaks at Δω = ν.
//!
//! No output filter is applied: S is the intracavity spectrum.

use faer::complex_native::c64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dressed::JcSystem;
use crate::error::{Error, Result};
use crate::master::{build_generator, DensityMatrix, Liouvillian};
use crate::model::{FrequencyGrid, Gauge};
use crate::ops::{self, ZERO};
use crate::spectral_density::SystemBathCoupling;
use crate::table::Table;

/// C(τ) must fall below this fraction of C(0) by the end of the τ grid.
const TAIL_FRACTION: f64 = 1e-6;
/// Normalized intensities above −DUST are clamped to zero.
const DUST: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    pub tau: Vec<f64>,
    pub values: Vec<c64>,
}

impl Correlation {
    pub fn at_zero(&self) -> c64 {
        self.values[0]
    }
}

/// Uniform τ grid long enough for the slowest coherence (order −1 sector) to
/// decay by well over 1e6.
pub fn tau_grid(liouvillian: &Liouvillian, dtau: f64) -> Result<Vec<f64>> {
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(Error::InvalidParameter(format!("dtau must be > 0, got {dtau}")));
    }
    let slowest = liouvillian
        .sector_eigenvalues(-1)
        .iter()
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    if slowest.is_nan() || slowest <= 0.0 {
        return Err(Error::ToleranceNotMet("a cavity coherence does not decay; no finite spectrum".into()));
    }
    let tau_max = ((1.0 / TAIL_FRACTION).ln() + 3.0) / slowest;
    let steps = (tau_max / dtau).ceil() as usize;
    Ok((0..=steps).map(|i| i as f64 * dtau).collect())
}

/// C(τ) = Tr[a†·e^{𝓛τ}(aρ)] on `tau` (which must start at 0).
pub fn correlation(liouvillian: &Liouvillian, rho: &DensityMatrix, tau: &[f64], tolerance: f64) -> Result<Correlation> {
    if tau.first() != Some(&0.0) {
        return Err(Error::BadGrid("tau grid must start at 0".into()));
    }
    let d = liouvillian.dim();
    let a = ops::annihilation(liouvillian.system().fock_cutoff());
    let x = &a * rho.matrix();
    let sector = liouvillian.coherence_sector(-1);
    let x_vec = ops::vectorize(&x);
    let y0: Vec<c64> = sector.iter().map(|&p| x_vec[p]).collect();
    let sub = liouvillian.restricted(&sector);
    let control = crate::integrate::StepControl::new(tolerance);
    let (ys, _) = crate::integrate::integrate(|y, out| ops::matvec(&sub, y, out), &y0, tau, control)?;
    // Tr[a† X] = Σ_ij conj(a_ij) X_ij
    let weights: Vec<c64> = sector.iter().map(|&p| a[(p % d, p / d)].conj()).collect();
    let values = ys
        .iter()
        .map(|y| y.iter().zip(&weights).fold(ZERO, |acc, (v, w)| acc + *v * *w))
        .collect();
    Ok(Correlation { tau: tau.to_vec(), values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
    /// Full width at half maximum; NaN when a half-height crossing is off-grid.
    pub fwhm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// (ω − ω_c)/ω_c
    pub detuning: Vec<f64>,
    /// Max-normalized to 1.
    pub intensity: Vec<f64>,
    pub params: Option<SpectrumSetup>,
    pub peaks: Vec<Peak>,
    /// |Im C(0)| / C(0); C(0) = ⟨a†a⟩ must be real.
    pub imag_residue: f64,
}

impl SpectrumResult {
    /// The two highest peaks ordered by position.
    pub fn doublet(&self) -> Option<(Peak, Peak)> {
        let mut by_height = self.peaks.clone();
        by_height.sort_by(|a, b| b.height.total_cmp(&a.height));
        let (mut p, mut q) = (*by_height.first()?, *by_height.get(1)?);
        if p.position > q.position {
            std::mem::swap(&mut p, &mut q);
        }
        Some((p, q))
    }

    /// Height of the red (lower) doublet peak over the blue one.
    pub fn peak_height_ratio(&self) -> Option<f64> {
        self.doublet().map(|(lo, hi)| lo.height / hi.height)
    }
}

/// Trapezoidal S(Δω) = Re ∫ C(τ)e^{−iΔωτ}dτ, max-normalized.
pub fn spectrum(corr: &Correlation, detuning: &[f64]) -> Result<SpectrumResult> {
    if detuning.windows(2).any(|w| w[1] <= w[0]) || detuning.is_empty() {
        return Err(Error::BadGrid("detuning grid must be strictly increasing".into()));
    }
    let c0 = corr.at_zero();
    if c0.re.is_nan() || c0.re <= 0.0 {
        return Err(Error::InvalidParameter("C(0) = <a^dag a> is not positive; is the emitter pumped?".into()));
    }
    let tail = corr.values.last().map(|v| v.norm()).unwrap_or(0.0);
    if tail > TAIL_FRACTION * c0.re {
        return Err(Error::ToleranceNotMet(format!("correlation tail {:e} exceeds {TAIL_FRACTION:e} C(0)", tail / c0.re)));
    }
    let imag_residue = c0.im.abs() / c0.re;
    if imag_residue > 1e-9 {
        return Err(Error::ToleranceNotMet(format!("C(0) has imaginary residue {imag_residue:e}")));
    }
    let raw: Vec<f64> = detuning
        .iter()
        .map(|&w| {
            let mut acc = 0.0;
            for i in 1..corr.tau.len() {
                let (t0, t1) = (corr.tau[i - 1], corr.tau[i]);
                let f0 = (corr.values[i - 1] * c64::new(0.0, -w * t0).exp()).re;
                let f1 = (corr.values[i] * c64::new(0.0, -w * t1).exp()).re;
                acc += 0.5 * (t1 - t0) * (f0 + f1);
            }
            acc
        })
        .collect();
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || max <= 0.0 {
        return Err(Error::NegativeSpectrum { value: max });
    }
    let mut intensity = Vec::with_capacity(raw.len());
    for v in raw {
        let s = v / max;
        if s < -DUST {
            return Err(Error::NegativeSpectrum { value: s });
        }
        intensity.push(s.max(0.0));
    }
    let peaks = find_peaks(detuning, &intensity);
    Ok(SpectrumResult { detuning: detuning.to_vec(), intensity, params: None, peaks, imag_residue })
}

/// Local maxima above 1% of the global maximum, refined by a parabola
/// through the three nearest samples.
pub fn find_peaks(x: &[f64], y: &[f64]) -> Vec<Peak> {
    let mut peaks = Vec::new();
    let top = y.iter().copied().fold(0.0, f64::max);
    for i in 1..y.len().saturating_sub(1) {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= 0.01 * top) {
            continue;
        }
        let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
        let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
        let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        let c = y1 - a * x1 * x1 - b * x1;
        let (position, height) = if a < 0.0 {
            let xv = (-b / (2.0 * a)).clamp(x0, x2);
            (xv, a * xv * xv + b * xv + c)
        } else {
            (x1, y1)
        };
        let half = 0.5 * height;
        let left = (1..=i).rev().find(|&j| y[j - 1] < half).map(|j| interp(x[j - 1], y[j - 1], x[j], y[j], half));
        let right = (i..y.len() - 1).find(|&j| y[j + 1] < half).map(|j| interp(x[j], y[j], x[j + 1], y[j + 1], half));
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => r - l,
            _ => f64::NAN,
        };
        peaks.push(Peak { position, height, fwhm });
    }
    peaks
}

fn interp(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Parameters of one emission-spectrum run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSetup {
    pub omega_c: f64,
    pub q_c: f64,
    pub g_d: f64,
    pub phi0: f64,
    pub delta: f64,
    pub gauge: Gauge,
    pub exponent_n: f64,
    pub chi_corrected: bool,
    /// Incoherent emitter pump P (rate of D[σ⁺]).
    pub pump_rate: f64,
    /// `None` selects the smallest converged cutoff starting from 3.
    pub fock_cutoff: Option<usize>,
    pub detuning_min: f64,
    pub detuning_max: f64,
    pub detuning_points: usize,
    pub dtau: f64,
    pub tolerance: f64,
}

impl Default for SpectrumSetup {
    fn default() -> Self {
        let q_c = 20.0;
        Self {
            omega_c: 1.0,
            q_c,
            g_d: 0.05,
            phi0: 0.03,
            delta: 0.0,
            gauge: Gauge::Coulomb,
            exponent_n: 0.0,
            chi_corrected: false,
            pump_rate: 0.01 / q_c,
            fock_cutoff: None,
            detuning_min: -0.15,
            detuning_max: 0.15,
            detuning_points: 601,
            dtau: 0.25,
            tolerance: 1e-10,
        }
    }
}

impl SpectrumSetup {
    pub fn kappa_c(&self) -> f64 {
        self.omega_c / self.q_c
    }

    pub fn coupling(&self) -> Result<SystemBathCoupling> {
        let c = SystemBathCoupling::power_law(self.kappa_c(), self.omega_c, self.exponent_n)?;
        if self.chi_corrected {
            c.with_phase_correction(self.phi0, self.q_c)
        } else {
            Ok(c)
        }
    }

    pub fn detuning(&self) -> Result<Vec<f64>> {
        Ok(FrequencyGrid::new(self.detuning_min, self.detuning_max, self.detuning_points)?.points())
    }

    fn run_at(&self, cutoff: usize) -> Result<SpectrumResult> {
        let coupling = self.coupling()?;
        let system = JcSystem::new(self.delta, self.g_d, self.gauge, self.omega_c, cutoff)?;
        let l = build_generator(&system, &coupling, self.pump_rate)?;
        let rho = l.steady_state()?;
        let tau = tau_grid(&l, self.dtau)?;
        let corr = correlation(&l, &rho, &tau, self.tolerance)?;
        // the frequency axis is relative to ω_c
        let grid: Vec<f64> = self.detuning()?.iter().map(|d| d * self.omega_c).collect();
        let mut s = spectrum(&corr, &grid)?;
        s.detuning = self.detuning()?;
        for p in &mut s.peaks {
            p.position /= self.omega_c;
            p.fwhm /= self.omega_c;
        }
        let mut params = *self;
        params.fock_cutoff = Some(cutoff);
        s.params = Some(params);
        Ok(s)
    }
}

/// Largest cutoff tried by the convergence loop (dimension 40).
pub const MAX_AUTO_CUTOFF: usize = 19;

/// Normalized emission spectrum for `setup`. With an automatic cutoff the
/// cutoff is raised from 3 until adding two photons changes the spectrum by
/// less than 1e−3.
pub fn emission_spectrum(setup: &SpectrumSetup) -> Result<SpectrumResult> {
    if let Some(c) = setup.fock_cutoff {
        return setup.run_at(c);
    }
    let mut cutoff = 3;
    let mut current = setup.run_at(cutoff)?;
    while cutoff + 2 <= MAX_AUTO_CUTOFF {
        let next = setup.run_at(cutoff + 2)?;
        let change = max_abs_difference(&current.intensity, &next.intensity);
        log::debug!("cutoff {cutoff} -> {}: spectrum change {change:e}", cutoff + 2);
        if change < 1e-3 {
            return Ok(current);
        }
        cutoff += 2;
        current = next;
    }
    Err(Error::ToleranceNotMet(format!("spectrum not converged in the Fock cutoff up to {MAX_AUTO_CUTOFF}")))
}

pub fn max_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The four overlay curves: flat (n = 0) and sub-Ohmic (n = −½) reservoirs,
/// each with and without the QNM phase factor.
#[derive(Debug, Clone)]
pub struct Figure3 {
    pub spectra: Vec<(String, SpectrumResult)>,
}

pub const FIGURE3_VARIANTS: [(&str, f64, bool); 4] =
    [("S_n0", 0.0, false), ("S_nm12", -0.5, false), ("S_n0_chi", 0.0, true), ("S_nm12_chi", -0.5, true)];

pub fn figure3_suite(base: &SpectrumSetup) -> Result<Figure3> {
    let spectra: Vec<Result<(String, SpectrumResult)>> = FIGURE3_VARIANTS
        .par_iter()
        .map(|&(name, n, chi)| {
            let setup = SpectrumSetup { exponent_n: n, chi_corrected: chi, ..*base };
            emission_spectrum(&setup).map(|s| (name.to_string(), s))
        })
        .collect();
    Ok(Figure3 { spectra: spectra.into_iter().collect::<Result<_>>()? })
}

impl Figure3 {
    pub fn get(&self, name: &str) -> Option<&SpectrumResult> {
        self.spectra.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn curves_table(&self) -> Result<Table> {
        let mut columns = vec!["detuning".to_string()];
        columns.extend(self.spectra.iter().map(|(n, _)| n.clone()));
        let mut t = Table::new(columns);
        if let Some(p) = self.spectra.first().and_then(|(_, s)| s.params) {
            t.comment(format!(
                "normalized intracavity emission spectra; q_c = {}, g_d = {}, phi0 = {}, delta = {}, gauge = {}, pump = {}",
                p.q_c, p.g_d, p.phi0, p.delta, p.gauge, p.pump_rate
            ));
        }
        t.comment("detuning = (omega - omega_c)/omega_c; columns: n = 0 / -1/2, optionally times sqrt(chi_c)");
        let detuning = &self.spectra[0].1.detuning;
        for (i, d) in detuning.iter().enumerate() {
            let mut row = vec![*d];
            row.extend(self.spectra.iter().map(|(_, s)| s.intensity[i]));
            t.push_row(row)?;
        }
        Ok(t)
    }

    /// Columns: variant index (into [`FIGURE3_VARIANTS`]), exponent, chi flag,
    /// cutoff, peak position, height and FWHM.
    pub fn peaks_table(&self) -> Result<Table> {
        let mut t = Table::new(["variant", "exponent_n", "chi_corrected", "fock_cutoff", "position", "height", "fwhm"]);
        t.comment(format!(
            "variants: {}",
            FIGURE3_VARIANTS.iter().enumerate().map(|(i, v)| format!("{i}={}", v.0)).collect::<Vec<_>>().join(", ")
        ));
        for (i, (_, s)) in self.spectra.iter().enumerate() {
            let p = s.params.expect("suite results carry parameters");
            for peak in &s.peaks {
                t.push_row(vec![
                    i as f64,
                    p.exponent_n,
                    p.chi_corrected as u8 as f64,
                    p.fock_cutoff.unwrap_or(0) as f64,
                    peak.position,
                    peak.height,
                    peak.fwhm,
                ])?;
            }
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cavity_correlation() {
        let kappa = 0.05;
        let sys = JcSystem::new(0.0, 0.0, Gauge::Coulomb, 1.0, 2).unwrap();
        let c = SystemBathCoupling::power_law(kappa, 1.0, 0.0).unwrap();
        let l = build_generator(&sys, &c, 0.0).unwrap();
        let rho = DensityMatrix::basis_state(ops::index(1, false), l.dim());
        let tau: Vec<f64> = (0..=40).map(|i| i as f64 * 5.0).collect();
        let corr = correlation(&l, &rho, &tau, 1e-11).unwrap();
        for (t, v) in tau.iter().zip(&corr.values) {
            assert!((v.norm() - (-0.5 * kappa * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn lorentzian_line() {
        // C(τ) = e^{(iν − Γ/2)τ} → Lorentzian centred at ν with FWHM Γ
        let (nu, gamma) = (0.02, 0.01);
        let tau: Vec<f64> = (0..=40000).map(|i| i as f64 * 0.1).collect();
        let values = tau.iter().map(|t| c64::new(-0.5 * gamma * t, nu * t).exp()).collect();
        let corr = Correlation { tau, values };
        let grid = FrequencyGrid::new(-0.05, 0.05, 1001).unwrap().points();
        let s = spectrum(&corr, &grid).unwrap();
        assert_eq!(s.peaks.len(), 1);
        assert!((s.peaks[0].position - nu).abs() < 1e-6);
        assert!((s.peaks[0].fwhm - gamma).abs() < 1e-5);
    }

    #[test]
    fn rejects_slow_tail() {
        let tau: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let values = tau.iter().map(|t| c64::new(-0.01 * t, 0.0).exp()).collect();
        let r = spectrum(&Correlation { tau, values }, &[0.0, 0.1]);
        assert!(matches!(r, Err(Error::ToleranceNotMet(_))));
    }

    #[test]
    fn peak_finder_interpolates() {
        let x: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 / (1.0 + ((v - 0.333) / 0.05f64).powi(2))).collect();
        let p = find_peaks(&x, &y);
        assert_eq!(p.len(), 1);
        assert!((p[0].position - 0.333).abs() < 1e-3);
        assert!((p[0].fwhm - 0.1).abs() < 2e-3);
    }
}

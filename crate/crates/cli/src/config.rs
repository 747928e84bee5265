//! TOML run configuration. Every key has a default, so an empty file (or no
//! file) is a valid configuration.
//!
//! ```toml
//! [cavity]
//! omega_c = 1.0
//! q_factor = 20.0          # or: kappa = 0.05
//!
//! [tls]
//! delta = 0.0              # or: omega_0 = 1.0
//!
//! [coupling]
//! g_d = 0.05
//! phi0 = 0.03              # or: tan_product = 0.72  (2Q tan 2phi0)
//! gauge = "coulomb"
//!
//! [bath]
//! model = "power_law"      # or "sub_ohmic"
//! exponent_n = -0.5
//! phase_corrected = false
//! negative_chi_policy = "clamp"
//!
//! [modes]
//! extra = [{ omega = 1.3, kappa = 0.1, g = 0.02, phi = 0.0 }]
//!
//! [sim]
//! fock_cutoff = 3          # spectra pick their own cutoff when auto_cutoff = true
//! auto_cutoff = true
//! pump_rate = 0.0005       # default 0.01 kappa
//! tolerance = 1e-10
//! t_max = 2000.0
//! samples = 201
//! initial = "excited"      # "excited" | "photon" | "ground"
//!
//! [sweep]
//! omega0_min = 0.8
//! omega0_max = 1.2
//! points = 401
//!
//! [spectrum]
//! detuning_min = -0.15
//! detuning_max = 0.15
//! points = 601
//! dtau = 0.25
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use qnmres::continuum::QnmExpansion;
use qnmres::dressed::JcSystem;
use qnmres::spectra::SpectrumSetup;
use qnmres::{FrequencyGrid, Gauge, NegativeChiPolicy, QnmMode, SimConfig, SystemBathCoupling};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub cavity: Cavity,
    pub tls: Tls,
    pub coupling: Coupling,
    pub bath: Bath,
    pub modes: Modes,
    pub sim: Sim,
    pub sweep: Sweep,
    pub spectrum: Spectrum,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Cavity {
    pub omega_c: f64,
    pub kappa: Option<f64>,
    pub q_factor: Option<f64>,
}

impl Default for Cavity {
    fn default() -> Self {
        Self { omega_c: 1.0, kappa: None, q_factor: None }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tls {
    pub omega_0: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Coupling {
    pub g_d: f64,
    pub phi0: Option<f64>,
    pub tan_product: Option<f64>,
    pub gauge: Gauge,
}

impl Default for Coupling {
    fn default() -> Self {
        Self { g_d: 0.05, phi0: None, tan_product: None, gauge: Gauge::Coulomb }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bath {
    pub model: String,
    pub exponent_n: f64,
    pub phase_corrected: bool,
    pub negative_chi_policy: String,
}

impl Default for Bath {
    fn default() -> Self {
        Self { model: "power_law".into(), exponent_n: -0.5, phase_corrected: false, negative_chi_policy: "clamp".into() }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Modes {
    pub extra: Vec<ExtraMode>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExtraMode {
    pub omega: f64,
    pub kappa: f64,
    pub g: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sim {
    pub fock_cutoff: usize,
    pub auto_cutoff: bool,
    pub pump_rate: Option<f64>,
    pub tolerance: f64,
    pub t_max: f64,
    pub samples: usize,
    pub initial: String,
}

impl Default for Sim {
    fn default() -> Self {
        Self {
            fock_cutoff: 3,
            auto_cutoff: true,
            pump_rate: None,
            tolerance: 1e-10,
            t_max: 2000.0,
            samples: 201,
            initial: "excited".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    pub omega0_min: f64,
    pub omega0_max: f64,
    pub points: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        Self { omega0_min: 0.8, omega0_max: 1.2, points: 401 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Spectrum {
    pub detuning_min: f64,
    pub detuning_max: f64,
    pub points: usize,
    pub dtau: f64,
}

impl Default for Spectrum {
    fn default() -> Self {
        let s = SpectrumSetup::default();
        Self { detuning_min: s.detuning_min, detuning_max: s.detuning_max, points: s.detuning_points, dtau: s.dtau }
    }
}

const DEFAULT_Q: f64 = 20.0;
const DEFAULT_PHI0: f64 = 0.03;

/// Read `path` (if any), apply `key=value` overrides, and deserialize.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut doc: toml::Table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            text.parse().with_context(|| format!("parse error in {}", p.display()))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let text = toml::to_string(&doc)?;
    let de = toml::Deserializer::new(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        anyhow::anyhow!("parse error at key `{key}`: {}", e.into_inner().message())
    })
}

/// `section.key=value`; the value is read as a TOML literal and falls back to
/// a bare string.
fn apply_override(doc: &mut toml::Table, item: &str) -> Result<()> {
    let Some((key, raw)) = item.split_once('=') else {
        bail!("override `{item}` is not of the form section.key=value");
    };
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` is malformed");
    }
    let mut table = doc;
    for p in &parts[..parts.len() - 1] {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().with_context(|| format!("override key `{key}`: `{p}` is not a section"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Validated physical parameters shared by the subcommands.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub omega_c: f64,
    pub kappa: f64,
    pub q_factor: f64,
    pub delta: f64,
    pub omega_0: f64,
    pub g_d: f64,
    pub phi0: f64,
    pub gauge: Gauge,
    pub exponent_n: f64,
    pub phase_corrected: bool,
    pub negative_chi_policy: NegativeChiPolicy,
    pub pump_rate: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub cavity_mode: QnmMode,
    #[serde(skip)]
    pub expansion: QnmExpansion,
    #[serde(skip)]
    pub coupling: SystemBathCoupling,
    #[serde(skip)]
    pub sim: SimConfig,
}

impl Config {
    pub fn resolve(&self) -> Result<Resolved> {
        let omega_c = self.cavity.omega_c;
        let (kappa, q_factor) = match (self.cavity.kappa, self.cavity.q_factor) {
            (Some(_), Some(_)) => bail!("set only one of cavity.kappa and cavity.q_factor"),
            (Some(k), None) => (k, omega_c / k),
            (None, Some(q)) => (omega_c / q, q),
            (None, None) => (omega_c / DEFAULT_Q, DEFAULT_Q),
        };
        let omega_0 = match (self.tls.omega_0, self.tls.delta) {
            (Some(_), Some(_)) => bail!("set only one of tls.omega_0 and tls.delta"),
            (Some(w), None) => w,
            (None, Some(d)) => omega_c + d,
            (None, None) => omega_c,
        };
        let tls = qnmres::TlsParams::new(omega_0)?;
        let delta = tls.delta(omega_c);
        let c = &self.coupling;
        let cavity_mode = match (c.phi0, c.tan_product) {
            (Some(_), Some(_)) => bail!("set only one of coupling.phi0 and coupling.tan_product"),
            (None, Some(p)) => QnmMode::with_tan_product(omega_c, q_factor, c.g_d, p)?,
            (phi, None) => QnmMode::new(omega_c, kappa, c.g_d, phi.unwrap_or(DEFAULT_PHI0))?,
        };
        let phi0 = cavity_mode.phi();
        let mut modes = vec![cavity_mode];
        for m in &self.modes.extra {
            modes.push(QnmMode::new(m.omega, m.kappa, m.g, m.phi)?);
        }
        let expansion = QnmExpansion::new(modes)?;

        let exponent_n = match self.bath.model.as_str() {
            "power_law" => self.bath.exponent_n,
            "sub_ohmic" => -0.5,
            other => bail!("unknown bath.model `{other}` (expected power_law or sub_ohmic)"),
        };
        let negative_chi_policy: NegativeChiPolicy = self.bath.negative_chi_policy.parse()?;
        let mut coupling = SystemBathCoupling::power_law(kappa, omega_c, exponent_n)?.with_policy(negative_chi_policy);
        if self.bath.phase_corrected {
            coupling = coupling.with_phase_correction(phi0, q_factor)?;
        }

        let mut warnings = Vec::new();
        if !c.gauge.is_matched(exponent_n) {
            warnings.push(format!(
                "gauge {} with exponent n = {exponent_n} is not a matched pair (expected n = {}); rates will not agree with the continuum result",
                c.gauge,
                c.gauge.matched_exponent()
            ));
        }
        let pump_rate = self.sim.pump_rate.unwrap_or(0.01 * kappa);
        let grid = FrequencyGrid::positive(self.sweep.omega0_min, self.sweep.omega0_max, self.sweep.points)?;
        let sim = SimConfig::new(self.sim.fock_cutoff, pump_rate, self.sim.tolerance, self.sim.t_max, grid)?;
        if self.sim.samples < 2 {
            bail!("sim.samples must be >= 2");
        }
        Ok(Resolved {
            omega_c,
            kappa,
            q_factor,
            delta,
            omega_0,
            g_d: c.g_d,
            phi0,
            gauge: c.gauge,
            exponent_n,
            phase_corrected: self.bath.phase_corrected,
            negative_chi_policy,
            pump_rate,
            warnings,
            cavity_mode,
            expansion,
            coupling,
            sim,
        })
    }
}

impl Resolved {
    pub fn system(&self, fock_cutoff: usize) -> Result<JcSystem> {
        Ok(JcSystem::new(self.delta, self.g_d, self.gauge, self.omega_c, fock_cutoff)?)
    }

    pub fn spectrum_setup(&self, config: &Config) -> SpectrumSetup {
        SpectrumSetup {
            omega_c: self.omega_c,
            q_c: self.q_factor,
            g_d: self.g_d,
            phi0: self.phi0,
            delta: self.delta,
            gauge: self.gauge,
            exponent_n: self.exponent_n,
            chi_corrected: self.phase_corrected,
            pump_rate: self.pump_rate,
            fock_cutoff: if config.sim.auto_cutoff { None } else { Some(self.sim.fock_cutoff) },
            detuning_min: config.spectrum.detuning_min,
            detuning_max: config.spectrum.detuning_max,
            detuning_points: config.spectrum.points,
            dtau: config.spectrum.dtau,
            tolerance: self.sim.tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let r = Config::default().resolve().unwrap();
        assert_eq!(r.exponent_n, -0.5);
        assert_eq!(r.q_factor, 20.0);
        assert!((r.kappa - 0.05).abs() < 1e-15);
        assert!((r.pump_rate - 0.0005).abs() < 1e-15);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn overrides() {
        let c = load(None, &["coupling.gauge=dipole".into(), "bath.exponent_n=0".into(), "cavity.kappa=0.1".into()]).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.gauge, Gauge::Dipole);
        assert_eq!(r.q_factor, 10.0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn bad_number_names_key() {
        let err = load(None, &["cavity.kappa=abc".into()]).unwrap_err().to_string();
        assert!(err.contains("cavity.kappa"), "{err}");
        let err = load(None, &["sim.fokc_cutoff=3".into()]).unwrap_err().to_string();
        assert!(err.contains("fokc_cutoff"), "{err}");
    }

    #[test]
    fn conflicting_keys() {
        let c = load(None, &["cavity.kappa=0.1".into(), "cavity.q_factor=10".into()]).unwrap();
        assert!(c.resolve().is_err());
    }
}

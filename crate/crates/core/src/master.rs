//! Non-secular Born-Markov master equation for the lossy JC system.
//!
//! The dissipator couples the cavity to its reservoir through Λ(ω) evaluated
//! at the lab-frame frequency of every dressed transition:
//!
//! ```text
//! ρ̇ = −i[H, ρ] + Σ_{j,k} π·a_jk·Λ²(ω_c + ε_k − ε_j)·([|j⟩⟨k|ρ, a†] + H.c.)
//!       + P·(σ⁺ρσ⁻ − ½{σ⁻σ⁺, ρ})
//! ```
//!
//! with a_jk = ⟨j|a|k⟩ in the dressed basis. In the one-excitation sector
//! a_{G,α} = c_α, so this is exactly the single-excitation master equation
//! with |G⟩⟨α| jump terms. Writing S = Σ π·a_jk·Λ²_jk·|j⟩⟨k| the dissipator
//! is Sρa† − a†Sρ + aρS† − ρS†a, which is trace- and Hermiticity-preserving
//! but not of Lindblad form.
//!
//! [`DissipatorForm::Secular`] keeps only products of transitions with equal
//! Bohr frequency, which turns the same reservoir into a Lindblad generator.

use std::f64::consts::PI;

use faer::complex_native::c64;
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::Serialize;

use crate::dressed::{diagonalize, DressedBasis, JcSystem};
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegrationStats, StepControl};
use crate::model::Gauge;
use crate::ops::{self, ONE, ZERO};
use crate::spectral_density::SystemBathCoupling;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DissipatorForm {
    #[default]
    NonSecular,
    Secular,
}

/// Bohr frequencies closer than this are treated as one secular group.
const SECULAR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    rho: Mat<c64>,
}

impl DensityMatrix {
    /// Checks Hermiticity (1e−12) and unit trace (1e−10).
    pub fn new(rho: Mat<c64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::InvalidParameter("density matrix must be square".into()));
        }
        let herm = ops::max_abs(&(&rho - rho.adjoint()));
        if herm > 1e-12 {
            return Err(Error::InvalidParameter(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = ops::trace(&rho);
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidParameter(format!("density matrix trace is {:?}", (tr.re, tr.im))));
        }
        Ok(Self { rho })
    }

    /// |i⟩⟨i| in the product basis.
    pub fn basis_state(index: usize, dim: usize) -> Self {
        let mut rho = Mat::zeros(dim, dim);
        rho[(index, index)] = ONE;
        Self { rho }
    }

    pub(crate) fn from_raw(rho: Mat<c64>) -> Self {
        Self { rho }
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> c64 {
        ops::trace(&self.rho)
    }

    pub fn purity(&self) -> f64 {
        ops::trace_product(&self.rho, &self.rho).re
    }

    pub fn expectation(&self, op: &Mat<c64>) -> c64 {
        ops::trace_product(op, &self.rho)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = ops::scaled(&(&self.rho + self.rho.adjoint()), c64::new(0.5, 0.0));
        let eig = herm.selfadjoint_eigendecomposition(Side::Lower);
        let s = eig.s().column_vector();
        (0..s.nrows()).map(|i| s.read(i).re).fold(f64::INFINITY, f64::min)
    }

    /// Excited-state population ⟨σ⁺σ⁻⟩.
    pub fn excited_population(&self) -> f64 {
        (0..self.dim()).filter(|i| i % 2 == 1).map(|i| self.rho[(i, i)].re).sum()
    }

    /// ⟨a†a⟩
    pub fn photon_number(&self) -> f64 {
        (0..self.dim()).map(|i| (i / 2) as f64 * self.rho[(i, i)].re).sum()
    }
}

/// Dense generator of ρ̇ = 𝓛ρ over column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    generator: Mat<c64>,
    system: JcSystem,
    coupling: SystemBathCoupling,
    pump_rate: f64,
    form: DissipatorForm,
    basis: DressedBasis,
    clamped_transitions: usize,
}

struct Transition {
    j: usize,
    k: usize,
    omega: f64,
    amplitude: c64,
    lambda_sq: f64,
}

pub fn build_generator(system: &JcSystem, coupling: &SystemBathCoupling, pump_rate: f64) -> Result<Liouvillian> {
    build_generator_with(system, coupling, pump_rate, DissipatorForm::NonSecular)
}

pub fn build_generator_with(
    system: &JcSystem,
    coupling: &SystemBathCoupling,
    pump_rate: f64,
    form: DissipatorForm,
) -> Result<Liouvillian> {
    if (system.omega_c() - coupling.omega_c()).abs() > 1e-12 * system.omega_c() {
        return Err(Error::InvalidParameter(format!(
            "system and reservoir disagree on omega_c ({} vs {})",
            system.omega_c(),
            coupling.omega_c()
        )));
    }
    if !(pump_rate.is_finite() && pump_rate >= 0.0) {
        return Err(Error::InvalidParameter(format!("pump_rate must be >= 0, got {pump_rate}")));
    }
    let basis = diagonalize(system)?;
    let d = system.dim();
    let id = ops::identity(d);
    let mut l = Mat::<c64>::zeros(d * d, d * d);

    let h = system.hamiltonian();
    ops::add_sandwich(&mut l, &h, &id, c64::new(0.0, -1.0));
    ops::add_sandwich(&mut l, &id, &h, c64::new(0.0, 1.0));

    // dressed transitions k → j between adjacent excitation manifolds
    let e = basis.energies();
    let n = basis.excitations();
    let mut transitions = Vec::new();
    let mut clamped_transitions = 0;
    for k in 0..d {
        for j in 0..d {
            if n[k] != n[j] + 1 {
                continue;
            }
            let amplitude = basis.lowering()[(j, k)];
            let omega = system.omega_c() + e[k] - e[j];
            if omega <= 0.0 {
                return Err(Error::NegativeBathFrequency { omega });
            }
            if coupling.is_clamped(omega) {
                clamped_transitions += 1;
            }
            let lambda_sq = coupling.lambda_squared(omega)?;
            transitions.push(Transition { j, k, omega, amplitude, lambda_sq });
        }
    }
    if clamped_transitions > 0 {
        log::warn!("{clamped_transitions} dressed transitions fall where chi_c < 0; reservoir coupling clamped to zero");
    }

    let groups: Vec<Vec<&Transition>> = match form {
        DissipatorForm::NonSecular => vec![transitions.iter().collect()],
        DissipatorForm::Secular => {
            let mut sorted: Vec<&Transition> = transitions.iter().collect();
            sorted.sort_by(|a, b| a.omega.total_cmp(&b.omega));
            let mut groups: Vec<Vec<&Transition>> = Vec::new();
            for t in sorted {
                match groups.last_mut() {
                    Some(g) if (t.omega - g[0].omega).abs() <= SECULAR_TOLERANCE * system.omega_c() => g.push(t),
                    _ => groups.push(vec![t]),
                }
            }
            groups
        }
    };

    for group in &groups {
        let mut lower = Mat::<c64>::zeros(d, d);
        let mut filtered = Mat::<c64>::zeros(d, d);
        for t in group {
            lower[(t.j, t.k)] = t.amplitude;
            filtered[(t.j, t.k)] = t.amplitude * (PI * t.lambda_sq);
        }
        let a = basis.to_bare(&lower);
        let s = basis.to_bare(&filtered);
        let ad = ops::adjoint(&a);
        let sd = ops::adjoint(&s);
        ops::add_sandwich(&mut l, &s, &ad, ONE);
        ops::add_sandwich(&mut l, &(&ad * &s), &id, -ONE);
        ops::add_sandwich(&mut l, &a, &sd, ONE);
        ops::add_sandwich(&mut l, &id, &(&sd * &a), -ONE);
    }

    if pump_rate > 0.0 {
        let sm = ops::sigma_minus(system.fock_cutoff());
        let sp = ops::adjoint(&sm);
        let p = c64::new(pump_rate, 0.0);
        let half = c64::new(-0.5 * pump_rate, 0.0);
        let sm_sp = &sm * &sp;
        ops::add_sandwich(&mut l, &sp, &sm, p);
        ops::add_sandwich(&mut l, &sm_sp, &id, half);
        ops::add_sandwich(&mut l, &id, &sm_sp, half);
    }

    Ok(Liouvillian {
        generator: l,
        system: *system,
        coupling: *coupling,
        pump_rate,
        form,
        basis,
        clamped_transitions,
    })
}

/// Bookkeeping of a time evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: IntegrationStats,
    pub trace_drift: f64,
    pub min_eigenvalue: f64,
}

impl Trajectory {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["t", "P_e", "n_photon", "trace", "min_eig_rho"]);
        for (time, rho) in self.times.iter().zip(&self.states) {
            t.rows.push(vec![time.to_owned(), rho.excited_population(), rho.photon_number(), rho.trace().re, rho.min_eigenvalue()]);
        }
        t
    }
}

/// Identified excitation-decay eigenvalue and its cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRate {
    /// Generator eigenvalue (re, im); the real part is −γ.
    pub eigenvalue: (f64, f64),
    /// Rate from an exponential fit of the emitter population.
    pub fitted_rate: f64,
}

impl DecayRate {
    pub fn rate(&self) -> f64 {
        -self.eigenvalue.0
    }
}

impl Liouvillian {
    pub fn generator(&self) -> &Mat<c64> {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn system(&self) -> &JcSystem {
        &self.system
    }

    pub fn coupling(&self) -> &SystemBathCoupling {
        &self.coupling
    }

    pub fn pump_rate(&self) -> f64 {
        self.pump_rate
    }

    pub fn form(&self) -> DissipatorForm {
        self.form
    }

    pub fn basis(&self) -> &DressedBasis {
        &self.basis
    }

    pub fn clamped_transitions(&self) -> usize {
        self.clamped_transitions
    }

    pub fn apply(&self, rho: &Mat<c64>) -> Mat<c64> {
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        ops::matvec(&self.generator, &ops::vectorize(rho), &mut out);
        ops::unvectorize(&out, d)
    }

    /// max_j |Σ_i 𝓛_{ii,j}| relative to max |𝓛|.
    pub fn trace_residual(&self) -> f64 {
        let d = self.dim();
        let scale = ops::max_abs(&self.generator).max(f64::MIN_POSITIVE);
        (0..d * d)
            .map(|col| (0..d).fold(ZERO, |acc, i| acc + self.generator[(i + i * d, col)]).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Vectorized indices of ρ_ij with N_i − N_j = `order`.
    pub fn coherence_sector(&self, order: isize) -> Vec<usize> {
        let d = self.dim();
        (0..d * d)
            .filter(|p| {
                let (i, j) = (p % d, p / d);
                ops::excitation(i) as isize - ops::excitation(j) as isize == order
            })
            .collect()
    }

    /// Block of the generator on `indices`. Only a true restriction when the
    /// span of `indices` is invariant.
    pub fn restricted(&self, indices: &[usize]) -> Mat<c64> {
        Mat::from_fn(indices.len(), indices.len(), |r, c| self.generator[(indices[r], indices[c])])
    }

    pub fn eigenvalues(&self) -> Vec<c64> {
        self.generator.complex_eigenvalues()
    }

    /// Eigenvalues of one coherence-order sector; every term of the generator
    /// preserves N_i − N_j, so these are eigenvalues of the full generator.
    pub fn sector_eigenvalues(&self, order: isize) -> Vec<c64> {
        let idx = self.coherence_sector(order);
        if idx.is_empty() {
            return Vec::new();
        }
        self.restricted(&idx).complex_eigenvalues()
    }

    fn sector_evolve(
        &self,
        indices: &[usize],
        y0: &[c64],
        times: &[f64],
        tolerance: f64,
    ) -> Result<(Vec<Vec<c64>>, IntegrationStats)> {
        let sub = self.restricted(indices);
        let control = StepControl::new(tolerance);
        integrate(|y, out| ops::matvec(&sub, y, out), y0, times, control)
    }

    /// Integrate ρ̇ = 𝓛ρ and sample at `times`.
    pub fn evolve(&self, rho0: &DensityMatrix, times: &[f64], tolerance: f64) -> Result<Trajectory> {
        let d = self.dim();
        if rho0.dim() != d {
            return Err(Error::InvalidParameter(format!("initial state has dimension {} (expected {d})", rho0.dim())));
        }
        let control = StepControl::new(tolerance);
        let (ys, stats) = integrate(
            |y, out| ops::matvec(&self.generator, y, out),
            &ops::vectorize(rho0.matrix()),
            times,
            control,
        )?;
        let t0 = rho0.trace();
        let mut trace_drift = 0.0f64;
        let mut min_eigenvalue = f64::INFINITY;
        let states: Vec<DensityMatrix> = ys
            .iter()
            .map(|y| {
                let rho = DensityMatrix::from_raw(ops::unvectorize(y, d));
                trace_drift = trace_drift.max((rho.trace() - t0).norm());
                min_eigenvalue = min_eigenvalue.min(rho.min_eigenvalue());
                rho
            })
            .collect();
        if trace_drift > 1e-9 {
            return Err(Error::ToleranceNotMet(format!("trace drifted by {trace_drift:e}")));
        }
        if min_eigenvalue < -1e-8 {
            log::warn!("density matrix lost positivity during evolution (min eigenvalue {min_eigenvalue:e})");
        }
        Ok(Trajectory { times: times.to_vec(), states, stats, trace_drift, min_eigenvalue })
    }

    /// Unique stationary state.
    ///
    /// The kernel dimension is counted sector by sector (singular values below
    /// 1e−10 of the largest); the state itself comes from the population
    /// sector, then is Hermitized and trace-normalized.
    pub fn steady_state(&self) -> Result<DensityMatrix> {
        let d = self.dim();
        let max_order = (self.system.fock_cutoff() + 1) as isize;
        let scale = ops::max_abs(&self.generator).max(f64::MIN_POSITIVE);
        let mut kernel_dim = 0;
        let mut null = None;
        for order in -max_order..=max_order {
            let idx = self.coherence_sector(order);
            if idx.is_empty() {
                continue;
            }
            let sub = self.restricted(&idx);
            let svd = sub.svd();
            let s = svd.s_diagonal();
            let sigma_max = (0..s.nrows()).map(|i| s.read(i).re).fold(0.0, f64::max).max(scale);
            let mut smallest = (f64::INFINITY, 0);
            for i in 0..s.nrows() {
                let v = s.read(i).re;
                if v < 1e-10 * sigma_max {
                    kernel_dim += 1;
                }
                if v < smallest.0 {
                    smallest = (v, i);
                }
            }
            if order == 0 {
                let v = svd.v();
                let mut full = vec![ZERO; d * d];
                for (r, &p) in idx.iter().enumerate() {
                    full[p] = v.read(r, smallest.1);
                }
                null = Some(full);
            }
        }
        if kernel_dim != 1 {
            return Err(Error::DegenerateSteadyState { kernel_dim });
        }
        let raw = ops::unvectorize(&null.expect("population sector is never empty"), d);
        let herm = ops::scaled(&(&raw + raw.adjoint()), c64::new(0.5, 0.0));
        let tr = ops::trace(&herm);
        if tr.norm() < 1e-300 {
            return Err(Error::DegenerateSteadyState { kernel_dim: 0 });
        }
        let rho = ops::scaled(&herm, tr.inv());
        let rho = ops::scaled(&(&rho + rho.adjoint()), c64::new(0.5, 0.0));
        Ok(DensityMatrix::from_raw(rho))
    }

    /// The eigenvalue ~g² governing decay of an initially excited emitter.
    ///
    /// Spectral route: among the population-sector eigenvalues (restricted to
    /// at most one excitation when there is no pump), the nonzero one with the
    /// smallest |Re|; 0 when the sector has a second stationary mode.
    /// Fit route: log-linear fit of P_e(t) from |0, e⟩ once every faster mode
    /// has died out. The two must agree to 1%.
    pub fn decay_eigenvalue(&self) -> Result<DecayRate> {
        let d = self.dim();
        let idx: Vec<usize> = (0..d * d)
            .filter(|p| {
                let (ni, nj) = (ops::excitation(p % d), ops::excitation(p / d));
                ni == nj && (self.pump_rate > 0.0 || ni <= 1)
            })
            .collect();
        let sub = self.restricted(&idx);
        let mut eig = sub.complex_eigenvalues();
        let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max).max(ops::max_abs(&sub));
        let zero_tol = 1e-9 * scale;
        eig.sort_by(|a, b| a.re.abs().total_cmp(&b.re.abs()).then(a.im.total_cmp(&b.im)));
        let zeros = eig.iter().filter(|z| z.norm() <= zero_tol).count();
        let nonzero: Vec<c64> = eig.iter().copied().filter(|z| z.norm() > zero_tol).collect();
        if nonzero.is_empty() {
            return Err(Error::Eigensolver("population sector has no decaying mode".into()));
        }
        let (slow, fast_rate) = if zeros >= 2 {
            (ZERO, nonzero[0].re.abs())
        } else {
            let fast = nonzero.get(1).map(|z| z.re.abs()).unwrap_or(nonzero[0].re.abs());
            (nonzero[0], fast)
        };
        let slow_rate = -slow.re;

        // fit window: fast modes suppressed by e^{-25}, then one slow lifetime
        let t1 = 25.0 / fast_rate;
        let span = if slow_rate > 0.0 { 1.0 / slow_rate } else { 10.0 / fast_rate };
        let samples = 41;
        let mut times = vec![0.0];
        times.extend((0..samples).map(|i| t1 + span * i as f64 / (samples - 1) as f64));

        let start = ops::index(0, true);
        let y0: Vec<c64> = idx.iter().map(|&p| if p == start + start * d { ONE } else { ZERO }).collect();
        let (ys, _) = self.sector_evolve(&idx, &y0, &times, 1e-11)?;
        let pe_pos: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|(_, &p)| p % d == p / d && (p % d) % 2 == 1)
            .map(|(r, _)| r)
            .collect();
        let mut xs = Vec::with_capacity(samples);
        let mut ls = Vec::with_capacity(samples);
        for (t, y) in times.iter().zip(&ys).skip(1) {
            let pe: f64 = pe_pos.iter().map(|&r| y[r].re).sum();
            if pe <= 0.0 {
                return Err(Error::EigenvalueAmbiguous { spectral: slow_rate, fitted: f64::NAN });
            }
            xs.push(*t);
            ls.push(pe.ln());
        }
        let fitted_rate = -least_squares_slope(&xs, &ls);

        let agree = if slow_rate > 0.0 {
            (fitted_rate - slow_rate).abs() <= 0.01 * slow_rate
        } else {
            fitted_rate.abs() <= 1e-6 * fast_rate
        };
        if !agree {
            return Err(Error::EigenvalueAmbiguous { spectral: slow_rate, fitted: fitted_rate });
        }
        Ok(DecayRate { eigenvalue: (slow.re, slow.im), fitted_rate })
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Second-order rate γ_g = g_g²·2πΛ²(ω₀)/(κ_c²/4 + Δ²), with g_g resolved for
/// the gauge and ω₀ = ω_c + Δ.
pub fn perturbative_rate(delta: f64, g_d: f64, gauge: Gauge, coupling: &SystemBathCoupling) -> Result<f64> {
    let omega_c = coupling.omega_c();
    let omega_0 = omega_c + delta;
    let g = gauge.coupling(g_d, omega_0, omega_c);
    let k = coupling.kappa_c();
    Ok(g * g * coupling.spectral_density(omega_0)? / (0.25 * k * k + delta * delta))
}

/// One (gauge, exponent) pairing for [`gauge_compare`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeVariant {
    pub gauge: Gauge,
    pub exponent_n: f64,
}

impl GaugeVariant {
    pub const fn new(gauge: Gauge, exponent_n: f64) -> Self {
        Self { gauge, exponent_n }
    }

    pub fn label(&self) -> String {
        let x = self.exponent_n;
        let n = if x == 0.5 {
            "p12".to_string()
        } else if x == -0.5 {
            "m12".to_string()
        } else if x == 0.0 {
            "0".to_string()
        } else {
            format!("{x}")
        };
        format!("{}_n{n}", self.gauge)
    }
}

/// The two matched pairings first, then two mismatched flat-bath ones.
pub const GAUGE_VARIANTS: [GaugeVariant; 4] = [
    GaugeVariant::new(Gauge::Dipole, 0.5),
    GaugeVariant::new(Gauge::Coulomb, -0.5),
    GaugeVariant::new(Gauge::Coulomb, 0.0),
    GaugeVariant::new(Gauge::Dipole, 0.0),
];

/// Perturbative (and optionally master-equation) decay rates across a detuning
/// grid for every variant in [`GAUGE_VARIANTS`].
pub fn gauge_compare(deltas: &[f64], g_d: f64, kappa_c: f64, omega_c: f64, numeric: bool) -> Result<Table> {
    let mut columns = vec!["delta".to_string(), "omega0_over_omegac".to_string()];
    columns.extend(GAUGE_VARIANTS.iter().map(|v| format!("pert_{}", v.label())));
    if numeric {
        columns.extend(GAUGE_VARIANTS.iter().map(|v| format!("num_{}", v.label())));
    }
    columns.push("mismatch_ratio".into());
    let mut table = Table::new(columns);
    table.comment("decay rates of an initially excited emitter; matched pairs are dipole/n=+1/2 and coulomb/n=-1/2");
    table.comment("mismatch_ratio = pert_coulomb_n0 / pert_coulomb_nm12 (equals omega0/omega_c)");
    table.comment(format!("g_d = {g_d}, kappa_c = {kappa_c}, omega_c = {omega_c}"));

    let rows: Vec<Result<Vec<f64>>> = deltas
        .par_iter()
        .map(|&delta| {
            let mut row = vec![delta, (omega_c + delta) / omega_c];
            let mut pert = Vec::new();
            for v in GAUGE_VARIANTS {
                let c = SystemBathCoupling::power_law(kappa_c, omega_c, v.exponent_n)?;
                pert.push(perturbative_rate(delta, g_d, v.gauge, &c)?);
            }
            row.extend(&pert);
            if numeric {
                for v in GAUGE_VARIANTS {
                    let c = SystemBathCoupling::power_law(kappa_c, omega_c, v.exponent_n)?;
                    let sys = JcSystem::new(delta, g_d, v.gauge, omega_c, 1)?;
                    // strong coupling has no single decay eigenvalue; leave a gap
                    match build_generator(&sys, &c, 0.0)?.decay_eigenvalue() {
                        Ok(r) => row.push(r.rate()),
                        Err(e @ Error::EigenvalueAmbiguous { .. }) => {
                            log::warn!("delta = {delta}, {}: {e}", v.label());
                            row.push(f64::NAN);
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            row.push(pert[2] / pert[1]);
            Ok(row)
        })
        .collect();
    for row in rows {
        table.push_row(row?)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    const KAPPA: f64 = 0.05;

    fn flat() -> SystemBathCoupling {
        SystemBathCoupling::power_law(KAPPA, 1.0, 0.0).unwrap()
    }

    fn random_hermitian(d: usize, seed: u64) -> Mat<c64> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = Mat::from_fn(d, d, |_, _| c64::new(next(), next()));
        &m + m.adjoint()
    }

    #[test]
    fn structure_preserved() {
        let sys = JcSystem::new(0.03, 0.02, Gauge::Coulomb, 1.0, 3).unwrap();
        let c = SystemBathCoupling::phase_corrected(KAPPA, 1.0, 0.03, 20.0).unwrap();
        let l = build_generator(&sys, &c, 0.002).unwrap();
        assert!(l.trace_residual() < 1e-12);
        for seed in 1..20 {
            let rho = random_hermitian(l.dim(), seed);
            let out = l.apply(&rho);
            assert!(ops::trace(&out).norm() < 1e-12);
            assert!(ops::max_abs(&(&out - out.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn empty_cavity_photon_decay() {
        let sys = JcSystem::new(0.0, 0.0, Gauge::Coulomb, 1.0, 2).unwrap();
        let l = build_generator(&sys, &flat(), 0.0).unwrap();
        let rho0 = DensityMatrix::basis_state(ops::index(1, false), l.dim());
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 10.0).collect();
        let traj = l.evolve(&rho0, &times, 1e-10).unwrap();
        for (t, rho) in times.iter().zip(&traj.states) {
            assert!((rho.photon_number() - (-KAPPA * t).exp()).abs() < 1e-8, "t = {t}");
        }
        assert!(traj.trace_drift < 1e-12);
    }

    #[test]
    fn uncoupled_emitter_does_not_decay() {
        let sys = JcSystem::new(0.02, 0.0, Gauge::Dipole, 1.0, 1).unwrap();
        let l = build_generator(&sys, &flat(), 0.0).unwrap();
        let rho0 = DensityMatrix::basis_state(ops::index(0, true), l.dim());
        let traj = l.evolve(&rho0, &[50.0, 500.0], 1e-10).unwrap();
        assert!((traj.states[1].excited_population() - 1.0).abs() < 1e-12);
        assert!(matches!(l.steady_state(), Err(Error::DegenerateSteadyState { .. })));
        let rate = l.decay_eigenvalue().unwrap();
        assert_eq!(rate.rate(), 0.0);
    }

    #[test]
    fn closed_system_conserves_purity() {
        let sys = JcSystem::new(0.01, 0.05, Gauge::Dipole, 1.0, 3).unwrap();
        let c = flat();
        let mut l = build_generator(&sys, &c, 0.0).unwrap();
        // strip the dissipator: keep only −i[H, ·]
        let d = l.dim();
        let mut coherent = Mat::zeros(d * d, d * d);
        let h = sys.hamiltonian();
        ops::add_sandwich(&mut coherent, &h, &ops::identity(d), c64::new(0.0, -1.0));
        ops::add_sandwich(&mut coherent, &ops::identity(d), &h, c64::new(0.0, 1.0));
        l.generator = coherent;
        let rho0 = DensityMatrix::basis_state(ops::index(0, true), d);
        let traj = l.evolve(&rho0, &[100.0, 400.0], 1e-11).unwrap();
        for rho in &traj.states {
            assert!((rho.purity() - 1.0).abs() < 1e-8, "{}", rho.purity());
        }
    }

    #[test]
    fn zero_generator_leaves_state() {
        let sys = JcSystem::new(0.0, 0.0, Gauge::Dipole, 1.0, 1).unwrap();
        let mut l = build_generator(&sys, &flat(), 0.0).unwrap();
        l.generator = Mat::zeros(16, 16);
        let rho0 = DensityMatrix::basis_state(1, 4);
        let traj = l.evolve(&rho0, &[10.0], 1e-10).unwrap();
        assert_eq!(traj.states[0].matrix(), rho0.matrix());
    }

    #[test]
    fn vacuum_is_steady_without_pump() {
        let sys = JcSystem::new(0.01, 0.02, Gauge::Coulomb, 1.0, 2).unwrap();
        let l = build_generator(&sys, &SystemBathCoupling::sub_ohmic(KAPPA, 1.0).unwrap(), 0.0).unwrap();
        let ss = l.steady_state().unwrap();
        assert!((ss.matrix()[(0, 0)] - ONE).norm() < 1e-10);
        assert!(ss.photon_number().abs() < 1e-10);
    }

    #[test]
    fn pumped_steady_state_matches_long_evolution() {
        let sys = JcSystem::new(0.0, 0.05, Gauge::Coulomb, 1.0, 3).unwrap();
        let l = build_generator(&sys, &SystemBathCoupling::sub_ohmic(KAPPA, 1.0).unwrap(), 0.01).unwrap();
        let ss = l.steady_state().unwrap();
        assert!(ss.photon_number() > 0.0);
        DensityMatrix::new(ss.matrix().clone()).unwrap();
        let rho0 = DensityMatrix::basis_state(ops::index(1, true), l.dim());
        let traj = l.evolve(&rho0, &[4000.0], 1e-11).unwrap();
        let diff = ops::max_abs(&(traj.states[0].matrix() - ss.matrix()));
        assert!(diff < 1e-6, "{diff:e}");
    }

    #[test]
    fn resonant_flat_bath_rate() {
        let g = 0.01 * KAPPA;
        let sys = JcSystem::new(0.0, g, Gauge::Coulomb, 1.0, 1).unwrap();
        let l = build_generator(&sys, &flat(), 0.0).unwrap();
        let rate = l.decay_eigenvalue().unwrap();
        let purcell = 4.0 * g * g / KAPPA;
        assert!((rate.rate() - purcell).abs() / purcell < 0.02);
        assert!((rate.fitted_rate - rate.rate()).abs() / rate.rate() < 0.01);
    }

    #[test]
    fn perturbative_values() {
        let g = 0.002;
        for gauge in [Gauge::Dipole, Gauge::Coulomb] {
            let r = perturbative_rate(0.0, g, gauge, &flat()).unwrap();
            assert!((r - 4.0 * g * g / KAPPA).abs() < 1e-18);
        }
        for delta in [-0.1, -0.02, 0.0, 0.04, 0.1] {
            let w = 1.0 + delta;
            let c = perturbative_rate(delta, g, Gauge::Coulomb, &SystemBathCoupling::sub_ohmic(KAPPA, 1.0).unwrap()).unwrap();
            let d = perturbative_rate(delta, g, Gauge::Dipole, &SystemBathCoupling::power_law(KAPPA, 1.0, 0.5).unwrap()).unwrap();
            let hw2 = KAPPA * KAPPA / 4.0;
            let eq7 = 4.0 * g * g / KAPPA * w * hw2 / (hw2 + delta * delta);
            assert!((c - eq7).abs() <= 1e-13 * eq7);
            assert!((d - c).abs() <= 1e-13 * c);
        }
    }

    #[test]
    fn mismatch_ratio_column() {
        let t = gauge_compare(&[-0.1, 0.0, 0.05], 0.001, KAPPA, 1.0, false).unwrap();
        let w = t.column("omega0_over_omegac").unwrap();
        let r = t.column("mismatch_ratio").unwrap();
        for (w, r) in w.iter().zip(&r) {
            assert!((r - w).abs() < 1e-14);
        }
        let row0 = &t.rows[1];
        assert!(row0[2..6].iter().all(|x| (x - row0[2]).abs() < 1e-18));
    }

    #[test]
    fn negative_bath_frequency() {
        let sys = JcSystem::new(0.0, 0.8, Gauge::Dipole, 1.0, 3).unwrap();
        let err = build_generator(&sys, &flat(), 0.0).unwrap_err();
        assert!(matches!(err, Error::NegativeBathFrequency { .. }));
    }

    #[test]
    fn mismatched_omega_c() {
        let sys = JcSystem::new(0.0, 0.01, Gauge::Dipole, 1.0, 1).unwrap();
        let c = SystemBathCoupling::power_law(KAPPA, 2.0, 0.0).unwrap();
        assert!(build_generator(&sys, &c, 0.0).is_err());
    }
}

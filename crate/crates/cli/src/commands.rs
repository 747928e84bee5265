use anyhow::{bail, Result};
use qnmres::acceptance::{bundled_snapshot, run_all};
use qnmres::continuum::rate_sweep;
use qnmres::dressed::{analytic_single_excitation, diagonalize};
use qnmres::master::{build_generator, build_generator_with, perturbative_rate, DensityMatrix, DissipatorForm};
use qnmres::ops;
use qnmres::spectra::{emission_spectrum, figure3_suite, SpectrumResult};
use qnmres::spectral_density::spectral_density_curves;
use qnmres::table::Table;
use qnmres::FrequencyGrid;
use rayon::prelude::*;

use crate::config::{Config, Resolved};
use crate::manifest::Run;

pub fn rates(run: &mut Run, r: &Resolved) -> Result<bool> {
    let sweep = rate_sweep(&r.expansion, &r.sim.grid)?;
    run.write_csv("rates.csv", &sweep.table)?;
    if sweep.negative_points > 0 {
        run.warn(format!("{} grid points have a negative rate (single-expansion truncation)", sweep.negative_points));
    }
    run.diagnostic("gamma_at_resonance", sweep.gamma_at_resonance);
    run.diagnostic("slope_at_resonance", sweep.slope_at_resonance);
    run.diagnostic("expected_slope", sweep.expected_slope);
    run.diagnostic("tan_product", r.cavity_mode.tan_product());
    run.diagnostic("negative_points", sweep.negative_points);
    Ok(true)
}

pub fn dressed(run: &mut Run, r: &Resolved) -> Result<bool> {
    let system = r.system(r.sim.fock_cutoff)?;
    let basis = diagonalize(&system)?;
    let mut t = Table::new(["index", "excitation", "energy", "abs_lowering_from_ground"]);
    t.comment("dressed states of the rotating-frame JC Hamiltonian, sorted by energy");
    let ground = basis.ground();
    for k in 0..basis.dim() {
        t.push_row(vec![
            k as f64,
            basis.excitations()[k] as f64,
            basis.energies()[k],
            basis.lowering()[(ground, k)].norm(),
        ])?;
    }
    run.write_csv("dressed.csv", &t)?;
    run.diagnostic("g", system.g());
    run.diagnostic("unitarity_defect", basis.unitarity_defect());
    match analytic_single_excitation(system.delta(), system.g()) {
        Ok(se) => {
            let idx = basis.single_excitation();
            let dev = (basis.energies()[idx[0]] - se.omega_plus).abs().max((basis.energies()[idx[1]] - se.omega_minus).abs());
            run.diagnostic("single_excitation", se);
            run.diagnostic("single_excitation_energy_error", dev);
        }
        Err(e) => run.warn(format!("no analytic single-excitation comparison: {e}")),
    }
    Ok(true)
}

pub fn eig(run: &mut Run, r: &Resolved) -> Result<bool> {
    let omegas = r.sim.grid.points();
    let rows: Vec<Result<(Vec<f64>, Option<String>)>> = omegas
        .par_iter()
        .map(|&w0| {
            let delta = w0 - r.omega_c;
            let system = qnmres::dressed::JcSystem::new(delta, r.g_d, r.gauge, r.omega_c, r.sim.fock_cutoff)?;
            let pert = perturbative_rate(delta, r.g_d, r.gauge, &r.coupling)?;
            let full = build_generator(&system, &r.coupling, 0.0)?.decay_eigenvalue();
            let secular = build_generator_with(&system, &r.coupling, 0.0, DissipatorForm::Secular)?
                .decay_eigenvalue()
                .map(|d| d.rate())
                .unwrap_or(f64::NAN);
            let (rate, fitted, note) = match full {
                Ok(d) => (d.rate(), d.fitted_rate, None),
                Err(e) => (f64::NAN, f64::NAN, Some(format!("omega0 = {w0}: {e}"))),
            };
            Ok((vec![w0, delta, rate, fitted, pert, (rate - pert) / pert, secular], note))
        })
        .collect();
    let mut t = Table::new(["omega0", "delta", "rate", "fitted_rate", "perturbative", "relative_deviation", "rate_secular"]);
    t.comment("decay rate of an initially excited emitter: master-equation eigenvalue vs second-order formula");
    t.comment("NaN marks points where the eigenvalue and the population fit disagree (strong coupling)");
    let mut failures = Vec::new();
    for row in rows {
        let (row, note) = row?;
        t.push_row(row)?;
        failures.extend(note);
    }
    run.write_csv("eig.csv", &t)?;
    let dev = t.column("relative_deviation").unwrap_or_default();
    run.diagnostic("max_abs_relative_deviation", dev.iter().filter(|d| d.is_finite()).fold(0.0f64, |a, d| a.max(d.abs())));
    run.diagnostic("failed_points", failures.len());
    if !failures.is_empty() {
        run.warn(format!("{} points without an identifiable decay eigenvalue, first: {}", failures.len(), failures[0]));
    }
    Ok(true)
}

pub fn gauge_compare(run: &mut Run, r: &Resolved, numeric: bool) -> Result<bool> {
    let deltas: Vec<f64> = r.sim.grid.points().iter().map(|w| w - r.omega_c).collect();
    let t = qnmres::master::gauge_compare(&deltas, r.g_d, r.kappa, r.omega_c, numeric)?;
    run.write_csv("gauge_compare.csv", &t)?;
    if numeric {
        let bad = t.column("num_coulomb_nm12").unwrap_or_default().iter().filter(|v| v.is_nan()).count();
        if bad > 0 {
            run.warn(format!("{bad} detunings without an identifiable decay eigenvalue"));
        }
    }
    Ok(true)
}

pub fn evolve(run: &mut Run, r: &Resolved, cfg: &Config) -> Result<bool> {
    let system = r.system(r.sim.fock_cutoff)?;
    let l = build_generator(&system, &r.coupling, r.pump_rate)?;
    let d = l.dim();
    let rho0 = match cfg.sim.initial.as_str() {
        "excited" => DensityMatrix::basis_state(ops::index(0, true), d),
        "photon" => DensityMatrix::basis_state(ops::index(1, false), d),
        "ground" => DensityMatrix::basis_state(ops::index(0, false), d),
        other => bail!("unknown sim.initial `{other}` (expected excited, photon or ground)"),
    };
    let times = FrequencyGrid::new(0.0, r.sim.t_max, cfg.sim.samples)?.points();
    let traj = l.evolve(&rho0, &times, r.sim.tolerance)?;
    run.write_csv("evolve.csv", &traj.to_table())?;
    run.diagnostic("fock_cutoff", r.sim.fock_cutoff);
    run.diagnostic("accepted_steps", traj.stats.accepted);
    run.diagnostic("rejected_steps", traj.stats.rejected);
    run.diagnostic("trace_drift", traj.trace_drift);
    run.diagnostic("min_eigenvalue", traj.min_eigenvalue);
    if traj.min_eigenvalue < -1e-8 {
        run.warn(format!("density matrix lost positivity (min eigenvalue {:e})", traj.min_eigenvalue));
    }
    if l.clamped_transitions() > 0 {
        run.warn(format!("{} transitions fall where chi_c < 0 and were clamped", l.clamped_transitions()));
    }
    Ok(true)
}

fn spectrum_diagnostics(run: &mut Run, name: &str, s: &SpectrumResult) {
    run.diagnostic(&format!("{name}_fock_cutoff"), s.params.and_then(|p| p.fock_cutoff));
    run.diagnostic(&format!("{name}_peaks"), &s.peaks);
    run.diagnostic(&format!("{name}_peak_height_ratio"), s.peak_height_ratio());
    run.diagnostic(&format!("{name}_imag_residue"), s.imag_residue);
}

pub fn spectrum(run: &mut Run, r: &Resolved, cfg: &Config, figure3: bool) -> Result<bool> {
    let setup = r.spectrum_setup(cfg);
    if figure3 {
        let fig = figure3_suite(&setup)?;
        run.write_csv("figure3_spectra.csv", &fig.curves_table()?)?;
        run.write_csv("figure3_peaks.csv", &fig.peaks_table()?)?;
        for (name, s) in &fig.spectra {
            spectrum_diagnostics(run, name, s);
        }
    } else {
        let s = emission_spectrum(&setup)?;
        let mut t = Table::new(["detuning", "S"]);
        t.comment("normalized intracavity emission spectrum; detuning = (omega - omega_c)/omega_c");
        for (d, v) in s.detuning.iter().zip(&s.intensity) {
            t.push_row(vec![*d, *v])?;
        }
        run.write_csv("spectrum.csv", &t)?;
        let mut p = Table::new(["position", "height", "fwhm"]);
        for peak in &s.peaks {
            p.push_row(vec![peak.position, peak.height, peak.fwhm])?;
        }
        run.write_csv("spectrum_peaks.csv", &p)?;
        spectrum_diagnostics(run, "spectrum", &s);
    }
    Ok(true)
}

pub fn sd_curves(run: &mut Run, r: &Resolved, phis: &[f64]) -> Result<bool> {
    let g = &r.sim.grid;
    let grid = FrequencyGrid::positive(g.min() / r.omega_c, g.max() / r.omega_c, g.count())?;
    let t = spectral_density_curves(r.q_factor, phis, &grid)?;
    run.write_csv("sd_curves.csv", &t)?;
    Ok(true)
}

pub fn accept(run: &mut Run) -> Result<bool> {
    let snapshot = bundled_snapshot()?;
    let reports = run_all(Some(&snapshot));
    for rep in &reports {
        println!("{rep}");
    }
    let passed = reports.iter().all(|r| r.passed);
    println!("acceptance: {} of {} criteria passed", reports.iter().filter(|r| r.passed).count(), reports.len());
    run.write_json("acceptance.json", &reports)?;
    run.diagnostic("all_passed", passed);
    Ok(passed)
}

use qnmres::dressed::{analytic_single_excitation, JcSystem};
use qnmres::master::build_generator;
use qnmres::spectra::{correlation, emission_spectrum, max_abs_difference, tau_grid, SpectrumSetup};
use qnmres::SystemBathCoupling;

fn base() -> SpectrumSetup {
    SpectrumSetup { fock_cutoff: Some(3), ..SpectrumSetup::default() }
}

#[test]
fn refinement_is_stable() {
    for n in [0.0, -0.5] {
        let coarse = SpectrumSetup { exponent_n: n, ..base() };
        let fine = SpectrumSetup { dtau: coarse.dtau / 2.0, detuning_points: 2 * coarse.detuning_points - 1, ..coarse };
        let a = emission_spectrum(&coarse).unwrap();
        let b = emission_spectrum(&fine).unwrap();
        let b_on_coarse: Vec<f64> = b.intensity.iter().step_by(2).copied().collect();
        assert_eq!(b_on_coarse.len(), a.intensity.len());
        let diff = max_abs_difference(&a.intensity, &b_on_coarse);
        assert!(diff <= 1e-3, "n = {n}: {diff:e}");
    }
}

#[test]
fn shape_is_pump_independent_when_weak() {
    // pumping broadens the emitter, so the normalized shape drifts linearly in P
    let kappa = base().kappa_c();
    let change = |p: f64| {
        let a = emission_spectrum(&SpectrumSetup { pump_rate: p, ..base() }).unwrap();
        let b = emission_spectrum(&SpectrumSetup { pump_rate: p / 2.0, ..base() }).unwrap();
        max_abs_difference(&a.intensity, &b.intensity)
    };
    let weak = change(0.005 * kappa);
    let weaker = change(0.0025 * kappa);
    assert!(weak <= 1e-2, "{weak:e}");
    assert!((weak / weaker - 2.0).abs() < 0.1, "{}", weak / weaker);
}

#[test]
fn peaks_approach_dressed_energies_for_narrow_cavity() {
    let g = 0.05;
    for delta in [0.0, 0.02] {
        let setup = SpectrumSetup {
            q_c: 1.0 / (g / 5.0),
            g_d: g,
            delta,
            pump_rate: 1e-5,
            detuning_points: 1201,
            ..base()
        };
        let s = emission_spectrum(&setup).unwrap();
        let gc = setup.gauge.coupling(g, 1.0 + delta, 1.0);
        let se = analytic_single_excitation(delta, gc).unwrap();
        let (lo, hi) = s.doublet().unwrap();
        assert!((lo.position - se.omega_minus).abs() <= 0.05 * g, "{} vs {}", lo.position, se.omega_minus);
        assert!((hi.position - se.omega_plus).abs() <= 0.05 * g, "{} vs {}", hi.position, se.omega_plus);
    }
}

#[test]
fn correlation_is_bounded_and_real_at_zero() {
    let setup = base();
    let sys = JcSystem::new(0.0, setup.g_d, setup.gauge, 1.0, 3).unwrap();
    let l = build_generator(&sys, &setup.coupling().unwrap(), setup.pump_rate).unwrap();
    let ss = l.steady_state().unwrap();
    let tau = tau_grid(&l, 0.5).unwrap();
    let c = correlation(&l, &ss, &tau, 1e-10).unwrap();
    let c0 = c.at_zero();
    assert!(c0.re > 0.0);
    assert!(c0.im.abs() <= 1e-9 * c0.re);
    assert!((c0.re - ss.photon_number()).abs() <= 1e-12);
    assert!(c.values.iter().all(|v| v.norm() <= c0.re * (1.0 + 1e-9)));
    assert!(c.values.last().unwrap().norm() <= 1e-6 * c0.re);
}

#[test]
fn automatic_cutoff_is_converged() {
    let auto = emission_spectrum(&SpectrumSetup::default()).unwrap();
    let cutoff = auto.params.unwrap().fock_cutoff.unwrap();
    let bigger = emission_spectrum(&SpectrumSetup { fock_cutoff: Some(cutoff + 2), ..SpectrumSetup::default() }).unwrap();
    assert!(max_abs_difference(&auto.intensity, &bigger.intensity) < 1e-3);
    assert!(auto.intensity.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn flat_bath_doublet_is_symmetric() {
    let s = emission_spectrum(&SpectrumSetup { phi0: 0.0, chi_corrected: true, ..base() }).unwrap();
    let plain = emission_spectrum(&SpectrumSetup { phi0: 0.0, ..base() }).unwrap();
    // χ = 1 at φ₀ = 0
    assert!(max_abs_difference(&s.intensity, &plain.intensity) < 1e-12);
    let r = s.peak_height_ratio().unwrap();
    assert!((r - 1.0).abs() < 1e-6);
    let c = SystemBathCoupling::power_law(0.05, 1.0, 0.0).unwrap();
    assert_eq!(c.spectral_density(1.0).unwrap(), 0.05);
}

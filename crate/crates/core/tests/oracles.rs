//! Reference values computed independently at 30-digit precision.

#![allow(clippy::excessive_precision)]

use qnmres::continuum::single_mode_rate;
use qnmres::dressed::{analytic_single_excitation, diagonalize, JcSystem};
use qnmres::master::perturbative_rate;
use qnmres::{Gauge, QnmMode, SystemBathCoupling};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn single_mode_rates() {
    let cases = [
        (1.02, 20.0, 0.05, 0.03, 0.11819925871300993605),
        (0.93, 150.0, 0.01, -0.2, -0.00091612038473284085637),
        (1.3, 7.5, 0.08, 0.25, -0.015032760353524883763),
    ];
    for (w0, q, g, phi, expected) in cases {
        let mode = QnmMode::with_quality(1.0, q, g, phi).unwrap();
        let got = single_mode_rate(&mode, w0).unwrap();
        assert!(close(got, expected, 1e-13), "{got} vs {expected}");
    }
}

#[test]
fn second_order_rates() {
    let sub = SystemBathCoupling::sub_ohmic(0.05, 1.0).unwrap();
    let dip = SystemBathCoupling::power_law(0.05, 1.0, 0.5).unwrap();
    assert!(close(perturbative_rate(0.03, 0.002, Gauge::Coulomb, &sub).unwrap(), 0.0001350819672131147541, 1e-13));
    assert!(close(perturbative_rate(-0.07, 0.002, Gauge::Dipole, &dip).unwrap(), 0.000033665158371040723982, 1e-13));
}

#[test]
fn phase_corrected_density() {
    let c = SystemBathCoupling::phase_corrected(0.05, 1.0, 0.03, 20.0).unwrap();
    assert!(close(c.chi(1.04), 0.90225812956809280683, 1e-14));
    assert!(close(c.spectral_density(1.04).unwrap(), 0.043377794690773692636, 1e-14));
}

#[test]
fn dressed_energies() {
    let se = analytic_single_excitation(0.02, 0.05).unwrap();
    assert!(close(se.omega_plus, 0.0609901951359278483, 1e-14));
    assert!(close(se.omega_minus, -0.0409901951359278483, 1e-14));
    assert!(close(se.c_plus, 0.63398890560553816685, 1e-14));

    let basis = diagonalize(&JcSystem::new(0.02, 0.05, Gauge::Dipole, 1.0, 4).unwrap()).unwrap();
    let two: Vec<f64> = (0..basis.dim()).filter(|&i| basis.excitations()[i] == 2).map(|i| basis.energies()[i]).collect();
    assert_eq!(two.len(), 2);
    assert!(close(two[0], -0.06141428428542849998, 1e-13));
    assert!(close(two[1], 0.08141428428542849998, 1e-13));
}

//! Jaynes-Cummings system Hamiltonian in the frame rotating at ω_c, and its
//! dressed eigenbasis.
//!
//! H = Δσ⁺σ⁻ + g(aσ⁺ + a†σ⁻) conserves the excitation number, so the
//! diagonalization runs block by block. This keeps every dressed state inside
//! one excitation manifold, which the master-equation builder relies on.

use faer::complex_native::c64;
use faer::{Mat, Side};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Gauge;
use crate::ops::{self, ZERO};

/// JC parameters with the coupling already resolved for the gauge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JcSystem {
    delta: f64,
    g_d: f64,
    g_gauge: f64,
    gauge: Gauge,
    omega_c: f64,
    fock_cutoff: usize,
}

impl JcSystem {
    /// `g_d` is the dipole-gauge coupling; the Hamiltonian uses
    /// g_c = (ω₀/ω_c)·g_d in the Coulomb gauge.
    pub fn new(delta: f64, g_d: f64, gauge: Gauge, omega_c: f64, fock_cutoff: usize) -> Result<Self> {
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::NonPositiveFrequency { what: "cavity frequency", value: omega_c });
        }
        let omega_0 = omega_c + delta;
        if !(omega_0.is_finite() && omega_0 > 0.0) {
            return Err(Error::NonPositiveFrequency { what: "TLS frequency", value: omega_0 });
        }
        if !(g_d.is_finite() && g_d >= 0.0) {
            return Err(Error::NegativeCoupling(g_d));
        }
        if fock_cutoff < 1 {
            return Err(Error::InvalidParameter("fock_cutoff must be >= 1".into()));
        }
        Ok(Self { delta, g_d, g_gauge: gauge.coupling(g_d, omega_0, omega_c), gauge, omega_c, fock_cutoff })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn g_d(&self) -> f64 {
        self.g_d
    }

    pub fn g(&self) -> f64 {
        self.g_gauge
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega_0(&self) -> f64 {
        self.omega_c + self.delta
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn dim(&self) -> usize {
        ops::dim(self.fock_cutoff)
    }

    pub fn with_cutoff(mut self, fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 1 {
            return Err(Error::InvalidParameter("fock_cutoff must be >= 1".into()));
        }
        self.fock_cutoff = fock_cutoff;
        Ok(self)
    }

    pub fn hamiltonian(&self) -> Mat<c64> {
        let a = ops::annihilation(self.fock_cutoff);
        let sm = ops::sigma_minus(self.fock_cutoff);
        let sp = ops::adjoint(&sm);
        let ad = ops::adjoint(&a);
        let h_tls = ops::scaled(&(&sp * &sm), c64::new(self.delta, 0.0));
        let h_int = ops::scaled(&(&(&a * &sp) + &(&ad * &sm)), c64::new(self.g_gauge, 0.0));
        &h_tls + &h_int
    }
}

/// Closed-form single-excitation quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleExcitation {
    pub eta: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// ⟨G|a|+⟩
    pub c_plus: f64,
    /// ⟨G|a|−⟩
    pub c_minus: f64,
}

/// η = √(Δ² + 4g²), ω_± = (Δ ± η)/2, c_± = √((1 ∓ Δ/η)/2).
pub fn analytic_single_excitation(delta: f64, g: f64) -> Result<SingleExcitation> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::NegativeCoupling(g));
    }
    let eta = (delta * delta + 4.0 * g * g).sqrt();
    if eta < 1e-14 {
        return Err(Error::DegenerateManifold { eta });
    }
    let ratio = delta / eta;
    Ok(SingleExcitation {
        eta,
        omega_plus: 0.5 * (delta + eta),
        omega_minus: 0.5 * (delta - eta),
        c_plus: (0.5 * (1.0 - ratio)).max(0.0).sqrt(),
        c_minus: (0.5 * (1.0 + ratio)).max(0.0).sqrt(),
    })
}

/// Eigendecomposition of H with the lowering operator in the dressed basis.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    energies: Vec<f64>,
    excitations: Vec<usize>,
    states: Mat<c64>,
    lowering: Mat<c64>,
}

impl DressedBasis {
    /// Eigenvalues in ascending order (rotating-frame energies).
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Excitation number of each dressed state.
    pub fn excitations(&self) -> &[usize] {
        &self.excitations
    }

    /// Columns are eigenvectors over the product basis.
    pub fn states(&self) -> &Mat<c64> {
        &self.states
    }

    /// ⟨j|a|k⟩ in the dressed basis.
    pub fn lowering(&self) -> &Mat<c64> {
        &self.lowering
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Index of |G⟩ = |0, g⟩.
    pub fn ground(&self) -> usize {
        self.excitations.iter().position(|&n| n == 0).expect("ground state present")
    }

    /// Indices of the one-excitation states ordered (+, −).
    pub fn single_excitation(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.dim()).filter(|&i| self.excitations[i] == 1).collect();
        idx.sort_by(|&a, &b| self.energies[b].total_cmp(&self.energies[a]));
        idx
    }

    /// Map a dressed-basis matrix to the product basis: U·M·U†.
    pub fn to_bare(&self, m: &Mat<c64>) -> Mat<c64> {
        &(&self.states * m) * self.states.adjoint()
    }

    /// max |U†U − 1|
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        ops::max_abs(&(&(self.states.adjoint() * &self.states) - &ops::identity(d)))
    }
}

/// Numeric eigendecomposition of the JC Hamiltonian for any cutoff.
///
/// Each eigenvector's largest-magnitude component (first one on ties) is made
/// real and positive.
pub fn diagonalize(system: &JcSystem) -> Result<DressedBasis> {
    let h = system.hamiltonian();
    let d = system.dim();
    let max_n = system.fock_cutoff() + 1;

    let mut found: Vec<(f64, usize, Vec<c64>)> = Vec::with_capacity(d);
    for n in 0..=max_n {
        let block: Vec<usize> = (0..d).filter(|&i| ops::excitation(i) == n).collect();
        if block.is_empty() {
            continue;
        }
        let sub = Mat::from_fn(block.len(), block.len(), |i, j| h[(block[i], block[j])]);
        let eig = sub.selfadjoint_eigendecomposition(Side::Lower);
        let values = eig.s().column_vector();
        let u = eig.u();
        for k in 0..block.len() {
            let e = values.read(k);
            if !e.re.is_finite() {
                return Err(Error::Eigensolver(format!("non-finite eigenvalue in block {n}")));
            }
            let mut v = vec![ZERO; d];
            for (r, &row) in block.iter().enumerate() {
                v[row] = u.read(r, k);
            }
            fix_phase(&mut v);
            found.push((e.re, n, v));
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let energies: Vec<f64> = found.iter().map(|f| f.0).collect();
    let excitations: Vec<usize> = found.iter().map(|f| f.1).collect();
    let states = Mat::from_fn(d, d, |i, j| found[j].2[i]);
    let a = ops::annihilation(system.fock_cutoff());
    let lowering = &(states.adjoint() * &a) * &states;

    let basis = DressedBasis { energies, excitations, states, lowering };
    let defect = basis.unitarity_defect();
    if defect > 1e-12 {
        return Err(Error::Eigensolver(format!("eigenvectors not unitary (defect {defect:e})")));
    }
    Ok(basis)
}

fn fix_phase(v: &mut [c64]) {
    let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    let pivot = v.iter().position(|x| x.norm() >= peak * (1.0 - 1e-12)).unwrap_or(0);
    let p = v[pivot];
    let rot = p.conj() * (1.0 / p.norm());
    for x in v.iter_mut() {
        *x *= rot;
    }
    v[pivot] = c64::new(v[pivot].norm(), 0.0);
}

//! Operators on the truncated Fock ⊗ TLS space and column-stacking
//! superoperator helpers.
//!
//! Product basis |n⟩ ⊗ {|g⟩, |e⟩}, n-major: index = 2n + s with s = 0 for
//! |g⟩ and s = 1 for |e⟩. With a Fock cutoff N the dimension is 2(N + 1).
//!
//! vec(ρ) stacks columns, so ρ_ij sits at i + j·D and the superoperator of
//! ρ ↦ AρB is Bᵀ ⊗ A.

use faer::complex_native::c64;
use faer::Mat;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn dim(fock_cutoff: usize) -> usize {
    2 * (fock_cutoff + 1)
}

pub fn index(n: usize, excited: bool) -> usize {
    2 * n + excited as usize
}

/// Total excitation number n + s of a product-basis index.
pub fn excitation(index: usize) -> usize {
    index / 2 + index % 2
}

/// Cavity annihilation operator a ⊗ 1.
pub fn annihilation(fock_cutoff: usize) -> Mat<c64> {
    let d = dim(fock_cutoff);
    let mut a = Mat::zeros(d, d);
    for n in 1..=fock_cutoff {
        for s in [false, true] {
            a[(index(n - 1, s), index(n, s))] = c64::new((n as f64).sqrt(), 0.0);
        }
    }
    a
}

/// TLS lowering operator 1 ⊗ σ⁻.
pub fn sigma_minus(fock_cutoff: usize) -> Mat<c64> {
    let d = dim(fock_cutoff);
    let mut s = Mat::zeros(d, d);
    for n in 0..=fock_cutoff {
        s[(index(n, false), index(n, true))] = ONE;
    }
    s
}

pub fn identity(d: usize) -> Mat<c64> {
    Mat::identity(d, d)
}

pub fn adjoint(m: &Mat<c64>) -> Mat<c64> {
    m.adjoint().to_owned()
}

pub fn scaled(m: &Mat<c64>, k: c64) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * k)
}

pub fn trace(m: &Mat<c64>) -> c64 {
    (0..m.nrows()).fold(ZERO, |acc, i| acc + m[(i, i)])
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat<c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn vectorize(m: &Mat<c64>) -> Vec<c64> {
    let d = m.nrows();
    let mut v = vec![ZERO; d * m.ncols()];
    for j in 0..m.ncols() {
        for i in 0..d {
            v[i + j * d] = m[(i, j)];
        }
    }
    v
}

pub fn unvectorize(v: &[c64], d: usize) -> Mat<c64> {
    assert_eq!(v.len(), d * d, "vector length is not a square dimension");
    Mat::from_fn(d, d, |i, j| v[i + j * d])
}

/// Accumulate `coef`·(Bᵀ ⊗ A) into the superoperator `l`, i.e. add the map
/// ρ ↦ coef·AρB.
pub fn add_sandwich(l: &mut Mat<c64>, a: &Mat<c64>, b: &Mat<c64>, coef: c64) {
    let d = a.nrows();
    debug_assert_eq!(l.nrows(), d * d);
    // vec(AρB)_{i + jD} = Σ_{k,l} A_ik B_lj ρ_kl
    for j in 0..d {
        for lidx in 0..d {
            let blj = b[(lidx, j)];
            if blj == ZERO {
                continue;
            }
            let bc = blj * coef;
            for k in 0..d {
                let col = k + lidx * d;
                for i in 0..d {
                    let aik = a[(i, k)];
                    if aik != ZERO {
                        l[(i + j * d, col)] += aik * bc;
                    }
                }
            }
        }
    }
}

/// Dense matrix-vector product y = L·x into `out`.
pub fn matvec(l: &Mat<c64>, x: &[c64], out: &mut [c64]) {
    out.iter_mut().for_each(|o| *o = ZERO);
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        let col = l.col_as_slice(j);
        for (o, &lij) in out.iter_mut().zip(col) {
            *o += lij * xj;
        }
    }
}

/// Tr(A·B) without forming the product.
pub fn trace_product(a: &Mat<c64>, b: &Mat<c64>) -> c64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize, seed: f64) -> Mat<c64> {
        Mat::from_fn(d, d, |i, j| c64::new((seed + i as f64 * 1.3 + j as f64).sin(), (seed * 0.7 + (i * j) as f64).cos()))
    }

    #[test]
    fn sandwich_matches_direct_product() {
        let d = 4;
        let (a, b, rho) = (sample(d, 0.1), sample(d, 0.9), sample(d, 2.3));
        let mut l = Mat::zeros(d * d, d * d);
        add_sandwich(&mut l, &a, &b, c64::new(0.5, -1.0));
        let mut out = vec![ZERO; d * d];
        matvec(&l, &vectorize(&rho), &mut out);
        let direct = scaled(&(&(&a * &rho) * &b), c64::new(0.5, -1.0));
        let got = unvectorize(&out, d);
        assert!(max_abs(&(&got - &direct)) < 1e-13);
    }

    #[test]
    fn ladder_operators() {
        let a = annihilation(3);
        let ad = adjoint(&a);
        let comm = &(&a * &ad) - &(&ad * &a);
        // [a, a†] = 1 except at the truncation edge
        for n in 0..3 {
            for s in [false, true] {
                let i = index(n, s);
                assert!((comm[(i, i)] - ONE).norm() < 1e-14);
            }
        }
        let sm = sigma_minus(3);
        assert_eq!(sm[(index(2, false), index(2, true))], ONE);
        assert_eq!(excitation(index(2, true)), 3);
        assert_eq!(dim(3), 8);
    }
}

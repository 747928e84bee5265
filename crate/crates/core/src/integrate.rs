//! Adaptive Dormand-Prince 5(4) integration of linear systems ẏ = f(y) over
//! complex state vectors.

use faer::complex_native::c64;

use crate::error::{Error, Result};
use crate::ops::ZERO;

// Dormand-Prince tableau (nodes c_i unused: f has no explicit time dependence)
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Local error bound per step (mixed absolute/relative).
    pub tolerance: f64,
    /// Largest step allowed.
    pub max_step: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance, max_step: f64::INFINITY, max_steps: 10_000_000 }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate from t = 0 and record the state at every time in `times`
/// (non-decreasing, starting at or after 0). `f(y, out)` writes ẏ.
pub fn integrate<F>(
    mut f: F,
    y0: &[c64],
    times: &[f64],
    control: StepControl,
) -> Result<(Vec<Vec<c64>>, IntegrationStats)>
where
    F: FnMut(&[c64], &mut [c64]),
{
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0.to_vec();
    let mut t = 0.0;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t0| t0 < 0.0) {
        return Err(Error::InvalidParameter("output times must be non-decreasing and >= 0".into()));
    }

    let mut k: [Vec<c64>; 7] = std::array::from_fn(|_| vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    f(&y, &mut k[0]);

    let scale0 = y.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let deriv0 = k[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut h = if deriv0 > 0.0 { 0.01 * scale0 / deriv0 } else { 1.0 };
    h = h.min(control.max_step);

    for &target in times {
        while t < target {
            if stats.accepted + stats.rejected >= control.max_steps {
                return Err(Error::ToleranceNotMet(format!("exceeded {} steps before t = {target}", control.max_steps)));
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }

            stage(&y, &[(A21, &k[0])], step, &mut tmp);
            f(&tmp, &mut k[1]);
            stage(&y, &[(A31, &k[0]), (A32, &k[1])], step, &mut tmp);
            f(&tmp, &mut k[2]);
            stage(&y, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])], step, &mut tmp);
            f(&tmp, &mut k[3]);
            stage(&y, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])], step, &mut tmp);
            f(&tmp, &mut k[4]);
            stage(&y, &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])], step, &mut tmp);
            f(&tmp, &mut k[5]);
            stage(&y, &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])], step, &mut y_new);
            f(&y_new, &mut k[6]);

            let mut err_sq = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * step;
                let sc = control.tolerance * (1.0 + y[i].norm().max(y_new[i].norm()));
                err_sq += e.norm_sqr() / (sc * sc);
            }
            let err = (err_sq / n as f64).sqrt();

            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = (step * grow).min(control.max_step);
                } else {
                    h = h.max(step * grow).min(control.max_step);
                }
            } else {
                stats.rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

fn stage(y: &[c64], terms: &[(f64, &Vec<c64>)], h: f64, out: &mut [c64]) {
    out.copy_from_slice(y);
    for &(a, k) in terms {
        let s = a * h;
        for (o, &ki) in out.iter_mut().zip(k.iter()) {
            *o += ki * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_rotation() {
        // ẏ = (−0.3 + 2i) y
        let lambda = c64::new(-0.3, 2.0);
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let (ys, stats) = integrate(|y, out| out[0] = lambda * y[0], &[c64::new(1.0, 0.0)], &times, StepControl::new(1e-11)).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            let exact = (lambda * *t).exp();
            assert!((y[0] - exact).norm() < 1e-9, "t = {t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn zero_generator_is_identity() {
        let y0 = [c64::new(0.3, 0.1), c64::new(-2.0, 0.5)];
        let (ys, _) = integrate(|_, out| out.iter_mut().for_each(|o| *o = ZERO), &y0, &[1.0, 100.0], StepControl::new(1e-10)).unwrap();
        assert_eq!(ys[1], y0.to_vec());
    }

    #[test]
    fn rejects_unsorted_times() {
        let r = integrate(|_, out| out[0] = ZERO, &[ZERO], &[1.0, 0.5], StepControl::new(1e-8));
        assert!(r.is_err());
    }

    #[test]
    fn step_budget() {
        let control = StepControl { tolerance: 1e-12, max_step: f64::INFINITY, max_steps: 5 };
        let r = integrate(|y, out| out[0] = c64::new(0.0, 50.0) * y[0], &[c64::new(1.0, 0.0)], &[100.0], control);
        assert!(matches!(r, Err(Error::ToleranceNotMet(_))));
    }
}

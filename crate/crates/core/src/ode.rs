//! Adaptive Dormand–Prince 5(4) integrator over real or complex state vectors.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

pub trait OdeScalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn magnitude(self) -> f64;
}

impl OdeScalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl OdeScalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; 0 picks one from the interval length.
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 0.0,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Work<T> {
    k: [Vec<T>; 7],
    tmp: Vec<T>,
    y_new: Vec<T>,
}

fn combo<T: OdeScalar>(out: &mut [T], y: &[T], h: f64, terms: &[(f64, &[T])]) {
    for i in 0..y.len() {
        let mut acc = T::default();
        for (c, k) in terms {
            acc = acc + k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates y' = f(t, y) and returns y at each requested time.
///
/// `times` must be non-decreasing and start at or after `t0`. Steps are
/// clipped so every requested time is hit exactly.
pub fn integrate_at<T, F>(
    mut f: F,
    t0: f64,
    y0: &[T],
    times: &[f64],
    tol: Tolerances,
) -> Result<(Vec<Vec<T>>, OdeStats)>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(times.len());
    let mut w = Work {
        k: std::array::from_fn(|_| vec![T::default(); n]),
        tmp: vec![T::default(); n],
        y_new: vec![T::default(); n],
    };
    let span = times.last().map(|&tf| tf - t0).unwrap_or(0.0);
    let mut h = if tol.h_init > 0.0 { tol.h_init } else { (span.abs() * 1e-3).max(f64::MIN_POSITIVE) };
    f(t, &y, &mut w.k[0]);

    for &target in times {
        if target < t {
            return Err(Error::Integration(format!("output time {target} precedes current time {t}")));
        }
        while t < target {
            if stats.accepted + stats.rejected >= tol.max_steps {
                return Err(Error::Integration(format!("step budget {} exhausted at t = {t}", tol.max_steps)));
            }
            let last = h >= target - t;
            let hs = if last { target - t } else { h };
            let err = step(&mut f, t, &y, hs, &mut w, &tol);
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                std::mem::swap(&mut y, &mut w.y_new);
                // FSAL: k7 is f at the new point
                w.k.swap(0, 6);
                stats.accepted += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    h = hs * fac;
                }
            } else {
                stats.rejected += 1;
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h <= f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::Integration(format!("step size underflow at t = {t}")));
                }
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

/// Integrates from `t0` to `t1` and returns the final state.
pub fn integrate<T, F>(f: F, t0: f64, y0: &[T], t1: f64, tol: Tolerances) -> Result<(Vec<T>, OdeStats)>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
{
    let (mut ys, stats) = integrate_at(f, t0, y0, &[t1], tol)?;
    Ok((ys.pop().expect("one output"), stats))
}

fn step<T, F>(f: &mut F, t: f64, y: &[T], h: f64, w: &mut Work<T>, tol: &Tolerances) -> f64
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
{
    let [k1, k2, k3, k4, k5, k6, k7] = &mut w.k;
    let tmp = &mut w.tmp;
    combo(tmp, y, h, &[(A21, &k1[..])]);
    f(t + C2 * h, tmp, k2);
    combo(tmp, y, h, &[(A31, &k1[..]), (A32, &k2[..])]);
    f(t + C3 * h, tmp, k3);
    combo(tmp, y, h, &[(A41, &k1[..]), (A42, &k2[..]), (A43, &k3[..])]);
    f(t + C4 * h, tmp, k4);
    combo(tmp, y, h, &[(A51, &k1[..]), (A52, &k2[..]), (A53, &k3[..]), (A54, &k4[..])]);
    f(t + C5 * h, tmp, k5);
    combo(tmp, y, h, &[(A61, &k1[..]), (A62, &k2[..]), (A63, &k3[..]), (A64, &k4[..]), (A65, &k5[..])]);
    f(t + h, tmp, k6);
    combo(&mut w.y_new, y, h, &[(B1, &k1[..]), (B3, &k3[..]), (B4, &k4[..]), (B5, &k5[..]), (B6, &k6[..])]);
    f(t + h, &w.y_new, k7);

    let mut sum = 0.0;
    for i in 0..y.len() {
        let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        let scale = tol.atol + tol.rtol * y[i].magnitude().max(w.y_new[i].magnitude());
        let r = e.magnitude() / scale;
        sum += r * r;
    }
    (sum / y.len().max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let (y, _) = integrate(|_, y: &[f64], dy: &mut [f64]| dy[0] = -y[0], 0.0, &[1.0], 5.0, Tolerances::default())
            .unwrap();
        assert!((y[0] - (-5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn complex_rotation() {
        let i = Complex64::i();
        let (ys, _) = integrate_at(
            |_, y: &[Complex64], dy: &mut [Complex64]| dy[0] = -i * y[0],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &[1.0, 2.0, 10.0],
            Tolerances::default(),
        )
        .unwrap();
        for (y, t) in ys.iter().zip([1.0f64, 2.0, 10.0]) {
            assert!((y[0] - Complex64::from_polar(1.0, -t)).norm() < 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let (y, stats) = integrate(
            |_, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            100.0,
            Tolerances::default(),
        )
        .unwrap();
        assert!((y[0] - 100f64.cos()).abs() < 1e-8);
        assert!(stats.accepted > 0);
    }
}

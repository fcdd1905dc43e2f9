//! Offline calibration of (ω_q, ω, λ) from the undriven joint evolution of
//! qubit and resonator.
//!
//! With the resonator starting in its ground state the mean-field solution is
//! σ^x(t) = σ^x(0) cos ξ + σ^y(0) sin ξ with
//! ξ = 2ω_q t + σ^z κ t − σ^z κ sin(ωt)/ω and κ = λ²/ω.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::report::sci;

const MIN_SAMPLES: usize = 100;
const MIN_SHOTS: u32 = 100;
const PERIODOGRAM_POINTS: usize = 20_000;
const LM_MAX_ITER: usize = 500;
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub omega_q: f64,
    pub omega: f64,
    pub lambda: f64,
}

impl CalibrationParams {
    pub fn kappa(&self) -> f64 {
        self.lambda * self.lambda / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeState {
    /// (σ^x, σ^y, σ^z).
    pub bloch: [f64; 3],
    /// ⟨a + a†⟩.
    pub quadrature: f64,
}

fn phase(t: f64, sz: f64, omega_q: f64, omega: f64, kappa: f64) -> f64 {
    2.0 * omega_q * t + sz * kappa * (t - (omega * t).sin() / omega)
}

/// Closed-form undriven evolution from Bloch vector `s0`.
pub fn free_evolution(t: f64, s0: [f64; 3], p: &CalibrationParams) -> FreeState {
    let [sx, sy, sz] = s0;
    let (s, c) = phase(t, sz, p.omega_q, p.omega, p.kappa()).sin_cos();
    FreeState {
        bloch: [sx * c + sy * s, sy * c - sx * s, sz],
        quadrature: p.lambda * sz / p.omega * ((p.omega * t).cos() - 1.0),
    }
}

/// Bloch vector for polar angle `theta` and azimuth `phi`.
pub fn bloch_vector(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub sigma_x: f64,
    pub shots: u32,
    /// Preparation polar angle.
    pub theta: f64,
    /// Preparation azimuth.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub samples: Vec<Sample>,
    pub truth: Option<CalibrationParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDesign {
    /// Samples per preparation spaced 1/ω_q apart.
    pub dense_points: usize,
    /// Geometrically spaced samples per preparation after the dense block.
    pub geometric_points: usize,
    /// Last sample time in units of 1/ω.
    pub t_end: f64,
    pub shots: u32,
    /// Binomial shot noise; off gives exact expectation values.
    pub shot_noise: bool,
    /// (θ, φ) of each preparation.
    pub preparations: Vec<(f64, f64)>,
}

impl Default for RecordDesign {
    fn default() -> Self {
        Self {
            dense_points: 40,
            geometric_points: 60,
            t_end: 2e4,
            shots: 10_000,
            shot_noise: true,
            preparations: vec![(PI / 4.0, PI / 4.0), (3.0 * PI / 4.0, PI / 4.0)],
        }
    }
}

impl RecordDesign {
    pub fn times(&self, p: &CalibrationParams) -> Vec<f64> {
        let step = 1.0 / p.omega_q;
        let mut t: Vec<f64> = (1..=self.dense_points).map(|i| i as f64 * step).collect();
        let t0 = self.dense_points as f64 * step;
        let t1 = self.t_end / p.omega;
        let g = self.geometric_points as f64;
        t.extend((1..=self.geometric_points).map(|i| t0 * (t1 / t0).powf(i as f64 / g)));
        t
    }
}

/// Synthetic measurement record drawn from [`free_evolution`].
pub fn synthetic_record(p: &CalibrationParams, design: &RecordDesign, seed: u64) -> CalibrationRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times = design.times(p);
    let mut samples = Vec::with_capacity(times.len() * design.preparations.len());
    for &(theta, phi) in &design.preparations {
        let s0 = bloch_vector(theta, phi);
        for &t in &times {
            let mean = free_evolution(t, s0, p).bloch[0];
            let sigma_x = if design.shot_noise {
                let q = 0.5 * (1.0 + mean);
                let up = (0..design.shots).filter(|_| rng.random::<f64>() < q).count();
                2.0 * up as f64 / design.shots as f64 - 1.0
            } else {
                mean
            };
            samples.push(Sample {
                t,
                sigma_x,
                shots: design.shots,
                theta,
                phi,
            });
        }
    }
    CalibrationRecord { samples, truth: Some(*p) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFit {
    pub params: CalibrationParams,
    pub kappa: f64,
    /// Covariance of (ω_q, ω, κ).
    pub covariance: [[f64; 3]; 3],
    /// 95% intervals for ω_q, ω, λ.
    pub ci_omega_q: Interval,
    pub ci_omega: Interval,
    pub ci_lambda: Interval,
    pub residual_norm: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    t: Vec<f64>,
    y: Vec<f64>,
    sz: Vec<f64>,
    sx0: Vec<f64>,
    sy0: Vec<f64>,
    _rec: &'a CalibrationRecord,
}

impl<'a> Problem<'a> {
    fn new(rec: &'a CalibrationRecord) -> Self {
        let mut p = Problem {
            t: vec![],
            y: vec![],
            sz: vec![],
            sx0: vec![],
            sy0: vec![],
            _rec: rec,
        };
        for s in &rec.samples {
            let b = bloch_vector(s.theta, s.phi);
            p.t.push(s.t);
            p.y.push(s.sigma_x);
            p.sx0.push(b[0]);
            p.sy0.push(b[1]);
            p.sz.push(b[2]);
        }
        p
    }

    /// Residuals and Jacobian columns for (ω_q, ω, κ) over the first `n` samples.
    fn eval(&self, x: &[f64; 3], n: usize, jac: bool) -> (Vec<f64>, Vec<[f64; 3]>) {
        let [wq, w, k] = *x;
        let mut r = Vec::with_capacity(n);
        let mut j = Vec::with_capacity(if jac { n } else { 0 });
        for i in 0..n {
            let (t, sz) = (self.t[i], self.sz[i]);
            let (s, c) = phase(t, sz, wq, w, k).sin_cos();
            r.push(self.sx0[i] * c + self.sy0[i] * s - self.y[i]);
            if jac {
                let d = -self.sx0[i] * s + self.sy0[i] * c;
                let (sw, cw) = (w * t).sin_cos();
                j.push([
                    d * 2.0 * t,
                    d * (-sz * k * (t * cw / w - sw / (w * w))),
                    d * sz * (t - sw / w),
                ]);
            }
        }
        (r, j)
    }

    fn cost(&self, x: &[f64; 3], n: usize) -> f64 {
        self.eval(x, n, false).0.iter().map(|v| v * v).sum()
    }
}

struct LmOutcome {
    x: [f64; 3],
    cost: f64,
    iterations: usize,
    converged: bool,
}

/// Levenberg–Marquardt over the parameters flagged in `free`.
fn levenberg_marquardt(pr: &Problem, x0: [f64; 3], free: [bool; 3], n: usize) -> LmOutcome {
    let idx: Vec<usize> = (0..3).filter(|&i| free[i]).collect();
    let m = idx.len();
    let mut x = x0;
    let (mut r, mut jac) = pr.eval(&x, n, true);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut mu = 1e-3;
    for it in 1..=LM_MAX_ITER {
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut g = DVector::<f64>::zeros(m);
        for (ri, ji) in r.iter().zip(&jac) {
            for (p, &ip) in idx.iter().enumerate() {
                g[p] += ji[ip] * ri;
                for (q, &iq) in idx.iter().enumerate() {
                    a[(p, q)] += ji[ip] * ji[iq];
                }
            }
        }
        let floor = a.trace().abs() * 1e-30 + f64::MIN_POSITIVE;
        let mut accepted = false;
        while mu < 1e30 {
            let mut damped = a.clone();
            for p in 0..m {
                damped[(p, p)] += mu * a[(p, p)].max(floor);
            }
            let Some(step) = damped.lu().solve(&(-&g)) else {
                mu *= 4.0;
                continue;
            };
            let mut xn = x;
            for (p, &ip) in idx.iter().enumerate() {
                xn[ip] += step[p];
            }
            let cn = pr.cost(&xn, n);
            if cn < cost {
                let small = idx.iter().enumerate().all(|(p, &ip)| step[p].abs() <= 1e-14 * x[ip].abs().max(1e-300));
                let flat = cost - cn <= 1e-12 * cost;
                x = xn;
                cost = cn;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if small || flat {
                    return LmOutcome { x, cost, iterations: it, converged: true };
                }
                break;
            }
            mu *= 4.0;
        }
        if !accepted {
            return LmOutcome { x, cost, iterations: it, converged: true };
        }
        (r, jac) = pr.eval(&x, n, true);
    }
    LmOutcome {
        x,
        cost,
        iterations: LM_MAX_ITER,
        converged: false,
    }
}

/// |Σ y e^{−iνt}| on a uniform grid; returns the argmax ν.
pub fn periodogram_peak(t: &[f64], y: &[f64], nu_min: f64, nu_max: f64, points: usize) -> f64 {
    let mut best = (nu_min, -1.0);
    for i in 0..points {
        let nu = nu_min + (nu_max - nu_min) * i as f64 / (points - 1) as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (&ti, &yi) in t.iter().zip(y) {
            let (s, c) = (nu * ti).sin_cos();
            re += yi * c;
            im -= yi * s;
        }
        let p = re * re + im * im;
        if p > best.1 {
            best = (nu, p);
        }
    }
    best.0
}

/// Seeds (ω_q, κ) from the phase rates 2ω_q + σ^z κ of each preparation's
/// earliest samples.
fn seed_rates(pr: &Problem) -> Result<(f64, f64, f64)> {
    let mut preps: Vec<f64> = vec![];
    for &sz in &pr.sz {
        if !preps.iter().any(|p| (p - sz).abs() < 1e-12) {
            preps.push(sz);
        }
    }
    let mut rates = vec![];
    let mut step_min = f64::INFINITY;
    for &sz in &preps {
        let mut tt: Vec<(f64, f64)> = (0..pr.t.len())
            .filter(|&i| (pr.sz[i] - sz).abs() < 1e-12)
            .map(|i| (pr.t[i], pr.y[i]))
            .collect();
        tt.sort_by(|a, b| a.0.total_cmp(&b.0));
        let dt: Vec<f64> = tt.windows(2).map(|w| w[1].0 - w[0].0).collect();
        let step = dt.first().copied().unwrap_or(0.0);
        let dense = 1 + dt.iter().take_while(|&&d| (d - step).abs() <= 1e-6 * step).count();
        if dense < 8 || step <= 0.0 {
            return Err(Error::Domain("each preparation needs a uniformly spaced block of at least 8 samples".into()));
        }
        step_min = step_min.min(step);
        let (t, y): (Vec<f64>, Vec<f64>) = tt[..dense].iter().copied().unzip();
        let nyq = PI / step;
        rates.push((sz, periodogram_peak(&t, &y, 0.01 * nyq, nyq, PERIODOGRAM_POINTS)));
    }
    let (omega_q, kappa) = match rates.as_slice() {
        [(_, r)] => (r / 4.0, 0.0),
        [(s1, r1), (s2, r2), ..] => {
            let kappa = (r1 - r2) / (s1 - s2);
            (0.25 * (r1 + r2 - (s1 + s2) * kappa), kappa)
        }
        [] => return Err(Error::Domain("empty record".into())),
    };
    Ok((omega_q, kappa, step_min))
}

/// Nonlinear least squares of the record against [`free_evolution`].
pub fn fit_parameters(rec: &CalibrationRecord) -> Result<CalibrationFit> {
    if rec.samples.len() < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "calibration needs at least {MIN_SAMPLES} samples, got {}",
            rec.samples.len()
        )));
    }
    if let Some(s) = rec.samples.iter().find(|s| s.shots < MIN_SHOTS || s.sigma_x.abs() > 1.0) {
        return Err(Error::Domain(format!(
            "sample at t = {:e} has {} shots and ⟨σx⟩ = {} (need ≥ {MIN_SHOTS} shots, |⟨σx⟩| ≤ 1)",
            s.t, s.shots, s.sigma_x
        )));
    }
    let mut sorted = rec.clone();
    sorted.samples.sort_by(|a, b| a.t.total_cmp(&b.t));
    let pr = Problem::new(&sorted);
    let (wq0, k0, step) = seed_rates(&pr)?;
    let hi = wq0 / 5.0;
    let scan_after = 200.0 / hi;
    let mut x = [wq0, hi / 10.0, k0];
    let first = pr.t.iter().position(|&t| t > 40.0 * step * (1.0 + 1e-9)).unwrap_or(pr.t.len());
    let mut scanned = false;
    let mut omega_seed = x[1];
    let mut iterations = 0;
    let mut last = None;
    for n in first.max(4)..=pr.t.len() {
        if n < pr.t.len() && pr.t[n] == pr.t[n - 1] {
            continue;
        }
        let tmax = pr.t[n - 1];
        if !scanned && tmax >= scan_after {
            x = omega_scan(&pr, x, n, hi, tmax);
            omega_seed = x[1];
            scanned = true;
        }
        let free = [true, scanned, true];
        let out = levenberg_marquardt(&pr, x, free, n);
        iterations += out.iterations;
        x = out.x;
        last = Some(out);
    }
    let out = last.ok_or_else(|| Error::Domain("record too short to fit".into()))?;
    if out.converged && scanned {
        return Ok(finish(&pr, out.x, out.cost, iterations, [true, true, true]));
    }
    if scanned {
        // ω drops out of the model as κ → 0
        let fixed = levenberg_marquardt(&pr, [x[0], omega_seed, x[2]], [true, false, true], pr.t.len());
        iterations += fixed.iterations;
        let fit = finish(&pr, fixed.x, fixed.cost, iterations, [true, false, true]);
        if fixed.converged && fit.ci_lambda.lo == 0.0 {
            return Ok(fit);
        }
    }
    Err(Error::NonConvergence(format!(
        "best iterate ω_q = {:e}, ω = {:e}, κ = {:e}, cost = {:e}, iterations = {iterations}, ω scanned = {scanned}",
        x[0], x[1], x[2], out.cost
    )))
}

fn omega_scan(pr: &Problem, x: [f64; 3], n: usize, hi: f64, tmax: f64) -> [f64; 3] {
    let lo = hi / 1000.0;
    let points = ((1000f64).ln() / (0.2 / tmax)) as usize;
    let mut best = (f64::INFINITY, x);
    for i in 0..points.max(2) {
        let w = lo * (hi / lo).powf(i as f64 / (points.max(2) - 1) as f64);
        let out = levenberg_marquardt(pr, [x[0], w, x[2]], [true, false, true], n);
        if out.cost < best.0 {
            best = (out.cost, out.x);
        }
    }
    best.1
}

fn finish(pr: &Problem, x: [f64; 3], cost: f64, iterations: usize, free: [bool; 3]) -> CalibrationFit {
    let n = pr.t.len();
    let idx: Vec<usize> = (0..3).filter(|&i| free[i]).collect();
    let (_, jac) = pr.eval(&x, n, true);
    let mut a = DMatrix::<f64>::zeros(idx.len(), idx.len());
    for j in &jac {
        for (p, &ip) in idx.iter().enumerate() {
            for (q, &iq) in idx.iter().enumerate() {
                a[(p, q)] += j[ip] * j[iq];
            }
        }
    }
    let s2 = cost / (n - idx.len()) as f64;
    let mut cov = [[f64::INFINITY; 3]; 3];
    if let Some(inv) = a.try_inverse() {
        for (p, &ip) in idx.iter().enumerate() {
            for (q, &iq) in idx.iter().enumerate() {
                cov[ip][iq] = inv[(p, q)] * s2;
            }
        }
    }
    let sd = |i: usize| cov[i][i].max(0.0).sqrt();
    let [wq, w, k] = x;
    let interval = |c: f64, s: f64| Interval { lo: c - Z95 * s, hi: c + Z95 * s };
    let lam = |k: f64| (k.max(0.0) * w).sqrt();
    CalibrationFit {
        params: CalibrationParams { omega_q: wq, omega: w, lambda: lam(k) },
        kappa: k,
        covariance: cov,
        ci_omega_q: interval(wq, sd(0)),
        ci_omega: interval(w, sd(1)),
        ci_lambda: Interval { lo: lam(k - Z95 * sd(2)), hi: lam(k + Z95 * sd(2)) },
        residual_norm: cost.sqrt(),
        iterations,
    }
}

/// Reads a record from CSV with columns `t,sigma_x,shots,theta,phi`.
pub fn read_record<R: Read>(r: R) -> Result<CalibrationRecord> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    let mut samples = vec![];
    for row in rdr.deserialize() {
        samples.push(row?);
    }
    Ok(CalibrationRecord { samples, truth: None })
}

pub fn write_record<W: Write>(rec: &CalibrationRecord, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "sigma_x", "shots", "theta", "phi"])?;
    for s in &rec.samples {
        out.write_record([sci(s.t), sci(s.sigma_x), s.shots.to_string(), sci(s.theta), sci(s.phi)])?;
    }
    out.flush()?;
    Ok(())
}

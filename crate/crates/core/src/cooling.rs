//! Sideband cooling of the resonator through a driven, damped qubit.
//!
//! The qubit is a Bloch vector s with ds/dt = A s + b, A = h× − diag(1/T2,
//! 1/T2, 1/T1), h = (Ω, 0, −δ), b = (0, 0, −Γ⊥). Its σ^z fluctuation spectrum
//! comes from the regression theorem in resolvent form.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{derive, SystemConfig};
use crate::noise;

/// Threshold on |Γ̃_c| that ends the I₁ integral.
pub const RATE_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingParams {
    /// Resonator frequency ω (rad/s).
    pub omega: f64,
    /// Rabi frequency Ω (rad/s).
    pub rabi: f64,
    /// Drive detuning δ (rad/s).
    pub detuning: f64,
    /// Coupling λ (rad/s).
    pub lambda: f64,
    pub t1: f64,
    pub t2: f64,
    /// Qubit bath occupation N_q.
    pub n_q: f64,
    /// Resonator damping Γ (1/s).
    pub gamma: f64,
}

impl CoolingParams {
    /// The operating point Ω = ω/2, δ = −√(ω² − Ω²), λ/2π = 10 kHz with the
    /// qubit and gas rates of `cfg`.
    pub fn fig4(cfg: &SystemConfig) -> Result<Self> {
        let d = derive(cfg)?;
        let gas = noise::gas_budget(cfg)?;
        let omega = d.omega;
        let rabi = omega / 2.0;
        Ok(Self {
            omega,
            rabi,
            detuning: -(omega * omega - rabi * rabi).sqrt(),
            lambda: 2.0 * PI * 1e4,
            t1: cfg.qubit.t1,
            t2: cfg.qubit.t2,
            n_q: thermal_occupation(cfg.qubit.splitting(), cfg.qubit.temperature, &cfg.constants),
            gamma: gas.channel.gamma,
        })
    }

    /// Γ⊥ = 1/(T1(2N_q + 1)).
    pub fn gamma_perp(&self) -> f64 {
        1.0 / (self.t1 * (2.0 * self.n_q + 1.0))
    }

    /// Γ∥ = 1/T2 − 1/2T1.
    pub fn gamma_par(&self) -> f64 {
        1.0 / self.t2 - 0.5 / self.t1
    }

    pub fn bloch_matrix(&self) -> Matrix3<f64> {
        let (hx, hz) = (self.rabi, -self.detuning);
        let g1 = 1.0 / self.t1;
        let g2 = 1.0 / self.t2;
        Matrix3::new(-g2, -hz, 0.0, hz, -g2, -hx, 0.0, hx, -g1)
    }

    pub fn drive(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -self.gamma_perp())
    }

    fn check(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(1.0 / self.t1) && ok(1.0 / self.t2)) {
            return Err(Error::Domain("Bloch matrix has no dissipation; the qubit has no steady state".into()));
        }
        if self.rabi < 0.0 || self.lambda < 0.0 || self.n_q < 0.0 {
            return Err(Error::Domain("Ω, λ and N_q must be non-negative".into()));
        }
        Ok(())
    }
}

/// Bose occupation 1/(exp(ħω/k_BT) − 1).
pub fn thermal_occupation(omega: f64, temperature: f64, c: &crate::constants::Constants) -> f64 {
    1.0 / (c.hbar * omega / (c.k_b * temperature)).exp_m1()
}

fn to_complex(m: &Matrix3<f64>) -> Matrix3<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Driven-qubit steady state −A⁻¹b.
pub fn steady_state(p: &CoolingParams) -> Result<Vector3<f64>> {
    p.check()?;
    let a = p.bloch_matrix();
    let lu = a.lu();
    lu.solve(&(-p.drive()))
        .ok_or_else(|| Error::Domain("singular Bloch matrix".into()))
}

/// Initial vector of the regression theorem for ⟨σ^z(t)σ^z(0)⟩ − ⟨σ^z⟩².
fn regression_start(s: &Vector3<f64>) -> Vector3<Complex64> {
    let i = Complex64::i();
    Vector3::new(
        -i * s.y - s.x * s.z,
        i * s.x - s.y * s.z,
        Complex64::new(1.0 - s.z * s.z, 0.0),
    )
}

/// S(ν) = (λ²/2) Re[(−(A + iν)⁻¹ g0)_z].
pub fn qubit_spectrum(nu: f64, p: &CoolingParams) -> Result<f64> {
    let s = steady_state(p)?;
    let g0 = regression_start(&s);
    let m = to_complex(&p.bloch_matrix()) + Matrix3::from_diagonal_element(Complex64::new(0.0, nu));
    let r = m
        .lu()
        .solve(&g0)
        .ok_or_else(|| Error::Domain(format!("resolvent singular at ν = {nu}")))?;
    Ok(0.5 * p.lambda * p.lambda * (-r.z).re)
}

/// Γ_c = S(ω) − S(−ω).
pub fn cooling_rate(p: &CoolingParams) -> Result<f64> {
    Ok(qubit_spectrum(p.omega, p)? - qubit_spectrum(-p.omega, p)?)
}

/// Fourier components s_n, n = −H..=H, of the Bloch vector driven by a
/// resonator of coherent amplitude α (real), from harmonic balance.
pub fn harmonic_balance(p: &CoolingParams, alpha: f64, harmonics: usize) -> Result<Vec<Vector3<Complex64>>> {
    p.check()?;
    if harmonics == 0 {
        return Err(Error::Domain("harmonic balance needs at least one harmonic".into()));
    }
    let h = harmonics as i64;
    let blocks = (2 * h + 1) as usize;
    let dim = 3 * blocks;
    let a = p.bloch_matrix();
    let c = Complex64::new(p.lambda * alpha, 0.0);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let mut rhs = DVector::<Complex64>::zeros(dim);
    for (bi, n) in (-h..=h).enumerate() {
        let o = 3 * bi;
        for r in 0..3 {
            for col in 0..3 {
                m[(o + r, o + col)] = Complex64::new(a[(r, col)], 0.0);
            }
            m[(o + r, o + r)] += Complex64::new(0.0, n as f64 * p.omega);
        }
        // B s = (−s_y, s_x, 0)
        for (nb, coef) in [(bi as i64 - 1, c), (bi as i64 + 1, c.conj())] {
            if nb < 0 || nb >= blocks as i64 {
                continue;
            }
            let on = 3 * nb as usize;
            m[(o, on + 1)] -= coef;
            m[(o + 1, on)] += coef;
        }
        if n == 0 {
            let b = p.drive();
            for r in 0..3 {
                rhs[o + r] = Complex64::new(-b[r], 0.0);
            }
        }
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NonConvergence(format!("harmonic balance singular at α = {alpha}, H = {harmonics}")))?;
    if sol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonConvergence(format!("harmonic balance non-finite at α = {alpha}, H = {harmonics}")));
    }
    Ok((0..blocks)
        .map(|b| Vector3::new(sol[3 * b], sol[3 * b + 1], sol[3 * b + 2]))
        .collect())
}

/// Γ_c(α) = Re(iλ s₁ᶻ/α). Tends to S(ω) − S(−ω) as α → 0.
pub fn renormalized_rate(p: &CoolingParams, alpha: f64, harmonics: usize) -> Result<f64> {
    let alpha = alpha.max(1e-9);
    let s = harmonic_balance(p, alpha, harmonics)?;
    let s1 = s[harmonics + 1].z;
    Ok((Complex64::i() * p.lambda * s1 / alpha).re)
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over [a, b].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// The reduced I₁ integral, 2∫₀^{u_cut} u Γ̃_c(u) du, and its cutoff u_cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedI1 {
    pub value: f64,
    pub u_cut: f64,
}

pub fn reduced_i1(p: &CoolingParams, harmonics: usize) -> Result<ReducedI1> {
    let gc0 = cooling_rate(p)?;
    if !(gc0 > 0.0) {
        return Err(Error::Domain(format!("Γ_c = {gc0:.4e} is not positive; the drive heats the resonator")));
    }
    let tilde = |u: f64| renormalized_rate(p, u, harmonics).map(|g| g / gc0);
    let mut u_cut = 1.0;
    loop {
        if tilde(u_cut)?.abs() < RATE_CUTOFF && tilde(2.0 * u_cut)?.abs() < RATE_CUTOFF {
            break;
        }
        u_cut *= 2.0;
        if u_cut > 1e12 {
            return Err(Error::NonConvergence("Γ̃_c does not fall below the cutoff".into()));
        }
    }
    let f = |u: f64| 2.0 * u * tilde(u).unwrap_or(f64::NAN);
    // integrate on doubling panels so the tail and the core get comparable effort
    let mut edges = vec![0.0, 0.5];
    while *edges.last().unwrap() < u_cut {
        let next = (edges.last().unwrap() * 2.0).min(u_cut);
        edges.push(next);
    }
    let value: f64 = edges
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], 1e-10 * (1.0 + w[1])))
        .sum();
    if !value.is_finite() {
        return Err(Error::NonConvergence("I₁ integrand is not finite".into()));
    }
    Ok(ReducedI1 { value, u_cut })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingResult {
    pub s_plus: f64,
    pub s_minus: f64,
    /// Γ_c = S(ω) − S(−ω) (1/s).
    pub gamma_c: f64,
    /// Backaction floor S(−ω)/Γ_c.
    pub n0: f64,
    pub n_th: f64,
    pub n_ld: f64,
    pub n_f: f64,
    /// Γ_cool = Γ_c + Γ (1/s).
    pub gamma_cool: f64,
    /// ζ = Γ/Γ_c.
    pub zeta: f64,
    pub i1: ReducedI1,
}

/// Full occupation N_th[ζ + (1 − ζ)/(1 + ζ e^X)] + N0 with X = I₁/(N_th ζ (λ/ω)²).
pub fn full_occupation(n_th: f64, zeta: f64, n0: f64, i1: &ReducedI1) -> f64 {
    if n_th <= 0.0 {
        return n0;
    }
    let x = i1.value / (n_th * zeta);
    // 1/(1 + ζ e^X) in log space
    let log_term = zeta.ln() + x;
    let frac = if log_term > 0.0 {
        let e = (-log_term).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + log_term.exp())
    };
    n_th * (zeta + (1.0 - zeta) * frac) + n0
}

pub fn steady_state_occupation(p: &CoolingParams, n_th: f64) -> Result<CoolingResult> {
    let i1 = reduced_i1(p, 1)?;
    occupation_with(p, n_th, i1)
}

fn occupation_with(p: &CoolingParams, n_th: f64, i1: ReducedI1) -> Result<CoolingResult> {
    let s_plus = qubit_spectrum(p.omega, p)?;
    let s_minus = qubit_spectrum(-p.omega, p)?;
    let gamma_c = s_plus - s_minus;
    if !(gamma_c > 0.0) {
        return Err(Error::Domain(format!("Γ_c = {gamma_c:.4e} is not positive")));
    }
    let n0 = s_minus / gamma_c;
    let zeta = p.gamma / gamma_c;
    Ok(CoolingResult {
        s_plus,
        s_minus,
        gamma_c,
        n0,
        n_th,
        n_ld: p.gamma * n_th / gamma_c + n0,
        n_f: full_occupation(n_th, zeta, n0, &i1),
        gamma_cool: gamma_c + p.gamma,
        zeta,
        i1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingRow {
    pub n_th: f64,
    pub n_ld: f64,
    pub n_f: f64,
}

/// Lamb-Dicke and full occupations over a list of initial occupations.
pub fn cooling_curve(p: &CoolingParams, n_th: &[f64]) -> Result<Vec<CoolingRow>> {
    let i1 = reduced_i1(p, 1)?;
    n_th.par_iter()
        .map(|&n| {
            occupation_with(p, n, i1).map(|r| CoolingRow {
                n_th: n,
                n_ld: r.n_ld,
                n_f: r.n_f,
            })
        })
        .collect()
}

/// `points` log-spaced occupations from 1 to 10^`decades`.
pub fn log_grid(decades: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| 10f64.powf(decades * i as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point() -> CoolingParams {
        CoolingParams::fig4(&SystemConfig::table1()).unwrap()
    }

    #[test]
    fn zero_coupling_zero_spectrum() {
        let p = CoolingParams { lambda: 0.0, ..point() };
        assert_eq!(qubit_spectrum(1e5, &p).unwrap(), 0.0);
    }

    #[test]
    fn reference_point() {
        let p = point();
        let gc = cooling_rate(&p).unwrap();
        assert!(gc > 0.0);
        assert!((gc / 27e3 - 1.0).abs() < 0.3, "{gc}");
    }

    #[test]
    fn small_alpha_limit() {
        let p = point();
        let gc = cooling_rate(&p).unwrap();
        let r = renormalized_rate(&p, 1e-4, 1).unwrap();
        assert!((r / gc - 1.0).abs() < 1e-6, "{r} {gc}");
        let r2 = renormalized_rate(&p, 1e-4, 3).unwrap();
        assert!((r2 / gc - 1.0).abs() < 1e-6);
    }

    #[test]
    fn detuning_flip_heats() {
        let p = point();
        let q = CoolingParams { detuning: -p.detuning, ..p };
        assert!(cooling_rate(&p).unwrap() > 0.0);
        assert!(cooling_rate(&q).unwrap() < 0.0);
    }

    #[test]
    fn zero_temperature_floor() {
        let p = point();
        let r = steady_state_occupation(&p, 0.0).unwrap();
        assert_eq!(r.n_ld, r.n0);
        assert_eq!(r.n_f, r.n0);
    }

    #[test]
    fn no_dissipation_rejected() {
        let p = CoolingParams { t1: f64::INFINITY, t2: f64::INFINITY, ..point() };
        assert!(qubit_spectrum(1.0, &p).is_err());
    }
}

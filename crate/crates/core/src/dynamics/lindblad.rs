use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ScaledParams;
use crate::error::{Error, Result};
use crate::ode::{integrate, Tolerances};

pub const DEFAULT_N_CUT: usize = 64;
const MAX_N_CUT: usize = 512;
const LEAKAGE_LIMIT: f64 = 1e-8;

/// Joint state on qubit ⊗ Fock(n_cut) as its three independent blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitOscillatorState {
    pub n_cut: usize,
    /// ⟨+|ρ|+⟩ on the oscillator.
    pub pp: DMatrix<Complex64>,
    /// ⟨−|ρ|−⟩.
    pub mm: DMatrix<Complex64>,
    /// ⟨+|ρ|−⟩.
    pub pm: DMatrix<Complex64>,
}

impl QubitOscillatorState {
    pub fn trace(&self) -> f64 {
        (self.pp.trace() + self.mm.trace()).re
    }

    /// Tr ρ₊₋, the qubit coherence.
    pub fn offdiag(&self) -> Complex64 {
        self.pm.trace()
    }

    pub fn full(&self) -> DMatrix<Complex64> {
        let n = self.n_cut;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.pp);
        m.view_mut((n, n), (n, n)).copy_from(&self.mm);
        m.view_mut((0, n), (n, n)).copy_from(&self.pm);
        m.view_mut((n, 0), (n, n)).copy_from(&self.pm.adjoint());
        m
    }

    /// Largest |ρ − ρ†| entry of the diagonal blocks.
    pub fn hermiticity_error(&self) -> f64 {
        let e = |b: &DMatrix<Complex64>| (b - b.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        e(&self.pp).max(e(&self.mm))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.full();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Oscillator population in the top `k` Fock levels.
    pub fn top_population(&self, k: usize) -> f64 {
        let n = self.n_cut;
        (n.saturating_sub(k)..n).map(|i| (self.pp[(i, i)] + self.mm[(i, i)]).re).sum()
    }

    /// ⟨0|Tr_q ρ|0⟩.
    pub fn ground_fidelity(&self) -> f64 {
        (self.pp[(0, 0)] + self.mm[(0, 0)]).re
    }
}

struct Ops {
    n: usize,
    sq: Vec<f64>,
}

impl Ops {
    /// −i(H_L X − X H_R) + Γ D[a]X − κX with H_s = ω n̂ + s(λ/2)(a + a†).
    fn block(&self, p: &ScaledParams, x: &[Complex64], out: &mut [Complex64], s_left: f64, s_right: f64, kappa: Complex64) {
        let n = self.n;
        let sq = &self.sq;
        let i = Complex64::i();
        let cl = s_left * p.lambda / 2.0;
        let cr = s_right * p.lambda / 2.0;
        for r in 0..n {
            for c in 0..n {
                let at = |rr: usize, cc: usize| x[rr * n + cc];
                let xv = at(r, c);
                // (a + a†)X and X(a + a†)
                let mut ax = Complex64::new(0.0, 0.0);
                if r + 1 < n {
                    ax += sq[r + 1] * at(r + 1, c);
                }
                if r > 0 {
                    ax += sq[r] * at(r - 1, c);
                }
                let mut xa = Complex64::new(0.0, 0.0);
                if c > 0 {
                    xa += sq[c] * at(r, c - 1);
                }
                if c + 1 < n {
                    xa += sq[c + 1] * at(r, c + 1);
                }
                let h = p.omega * (r as f64 - c as f64) * xv + cl * ax - cr * xa;
                let mut jump = Complex64::new(0.0, 0.0);
                if r + 1 < n && c + 1 < n {
                    jump = sq[r + 1] * sq[c + 1] * at(r + 1, c + 1);
                }
                let diss = p.gamma * (jump - 0.5 * (r as f64 + c as f64) * xv);
                out[r * n + c] = -i * h + diss - kappa * xv;
            }
        }
    }
}

/// Integrates the joint master equation from |+x⟩|0⟩ for time `t`.
///
/// H_M = ω a†a + (Mλ/2)(a + a†) + Mω_q/2 for qubit branch M = ±1, resonator
/// amplitude damping Γ, qubit exchange at rates Γ⊥(N_q + 1) and Γ⊥N_q, and
/// pure dephasing Γ∥ on the coherence.
pub fn lindblad_oracle(p: &ScaledParams, n_cut: usize, t: f64) -> Result<QubitOscillatorState> {
    if n_cut < 4 {
        return Err(Error::Domain("n_cut must be at least 4".into()));
    }
    if p.lambda / p.omega > n_cut as f64 / 10.0 {
        return Err(Error::Domain(format!(
            "coherent amplitude λ/ω = {:.3} needs n_cut ≥ {}",
            p.lambda / p.omega,
            (10.0 * p.lambda / p.omega).ceil()
        )));
    }
    let n = n_cut;
    let nn = n * n;
    let ops = Ops {
        n,
        sq: (0..=n).map(|k| (k as f64).sqrt()).collect(),
    };
    let down = p.gamma_perp * (p.n_q + 1.0);
    let up = p.gamma_perp * p.n_q;
    let coh_rate = Complex64::new(0.5 * (down + up) + p.gamma_par, p.omega_q);
    let zero = Complex64::new(0.0, 0.0);

    let mut y0 = vec![zero; 3 * nn];
    for b in 0..3 {
        y0[b * nn] = Complex64::new(0.5, 0.0);
    }
    let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let (pp, rest) = y.split_at(nn);
        let (mm, pm) = rest.split_at(nn);
        let (dpp, drest) = dy.split_at_mut(nn);
        let (dmm, dpm) = drest.split_at_mut(nn);
        ops.block(p, pp, dpp, 1.0, 1.0, Complex64::new(down, 0.0));
        ops.block(p, mm, dmm, -1.0, -1.0, Complex64::new(up, 0.0));
        ops.block(p, pm, dpm, 1.0, -1.0, coh_rate);
        for k in 0..nn {
            dpp[k] += up * mm[k];
            dmm[k] += down * pp[k];
        }
    };
    let tol = Tolerances {
        rtol: 1e-11,
        atol: 1e-14,
        ..Tolerances::default()
    };
    let (y, _) = integrate(rhs, 0.0, &y0, t, tol)?;
    let block = |b: usize| DMatrix::from_row_slice(n, n, &y[b * nn..(b + 1) * nn]);
    let state = QubitOscillatorState {
        n_cut: n,
        pp: block(0),
        mm: block(1),
        pm: block(2),
    };
    let leak = state.top_population(3);
    if leak > LEAKAGE_LIMIT {
        return Err(Error::Leakage { n_cut: n, population: leak });
    }
    Ok(state)
}

/// [`lindblad_oracle`] starting at `n_cut`, doubling on leakage.
pub fn lindblad_oracle_auto(p: &ScaledParams, n_cut: usize, t: f64) -> Result<QubitOscillatorState> {
    let mut n = n_cut.max((10.0 * p.lambda / p.omega).ceil() as usize).max(4);
    loop {
        match lindblad_oracle(p, n, t) {
            Err(Error::Leakage { .. }) if n < MAX_N_CUT => n *= 2,
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::exact_offdiag;
    use std::f64::consts::PI;

    fn params(lambda: f64, gamma: f64, gamma_par: f64) -> ScaledParams {
        ScaledParams {
            omega: 1.0,
            lambda,
            gamma,
            gamma_perp: 0.0,
            gamma_par,
            n_q: 0.0,
            omega_q: 0.0,
        }
    }

    #[test]
    fn decoupled_limit() {
        let p = ScaledParams { omega_q: 0.7, ..params(0.0, 0.0, 0.0) };
        let t = 3.0;
        let s = lindblad_oracle(&p, 8, t).unwrap();
        assert!((s.offdiag() - Complex64::from_polar(0.5, -0.7 * t)).norm() < 1e-10);
        assert!((s.ground_fidelity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_orbit_recombines() {
        let p = params(1.5, 0.0, 0.0);
        let s = lindblad_oracle(&p, DEFAULT_N_CUT, 2.0 * PI).unwrap();
        assert!(s.ground_fidelity() > 1.0 - 1e-8, "{}", s.ground_fidelity());
        assert!((s.trace() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_exact_map() {
        let p = params(1.5, 1e-3, 1e-2);
        let t = 2.0 * PI;
        let s = lindblad_oracle(&p, DEFAULT_N_CUT, t).unwrap();
        let e = exact_offdiag(&p, t);
        assert!((s.offdiag().norm() / e.norm() - 1.0).abs() < 1e-6);
        assert!(s.hermiticity_error() < 1e-12);
    }

    #[test]
    fn thermal_exchange_preserves_trace() {
        let p = ScaledParams { gamma_perp: 0.05, n_q: 0.3, ..params(1.0, 1e-2, 0.0) };
        let s = lindblad_oracle(&p, 32, 2.0 * PI).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-9);
        assert!(s.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn amplitude_guard() {
        assert!(matches!(lindblad_oracle(&params(2.0, 0.0, 0.0), 16, 1.0), Err(Error::Domain(_))));
        let s = lindblad_oracle_auto(&params(2.0, 0.0, 0.0), 16, 1.0).unwrap();
        assert!(s.n_cut >= 20);
    }
}

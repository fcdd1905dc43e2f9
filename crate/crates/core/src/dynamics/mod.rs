//! One interferometric round: phase accrual, the closed-form open-system map,
//! a truncated-Fock Lindblad integrator, and the per-round fidelity.

mod lindblad;

pub use lindblad::{lindblad_oracle, lindblad_oracle_auto, QubitOscillatorState, DEFAULT_N_CUT};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{derive, DerivedQuantities, SystemConfig};
use crate::noise;

/// Damping and qubit rates for one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// Resonator damping Γ (1/s, read from the cyclic budget value).
    pub gamma: f64,
    pub t1: f64,
    pub t2: f64,
    /// Qubit bath occupation.
    pub n_q: f64,
}

impl Rates {
    pub fn from_config(cfg: &SystemConfig, gamma: f64) -> Self {
        Self {
            gamma,
            t1: cfg.qubit.t1,
            t2: cfg.qubit.t2,
            n_q: crate::cooling::thermal_occupation(cfg.qubit.splitting(), cfg.qubit.temperature, &cfg.constants),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    /// τ(2mgl/ħ − ω_q) (rad).
    pub phase: f64,
    /// Magnitude of the off-diagonal factor e^{−γτ}e^{−τ/T2}.
    pub decay: f64,
    /// γτ = 4πΓl²/z0²ω.
    pub damping_exponent: f64,
    /// Qubit density matrix in the (|+⟩, |−⟩) basis, row-major.
    pub rho: [[Complex64; 2]; 2],
    pub sigma_x: f64,
    pub warnings: Vec<String>,
}

/// Closed-form round of duration τ = 2π/ω at displacement `l`.
pub fn analytic_round(l: f64, cfg: &SystemConfig, rates: &Rates) -> Result<RoundOutcome> {
    let d = derive(cfg)?;
    analytic_round_with(l, cfg, &d, rates)
}

pub fn analytic_round_with(l: f64, cfg: &SystemConfig, d: &DerivedQuantities, rates: &Rates) -> Result<RoundOutcome> {
    let tau = d.tau;
    let gt = rates.gamma * tau;
    if gt >= 1.0 {
        return Err(Error::ApproximationInvalid(format!(
            "Γτ = {gt:.3e} is not small; the closed-form round does not apply"
        )));
    }
    let mut warnings = Vec::new();
    if gt >= 0.1 {
        warnings.push(format!("Γτ = {gt:.3e} exceeds 0.1; closed-form round is approximate"));
    }
    let c = &cfg.constants;
    let phase = tau * (2.0 * d.mass * c.g * l / c.hbar - cfg.qubit.splitting());
    let gamma_deph = 2.0 * rates.gamma * l * l / (d.z0 * d.z0);
    let damping_exponent = gamma_deph * tau;
    let decay = (-damping_exponent).exp() * (-tau / rates.t2).exp();
    let relax = (-tau / rates.t1).exp();
    let w = 1.0 / (2.0 * rates.n_q + 1.0);
    let p_plus = w * (rates.n_q + 0.5 * relax);
    let p_minus = w * (1.0 + rates.n_q - 0.5 * relax);
    let coh = Complex64::from_polar(0.5 * decay, -phase);
    Ok(RoundOutcome {
        phase,
        decay,
        damping_exponent,
        rho: [[Complex64::new(p_plus, 0.0), coh], [coh.conj(), Complex64::new(p_minus, 0.0)]],
        sigma_x: decay * phase.cos(),
        warnings,
    })
}

impl RoundOutcome {
    pub fn density_matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.rho[0][0], self.rho[0][1], self.rho[1][0], self.rho[1][1])
    }
}

/// Parameters of the scaled joint model used by the oracle and the
/// closed-form maps. Units are arbitrary but shared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub omega: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub gamma_perp: f64,
    pub gamma_par: f64,
    pub n_q: f64,
    pub omega_q: f64,
}

/// Off-diagonal element Tr ρ₊₋ of the exact coherent-state solution for the
/// initial state |+x⟩|0⟩.
pub fn exact_offdiag(p: &ScaledParams, t: f64) -> Complex64 {
    let g = p.gamma;
    let alpha_ss = Complex64::new(-p.lambda / 2.0, 0.0) / Complex64::new(p.omega, -g / 2.0);
    let kappa = Complex64::new(g / 2.0, p.omega);
    let alpha_t = alpha_ss * (1.0 - (-kappa * t).exp());
    let decay_term = if g > 0.0 { (1.0 - (-g * t).exp()) / g } else { t };
    let int_sq = alpha_ss.norm_sqr() * (t - 2.0 * ((1.0 - (-kappa * t).exp()) / kappa).re + decay_term);
    let mag = 0.5
        * (-2.0 * g * int_sq).exp()
        * (-2.0 * alpha_t.norm_sqr()).exp()
        * (-p.gamma_par * t).exp()
        * (-p.gamma_perp * (2.0 * p.n_q + 1.0) * t / 2.0).exp();
    Complex64::from_polar(mag, -p.omega_q * t)
}

/// The printed closed-form map, ½ exp[−2λ²/ω²(1 − e^{−Γt})] e^{−Γ∥t}, with
/// the same qubit factors as [`exact_offdiag`].
pub fn printed_offdiag(p: &ScaledParams, t: f64) -> Complex64 {
    let r = p.lambda / p.omega;
    let mag = 0.5
        * (-2.0 * r * r * (1.0 - (-p.gamma * t).exp())).exp()
        * (-p.gamma_par * t).exp()
        * (-p.gamma_perp * (2.0 * p.n_q + 1.0) * t / 2.0).exp();
    Complex64::from_polar(mag, -p.omega_q * t)
}

/// Time window charged to T2 in the per-round fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum DephasingWindow {
    /// Two sloshes, e^{−4π/ωT2}.
    #[default]
    Slosh,
    /// The whole run, e^{−τ_exp/T2}.
    FullRun,
    /// FullRun when τ_rot + τ_meas exceeds `threshold`·τ, else Slosh.
    Auto { threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityBreakdown {
    pub dephasing: f64,
    pub damping: f64,
    pub gates: f64,
    pub total: f64,
    pub window: DephasingWindow,
    /// Whether the full-run window was charged.
    pub full_run: bool,
}

/// Gate factor (1 − 2p_init)(1 − p_rot)³(1 − 2p_meas).
pub fn gate_fidelity(cfg: &SystemConfig) -> f64 {
    let q = &cfg.qubit;
    (1.0 - 2.0 * q.p_init) * (1.0 - q.p_rot).powi(3) * (1.0 - 2.0 * q.p_meas)
}

pub fn fidelity_breakdown(
    cfg: &SystemConfig,
    d: &DerivedQuantities,
    l: f64,
    gamma: f64,
    window: DephasingWindow,
) -> FidelityBreakdown {
    let full_run = match window {
        DephasingWindow::Slosh => false,
        DephasingWindow::FullRun => true,
        DephasingWindow::Auto { threshold } => cfg.qubit.tau_rot + cfg.qubit.tau_meas > threshold * d.tau,
    };
    let dephasing = if full_run {
        (-d.tau_exp / cfg.qubit.t2).exp()
    } else {
        (-4.0 * PI / (d.omega * cfg.qubit.t2)).exp()
    };
    let damping = (-d.decoherence_exponent(gamma, l)).exp();
    let gates = gate_fidelity(cfg);
    FidelityBreakdown {
        dephasing,
        damping,
        gates,
        total: dephasing * damping * gates,
        window,
        full_run,
    }
}

/// Per-round fidelity at displacement `l` with the full noise budget.
pub fn round_fidelity(cfg: &SystemConfig, l: f64) -> Result<f64> {
    let d = derive(cfg)?;
    let b = noise::full_budget(cfg)?;
    Ok(fidelity_breakdown(cfg, &d, l, b.gamma_total, DephasingWindow::default()).total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseySensitivity {
    /// Δφ = 1/2n.
    pub dphi: f64,
    /// Δg = ħωΔφ/4πml (m/s²).
    pub dg: f64,
    pub dg_over_g: f64,
    /// ħ/(2τ_c l m g) for the coherence time τ_c.
    pub coherence_bound: f64,
}

/// Ramsey sensitivity after `n` sloshes; τ_c is the qubit T2.
pub fn ramsey_sensitivity(n: u64, cfg: &SystemConfig, l: f64) -> Result<RamseySensitivity> {
    if n == 0 {
        return Err(Error::Domain("Ramsey sequence needs at least one slosh".into()));
    }
    let d = derive(cfg)?;
    let c = &cfg.constants;
    let dphi = 1.0 / (2.0 * n as f64);
    let dg = c.hbar * d.omega * dphi / (4.0 * PI * d.mass * l);
    Ok(RamseySensitivity {
        dphi,
        dg,
        dg_over_g: dg / c.g,
        coherence_bound: c.hbar / (2.0 * cfg.qubit.t2 * l * d.mass * c.g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(cfg: &SystemConfig) -> Rates {
        Rates::from_config(cfg, noise::full_budget(cfg).unwrap().gamma_total)
    }

    #[test]
    fn zero_phase_source() {
        let mut c = SystemConfig::table1();
        c.constants.g = 0.0;
        c.qubit.splitting_hz = 0.0;
        let r = analytic_round(c.l_max, &c, &rates(&SystemConfig::table1())).unwrap();
        assert_eq!(r.phase, 0.0);
        assert_eq!(r.sigma_x, r.decay);
    }

    #[test]
    fn accrued_phase() {
        let c = SystemConfig::table1();
        let d = derive(&c).unwrap();
        let r = analytic_round(c.l_max, &c, &rates(&c)).unwrap();
        let total = r.phase + c.qubit.splitting() * d.tau;
        assert!((total / 7.94e9 - 1.0).abs() < 0.01, "{total}");
    }

    #[test]
    fn gas_exponent_and_fidelity() {
        let c = SystemConfig::table1();
        let g = noise::gas_budget(&c).unwrap().channel.gamma;
        let r = analytic_round(c.l_max, &c, &Rates::from_config(&c, g)).unwrap();
        assert!((r.damping_exponent / 6.5e-3 - 1.0).abs() < 0.02);
        assert!(((-r.damping_exponent).exp() - 0.994).abs() < 5e-4);
    }

    #[test]
    fn large_damping_refused() {
        let c = SystemConfig::table1();
        let r = Rates { gamma: 1e6, ..rates(&c) };
        assert!(matches!(analytic_round(c.l_max, &c, &r), Err(Error::ApproximationInvalid(_))));
    }

    #[test]
    fn noiseless_fidelity_is_one() {
        let mut c = SystemConfig::table1();
        c.qubit.p_init = 0.0;
        c.qubit.p_rot = 0.0;
        c.qubit.p_meas = 0.0;
        c.qubit.t2 = f64::INFINITY;
        let d = derive(&c).unwrap();
        assert_eq!(fidelity_breakdown(&c, &d, c.l_max, 0.0, DephasingWindow::Slosh).total, 1.0);
    }

    #[test]
    fn table1_fidelity() {
        let c = SystemConfig::table1();
        let f = round_fidelity(&c, c.l_max).unwrap();
        assert!((f / 0.25 - 1.0).abs() < 0.1, "{f}");
    }

    #[test]
    fn ramsey_forms() {
        let c = SystemConfig::table1();
        let d = derive(&c).unwrap();
        let r1 = ramsey_sensitivity(1, &c, c.l_max).unwrap();
        assert_eq!(r1.dphi, 0.5);
        let expect = c.constants.hbar * d.omega / (8.0 * PI * d.mass * c.l_max);
        assert!((r1.dg / expect - 1.0).abs() < 1e-14);
        let r2 = ramsey_sensitivity(2, &c, c.l_max).unwrap();
        assert_eq!(r2.dphi, r1.dphi / 2.0);
        assert!(ramsey_sensitivity(0, &c, c.l_max).is_err());
    }

    #[test]
    fn exact_and_printed_agree_without_damping() {
        let p = ScaledParams {
            omega: 1.0,
            lambda: 1.5,
            gamma: 0.0,
            gamma_perp: 0.0,
            gamma_par: 1e-2,
            n_q: 0.0,
            omega_q: 0.3,
        };
        let t = 2.0 * PI;
        assert!((exact_offdiag(&p, t) - printed_offdiag(&p, t)).norm() < 1e-12);
    }
}

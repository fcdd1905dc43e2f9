use std::f64::consts::PI;

use super::*;
use crate::magnetostatics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaMode {
    /// ω read from `trap_frequency_hz`.
    Pinned,
    /// ω from the sphere–ring closed form.
    Geometric,
}

/// Everything computable from a [`SystemConfig`]. Frequencies are angular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub omega_mode: OmegaMode,
    pub omega: f64,
    pub mass: f64,
    pub z_eq: f64,
    /// L_r used by the chain.
    pub resonator_inductance: f64,
    pub z0: f64,
    /// Slosh period 2π/ω.
    pub tau: f64,
    pub l_max: f64,
    pub lambda_max: f64,
    /// Upper bound on l0 from φ0 < 2π: ħω/2mg.
    pub l0_bound: f64,
    /// log2(l_max / l0_bound) before the ceiling.
    pub doublings: f64,
    /// Number of doublings K.
    pub k: u32,
    /// l_max / 2^K.
    pub l0: f64,
    /// λ_max / 2^K.
    pub lambda0: f64,
    /// λ corresponding to l0_bound.
    pub lambda0_bound: f64,
    /// α = 2mg l_max / ħω.
    pub alpha: f64,
    /// 2mg l_max τ / ħ, the phase before ω_qτ is subtracted.
    pub accrued_phase: f64,
    pub tau_exp: f64,
    /// Full phase-estimation cycle time (τ_exp/2)(3K² + 7K + 4).
    pub tau_phi: f64,
    pub qubit_inductance: f64,
    pub i_qmax: f64,
    pub d_ir_dz: f64,
    pub i_rmax: f64,
    pub mutual_inductance: f64,
}

impl DerivedQuantities {
    /// l(λ) = λ z0 / ω.
    pub fn displacement(&self, lambda: f64) -> f64 {
        lambda * self.z0 / self.omega
    }

    /// Inverse of [`Self::displacement`].
    pub fn coupling_for(&self, l: f64) -> f64 {
        l * self.omega / self.z0
    }

    /// Exponent 4πl²Γ/z0²ω for a damping rate Γ.
    pub fn decoherence_exponent(&self, gamma: f64, l: f64) -> f64 {
        4.0 * PI * l * l * gamma / (self.z0 * self.z0 * self.omega)
    }
}

/// Cycle time τ_φ = (τ_exp/2)(3K² + 7K + 4).
pub(crate) fn cycle_time(tau_exp: f64, k: u32) -> f64 {
    let k = k as f64;
    0.5 * tau_exp * (3.0 * k * k + 7.0 * k + 4.0)
}

pub fn derive(cfg: &SystemConfig) -> Result<DerivedQuantities> {
    let c = &cfg.constants;
    let (omega_mode, omega) = match cfg.pins.trap_frequency_hz {
        Some(f) => (OmegaMode::Pinned, 2.0 * PI * f),
        None => (OmegaMode::Geometric, magnetostatics::trap_frequency(cfg)),
    };
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("trap frequency must be positive, got {omega} rad/s")));
    }
    let m = cfg.mass();
    let z0 = (c.hbar / (2.0 * m * omega)).sqrt();
    let tau = 2.0 * PI / omega;
    let l_max = cfg.l_max;
    let lambda_max = l_max * omega / z0;
    let l0_bound = c.hbar * omega / (2.0 * m * c.g);
    let doublings = (l_max / l0_bound).log2();
    let k = doublings.ceil().max(0.0) as u32;
    let scale = (k as f64).exp2();
    let tau_exp = cfg.run_time(tau);
    let grad = magnetostatics::current_gradient(cfg.z_eq(), cfg);
    Ok(DerivedQuantities {
        omega_mode,
        omega,
        mass: m,
        z_eq: cfg.z_eq(),
        resonator_inductance: cfg.resonator_inductance(),
        z0,
        tau,
        l_max,
        lambda_max,
        l0_bound,
        doublings,
        k,
        l0: l_max / scale,
        lambda0: lambda_max / scale,
        lambda0_bound: l0_bound * omega / z0,
        alpha: l_max / l0_bound,
        accrued_phase: 2.0 * m * c.g * l_max * tau / c.hbar,
        tau_exp,
        tau_phi: cycle_time(tau_exp, k),
        qubit_inductance: cfg.qubit.self_inductance(c.mu0),
        i_qmax: cfg.qubit.max_current(c),
        d_ir_dz: grad.d_ir_dz,
        i_rmax: grad.i_rmax,
        mutual_inductance: cfg.mutual_inductance()?,
    })
}

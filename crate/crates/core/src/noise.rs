//! Damping channels of the levitated ring: eddy currents in the sphere,
//! magnetic-dipole radiation and background-gas collisions.
//!
//! Rates Γ are cyclic (Hz). Eddy and dipole quality factors use the
//! displaced-state convention Q = ħλ_max²/4P; the gas channel uses
//! Q = (ω/2π)/Γ.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::N2_KINETIC_DIAMETER;
use crate::error::{Error, Result};
use crate::model::{derive, DerivedQuantities, SystemConfig};

/// Smallest Knudsen number for which the free-molecular formula is used.
pub const MIN_KNUDSEN: f64 = 10.0;

/// Trap quantities the channels depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelInputs {
    pub omega: f64,
    pub mass: f64,
    pub z0: f64,
    pub l_max: f64,
    pub lambda_max: f64,
    /// Resonator current used for the eddy and dipole losses (A).
    pub i_r: f64,
}

impl ChannelInputs {
    pub fn from_derived(d: &DerivedQuantities) -> Self {
        Self {
            omega: d.omega,
            mass: d.mass,
            z0: d.z0,
            l_max: d.l_max,
            lambda_max: d.lambda_max,
            i_r: d.i_rmax,
        }
    }

    /// 4πl²Γ/z0²ω.
    pub fn exponent(&self, gamma: f64) -> f64 {
        4.0 * PI * self.l_max * self.l_max * gamma / (self.z0 * self.z0 * self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Power loss (W); `None` for the gas channel.
    pub power: Option<f64>,
    pub q: f64,
    /// Damping rate (Hz).
    pub gamma: f64,
    /// Decoherence exponent after one slosh at l_max.
    pub exponent: f64,
}

impl Channel {
    fn from_power(power: f64, inp: &ChannelInputs, hbar: f64) -> Self {
        let q = hbar * inp.lambda_max * inp.lambda_max / (4.0 * power);
        let gamma = inp.omega / (2.0 * PI) / q;
        Self {
            power: Some(power),
            q,
            gamma,
            exponent: inp.exponent(gamma),
        }
    }

    fn off() -> Self {
        Self {
            power: Some(0.0),
            q: f64::INFINITY,
            gamma: 0.0,
            exponent: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasChannel {
    pub channel: Channel,
    pub knudsen: f64,
    pub gas_density: f64,
    pub mean_speed: f64,
}

pub fn eddy_channel(cfg: &SystemConfig, inp: &ChannelInputs) -> Channel {
    let k = cfg.constants.mu0 / (4.0 * PI);
    let r = cfg.ring.radius;
    let rs = cfg.sphere.radius;
    let r0 = cfg.geometry.r0;
    let power = k * k * (2.0 * PI.powi(3) * r.powi(4) * inp.i_r * inp.i_r * inp.omega * inp.omega
        / cfg.sphere.resistivity)
        * 4.0
        * rs.powi(5)
        / (15.0 * r0.powi(3) * (r0 + 2.0 * rs).powi(3));
    Channel::from_power(power, inp, cfg.constants.hbar)
}

/// Radiation resistance (π/6)(R_rω/c)⁴Z of the ring.
pub fn radiation_resistance(cfg: &SystemConfig, omega: f64) -> f64 {
    let c = &cfg.constants;
    PI / 6.0 * (cfg.ring.radius * omega / c.c).powi(4) * c.vacuum_impedance()
}

pub fn dipole_channel(cfg: &SystemConfig, inp: &ChannelInputs) -> Channel {
    let power = radiation_resistance(cfg, inp.omega) * inp.i_r * inp.i_r / 2.0;
    Channel::from_power(power, inp, cfg.constants.hbar)
}

/// Mean free path over the wire diameter.
pub fn knudsen_number(cfg: &SystemConfig) -> f64 {
    let env = &cfg.environment;
    let mfp = cfg.constants.k_b * env.gas_temperature
        / (2f64.sqrt() * PI * N2_KINETIC_DIAMETER.powi(2) * env.gas_pressure);
    mfp / (2.0 * cfg.ring.wire_radius)
}

/// Free-molecular damping Γ = 2ρ_gas A u/m with the resonator mass m.
pub fn gas_channel(cfg: &SystemConfig, inp: &ChannelInputs) -> Result<GasChannel> {
    let knudsen = knudsen_number(cfg);
    if !(knudsen > MIN_KNUDSEN) {
        return Err(Error::Regime(format!(
            "Knudsen number {knudsen:.3e} is not above {MIN_KNUDSEN}; the free-molecular damping formula does not apply"
        )));
    }
    let env = &cfg.environment;
    let kt = cfg.constants.k_b * env.gas_temperature;
    let gas_density = env.gas_pressure * env.gas_molecule_mass / kt;
    let mean_speed = (2.0 * kt / env.gas_molecule_mass).sqrt();
    let area = 2.0 * PI * cfg.ring.radius * 2.0 * cfg.ring.wire_radius;
    let gamma = 2.0 * gas_density * area * mean_speed / inp.mass;
    Ok(GasChannel {
        channel: Channel {
            power: None,
            q: inp.omega / (2.0 * PI) / gamma,
            gamma,
            exponent: inp.exponent(gamma),
        },
        knudsen,
        gas_density,
        mean_speed,
    })
}

pub fn eddy_budget(cfg: &SystemConfig) -> Result<Channel> {
    Ok(eddy_channel(cfg, &ChannelInputs::from_derived(&derive(cfg)?)))
}

pub fn dipole_budget(cfg: &SystemConfig) -> Result<Channel> {
    Ok(dipole_channel(cfg, &ChannelInputs::from_derived(&derive(cfg)?)))
}

pub fn gas_budget(cfg: &SystemConfig) -> Result<GasChannel> {
    gas_channel(cfg, &ChannelInputs::from_derived(&derive(cfg)?))
}

/// Which channels contribute to a budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMask {
    pub eddy: bool,
    pub dipole: bool,
    pub gas: bool,
}

impl ChannelMask {
    pub const ALL: Self = Self { eddy: true, dipole: true, gas: true };
    pub const NONE: Self = Self { eddy: false, dipole: false, gas: false };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub inputs: ChannelInputs,
    pub eddy: Channel,
    pub dipole: Channel,
    pub gas: Channel,
    pub knudsen: f64,
    /// Σ Γ_i (Hz).
    pub gamma_total: f64,
}

impl NoiseBudget {
    /// Exponents in the order (dipole, eddy, gas).
    pub fn exponents(&self) -> [f64; 3] {
        [self.dipole.exponent, self.eddy.exponent, self.gas.exponent]
    }

    pub fn channels(&self) -> [(&'static str, &Channel); 3] {
        [("dipole", &self.dipole), ("eddy", &self.eddy), ("gas", &self.gas)]
    }
}

pub fn budget_with(cfg: &SystemConfig, inp: &ChannelInputs, mask: ChannelMask) -> Result<NoiseBudget> {
    let gas = gas_channel(cfg, inp)?;
    let pick = |on: bool, c: Channel| if on { c } else { Channel::off() };
    let eddy = pick(mask.eddy, eddy_channel(cfg, inp));
    let dipole = pick(mask.dipole, dipole_channel(cfg, inp));
    let gas_c = if mask.gas {
        gas.channel
    } else {
        Channel { power: None, ..Channel::off() }
    };
    Ok(NoiseBudget {
        inputs: *inp,
        gamma_total: eddy.gamma + dipole.gamma + gas_c.gamma,
        eddy,
        dipole,
        gas: gas_c,
        knudsen: gas.knudsen,
    })
}

pub fn full_budget(cfg: &SystemConfig) -> Result<NoiseBudget> {
    budget_with(cfg, &ChannelInputs::from_derived(&derive(cfg)?), ChannelMask::ALL)
}

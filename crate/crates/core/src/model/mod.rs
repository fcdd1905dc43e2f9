//! System description, configuration I/O, the derived-quantity chain and the
//! reference-table consistency audit.

mod config;
mod derive;
mod validate;

pub use config::{load_config, parse_config, save_config, to_config_string, LoadedConfig, KEYS};
pub use derive::{derive, DerivedQuantities, OmegaMode};
pub use validate::{validate, with_recomputed_references, ConsistencyReport, ConsistencyRow};
#[allow(unused_imports)]
pub(crate) use derive::cycle_time;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::inductance;

/// Lead critical field; caps μ0𝓜.
pub const LEAD_CRITICAL_FIELD: f64 = 0.08;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetSphere {
    /// Radius R_s (m).
    pub radius: f64,
    /// μ0𝓜 (T).
    pub mu0_magnetization: f64,
    /// Resistivity (Ω·m).
    pub resistivity: f64,
}

impl MagnetSphere {
    pub fn volume(&self) -> f64 {
        4.0 * PI * self.radius.powi(3) / 3.0
    }

    /// 𝓜 in A/m.
    pub fn magnetization(&self, mu0: f64) -> f64 {
        self.mu0_magnetization / mu0
    }

    /// μ0𝓜V, the combination every closed form uses.
    pub fn moment_field(&self) -> f64 {
        self.mu0_magnetization * self.volume()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorRing {
    /// Ring radius R_r (m).
    pub radius: f64,
    /// Wire radius a (m).
    pub wire_radius: f64,
    /// Material density (kg/m³).
    pub density: f64,
    /// Young's modulus (Pa), for the torsional modes.
    pub youngs_modulus: f64,
}

impl ResonatorRing {
    pub fn mass(&self) -> f64 {
        self.density * 2.0 * PI * self.radius * PI * self.wire_radius.powi(2)
    }

    /// Circular-loop formula μ0R(ln(8R/a) − 2).
    pub fn formula_inductance(&self, mu0: f64) -> f64 {
        mu0 * self.radius * ((8.0 * self.radius / self.wire_radius).ln() - 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// Loop radius R_q (m).
    pub loop_radius: f64,
    /// Loop wire radius (m); sets L_q through the circular formula.
    pub wire_radius: f64,
    /// Level splitting ω_q/2π (Hz).
    pub splitting_hz: f64,
    pub t1: f64,
    pub t2: f64,
    /// Bath temperature T_q (K).
    pub temperature: f64,
    pub tau_reset: f64,
    pub tau_rot: f64,
    pub tau_meas: f64,
    pub p_init: f64,
    pub p_rot: f64,
    pub p_meas: f64,
}

impl QubitParams {
    /// ω_q in rad/s.
    pub fn splitting(&self) -> f64 {
        2.0 * PI * self.splitting_hz
    }

    pub fn self_inductance(&self, mu0: f64) -> f64 {
        mu0 * self.loop_radius * ((8.0 * self.loop_radius / self.wire_radius).ln() - 2.0)
    }

    /// I_qmax = Φ0 / 2L_q.
    pub fn max_current(&self, c: &Constants) -> f64 {
        c.flux_quantum / (2.0 * self.self_inductance(c.mu0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Sphere surface to ring centre of mass (m).
    pub r0: f64,
    /// Ring–qubit separation d (m).
    pub qubit_separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub gas_pressure: f64,
    pub gas_temperature: f64,
    pub gas_molecule_mass: f64,
}

/// Table values that may replace derived ones in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pins {
    /// ω/2π (Hz). When set, the chain runs in pinned-ω mode.
    pub trap_frequency_hz: Option<f64>,
    /// L_r (H). When set, replaces the self-inductance formula.
    pub resonator_inductance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub sphere: MagnetSphere,
    pub ring: ResonatorRing,
    pub qubit: QubitParams,
    pub geometry: Geometry,
    pub environment: Environment,
    /// Largest cat displacement l_max (m).
    pub l_max: f64,
    pub constants: Constants,
    pub pins: Pins,
    /// Reference values (`table.*` keys) audited by [`validate`].
    pub reference: BTreeMap<String, f64>,
}

impl SystemConfig {
    /// The canonical reference configuration shipped as `table1.cfg`.
    pub fn table1() -> Self {
        parse_config(TABLE1_CFG)
            .expect("bundled table1.cfg parses")
            .config
    }

    pub fn z_eq(&self) -> f64 {
        self.sphere.radius + self.geometry.r0
    }

    pub fn mass(&self) -> f64 {
        self.ring.mass()
    }

    /// L_r used by the chain: the pin if present, else the formula.
    pub fn resonator_inductance(&self) -> f64 {
        self.pins
            .resonator_inductance
            .unwrap_or_else(|| self.ring.formula_inductance(self.constants.mu0))
    }

    pub fn mutual_inductance(&self) -> Result<f64> {
        inductance::mutual_inductance(
            self.ring.radius,
            self.qubit.loop_radius,
            self.geometry.qubit_separation,
        )
    }

    /// Per-run time τ_exp = τ_reset + 3τ_rot + 2τ + τ_meas.
    pub fn run_time(&self, tau: f64) -> f64 {
        self.qubit.tau_reset + 3.0 * self.qubit.tau_rot + 2.0 * tau + self.qubit.tau_meas
    }

    /// Checks every invariant of the domain types.
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("sphere_radius", self.sphere.radius),
            ("sphere_magnetization", self.sphere.mu0_magnetization),
            ("sphere_resistivity", self.sphere.resistivity),
            ("ring_radius", self.ring.radius),
            ("wire_radius", self.ring.wire_radius),
            ("ring_density", self.ring.density),
            ("ring_youngs_modulus", self.ring.youngs_modulus),
            ("qubit_radius", self.qubit.loop_radius),
            ("qubit_wire_radius", self.qubit.wire_radius),
            ("qubit_splitting_hz", self.qubit.splitting_hz),
            ("qubit_t1", self.qubit.t1),
            ("qubit_t2", self.qubit.t2),
            ("qubit_temperature", self.qubit.temperature),
            ("tau_reset", self.qubit.tau_reset),
            ("tau_rot", self.qubit.tau_rot),
            ("tau_meas", self.qubit.tau_meas),
            ("r0", self.geometry.r0),
            ("qubit_separation", self.geometry.qubit_separation),
            ("gas_pressure", self.environment.gas_pressure),
            ("gas_temperature", self.environment.gas_temperature),
            ("gas_molecule_mass", self.environment.gas_molecule_mass),
            ("l_max", self.l_max),
            ("g", self.constants.g),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        for (name, p) in [
            ("p_init", self.qubit.p_init),
            ("p_rot", self.qubit.p_rot),
            ("p_meas", self.qubit.p_meas),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(name, format!("must lie in [0, 1], got {p}")));
            }
        }
        if self.qubit.t2 > 2.0 * self.qubit.t1 {
            return Err(invalid("qubit_t2", "T2 must not exceed 2·T1".into()));
        }
        if self.ring.wire_radius >= self.ring.radius {
            return Err(invalid("wire_radius", "must be smaller than ring_radius".into()));
        }
        if self.qubit.wire_radius >= self.qubit.loop_radius {
            return Err(invalid("qubit_wire_radius", "must be smaller than qubit_radius".into()));
        }
        if let Some(f) = self.pins.trap_frequency_hz {
            if !(f.is_finite() && f > 0.0) {
                return Err(invalid("trap_frequency_hz", format!("must be positive, got {f}")));
            }
        }
        if let Some(l) = self.pins.resonator_inductance {
            if !(l.is_finite() && l > 0.0) {
                return Err(invalid("resonator_inductance", format!("must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

impl SystemConfig {
    /// Soft invariants: reported, never fatal.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.sphere.mu0_magnetization > LEAD_CRITICAL_FIELD {
            w.push(format!(
                "sphere_magnetization: μ0M = {} T exceeds the lead critical field {} T",
                self.sphere.mu0_magnetization, LEAD_CRITICAL_FIELD
            ));
        }
        w
    }
}

fn invalid(field: &str, reason: String) -> Error {
    Error::InvalidField { field: field.to_string(), reason }
}

/// Contents of the bundled reference configuration.
pub const TABLE1_CFG: &str = include_str!("../../table1.cfg");

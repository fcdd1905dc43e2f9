//! Self and mutual inductances, the qubit–resonator coupling λ, the design
//! sweeps over loop and sphere size, and the λ-doubling schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::MU0;
use crate::error::{Error, Result};
use crate::magnetostatics;
use crate::model::{derive, DerivedQuantities, OmegaMode, SystemConfig};

const AGM_TOL: f64 = 1e-16;

/// Complete elliptic integral of the first kind, parameter convention
/// K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ).
pub fn ellip_k(m: f64) -> f64 {
    ellip_ke(m).0
}

/// Complete elliptic integral of the second kind, parameter convention.
pub fn ellip_e(m: f64) -> f64 {
    ellip_ke(m).1
}

/// (K(m), E(m)) from one arithmetic-geometric mean iteration.
pub fn ellip_ke(m: f64) -> (f64, f64) {
    assert!((0.0..1.0).contains(&m), "elliptic parameter out of range: {m}");
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..64 {
        if c.abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopShape {
    Circular,
    /// Square of half-width equal to the given size.
    Square,
}

/// Self-inductance of a thin-wire loop of size `r` (radius or half-width).
pub fn self_inductance(r: f64, a: f64, shape: LoopShape) -> Result<f64> {
    if !(a > 0.0 && r > 0.0) || a >= r {
        return Err(Error::Domain(format!(
            "wire radius {a:.3e} m must be positive and below the loop size {r:.3e} m"
        )));
    }
    Ok(match shape {
        LoopShape::Circular => MU0 * r * ((8.0 * r / a).ln() - 2.0),
        LoopShape::Square => magnetostatics::square_inductance(r, a, MU0),
    })
}

/// Mutual inductance of two coaxial filament rings of radii `r1`, `r2` a
/// distance `d` apart:
///
/// M = μ0 √(4R1R2/η) (K(η)/(1 + β) − E(η)),
/// β = 2R1R2/(R1² + R2² + d²), η = 2β/(1 + β),
///
/// with K and E in the parameter convention and the 1/(1 + β) applied to K
/// alone.
pub fn mutual_inductance(r1: f64, r2: f64, d: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0 && d >= 0.0) {
        return Err(Error::Domain(format!(
            "loop radii must be positive and d non-negative (R1 = {r1:.3e}, R2 = {r2:.3e}, d = {d:.3e})"
        )));
    }
    let beta = 2.0 * r1 * r2 / (r1 * r1 + r2 * r2 + d * d);
    let eta = 2.0 * beta / (1.0 + beta);
    if eta >= 1.0 - 1e-15 {
        return Err(Error::SingularGeometry(format!(
            "coincident filaments (R1 = R2 = {r1:.3e} m, d = {d:.3e} m)"
        )));
    }
    let (k, e) = ellip_ke(eta);
    Ok(MU0 * (4.0 * r1 * r2 / eta).sqrt() * (k / (1.0 + beta) - e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub mutual_inductance: f64,
    /// λ = √(2/mħω) M dI_r/dz I_q with the chain ω (rad/s).
    pub lambda: f64,
    /// λ from the closed form that eliminates ω through the trap geometry.
    pub lambda_closed_form: f64,
    pub d_ir_dz: f64,
    pub i_q: f64,
    pub z0: f64,
    pub mass: f64,
    pub omega: f64,
}

/// √(3μ0𝓜V/ħ) [R_r⁴z_eq²/(m L_r³ (R_r² + z_eq²)⁵)]^{1/4} M I_q.
pub fn closed_form_coupling(cfg: &SystemConfig, m_rq: f64, i_q: f64) -> f64 {
    let r = cfg.ring.radius;
    let z = cfg.z_eq();
    let l = cfg.resonator_inductance();
    let geom = r.powi(4) * z * z / (cfg.mass() * l.powi(3) * (r * r + z * z).powi(5));
    (3.0 * cfg.sphere.moment_field() / cfg.constants.hbar).sqrt() * geom.powf(0.25) * m_rq * i_q
}

pub fn coupling_strength(cfg: &SystemConfig, i_q: f64) -> Result<CouplingResult> {
    let cap = cfg.qubit.max_current(&cfg.constants);
    if i_q > cap * (1.0 + 1e-12) {
        return Err(Error::CriticalCurrent { requested: i_q, cap });
    }
    if i_q < 0.0 {
        return Err(Error::Domain(format!("qubit current must be non-negative, got {i_q}")));
    }
    let d = derive(cfg)?;
    Ok(coupling_from(cfg, &d, i_q))
}

fn coupling_from(cfg: &SystemConfig, d: &DerivedQuantities, i_q: f64) -> CouplingResult {
    let m_rq = d.mutual_inductance;
    let lambda = (2.0 / (d.mass * cfg.constants.hbar * d.omega)).sqrt() * m_rq * d.d_ir_dz * i_q;
    CouplingResult {
        mutual_inductance: m_rq,
        lambda,
        lambda_closed_form: closed_form_coupling(cfg, m_rq, i_q),
        d_ir_dz: d.d_ir_dz,
        i_q,
        z0: d.z0,
        mass: d.mass,
        omega: d.omega,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Qubit loop radius R_q (m) at fixed R_r and I_q.
    QubitRadius,
    /// Sphere radius R_s (m) at fixed r0, R_r, R_q and I_q.
    SphereRadius,
    /// Overall scale α': R_r, R_q, R_s, a and the qubit wire scale together;
    /// d and r0 stay fixed. I_q = Φ0/2L_q and L_r from the formula.
    SystemScale,
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qubit_radius" => Ok(Self::QubitRadius),
            "sphere_radius" => Ok(Self::SphereRadius),
            "system_scale" => Ok(Self::SystemScale),
            other => Err(Error::InvalidField {
                field: "variable".into(),
                reason: format!("unknown sweep variable `{other}` (qubit_radius|sphere_radius|system_scale)"),
            }),
        }
    }
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::QubitRadius => "qubit_radius",
            Self::SphereRadius => "sphere_radius",
            Self::SystemScale => "system_scale",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    /// λ in rad/s.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn argmax(&self) -> SweepRow {
        *self
            .rows
            .iter()
            .max_by(|a, b| a.lambda.total_cmp(&b.lambda))
            .expect("sweep has at least one point")
    }
}

/// λ at one sweep point.
pub fn sweep_point(cfg: &SystemConfig, variable: SweepVariable, x: f64) -> Result<f64> {
    let c = &cfg.constants;
    match variable {
        SweepVariable::QubitRadius => {
            let d = derive(cfg)?;
            let m = mutual_inductance(cfg.ring.radius, x, cfg.geometry.qubit_separation)?;
            let i_q = cfg.qubit.max_current(c);
            Ok((2.0 / (d.mass * c.hbar * d.omega)).sqrt() * m * d.d_ir_dz * i_q)
        }
        SweepVariable::SphereRadius => {
            let mut s = cfg.clone();
            s.sphere.radius = x;
            let m = s.mutual_inductance()?;
            Ok(closed_form_coupling(&s, m, cfg.qubit.max_current(c)))
        }
        SweepVariable::SystemScale => {
            let mut s = cfg.clone();
            s.ring.radius *= x;
            s.ring.wire_radius *= x;
            s.qubit.loop_radius *= x;
            s.qubit.wire_radius *= x;
            s.sphere.radius *= x;
            s.pins.resonator_inductance = None;
            let m = s.mutual_inductance()?;
            Ok(closed_form_coupling(&s, m, s.qubit.max_current(c)))
        }
    }
}

/// λ over `points` evenly spaced values in [min, max].
pub fn sweep(cfg: &SystemConfig, variable: SweepVariable, min: f64, max: f64, points: usize) -> Result<SweepTable> {
    if !(min > 0.0 && max > min && points >= 2) {
        return Err(Error::Domain(format!(
            "sweep needs 0 < min < max and at least 2 points (min = {min}, max = {max}, points = {points})"
        )));
    }
    let rows = (0..points)
        .into_par_iter()
        .map(|i| {
            let x = min + (max - min) * i as f64 / (points - 1) as f64;
            sweep_point(cfg, variable, x).map(|lambda| SweepRow { x, lambda })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { variable, rows })
}

/// λ_k = 2^k λ0 for k = 0..=K with the qubit current that produces each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSchedule {
    pub lambda0: f64,
    pub lambdas: Vec<f64>,
    pub currents: Vec<f64>,
}

impl LambdaSchedule {
    /// Builds the schedule from the derived chain.
    ///
    /// In pinned mode the currents scale I_qmax by λ_k/λ_max. In geometric
    /// mode they come from the coupling per ampere, and the schedule fails if
    /// λ_K exceeds what I_qmax can produce.
    pub fn new(cfg: &SystemConfig, d: &DerivedQuantities) -> Result<Self> {
        let lambdas: Vec<f64> = (0..=d.k).map(|k| d.lambda0 * (k as f64).exp2()).collect();
        let lambda_k = *lambdas.last().expect("K + 1 stages");
        let (cap, per_amp) = match d.omega_mode {
            OmegaMode::Pinned => (d.lambda_max, d.lambda_max / d.i_qmax),
            OmegaMode::Geometric => {
                let full = coupling_from(cfg, d, d.i_qmax).lambda;
                (full, full / d.i_qmax)
            }
        };
        if lambda_k > cap * (1.0 + 1e-12) {
            return Err(Error::ScheduleInfeasible { lambda_k, cap });
        }
        let currents = lambdas.iter().map(|l| l / per_amp).collect();
        Ok(Self {
            lambda0: d.lambda0,
            lambdas,
            currents,
        })
    }
}

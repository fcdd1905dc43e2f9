//! Field of the uniformly magnetised sphere and the trap it forms for the
//! superconducting ring.
//!
//! Coordinates have their origin at the sphere centre with the magnetisation
//! along +z. Ring heights `z` are measured along the axis.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{derive, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldPoint {
    Cylindrical { rho: f64, phi: f64, z: f64 },
    Cartesian { x: f64, y: f64, z: f64 },
}

impl FieldPoint {
    pub fn cartesian(&self) -> [f64; 3] {
        match *self {
            FieldPoint::Cylindrical { rho, phi, z } => [rho * phi.cos(), rho * phi.sin(), z],
            FieldPoint::Cartesian { x, y, z } => [x, y, z],
        }
    }
}

/// Vector potential and field at one point, Cartesian components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereField {
    pub a: [f64; 3],
    pub b: [f64; 3],
}

/// A = μ0𝓜V(−y, x, 0)/4πr³ and B = μ0𝓜V(3xz, 3yz, 2z² − x² − y²)/4πr⁵.
pub fn sphere_field(p: FieldPoint, cfg: &SystemConfig) -> Result<SphereField> {
    let [x, y, z] = p.cartesian();
    let r2 = x * x + y * y + z * z;
    if r2 < cfg.sphere.radius.powi(2) {
        return Err(Error::Domain(format!(
            "field point at r = {:.3e} m lies inside the sphere (R_s = {:.3e} m)",
            r2.sqrt(),
            cfg.sphere.radius
        )));
    }
    let k = cfg.sphere.moment_field() / (4.0 * PI);
    let r3 = r2 * r2.sqrt();
    let r5 = r3 * r2;
    Ok(SphereField {
        a: [-k * y / r3, k * x / r3, 0.0],
        b: [
            k * 3.0 * x * z / r5,
            k * 3.0 * y * z / r5,
            k * (2.0 * z * z - x * x - y * y) / r5,
        ],
    })
}

/// Radial field component B_ρ at (ρ, z).
fn b_radial(rho: f64, z: f64, cfg: &SystemConfig) -> f64 {
    let k = cfg.sphere.moment_field() / (4.0 * PI);
    k * 3.0 * z * rho / (rho * rho + z * z).powf(2.5)
}

/// Flux through the coaxial ring at height z: μ0𝓜V R_r² / 2(R_r² + z²)^{3/2}.
pub fn ring_flux(z: f64, cfg: &SystemConfig) -> f64 {
    let r = cfg.ring.radius;
    cfg.sphere.moment_field() * r * r / (2.0 * (r * r + z * z).powf(1.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentGradient {
    /// dI_r/dz at z_eq (A/m).
    pub d_ir_dz: f64,
    /// Current at full displacement, dI_r/dz · 2 l_max (A).
    pub i_rmax: f64,
}

/// dI_r/dz = 3μ0𝓜V R_r² z / 2L_r(R_r² + z²)^{5/2}, using the chain's L_r.
pub fn current_gradient(z_eq: f64, cfg: &SystemConfig) -> CurrentGradient {
    let r = cfg.ring.radius;
    let l = cfg.resonator_inductance();
    let d_ir_dz =
        3.0 * cfg.sphere.moment_field() * r * r * z_eq / (2.0 * l * (r * r + z_eq * z_eq).powf(2.5));
    CurrentGradient {
        d_ir_dz,
        i_rmax: d_ir_dz * 2.0 * cfg.l_max,
    }
}

/// Vertical force on the ring at height z, holding the flux at its z_eq value.
///
/// Near z_eq this reduces to −9μ0²𝓜²V²R_r⁴z_eq²(z − z_eq)/4L_r(R_r² + z_eq²)⁵.
pub fn vertical_force(z: f64, cfg: &SystemConfig) -> f64 {
    let current = -(ring_flux(z, cfg) - ring_flux(cfg.z_eq(), cfg)) / cfg.resonator_inductance();
    -2.0 * PI * cfg.ring.radius * current * b_radial(cfg.ring.radius, z, cfg)
}

/// ω = 3μ0𝓜V R_r² z_eq / 2√(m L_r (R_r² + z_eq²)⁵).
pub fn trap_frequency(cfg: &SystemConfig) -> f64 {
    let r = cfg.ring.radius;
    let z = cfg.z_eq();
    3.0 * cfg.sphere.moment_field() * r * r * z
        / (2.0 * (cfg.mass() * cfg.resonator_inductance() * (r * r + z * z).powi(5)).sqrt())
}

/// Coefficients of V = ½mω²z² + ⅓γ(x² + y²)z + ¼β(x⁴ + y⁴) for a square
/// loop of half-width w = R_r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transverse {
    pub half_m_omega_sq: f64,
    pub gamma: f64,
    pub beta: f64,
    /// δx² coefficient of the square-loop flux (Wb/m²).
    pub flux_quadratic: f64,
    /// δx² coefficient of the induced current (A/m²).
    pub current_quadratic: f64,
}

/// Zeroth-order flux through a square loop of half-width w centred on the axis.
pub fn square_loop_flux(w: f64, z: f64, cfg: &SystemConfig) -> f64 {
    2.0 * cfg.sphere.moment_field() * w * w / (PI * (w * w + z * z) * (2.0 * w * w + z * z).sqrt())
}

fn square_poly(w: f64, z: f64) -> f64 {
    let (w2, z2) = (w * w, z * z);
    5.0 * w2.powi(3) - 11.0 * w2 * w2 * z2 - 18.0 * w2 * z2 * z2 - 6.0 * z2.powi(3)
}

pub fn transverse_coefficients(cfg: &SystemConfig, omega: f64) -> Transverse {
    let w = cfg.ring.radius;
    let a = cfg.ring.wire_radius;
    let z = cfg.z_eq();
    let (w2, z2) = (w * w, z * z);
    let denom = (w2 + z2).powi(3) * (2.0 * w2 + z2).powf(2.5);
    let poly = square_poly(w, z);
    let mv = cfg.sphere.moment_field();
    let magnetization_volume = mv / cfg.constants.mu0;

    let flux_quadratic = mv * w2 * poly / (PI * denom);
    let current_quadratic = -w * magnetization_volume * poly / (4.0 * denom * ((2.0 * w / a).ln() - 0.774));

    // d/dz of the zeroth-order square-loop flux
    let s = 2.0 * w2 + z2;
    let dflux_dz = -2.0 * mv * w2 / PI * z * (2.0 * s + (w2 + z2)) / ((w2 + z2).powi(2) * s.powf(1.5));

    Transverse {
        half_m_omega_sq: 0.5 * cfg.mass() * omega * omega,
        gamma: -3.0 * current_quadratic * dflux_dz,
        beta: -2.0 * current_quadratic * flux_quadratic,
        flux_quadratic,
        current_quadratic,
    }
}

/// Square-loop self-inductance 2μ0w(ln(w/a) − 0.774)/π.
pub fn square_inductance(w: f64, a: f64, mu0: f64) -> f64 {
    2.0 * mu0 * w * ((w / a).ln() - 0.774) / PI
}

/// Torsional mode frequencies ν_n = √(EA/2μR_r²)·√(1 + n²) in rad/s, n = 1..=n_max.
pub fn torsional_frequencies(cfg: &SystemConfig, n_max: u32) -> Vec<f64> {
    let area = PI * cfg.ring.wire_radius.powi(2);
    let mu = cfg.ring.density * area;
    let base = (cfg.ring.youngs_modulus * area / (2.0 * mu * cfg.ring.radius.powi(2))).sqrt();
    (1..=n_max).map(|n| base * (1.0 + (n * n) as f64).sqrt()).collect()
}

/// Period of the horizontal quartic oscillation ¼βx⁴ at the given amplitude.
pub fn horizontal_period(mass: f64, beta: f64, amplitude: f64) -> f64 {
    // ∫₀¹ du/√(1 − u⁴)
    const QUARTIC_INTEGRAL: f64 = 1.311_028_777_146_059_9;
    4.0 * (2.0 * mass / beta).sqrt() / amplitude * QUARTIC_INTEGRAL
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapProfile {
    /// Chain ω (pinned or geometric), rad/s.
    pub omega: f64,
    /// ω from the closed form with the chain's L_r, rad/s.
    pub omega_geometric: f64,
    pub z_eq: f64,
    pub flux_at_eq: f64,
    pub d_ir_dz: f64,
    pub i_rmax: f64,
    /// −dF_z/dz at z_eq (N/m).
    pub stiffness: f64,
    pub transverse: Transverse,
    pub torsional: Vec<f64>,
    pub torsional_ratio: f64,
    /// Horizontal period at 10 µm amplitude (s).
    pub horizontal_period_10um: f64,
}

pub fn trap_profile(cfg: &SystemConfig) -> Result<TrapProfile> {
    let d = derive(cfg)?;
    let grad = current_gradient(cfg.z_eq(), cfg);
    let transverse = transverse_coefficients(cfg, d.omega);
    let torsional = torsional_frequencies(cfg, 5);
    let r = cfg.ring.radius;
    let z = cfg.z_eq();
    let stiffness = 9.0 * cfg.sphere.moment_field().powi(2) * r.powi(4) * z * z
        / (4.0 * cfg.resonator_inductance() * (r * r + z * z).powi(5));
    Ok(TrapProfile {
        omega: d.omega,
        omega_geometric: trap_frequency(cfg),
        z_eq: z,
        flux_at_eq: ring_flux(z, cfg),
        d_ir_dz: grad.d_ir_dz,
        i_rmax: grad.i_rmax,
        stiffness,
        torsional_ratio: torsional[0] / d.omega,
        horizontal_period_10um: horizontal_period(cfg.mass(), transverse.beta, 10e-6),
        transverse,
        torsional,
    })
}

/// F_z sampled on `points` heights spanning [z_min, z_max].
pub fn force_curve(cfg: &SystemConfig, z_min: f64, z_max: f64, points: usize) -> Vec<(f64, f64)> {
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let z = z_min + (z_max - z_min) * i as f64 / (n - 1) as f64;
            (z, vertical_force(z, cfg))
        })
        .collect()
}

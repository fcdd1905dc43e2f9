//! Physical constants (SI, CODATA 2018).

use serde::{Deserialize, Serialize};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const MU0: f64 = 1.256_637_062_12e-6;
pub const K_B: f64 = 1.380_649e-23;
pub const C: f64 = 299_792_458.0;
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;
pub const STANDARD_G: f64 = 9.81;

/// Kinetic diameter of N2, used for the gas mean free path.
pub const N2_KINETIC_DIAMETER: f64 = 3.7e-10;

/// Constants carried by a [`crate::SystemConfig`].
///
/// Only `g` may differ from the defaults; it is the measurand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub hbar: f64,
    pub mu0: f64,
    pub k_b: f64,
    pub c: f64,
    pub flux_quantum: f64,
    pub g: f64,
}

impl Constants {
    pub fn with_g(g: f64) -> Self {
        Self { g, ..Self::default() }
    }

    /// Impedance of free space, μ0·c.
    pub fn vacuum_impedance(&self) -> f64 {
        self.mu0 * self.c
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            mu0: MU0,
            k_b: K_B,
            c: C,
            flux_quantum: FLUX_QUANTUM,
            g: STANDARD_G,
        }
    }
}

//! Design and protocol simulator for a magnetomechanical quantum gravimeter:
//! a superconducting ring levitated above a magnetised sphere, coupled
//! inductively to a flux qubit.
//!
//! The pipeline runs from a [`SystemConfig`] through the derived chain
//! ([`derive`]), trap magnetostatics, inductive coupling, cooling, the noise
//! budget and open-system dynamics, to the phase-estimation protocol and its
//! sensitivity ladder.
//!
//! ```
//! use levgrav::{derive, SystemConfig};
//!
//! let cfg = SystemConfig::table1();
//! let d = derive(&cfg).unwrap();
//! assert_eq!(d.k, 31);
//! ```

pub mod calibration;
pub mod cli;
pub mod constants;
pub mod cooling;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod inductance;
pub mod magnetostatics;
pub mod model;
pub mod noise;
pub mod ode;
pub mod report;

pub use error::{Error, Result};
pub use model::{derive, load_config, validate, DerivedQuantities, SystemConfig};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/derived_chain.md")]
    pub mod derived_chain {}
    #[doc = include_str!("../../../book/src/trap_and_coupling.md")]
    pub mod trap_and_coupling {}
    #[doc = include_str!("../../../book/src/cooling.md")]
    pub mod cooling {}
    #[doc = include_str!("../../../book/src/open_dynamics.md")]
    pub mod open_dynamics {}
    #[doc = include_str!("../../../book/src/noise_budget.md")]
    pub mod noise_budget {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    pub mod estimation {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    pub mod calibration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}

//! Shortcut-to-adiabaticity pulse design for a Lambda-type three-level
//! system: unitary parametrisation, schedules, inverse-engineered controls,
//! closed and noisy dynamics, and a reproducible command-line driver.

pub mod basis;
pub mod cli;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod noise;
pub(crate) mod numerics;
pub mod schedule;

pub use error::{Error, Result};

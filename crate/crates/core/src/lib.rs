//! Pseudo-spectral simulation of the inertial Ericksen-Leslie liquid crystal
//! model on the periodic torus.

pub mod coefficients;
pub mod error;
pub mod spectral;
pub mod tensorcalc;
pub mod dynamics;
pub mod integrator;
pub mod diagnostics;
pub mod driver;

pub use error::{Error, Result};

//! Finite-element simulation of heat conduction in laser-irradiated tissue.
//!
//! The pipeline is: [`mesh`] builds a structured hexahedral grid,
//! [`assembly`] integrates the thermal mass and conductance matrices,
//! [`source`] and [`boundary`] produce the load vector each step,
//! [`stepper`] advances the system with Crank-Nicolson, and [`sim`]
//! drives whole runs from a config file.

pub mod assembly;
pub mod boundary;
pub mod error;
pub mod mesh;
pub mod par;
pub mod sim;
pub mod solver;
pub mod source;
pub mod sparse;
pub mod stepper;

pub use error::{Error, Result};
pub use par::Execution;

//! Hysteresis detection for scalar-input ODE systems.
//!
//! The crate follows one pipeline: freeze the input to study equilibria and
//! their stability, solve for the inputs where stability changes, simulate
//! the system under a periodic input, then measure how the input-output loop
//! behaves as the input frequency goes to zero.

pub mod cli;
pub mod config;
pub mod equilibrium;
pub mod expr;
pub mod model;
pub mod integrator;
pub mod loopanal;
pub mod plot;
pub mod signal;
pub mod verdict;

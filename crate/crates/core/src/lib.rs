//! Simulation and verification toolkit for the time-elapsed neuron population
//! model: an age density `n(s, t)` transported at unit speed, discharging at
//! rate one once the age exceeds a threshold `σ(J·X)` set by the network
//! activity `N(t) = n(0, t)`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod analysis;
pub mod analytic;
pub mod error;
pub mod exec;
pub mod model;
pub mod numeric;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{InitialDensity, ModelConfig, ThresholdSpec};

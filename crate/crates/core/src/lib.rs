//! Simulation and analysis of two-emitter photonic graph-state protocols.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod gf2;
pub mod graph;
pub mod noise;
pub mod protocol;
pub mod quantum;

pub use error::{Error, Result};

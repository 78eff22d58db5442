//! Simulation and analysis of dipolar-coupled electron spin networks read
//! out through a single optically addressable spin.

pub mod analysis;
pub mod analytic;
pub mod engine;
pub mod error;
pub mod io;
pub mod network;
pub mod ops;
pub mod sequence;
pub mod units;

pub use error::{Error, Result};

//! Simulation and memory-parameter estimation for nonlinear long-memory
//! time series.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counts;
pub mod error;
pub mod estimators;
pub mod fracsim;
pub mod harness;
pub mod random;
pub mod series;
pub mod shotnoise;
pub mod spectral;
pub mod stats;
pub mod volatility;

pub use error::{Error, Result};
pub use series::TimeSeries;

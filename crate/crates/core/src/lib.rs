//! Investor-strategy spectroscopy for order-driven stock markets.
//!
//! The crate reconstructs executions from raw order flow, accounts every
//! investor's net return under an exchange fee schedule, benchmarks each
//! investor against random-timing strategies with identical volumes, and
//! estimates the power laws linking return, trading frequency and holding
//! time.
//!
//! Stages, in pipeline order:
//!
//! - [`orderflow`]: data model, CSV parsing, trading calendar
//! - [`matching`]: call auction and continuous price-time book replay
//! - [`ledger`]: activity sequences, fees, earnings, return, frequency, holding time
//! - [`counterfactual`]: seeded random-timing Monte Carlo
//! - [`spectro`]: classification, binning, power-law fits, box statistics, 1/N benchmark
//! - [`synth`]: zero-intelligence order-flow generator
//! - [`pipeline`]: configuration and end-to-end report bundle

pub mod counterfactual;
pub mod error;
pub mod ledger;
pub mod matching;
pub mod orderflow;
pub mod pipeline;
pub mod spectro;
pub mod synth;

pub use error::{Diagnostic, Error, Result};

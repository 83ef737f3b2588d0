//! Command-line front end for the kink simulations: scenario configs,
//! CSV traces and metrics.

pub mod analysis;
pub mod config;
pub mod csvio;
pub mod error;
pub mod scenarios;

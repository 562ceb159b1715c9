//! Volatility-asymmetry analysis of daily stock returns around the opening of
//! short selling: three-factor excess returns, EGARCH(1,1) normalization,
//! skewness and return-volatility correlation statistics, replay of the
//! designated short-sale list and fixed-effects panel regressions, together
//! with a synthetic market generator for validation.

pub mod egarch;
pub mod error;
pub mod events;
pub mod factor_model;
pub mod figures;
pub mod market_data;
pub mod ols;
pub mod optim;
pub mod panel;
pub mod pipeline;
pub mod simulator;
pub mod stats;
pub mod windows;

pub use error::{Error, Result};

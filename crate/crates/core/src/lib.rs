//! Forecasting pipeline for daily closing prices: OHLCV ingest, additive
//! decomposition, the decomposition-driven neural forecaster, six classical
//! baselines, MSE / Theil's U / POCID, and Friedman–Nemenyi ranking, tied
//! together by a deterministic experiment harness.

pub mod baselines;
pub mod decomposition;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod megazord;
pub mod metrics;
pub mod rank_stats;

pub use error::{Error, Result};

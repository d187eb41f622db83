//! Single-sample mechanisms for two-sided markets.
//!
//! Buyers hold valuations over sets of unit-supply sellers; each seller's
//! prior is known only through one sample. The crate provides the market
//! model ([`market`], [`distribution`]), valuation oracles and their
//! sample-adjusted transforms ([`valuations`]), an exact welfare optimizer
//! ([`opt`]), the mechanisms ([`mechanisms`]) and a verification harness for
//! IR, budget balance, incentive compatibility and approximation ratios
//! ([`verify`]).

pub mod distribution;
pub mod error;
pub mod json;
pub mod market;
pub mod mechanisms;
pub mod opt;
pub mod rng;
pub mod scalar;
pub mod set;
pub mod valuations;
pub mod verify;

pub use error::{MarketError, Result};
pub use scalar::{Exact, NumericMode, Scalar};
pub use set::{AgentSet, BuyerSet, SellerSet};

//! Two-sided mechanisms and the one-sided mechanisms they are built from.
//!
//! A [`TwoSidedMechanism`] maps a market, a sample profile and a randomness
//! contract to an [`Outcome`](crate::market::Outcome). Mechanisms that need
//! randomness read it from named children of the contract: `"pairing"` for
//! buyer-seller matching and `"order"` for random arrival, so that two runs on
//! different reports can share the same coin flips.

mod adjusted;
mod baselines;
mod onesided;
mod rehearsal;

pub use adjusted::{AdjustedVcg, SurplusMechanism};
pub use baselines::{naive_two_sided_vcg, MedianMechanism, NaiveVcg};
pub use onesided::{
    rehearsal_prices, Arrival, BuyerOrder, ExactVcg, InfoMode, OneSidedInput, OneSidedMechanism,
    OneSidedWin, RehearsalSelector, RehearsalState,
};
pub use rehearsal::{BlackBoxTwo, ReserveRehearsal};

use serde::Serialize;

use crate::distribution::SampleProfile;
use crate::error::Result;
use crate::market::{MarketInstance, Outcome};
use crate::rng::RngContract;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetClaim {
    Strong,
    Weak,
    None,
}

/// What a mechanism promises; the verification harness checks these claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Guarantees {
    pub ir: bool,
    pub dsic: bool,
    pub budget: BudgetClaim,
    /// Human-readable approximation bound.
    pub approximation: String,
    /// Whether outcomes depend on the randomness contract.
    pub randomized: bool,
}

pub trait TwoSidedMechanism<T: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn guarantees(&self) -> Guarantees;

    /// Whether `run` reads `profile.buyer_samples`.
    fn needs_buyer_samples(&self) -> bool {
        false
    }

    fn run(
        &self,
        market: &MarketInstance<T>,
        profile: &SampleProfile<T>,
        rng: &RngContract,
    ) -> Result<Outcome<T>>;
}

/// Sellers who accept their sample as a take-it-or-leave-it price:
/// `{s : v_s <= v'_s}`.
pub fn accepting_sellers<T: Scalar>(
    market: &MarketInstance<T>,
    samples: &[T],
) -> crate::set::SellerSet {
    market
        .sellers()
        .iter()
        .zip(samples)
        .enumerate()
        .filter(|(_, (s, &sample))| s.value <= sample)
        .map(|(j, _)| j)
        .collect()
}

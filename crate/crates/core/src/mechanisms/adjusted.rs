//! Mechanisms that first post each seller its sample as price and then
//! allocate the accepted items by an affine maximizer or a one-sided
//! mechanism run on sample-discounted valuations.

use crate::distribution::SampleProfile;
use crate::error::{MarketError, Result};
use crate::market::{MarketInstance, Outcome};
use crate::opt::{ConstraintSystem, Optimizer};
use crate::rng::RngContract;
use crate::scalar::Scalar;
use crate::set::SellerSet;
use crate::valuations::{
    adjusted_hat, AdjustMode, AdjustedOracle, SetValuation, DEFAULT_ENUMERATION_CAP,
};

use super::{
    accepting_sellers, BudgetClaim, Guarantees, OneSidedInput, OneSidedMechanism, TwoSidedMechanism,
};

/// VCG on `Σ_b v_b(S_b) - Σ_{s assigned} v'_s` over the accepting sellers.
/// Each winner pays the VCG price plus the samples of the bundle; each sold
/// seller receives its sample.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdjustedVcg {
    pub optimizer: Optimizer,
}

impl<T: Scalar> TwoSidedMechanism<T> for AdjustedVcg {
    fn name(&self) -> String {
        "adjusted_vcg".into()
    }

    fn guarantees(&self) -> Guarantees {
        Guarantees {
            ir: true,
            dsic: true,
            budget: BudgetClaim::Weak,
            approximation: "2 (subadditive buyers)".into(),
            randomized: false,
        }
    }

    fn run(
        &self,
        market: &MarketInstance<T>,
        profile: &SampleProfile<T>,
        _rng: &RngContract,
    ) -> Result<Outcome<T>> {
        if !market.constraint().is_unconstrained() {
            return Err(MarketError::Unsupported(
                "adjusted VCG handles unconstrained markets; use black_box_two for constraints"
                    .into(),
            ));
        }
        let samples = &profile.seller_samples;
        check_samples(market, samples)?;
        let available = accepting_sellers(market, samples);
        let tables = market.buyer_tables()?;
        let unconstrained = ConstraintSystem::unconstrained();
        let chosen =
            self.optimizer
                .max_adjusted_welfare(&tables, available, samples, &unconstrained)?;
        let prices =
            self.optimizer
                .vcg_payments(&tables, available, samples, &unconstrained, &chosen)?;
        let mut outcome = Outcome::no_trade(market.num_buyers(), market.num_sellers());
        for b in chosen.winners().iter() {
            for s in chosen.bundles[b].iter() {
                outcome.assign(b, s, samples[s]);
            }
            outcome.buyer_payments[b] = prices[b] + sum_samples(samples, chosen.bundles[b]);
        }
        Ok(outcome)
    }
}

/// Posts samples to sellers, runs a one-sided mechanism on the discounted
/// valuations of the accepted items, and charges each winner the one-sided
/// price plus the samples of the items received.
///
/// A winner's one-sided bundle `S` is cut down to the witness of `hat(S)`,
/// the smallest best-surplus subset, so every buyer ends up with an
/// inclusion-minimal set. Items dropped this way stay with their sellers.
pub struct SurplusMechanism<T> {
    pub onesided: Box<dyn OneSidedMechanism<T>>,
    pub mode: AdjustMode,
}

impl<T: Scalar> SurplusMechanism<T> {
    pub fn new(onesided: Box<dyn OneSidedMechanism<T>>) -> Self {
        SurplusMechanism {
            onesided,
            mode: AdjustMode::Hat,
        }
    }

    #[must_use]
    pub fn with_mode(mut self, mode: AdjustMode) -> Self {
        self.mode = mode;
        self
    }
}

impl<T: Scalar> TwoSidedMechanism<T> for SurplusMechanism<T> {
    fn name(&self) -> String {
        match self.mode {
            AdjustMode::Hat => format!("surplus[{}]", self.onesided.name()),
            AdjustMode::Bar => format!("surplus_bar[{}]", self.onesided.name()),
        }
    }

    fn guarantees(&self) -> Guarantees {
        Guarantees {
            ir: true,
            dsic: self.mode == AdjustMode::Hat,
            budget: BudgetClaim::Weak,
            approximation: "max{3, 2·alpha} (XOS buyers)".into(),
            randomized: self.onesided.randomized(),
        }
    }

    fn run(
        &self,
        market: &MarketInstance<T>,
        profile: &SampleProfile<T>,
        rng: &RngContract,
    ) -> Result<Outcome<T>> {
        let samples = &profile.seller_samples;
        check_samples(market, samples)?;
        let available = accepting_sellers(market, samples);
        let tables = market
            .buyers()
            .iter()
            .map(|b| AdjustedOracle::new(&b.valuation, samples, available, self.mode).tabulate())
            .collect::<Result<Vec<_>>>()?;
        let input = OneSidedInput::Bundles {
            valuations: &tables,
            items: available,
            constraint: market.constraint(),
        };
        let wins = self.onesided.run(input, rng)?;
        let mut outcome = Outcome::no_trade(market.num_buyers(), market.num_sellers());
        let mut used = SellerSet::EMPTY;
        for win in wins {
            let offered = win.bundle.intersection(available);
            if !offered.is_disjoint(used) || win.buyer >= market.num_buyers() {
                return Err(MarketError::Structural(format!(
                    "one-sided mechanism {} returned an infeasible allocation",
                    self.onesided.name()
                )));
            }
            used = used.union(offered);
            let (_, kept) = adjusted_hat(
                market.valuation(win.buyer),
                samples,
                available,
                offered,
                DEFAULT_ENUMERATION_CAP,
            )?;
            if kept.is_empty() {
                continue;
            }
            for s in kept.iter() {
                outcome.assign(win.buyer, s, samples[s]);
            }
            outcome.buyer_payments[win.buyer] = win.price + sum_samples(samples, kept);
        }
        Ok(outcome)
    }
}

fn sum_samples<T: Scalar>(samples: &[T], set: SellerSet) -> T {
    set.iter().map(|s| samples[s]).sum()
}

fn check_samples<T: Scalar>(market: &MarketInstance<T>, samples: &[T]) -> Result<()> {
    if samples.len() != market.num_sellers() {
        return Err(MarketError::InvalidInput(format!(
            "{} seller samples for {} sellers",
            samples.len(),
            market.num_sellers()
        )));
    }
    Ok(())
}

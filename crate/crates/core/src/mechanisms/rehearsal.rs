//! Double auctions that pair selected buyers with random sellers:
//! Reserve Rehearsal and the generic Black Box II reduction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::distribution::SampleProfile;
use crate::error::{MarketError, Result};
use crate::market::{MarketInstance, Outcome};
use crate::opt::ConstraintSystem;
use crate::rng::RngContract;
use crate::scalar::Scalar;

use super::{
    BudgetClaim, BuyerOrder, Guarantees, InfoMode, OneSidedInput, OneSidedMechanism,
    RehearsalState, TwoSidedMechanism,
};

/// Uniform draws without replacement from the sellers, fed by the
/// `"pairing"` stream.
struct SellerDraw {
    unused: Vec<usize>,
    rng: ChaCha8Rng,
}

impl SellerDraw {
    fn new(m: usize, rng: &RngContract) -> Self {
        SellerDraw {
            unused: (0..m).collect(),
            rng: rng.child("pairing").rng(),
        }
    }

    fn next(&mut self) -> Option<usize> {
        if self.unused.is_empty() {
            return None;
        }
        let i = self.rng.random_range(0..self.unused.len());
        Some(self.unused.remove(i))
    }
}

/// Offers `buyer` and `seller` the price `max{reserve, v'_s}`; they trade iff
/// `v_b >= price >= v_s`.
fn propose<T: Scalar>(
    outcome: &mut Outcome<T>,
    market: &MarketInstance<T>,
    values: &[T],
    samples: &[T],
    buyer: usize,
    seller: usize,
    reserve: T,
) {
    let price = reserve.max_of(samples[seller]);
    if values[buyer] >= price && price >= market.sellers()[seller].value {
        outcome.assign(buyer, seller, price);
        outcome.buyer_payments[buyer] = price;
    }
}

fn scalar_market<T: Scalar>(
    market: &MarketInstance<T>,
    profile: &SampleProfile<T>,
) -> Result<Vec<T>> {
    if profile.seller_samples.len() != market.num_sellers() {
        return Err(MarketError::InvalidInput(
            "one sample per seller is required".into(),
        ));
    }
    market.scalar_buyer_values()
}

/// Reserve Rehearsal: buyers are approached in order; a buyer above the
/// threshold deletes a price from the rehearsal multiset and is offered a
/// uniformly random unused seller at `max{v'_s, p_min}`.
#[derive(Debug, Clone, Default)]
pub struct ReserveRehearsal {
    pub order: BuyerOrder,
}

impl ReserveRehearsal {
    /// Runs the mechanism and also returns the rehearsal state.
    pub fn run_with_state<T: Scalar>(
        &self,
        market: &MarketInstance<T>,
        profile: &SampleProfile<T>,
        rng: &RngContract,
    ) -> Result<(Outcome<T>, RehearsalState<T>)> {
        let values = scalar_market(market, profile)?;
        let buyer_samples = profile.buyer_samples.as_deref().ok_or_else(|| {
            MarketError::InvalidInput("reserve rehearsal needs buyer samples".into())
        })?;
        if buyer_samples.len() != values.len() {
            return Err(MarketError::InvalidInput(
                "one sample per buyer is required".into(),
            ));
        }
        let (n, m) = (market.num_buyers(), market.num_sellers());
        let mut state = RehearsalState::new(buyer_samples, n.min(m));
        let mut draw = SellerDraw::new(m, rng);
        let mut outcome = Outcome::no_trade(n, m);
        for b in self.order.realize(n, rng)? {
            let Some(reserve) = state.approach(b, values[b]) else {
                continue;
            };
            let seller = draw.next().expect("at most min(n, m) buyers are selected");
            state.pairings.push((b, seller));
            propose(
                &mut outcome,
                market,
                &values,
                &profile.seller_samples,
                b,
                seller,
                reserve,
            );
        }
        Ok((outcome, state))
    }
}

impl<T: Scalar> TwoSidedMechanism<T> for ReserveRehearsal {
    fn name(&self) -> String {
        "reserve_rehearsal".into()
    }

    fn guarantees(&self) -> Guarantees {
        Guarantees {
            ir: true,
            dsic: true,
            budget: BudgetClaim::Strong,
            approximation: "1 + alpha/(2 - sqrt 3), alpha = 1 + O(1/sqrt k)".into(),
            randomized: true,
        }
    }

    fn needs_buyer_samples(&self) -> bool {
        true
    }

    fn run(
        &self,
        market: &MarketInstance<T>,
        profile: &SampleProfile<T>,
        rng: &RngContract,
    ) -> Result<Outcome<T>> {
        self.run_with_state(market, profile, rng).map(|(o, _)| o)
    }
}

/// Black Box II: a one-sided mechanism on `constraint ∩ KUniform(min{n, m})`
/// picks tentative buyers and prices; each is paired, in confirmation order,
/// with a uniformly random unused seller and offered `max{p_b, v'_s}`.
pub struct BlackBoxTwo<T> {
    pub onesided: Box<dyn OneSidedMechanism<T>>,
}

impl<T: Scalar> BlackBoxTwo<T> {
    pub fn new(onesided: Box<dyn OneSidedMechanism<T>>) -> Self {
        BlackBoxTwo { onesided }
    }
}

impl<T: Scalar> TwoSidedMechanism<T> for BlackBoxTwo<T> {
    fn name(&self) -> String {
        format!("black_box_two[{}]", self.onesided.name())
    }

    fn guarantees(&self) -> Guarantees {
        Guarantees {
            ir: true,
            dsic: true,
            budget: BudgetClaim::Strong,
            approximation: "1 + alpha/(2 - sqrt 3)".into(),
            randomized: true,
        }
    }

    fn needs_buyer_samples(&self) -> bool {
        self.onesided.info() == InfoMode::SingleSample
    }

    fn run(
        &self,
        market: &MarketInstance<T>,
        profile: &SampleProfile<T>,
        rng: &RngContract,
    ) -> Result<Outcome<T>> {
        let values = scalar_market(market, profile)?;
        let (n, m) = (market.num_buyers(), market.num_sellers());
        let constraint = market
            .constraint()
            .clone()
            .intersect(ConstraintSystem::k_uniform(n.min(m)));
        let input = OneSidedInput::Scalar {
            values: &values,
            samples: profile.buyer_samples.as_deref(),
            constraint: &constraint,
        };
        let tentative = self.onesided.run(input, rng)?;
        if tentative.len() > m {
            return Err(MarketError::Structural(format!(
                "{} tentative buyers for {m} sellers",
                tentative.len()
            )));
        }
        let mut draw = SellerDraw::new(m, rng);
        let mut outcome = Outcome::no_trade(n, m);
        for win in tentative {
            let seller = draw.next().expect("checked above");
            propose(
                &mut outcome,
                market,
                &values,
                &profile.seller_samples,
                win.buyer,
                seller,
                win.price,
            );
        }
        Ok(outcome)
    }
}

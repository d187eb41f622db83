//! Reference mechanisms: a full-prior posted price and the textbook two-sided
//! VCG that runs a deficit.

use crate::distribution::SampleProfile;
use crate::error::{MarketError, Result};
use crate::market::{budget_surplus, MarketInstance, Outcome};
use crate::rng::RngContract;
use crate::scalar::Scalar;

use super::{BudgetClaim, Guarantees, TwoSidedMechanism};

/// Bilateral trade at the posted price `median`; trade iff `v_b >= q >= v_s`.
#[derive(Debug, Clone, Copy)]
pub struct MedianMechanism<T> {
    pub median: T,
}

impl<T: Scalar> TwoSidedMechanism<T> for MedianMechanism<T> {
    fn name(&self) -> String {
        "median".into()
    }

    fn guarantees(&self) -> Guarantees {
        Guarantees {
            ir: true,
            dsic: true,
            budget: BudgetClaim::Strong,
            approximation: "2 (bilateral trade, full prior)".into(),
            randomized: false,
        }
    }

    fn run(
        &self,
        market: &MarketInstance<T>,
        _profile: &SampleProfile<T>,
        _rng: &RngContract,
    ) -> Result<Outcome<T>> {
        if market.num_buyers() != 1 || market.num_sellers() != 1 {
            return Err(MarketError::Unsupported(
                "the median mechanism is for bilateral trade".into(),
            ));
        }
        let q = self.median;
        let mut outcome = Outcome::no_trade(1, 1);
        if market
            .valuation(0)
            .evaluate(crate::set::SellerSet::singleton(0))
            >= q
            && q >= market.sellers()[0].value
        {
            outcome.assign(0, 0, q);
            outcome.buyer_payments[0] = q;
        }
        Ok(outcome)
    }
}

/// Two-sided VCG for one item and unit-demand buyers. The item goes to the
/// highest buyer when that value exceeds the seller's. The winner pays
/// `max{v_s, second-highest buyer}`; the seller receives the winner's value.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveVcg;

impl<T: Scalar> TwoSidedMechanism<T> for NaiveVcg {
    fn name(&self) -> String {
        "naive_vcg".into()
    }

    fn guarantees(&self) -> Guarantees {
        Guarantees {
            ir: true,
            dsic: true,
            budget: BudgetClaim::None,
            approximation: "1".into(),
            randomized: false,
        }
    }

    fn run(
        &self,
        market: &MarketInstance<T>,
        _profile: &SampleProfile<T>,
        _rng: &RngContract,
    ) -> Result<Outcome<T>> {
        naive_two_sided_vcg(market).map(|(o, _)| o)
    }
}

/// The two-sided VCG outcome and its budget surplus (negative: a deficit).
pub fn naive_two_sided_vcg<T: Scalar>(market: &MarketInstance<T>) -> Result<(Outcome<T>, T)> {
    if market.num_sellers() != 1 || market.num_buyers() < 2 {
        return Err(MarketError::Unsupported(
            "naive two-sided VCG needs one item and at least two buyers".into(),
        ));
    }
    let values = market.scalar_buyer_values()?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .expect("comparable")
            .then(a.cmp(&b))
    });
    let (top, second) = (order[0], order[1]);
    let v_s = market.sellers()[0].value;
    let mut outcome = Outcome::no_trade(values.len(), 1);
    if values[top] > v_s {
        outcome.assign(top, 0, values[top]);
        outcome.buyer_payments[top] = v_s.max_of(values[second]);
    }
    let surplus = budget_surplus(&outcome);
    Ok((outcome, surplus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn ex(n: i64) -> Exact {
        Exact::from_int(n)
    }

    fn deficit(v_s: i64, b1: i64, b2: i64) -> Exact {
        let market = MarketInstance::identical_items(vec![ex(b1), ex(b2)], vec![ex(v_s)]).unwrap();
        naive_two_sided_vcg(&market).unwrap().1
    }

    #[test]
    fn example_deficits() {
        assert_eq!(deficit(1, 10, 5), ex(-5));
        assert_eq!(deficit(0, 10, 10), ex(0));
        assert_eq!(deficit(4, 10, 1), ex(-6));
        let market = MarketInstance::identical_items(vec![ex(10), ex(5)], vec![ex(1)]).unwrap();
        let (out, _) = naive_two_sided_vcg(&market).unwrap();
        assert_eq!(out.buyer_payments, vec![ex(5), ex(0)]);
        assert_eq!(out.seller_payments, vec![ex(10)]);
    }

    #[test]
    fn median_examples() {
        let rng = RngContract::new(0, "t", 0);
        let none = SampleProfile::fixed(vec![ex(0)], None);
        let m = MedianMechanism { median: ex(1) };
        let out = m
            .run(
                &MarketInstance::bilateral(ex(1), ex(5)).unwrap(),
                &none,
                &rng,
            )
            .unwrap();
        assert_eq!(out.buyer_payments, vec![ex(1)]);
        let out = m
            .run(
                &MarketInstance::bilateral(ex(0), Exact::from_frac(1, 2)).unwrap(),
                &none,
                &rng,
            )
            .unwrap();
        assert!(out.trades.is_empty());
        let market = MarketInstance::bilateral(ex(3), ex(2)).unwrap();
        let out = m.run(&market, &none, &rng).unwrap();
        assert_eq!(crate::market::social_welfare(&market, &out).unwrap(), ex(3));
    }
}

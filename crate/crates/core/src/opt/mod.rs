//! Exact welfare optimization: OPT, the sample-adjusted affine maximizer and
//! its VCG prices.
//!
//! Everything reduces to one brute-force search over the `(n+1)^m` ways of
//! giving each item to a buyer or leaving it unsold. The search refuses to run
//! beyond a configurable number of leaves.

mod constraint;
mod enumerate;

pub use constraint::{ConstraintKind, ConstraintSystem};

use crate::error::Result;
use crate::market::MarketInstance;
use crate::scalar::Scalar;
use crate::set::{BuyerSet, SellerSet};
use crate::valuations::SetTable;

use enumerate::AffineProblem;

/// Default cap on enumerated allocations.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Disjoint bundles per buyer with the objective value they attain.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationCandidate<T> {
    pub bundles: Vec<SellerSet>,
    pub objective: T,
}

impl<T: Scalar> AllocationCandidate<T> {
    pub fn empty(buyers: usize) -> Self {
        AllocationCandidate {
            bundles: vec![SellerSet::EMPTY; buyers],
            objective: T::zero(),
        }
    }

    /// Buyers with a non-empty bundle.
    pub fn winners(&self) -> BuyerSet {
        self.bundles
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(b, _)| b)
            .collect()
    }

    pub fn assigned(&self) -> SellerSet {
        self.bundles
            .iter()
            .fold(SellerSet::EMPTY, |acc, &s| acc.union(s))
    }
}

/// Brute-force optimizer with an enumeration budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Optimizer {
    pub budget: u128,
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer {
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Optimizer {
    pub fn with_budget(budget: u128) -> Self {
        Optimizer { budget }
    }

    /// Welfare-maximizing feasible allocation and its social welfare.
    ///
    /// Double auctions with scalar unit-demand buyers under cardinality
    /// constraints are solved by sorting: the highest buyers trade with the
    /// cheapest sellers while the gain is positive.
    pub fn opt_welfare<T: Scalar>(
        &self,
        market: &MarketInstance<T>,
    ) -> Result<(AllocationCandidate<T>, T)> {
        let seller_values = market.seller_values();
        let base: T = seller_values.iter().copied().sum();
        if let (Some(bound), Ok(values)) = (
            market.constraint().uniform_bound(),
            market.scalar_buyer_values(),
        ) {
            let chosen = sorted_matching(&values, &seller_values, bound);
            let welfare = base + chosen.objective;
            return Ok((chosen, welfare));
        }
        let tables = market.buyer_tables()?;
        let problem = AffineProblem {
            tables: &tables,
            items: market.all_sellers(),
            costs: &seller_values,
            constraint: market.constraint(),
            budget: self.budget,
        };
        let chosen = self.solve(&problem, None)?;
        let welfare = base + chosen.objective;
        Ok((chosen, welfare))
    }

    /// Maximizer of `Σ_b v_b(S_b) - Σ_{s assigned} v'_s` over bundles inside
    /// `available`. Bundles are inclusion-minimal for their adjusted value.
    pub fn max_adjusted_welfare<T: Scalar>(
        &self,
        buyers: &[SetTable<T>],
        available: SellerSet,
        samples: &[T],
        constraint: &ConstraintSystem,
    ) -> Result<AllocationCandidate<T>> {
        let problem = AffineProblem {
            tables: buyers,
            items: available,
            costs: samples,
            constraint,
            budget: self.budget,
        };
        self.solve(&problem, None)
    }

    /// VCG prices for the adjusted objective: for each buyer, the optimum
    /// without the buyer minus what the others get under `chosen`. Zero for buyers
    /// who receive nothing. The mechanism charge adds the samples of the bundle.
    pub fn vcg_payments<T: Scalar>(
        &self,
        buyers: &[SetTable<T>],
        available: SellerSet,
        samples: &[T],
        constraint: &ConstraintSystem,
        chosen: &AllocationCandidate<T>,
    ) -> Result<Vec<T>> {
        let problem = AffineProblem {
            tables: buyers,
            items: available,
            costs: samples,
            constraint,
            budget: self.budget,
        };
        vcg_prices(&problem, chosen)
    }

    /// Maximizer of `Σ_b [v_b(S_b) - Σ_{s∈S_b} max{v_s, v'_s}]`; the returned
    /// objective is the optimal sum of adjusted gains.
    pub fn opt_max_allocation<T: Scalar>(
        &self,
        market: &MarketInstance<T>,
        samples: &[T],
    ) -> Result<(AllocationCandidate<T>, T)> {
        let costs: Vec<T> = market
            .seller_values()
            .iter()
            .zip(samples)
            .map(|(&v, &s)| v.max_of(s))
            .collect();
        let tables = market.buyer_tables()?;
        let problem = AffineProblem {
            tables: &tables,
            items: market.all_sellers(),
            costs: &costs,
            constraint: market.constraint(),
            budget: self.budget,
        };
        let chosen = self.solve(&problem, None)?;
        let gains = chosen.objective;
        Ok((chosen, gains))
    }

    /// Welfare-maximizing allocation of `items` with zero costs and its VCG
    /// payments: the classic one-sided VCG mechanism.
    pub fn exact_vcg<T: Scalar>(
        &self,
        buyers: &[SetTable<T>],
        items: SellerSet,
        constraint: &ConstraintSystem,
    ) -> Result<(AllocationCandidate<T>, Vec<T>)> {
        let universe = buyers.first().map_or(0, SetTable::items);
        let costs = vec![T::zero(); universe];
        let problem = AffineProblem {
            tables: buyers,
            items,
            costs: &costs,
            constraint,
            budget: self.budget,
        };
        let chosen = self.solve(&problem, None)?;
        let prices = vcg_prices(&problem, &chosen)?;
        Ok((chosen, prices))
    }

    fn solve<T: Scalar>(
        &self,
        problem: &AffineProblem<'_, T>,
        excluded: Option<usize>,
    ) -> Result<AllocationCandidate<T>> {
        let s = problem.solve(excluded)?;
        Ok(AllocationCandidate {
            bundles: s.bundles,
            objective: s.objective,
        })
    }
}

fn vcg_prices<T: Scalar>(
    problem: &AffineProblem<'_, T>,
    chosen: &AllocationCandidate<T>,
) -> Result<Vec<T>> {
    let mut prices = vec![T::zero(); problem.tables.len()];
    for b in chosen.winners().iter() {
        let without = problem.solve(Some(b))?.objective;
        let others = chosen.objective - problem.term(b, chosen.bundles[b]);
        prices[b] = without - others;
    }
    Ok(prices)
}

/// Sorted greedy for identical items: buyers by decreasing value (lower index
/// first on ties) meet sellers by increasing value while the buyer is strictly
/// better and fewer than `bound` trades happened. Objective is the gain over
/// no trade.
fn sorted_matching<T: Scalar>(buyers: &[T], sellers: &[T], bound: usize) -> AllocationCandidate<T> {
    let mut by_buyer: Vec<usize> = (0..buyers.len()).collect();
    by_buyer.sort_by(|&a, &b| {
        buyers[b]
            .partial_cmp(&buyers[a])
            .expect("comparable")
            .then(a.cmp(&b))
    });
    let mut by_seller: Vec<usize> = (0..sellers.len()).collect();
    by_seller.sort_by(|&a, &b| {
        sellers[a]
            .partial_cmp(&sellers[b])
            .expect("comparable")
            .then(a.cmp(&b))
    });
    let mut out = AllocationCandidate::empty(buyers.len());
    for (&b, &s) in by_buyer.iter().zip(&by_seller).take(bound) {
        if buyers[b] <= sellers[s] {
            break;
        }
        out.bundles[b] = SellerSet::singleton(s);
        out.objective = out.objective + (buyers[b] - sellers[s]);
    }
    out
}

/// [`Optimizer::opt_welfare`] with the default budget.
pub fn opt_welfare<T: Scalar>(market: &MarketInstance<T>) -> Result<(AllocationCandidate<T>, T)> {
    Optimizer::default().opt_welfare(market)
}

/// [`Optimizer::max_adjusted_welfare`] with the default budget.
pub fn max_adjusted_welfare<T: Scalar>(
    buyers: &[SetTable<T>],
    available: SellerSet,
    samples: &[T],
    constraint: &ConstraintSystem,
) -> Result<AllocationCandidate<T>> {
    Optimizer::default().max_adjusted_welfare(buyers, available, samples, constraint)
}

/// [`Optimizer::vcg_payments`] with the default budget.
pub fn vcg_payments<T: Scalar>(
    buyers: &[SetTable<T>],
    available: SellerSet,
    samples: &[T],
    constraint: &ConstraintSystem,
    chosen: &AllocationCandidate<T>,
) -> Result<Vec<T>> {
    Optimizer::default().vcg_payments(buyers, available, samples, constraint, chosen)
}

/// [`Optimizer::opt_max_allocation`] with the default budget.
pub fn opt_max_allocation<T: Scalar>(
    market: &MarketInstance<T>,
    samples: &[T],
) -> Result<(AllocationCandidate<T>, T)> {
    Optimizer::default().opt_max_allocation(market, samples)
}

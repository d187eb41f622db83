//! One-sided plug-ins: exact VCG and the threshold-deletion rehearsal
//! selector.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{MarketError, Result};
use crate::opt::{ConstraintSystem, Optimizer};
use crate::rng::RngContract;
use crate::scalar::Scalar;
use crate::set::{BuyerSet, SellerSet};
use crate::valuations::SetTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrival {
    Offline,
    OnlineFixedOrder,
    OnlineRandomOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMode {
    PriorFree,
    SingleSample,
    FullPrior,
}

/// Input of a one-sided mechanism: either buyers with set valuations over
/// `items`, or scalar buyers competing for identical slots.
#[derive(Debug, Clone, Copy)]
pub enum OneSidedInput<'a, T> {
    Bundles {
        valuations: &'a [SetTable<T>],
        items: SellerSet,
        constraint: &'a ConstraintSystem,
    },
    Scalar {
        values: &'a [T],
        samples: Option<&'a [T]>,
        constraint: &'a ConstraintSystem,
    },
}

/// A winner, the bundle won (empty for scalar inputs) and the price. Winners
/// are listed in the order the mechanism confirms them.
#[derive(Debug, Clone, PartialEq)]
pub struct OneSidedWin<T> {
    pub buyer: usize,
    pub bundle: SellerSet,
    pub price: T,
}

pub trait OneSidedMechanism<T: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn arrival(&self) -> Arrival;

    fn info(&self) -> InfoMode;

    /// Whether wins depend on the randomness contract.
    fn randomized(&self) -> bool {
        false
    }

    fn run(&self, input: OneSidedInput<'_, T>, rng: &RngContract) -> Result<Vec<OneSidedWin<T>>>;
}

/// Welfare-maximizing allocation with VCG payments.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactVcg {
    pub optimizer: Optimizer,
}

impl<T: Scalar> OneSidedMechanism<T> for ExactVcg {
    fn name(&self) -> String {
        "exact_vcg".into()
    }

    fn arrival(&self) -> Arrival {
        Arrival::Offline
    }

    fn info(&self) -> InfoMode {
        InfoMode::PriorFree
    }

    fn run(&self, input: OneSidedInput<'_, T>, _rng: &RngContract) -> Result<Vec<OneSidedWin<T>>> {
        match input {
            OneSidedInput::Bundles {
                valuations,
                items,
                constraint,
            } => {
                let (chosen, prices) = self.optimizer.exact_vcg(valuations, items, constraint)?;
                Ok(chosen
                    .winners()
                    .iter()
                    .map(|b| OneSidedWin {
                        buyer: b,
                        bundle: chosen.bundles[b],
                        price: prices[b],
                    })
                    .collect())
            }
            OneSidedInput::Scalar {
                values, constraint, ..
            } => scalar_vcg(values, constraint, self.optimizer.budget),
        }
    }
}

/// VCG over scalar buyers: the feasible buyer set with the largest total
/// value (fewest buyers, then smallest indices on ties), each winner paying
/// the externality imposed on the others. Winners are reported in index order.
fn scalar_vcg<T: Scalar>(
    values: &[T],
    constraint: &ConstraintSystem,
    budget: u128,
) -> Result<Vec<OneSidedWin<T>>> {
    let n = values.len();
    let best = |excluded: Option<usize>| -> Result<(T, BuyerSet)> {
        if let Some(k) = constraint.uniform_bound() {
            let mut order: Vec<usize> = (0..n)
                .filter(|&b| Some(b) != excluded && values[b] > T::zero())
                .collect();
            order.sort_by(|&a, &b| {
                values[b]
                    .partial_cmp(&values[a])
                    .expect("comparable")
                    .then(a.cmp(&b))
            });
            order.truncate(k);
            return Ok((
                order.iter().map(|&b| values[b]).sum(),
                order.into_iter().collect(),
            ));
        }
        if (1u128 << n) > budget {
            return Err(MarketError::Capacity {
                what: "buyer subset enumeration",
                needed: 1u128 << n,
                budget,
            });
        }
        let pool =
            BuyerSet::full(n).difference(excluded.map_or(BuyerSet::EMPTY, BuyerSet::singleton));
        let mut best = (T::zero(), BuyerSet::EMPTY);
        for set in pool.subsets().filter(|&s| constraint.feasible(s)) {
            let total: T = set.iter().map(|b| values[b]).sum();
            let better = total > best.0
                || (total == best.0
                    && (set.len() < best.1.len()
                        || (set.len() == best.1.len() && set.cmp_lex(best.1).is_lt())));
            if better {
                best = (total, set);
            }
        }
        Ok(best)
    };
    let (total, winners) = best(None)?;
    winners
        .iter()
        .map(|b| {
            let (without, _) = best(Some(b))?;
            Ok(OneSidedWin {
                buyer: b,
                bundle: SellerSet::EMPTY,
                price: without - (total - values[b]),
            })
        })
        .collect()
}

/// Order in which buyers are approached.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum BuyerOrder {
    /// By index.
    #[default]
    Index,
    /// A fixed permutation of the buyer indices.
    Fixed(Vec<usize>),
    /// Uniformly random, drawn from the `"order"` stream.
    Random,
}

impl BuyerOrder {
    pub fn realize(&self, n: usize, rng: &RngContract) -> Result<Vec<usize>> {
        match self {
            BuyerOrder::Index => Ok((0..n).collect()),
            BuyerOrder::Fixed(order) => {
                let mut sorted = order.clone();
                sorted.sort_unstable();
                if sorted != (0..n).collect::<Vec<_>>() {
                    return Err(MarketError::InvalidInput(format!(
                        "buyer order {order:?} is not a permutation of 0..{n}"
                    )));
                }
                Ok(order.clone())
            }
            BuyerOrder::Random => {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng.child("order").rng());
                Ok(order)
            }
        }
    }

    fn arrival(&self) -> Arrival {
        match self {
            BuyerOrder::Random => Arrival::OnlineRandomOrder,
            _ => Arrival::OnlineFixedOrder,
        }
    }
}

/// The price multiset for `k` slots built from buyer samples: the `k - 2⌈√k⌉`
/// largest samples plus `2⌈√k⌉` copies of the smallest of them. When
/// `k - 2⌈√k⌉ < 1`, `k` copies of the largest sample. Sorted decreasingly.
pub fn rehearsal_prices<T: Scalar>(samples: &[T], k: usize) -> Vec<T> {
    let k = k.min(samples.len());
    if k == 0 {
        return Vec::new();
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("comparable"));
    let root = ceil_sqrt(k);
    if k < 2 * root + 1 {
        return vec![sorted[0]; k];
    }
    let top = k - 2 * root;
    let mut prices = sorted[..top].to_vec();
    prices.extend(std::iter::repeat_n(sorted[top - 1], 2 * root));
    prices
}

fn ceil_sqrt(k: usize) -> usize {
    let mut r = (k as f64).sqrt() as usize;
    while r * r < k {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= k {
        r -= 1;
    }
    r
}

/// One buyer's fate in the rehearsal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RehearsalDecision<T> {
    /// Value at most the threshold, or no price left.
    Skipped,
    /// The price deleted from the multiset on the buyer's behalf.
    Selected { deleted: T },
}

/// Running state of the rehearsal: remaining prices, the fixed threshold and
/// per-buyer decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct RehearsalState<T> {
    pub prices: Vec<T>,
    pub p_min: Option<T>,
    pub k: usize,
    pub decisions: Vec<Option<RehearsalDecision<T>>>,
    pub pairings: Vec<(usize, usize)>,
}

impl<T: Scalar> RehearsalState<T> {
    pub fn new(buyer_samples: &[T], k: usize) -> Self {
        let prices = rehearsal_prices(buyer_samples, k);
        let p_min = prices.last().copied();
        RehearsalState {
            k: prices.len(),
            prices,
            p_min,
            decisions: vec![None; buyer_samples.len()],
            pairings: Vec::new(),
        }
    }

    /// Approaches `buyer` with value `value`. If the value beats the threshold
    /// and a price is left, the highest remaining price below the value is
    /// deleted, or the smallest remaining price when every copy of the
    /// threshold is gone and no remaining price is below the value. Returns
    /// the threshold.
    pub fn approach(&mut self, buyer: usize, value: T) -> Option<T> {
        let threshold = self.p_min?;
        if self.prices.is_empty() || value <= threshold {
            self.decisions[buyer] = Some(RehearsalDecision::Skipped);
            return None;
        }
        let at = self
            .prices
            .iter()
            .position(|p| *p < value)
            .unwrap_or(self.prices.len() - 1);
        let deleted = self.prices.remove(at);
        self.decisions[buyer] = Some(RehearsalDecision::Selected { deleted });
        Some(threshold)
    }
}

/// The threshold-deletion selector run on scalar buyers with one sample each.
/// `k` defaults to `min(n, uniform bound of the constraint)`.
#[derive(Debug, Clone, Default)]
pub struct RehearsalSelector {
    pub order: BuyerOrder,
    pub k: Option<usize>,
}

impl RehearsalSelector {
    pub fn slots(&self, n: usize, constraint: &ConstraintSystem) -> Result<usize> {
        let bound = constraint.uniform_bound().ok_or_else(|| {
            MarketError::Unsupported("the rehearsal selector needs a cardinality constraint".into())
        })?;
        Ok(self.k.unwrap_or(n).min(n).min(bound))
    }
}

impl<T: Scalar> OneSidedMechanism<T> for RehearsalSelector {
    fn name(&self) -> String {
        "rehearsal".into()
    }

    fn arrival(&self) -> Arrival {
        self.order.arrival()
    }

    fn info(&self) -> InfoMode {
        InfoMode::SingleSample
    }

    fn randomized(&self) -> bool {
        self.order == BuyerOrder::Random
    }

    fn run(&self, input: OneSidedInput<'_, T>, rng: &RngContract) -> Result<Vec<OneSidedWin<T>>> {
        let OneSidedInput::Scalar {
            values,
            samples,
            constraint,
        } = input
        else {
            return Err(MarketError::Unsupported(
                "the rehearsal selector needs scalar buyers".into(),
            ));
        };
        let samples = samples
            .ok_or_else(|| MarketError::InvalidInput("the rehearsal needs buyer samples".into()))?;
        let k = self.slots(values.len(), constraint)?;
        let mut state = RehearsalState::new(samples, k);
        let mut wins = Vec::new();
        for b in self.order.realize(values.len(), rng)? {
            if let Some(price) = state.approach(b, values[b]) {
                wins.push(OneSidedWin {
                    buyer: b,
                    bundle: SellerSet::EMPTY,
                    price,
                });
            }
        }
        Ok(wins)
    }
}

//! Sample-discounted valuations.
//!
//! Given seller samples `v'` and the set `avail` of sellers who accepted their
//! sample as price, a buyer's *hat* value of `S` is the best surplus the buyer can
//! get from a subset of `S ∩ avail` after paying the samples:
//!
//! ```text
//! hat(S) = max_{T ⊆ S ∩ avail} [ v(T) - Σ_{s∈T} v'_s ]      (T = ∅ allowed)
//! bar(S) = ( Σ_{s∈S ∩ avail} (a_S(s) - v'_s) )_+             (a_S supports S)
//! ```
//!
//! Both stay XOS when `v` is XOS; [`xos_support_adjust`] builds the supports.
//! Gross-substitutes valuations have no dedicated tag; they go through their
//! XOS representation.

use crate::error::{MarketError, Result};
use crate::scalar::Scalar;
use crate::set::SellerSet;

use super::{SetTable, SetValuation, ValuationOracle};

/// Default cap on `|S ∩ avail|` for brute-force argmax enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustMode {
    Hat,
    Bar,
}

/// `hat(S)` together with its witness: the maximizer of minimum cardinality,
/// ties broken by the lexicographically smallest seller list.
pub fn adjusted_hat<T: Scalar>(
    oracle: &impl SetValuation<T>,
    samples: &[T],
    available: SellerSet,
    set: SellerSet,
    cap: usize,
) -> Result<(T, SellerSet)> {
    let pool = set.intersection(available);
    if pool.len() > cap {
        return Err(MarketError::Capacity {
            what: "adjusted valuation argmax",
            needed: 1u128 << pool.len(),
            budget: 1u128 << cap,
        });
    }
    let mut best = (T::zero(), SellerSet::EMPTY);
    for candidate in pool.subsets().skip(1) {
        let surplus = oracle.value(candidate) - candidate.iter().map(|s| samples[s]).sum::<T>();
        let (best_val, best_set) = best;
        let better = surplus > best_val
            || (surplus == best_val
                && (candidate.len() < best_set.len()
                    || (candidate.len() == best_set.len() && candidate.cmp_lex(best_set).is_lt())));
        if better {
            best = (surplus, candidate);
        }
    }
    Ok(best)
}

/// `bar(S)`. Needs a supporting function, so explicit tables are rejected.
pub fn adjusted_bar<T: Scalar>(
    oracle: &ValuationOracle<T>,
    samples: &[T],
    available: SellerSet,
    set: SellerSet,
) -> Result<T> {
    let support = oracle.supporting_function(set).ok_or_else(|| {
        MarketError::Unsupported("bar adjustment needs an XOS representation".into())
    })?;
    let total: T = set
        .intersection(available)
        .iter()
        .map(|s| support[s] - samples[s])
        .sum();
    Ok(total.positive_part())
}

/// Supports of the adjusted valuation. Hat: `(a(s) - v'_s)_+` on `avail`,
/// zero elsewhere. Bar: `a(s) - v'_s` on `avail` plus the all-zero support.
pub fn xos_support_adjust<T: Scalar>(
    supports: &[Vec<T>],
    samples: &[T],
    available: SellerSet,
    mode: AdjustMode,
) -> Vec<Vec<T>> {
    let adjust = |a: &Vec<T>| -> Vec<T> {
        a.iter()
            .enumerate()
            .map(|(s, &w)| {
                if !available.contains(s) {
                    T::zero()
                } else if mode == AdjustMode::Hat {
                    (w - samples[s]).positive_part()
                } else {
                    w - samples[s]
                }
            })
            .collect()
    };
    let mut out: Vec<Vec<T>> = supports.iter().map(adjust).collect();
    if mode == AdjustMode::Bar {
        let width = supports.first().map_or(samples.len(), Vec::len);
        out.push(vec![T::zero(); width]);
    }
    out
}

/// Hat values on every subset via `hat(S) = max(v(S∩A) - v'(S∩A), max_s hat(S - s))`.
/// Equivalent to calling [`adjusted_hat`] per subset, in `O(2^m · m)`.
pub fn tabulate_hat<T: Scalar>(
    base: &SetTable<T>,
    samples: &[T],
    available: SellerSet,
) -> Result<SetTable<T>> {
    let items = base.items();
    let avail = available.intersection(SellerSet::full(items));
    let mut on_avail = vec![T::zero(); 1 << items];
    for s in avail.subsets() {
        let own = base.get(s) - s.iter().map(|i| samples[i]).sum::<T>();
        let best = s
            .iter()
            .map(|i| on_avail[s.without(i).bits() as usize])
            .fold(own.positive_part(), T::max_of);
        on_avail[s.bits() as usize] = best;
    }
    SetTable::from_fn(items, |s| on_avail[s.intersection(avail).bits() as usize])
}

/// A buyer's valuation seen through the samples, in either mode.
#[derive(Debug, Clone)]
pub struct AdjustedOracle<'a, T> {
    pub base: &'a ValuationOracle<T>,
    pub samples: &'a [T],
    pub available: SellerSet,
    pub mode: AdjustMode,
}

impl<'a, T: Scalar> AdjustedOracle<'a, T> {
    pub fn new(
        base: &'a ValuationOracle<T>,
        samples: &'a [T],
        available: SellerSet,
        mode: AdjustMode,
    ) -> Self {
        AdjustedOracle {
            base,
            samples,
            available,
            mode,
        }
    }

    pub fn try_value(&self, set: SellerSet) -> Result<T> {
        match self.mode {
            AdjustMode::Hat => adjusted_hat(
                self.base,
                self.samples,
                self.available,
                set,
                DEFAULT_ENUMERATION_CAP,
            )
            .map(|(v, _)| v),
            AdjustMode::Bar => adjusted_bar(self.base, self.samples, self.available, set),
        }
    }
}

impl<T: Scalar> SetValuation<T> for AdjustedOracle<'_, T> {
    fn universe(&self) -> usize {
        self.base.universe()
    }

    /// Panics where [`AdjustedOracle::try_value`] would fail.
    fn value(&self, set: SellerSet) -> T {
        self.try_value(set).expect("adjusted valuation")
    }

    fn tabulate(&self) -> Result<SetTable<T>> {
        match self.mode {
            AdjustMode::Hat => tabulate_hat(&self.base.tabulate()?, self.samples, self.available),
            AdjustMode::Bar => {
                let items = self.universe();
                let mut err = None;
                let table = SetTable::from_fn(items, |s| {
                    self.try_value(s).unwrap_or_else(|e| {
                        err = Some(e);
                        T::zero()
                    })
                })?;
                err.map_or(Ok(table), Err)
            }
        }
    }
}

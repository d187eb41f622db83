//! Buyer valuation oracles and the surplus-adjusted transforms built on them.

mod adjust;
mod checks;

pub use adjust::{
    adjusted_bar, adjusted_hat, tabulate_hat, xos_support_adjust, AdjustMode, AdjustedOracle,
    DEFAULT_ENUMERATION_CAP,
};
pub use checks::{half_sample_expectation, is_subadditive, Subadditivity, CHECK_UNIVERSE_CAP};

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::scalar::Scalar;
use crate::set::SellerSet;

/// Largest universe for which a full value table is materialized.
pub const TABLE_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    Additive,
    UnitDemand,
    Xos,
    ExplicitSubadditive,
}

/// Anything that assigns a value to every subset of a seller universe.
pub trait SetValuation<T: Scalar> {
    fn universe(&self) -> usize;

    fn value(&self, set: SellerSet) -> T;

    /// Materializes the valuation on all `2^universe` subsets.
    fn tabulate(&self) -> Result<SetTable<T>> {
        SetTable::from_fn(self.universe(), |s| self.value(s))
    }
}

/// A set function stored as a dense table indexed by subset mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SetTable<T> {
    items: usize,
    values: Vec<T>,
}

impl<T: Scalar> SetTable<T> {
    pub fn from_fn(items: usize, mut f: impl FnMut(SellerSet) -> T) -> Result<Self> {
        if items > TABLE_CAP {
            return Err(MarketError::Capacity {
                what: "value table",
                needed: 1u128 << items,
                budget: 1u128 << TABLE_CAP,
            });
        }
        let values = (0..1u64 << items)
            .map(|bits| f(SellerSet::from_bits(bits)))
            .collect();
        Ok(SetTable { items, values })
    }

    /// Builds a table from values listed in mask order (`values[mask]`).
    pub fn from_values(items: usize, values: Vec<T>) -> Result<Self> {
        if items > TABLE_CAP {
            return Err(MarketError::Capacity {
                what: "value table",
                needed: 1u128 << items,
                budget: 1u128 << TABLE_CAP,
            });
        }
        if values.len() != 1usize << items {
            return Err(MarketError::InvalidInput(format!(
                "table over {items} items needs {} entries, got {}",
                1usize << items,
                values.len()
            )));
        }
        Ok(SetTable { items, values })
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn get(&self, set: SellerSet) -> T {
        self.values[set.bits() as usize]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_monotone(&self) -> bool {
        let full = SellerSet::full(self.items);
        full.subsets().all(|s| {
            full.difference(s)
                .iter()
                .all(|i| self.get(s.with(i)) >= self.get(s))
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> SetTable<T> {
        SetTable {
            items: self.items,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T: Scalar> SetValuation<T> for SetTable<T> {
    fn universe(&self) -> usize {
        self.items
    }

    fn value(&self, set: SellerSet) -> T {
        self.get(set)
    }

    fn tabulate(&self) -> Result<SetTable<T>> {
        Ok(self.clone())
    }
}

/// A buyer's valuation over subsets of the sellers.
///
/// `Xos` holds the finite list of additive supporting functions; the value of
/// a set is the best of them. `ExplicitSubadditive` stores every subset and is
/// checked for subadditivity by [`ValuationOracle::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValuationOracle<T> {
    Additive(Vec<T>),
    UnitDemand(Vec<T>),
    Xos(Vec<Vec<T>>),
    ExplicitSubadditive(SetTable<T>),
}

impl<T: Scalar> ValuationOracle<T> {
    pub fn class_tag(&self) -> ClassTag {
        match self {
            ValuationOracle::Additive(_) => ClassTag::Additive,
            ValuationOracle::UnitDemand(_) => ClassTag::UnitDemand,
            ValuationOracle::Xos(_) => ClassTag::Xos,
            ValuationOracle::ExplicitSubadditive(_) => ClassTag::ExplicitSubadditive,
        }
    }

    /// Unit-demand buyer with the same value for every one of `items` sellers.
    pub fn identical(value: T, items: usize) -> Self {
        ValuationOracle::UnitDemand(vec![value; items])
    }

    /// Checks the class invariants against a universe of `items` sellers.
    pub fn validate(&self, items: usize) -> Result<()> {
        let check_weights = |w: &[T], what: &str| -> Result<()> {
            if w.len() != items {
                return Err(MarketError::InvalidInput(format!(
                    "{what} has {} weights for {items} sellers",
                    w.len()
                )));
            }
            if w.iter().any(|x| *x < T::zero()) {
                return Err(MarketError::InvalidInput(format!(
                    "{what} has a negative weight"
                )));
            }
            Ok(())
        };
        match self {
            ValuationOracle::Additive(w) => check_weights(w, "additive valuation"),
            ValuationOracle::UnitDemand(w) => check_weights(w, "unit-demand valuation"),
            ValuationOracle::Xos(supports) => supports
                .iter()
                .try_for_each(|a| check_weights(a, "XOS support")),
            ValuationOracle::ExplicitSubadditive(table) => {
                if table.items() != items {
                    return Err(MarketError::InvalidInput(format!(
                        "table over {} items for {items} sellers",
                        table.items()
                    )));
                }
                if !table.get(SellerSet::EMPTY).is_zero() {
                    return Err(MarketError::InvalidInput(
                        "table value of the empty set must be 0".into(),
                    ));
                }
                if table.values().iter().any(|x| *x < T::zero()) {
                    return Err(MarketError::InvalidInput(
                        "table has a negative value".into(),
                    ));
                }
                match table.subadditivity()? {
                    Subadditivity::Holds => Ok(()),
                    Subadditivity::Violated(a, b) => Err(MarketError::InvalidInput(format!(
                        "table is not subadditive on {a:?}, {b:?}"
                    ))),
                }
            }
        }
    }

    pub fn evaluate(&self, set: SellerSet) -> T {
        match self {
            ValuationOracle::Additive(w) => set.iter().map(|s| w[s]).sum(),
            ValuationOracle::UnitDemand(w) => set.iter().map(|s| w[s]).fold(T::zero(), T::max_of),
            ValuationOracle::Xos(supports) => supports
                .iter()
                .map(|a| set.iter().map(|s| a[s]).sum::<T>())
                .fold(T::zero(), T::max_of),
            ValuationOracle::ExplicitSubadditive(table) => table.get(set),
        }
    }

    /// The additive function `a` with `Σ_{s∈S} a(s) = v(S)` and `a <= v`
    /// pointwise on subsets. `None` for explicit tables.
    pub fn supporting_function(&self, set: SellerSet) -> Option<Vec<T>> {
        match self {
            ValuationOracle::Additive(w) => Some(w.clone()),
            ValuationOracle::UnitDemand(w) => {
                let mut a = vec![T::zero(); w.len()];
                let mut best: Option<usize> = None;
                for s in set.iter() {
                    if best.is_none_or(|b| w[s] > w[b]) {
                        best = Some(s);
                    }
                }
                if let Some(s) = best {
                    a[s] = w[s];
                }
                Some(a)
            }
            ValuationOracle::Xos(supports) => {
                let mut best: Option<(&Vec<T>, T)> = None;
                for a in supports {
                    let v: T = set.iter().map(|s| a[s]).sum();
                    if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                        best = Some((a, v));
                    }
                }
                Some(match best {
                    Some((a, _)) => a.clone(),
                    None => vec![T::zero(); self.universe()],
                })
            }
            ValuationOracle::ExplicitSubadditive(_) => None,
        }
    }

    /// The valuation written as a list of additive supports, when it has one.
    pub fn xos_supports(&self) -> Option<Vec<Vec<T>>> {
        match self {
            ValuationOracle::Additive(w) => Some(vec![w.clone()]),
            ValuationOracle::UnitDemand(w) => Some(
                (0..w.len())
                    .map(|s| {
                        let mut a = vec![T::zero(); w.len()];
                        a[s] = w[s];
                        a
                    })
                    .collect(),
            ),
            ValuationOracle::Xos(supports) => Some(supports.clone()),
            ValuationOracle::ExplicitSubadditive(_) => None,
        }
    }

    /// Value of a unit-demand buyer for identical items: `Some(x)` when every
    /// seller is worth the same `x`.
    pub fn scalar_value(&self) -> Option<T> {
        match self {
            ValuationOracle::UnitDemand(w) => {
                let first = *w.first()?;
                w.iter().all(|x| *x == first).then_some(first)
            }
            _ => None,
        }
    }

    /// The same valuation with every value multiplied by `factor >= 0`.
    pub fn scaled(&self, factor: T) -> Self {
        let scale = |w: &Vec<T>| w.iter().map(|&x| x * factor).collect::<Vec<T>>();
        match self {
            ValuationOracle::Additive(w) => ValuationOracle::Additive(scale(w)),
            ValuationOracle::UnitDemand(w) => ValuationOracle::UnitDemand(scale(w)),
            ValuationOracle::Xos(supports) => {
                ValuationOracle::Xos(supports.iter().map(scale).collect())
            }
            ValuationOracle::ExplicitSubadditive(t) => {
                ValuationOracle::ExplicitSubadditive(t.map(|x| x * factor))
            }
        }
    }

    /// Reports interest in `seller` only: `v'(S) = v(S ∩ {seller})`.
    pub fn restricted_to(&self, seller: usize) -> Self {
        let keep = |w: &Vec<T>| {
            w.iter()
                .enumerate()
                .map(|(i, &x)| if i == seller { x } else { T::zero() })
                .collect::<Vec<T>>()
        };
        match self {
            ValuationOracle::Additive(w) => ValuationOracle::Additive(keep(w)),
            ValuationOracle::UnitDemand(w) => ValuationOracle::UnitDemand(keep(w)),
            ValuationOracle::Xos(supports) => {
                ValuationOracle::Xos(supports.iter().map(keep).collect())
            }
            ValuationOracle::ExplicitSubadditive(t) => {
                let only = SellerSet::singleton(seller);
                let restricted = SetTable::from_fn(t.items(), |s| t.get(s.intersection(only)))
                    .expect("same size as an existing table");
                ValuationOracle::ExplicitSubadditive(restricted)
            }
        }
    }
}

impl<T: Scalar> SetValuation<T> for ValuationOracle<T> {
    fn universe(&self) -> usize {
        match self {
            ValuationOracle::Additive(w) | ValuationOracle::UnitDemand(w) => w.len(),
            ValuationOracle::Xos(supports) => supports.first().map_or(0, Vec::len),
            ValuationOracle::ExplicitSubadditive(t) => t.items(),
        }
    }

    fn value(&self, set: SellerSet) -> T {
        self.evaluate(set)
    }
}

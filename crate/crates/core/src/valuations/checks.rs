//! Exhaustive class checks on explicit tables.

use crate::error::{MarketError, Result};
use crate::scalar::Scalar;
use crate::set::SellerSet;

use super::{SetTable, ValuationOracle};

/// Largest universe the exhaustive checkers accept.
pub const CHECK_UNIVERSE_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subadditivity {
    Holds,
    /// First pair `(S1, S2)` found with `f(S1 ∪ S2) > f(S1) + f(S2)`.
    Violated(SellerSet, SellerSet),
}

impl Subadditivity {
    pub fn holds(self) -> bool {
        self == Subadditivity::Holds
    }
}

fn check_universe(items: usize) -> Result<()> {
    if items > CHECK_UNIVERSE_CAP {
        return Err(MarketError::Capacity {
            what: "exhaustive set-function check",
            needed: 1u128 << (2 * items),
            budget: 1u128 << (2 * CHECK_UNIVERSE_CAP),
        });
    }
    Ok(())
}

impl<T: Scalar> SetTable<T> {
    /// Checks `f(S1 ∪ S2) <= f(S1) + f(S2)` over all ordered pairs.
    pub fn subadditivity(&self) -> Result<Subadditivity> {
        check_universe(self.items())?;
        let full = SellerSet::full(self.items());
        for a in full.subsets() {
            let fa = self.get(a);
            for b in full.subsets() {
                if self.get(a.union(b)) > fa + self.get(b) {
                    return Ok(Subadditivity::Violated(a, b));
                }
            }
        }
        Ok(Subadditivity::Holds)
    }

    /// `(E[f(X)], f(N)/2)` where `X` keeps each element independently with
    /// probability 1/2. Computed exactly by summing over all subsets.
    pub fn half_sample_expectation(&self) -> Result<(T, T)> {
        check_universe(self.items())?;
        let total: T = self.values().iter().copied().sum();
        let weight = T::from_frac(1, 1i64 << self.items());
        let full = self.get(SellerSet::full(self.items()));
        Ok((total * weight, full / T::from_int(2)))
    }
}

/// Subadditivity check for table oracles; other classes are unsupported.
pub fn is_subadditive<T: Scalar>(oracle: &ValuationOracle<T>) -> Result<Subadditivity> {
    match oracle {
        ValuationOracle::ExplicitSubadditive(table) => table.subadditivity(),
        _ => Err(MarketError::Unsupported(
            "subadditivity check needs an explicit table; tabulate the oracle first".into(),
        )),
    }
}

/// Both sides of the half-sampling inequality for a table oracle.
pub fn half_sample_expectation<T: Scalar>(oracle: &ValuationOracle<T>) -> Result<(T, T)> {
    match oracle {
        ValuationOracle::ExplicitSubadditive(table) => table.half_sample_expectation(),
        _ => Err(MarketError::Unsupported(
            "half-sample expectation needs an explicit table".into(),
        )),
    }
}

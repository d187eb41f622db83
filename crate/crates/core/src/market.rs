//! Market instances, outcomes and the welfare / budget accounting on them.

use std::collections::HashSet;

use crate::error::{MarketError, Result};
use crate::opt::ConstraintSystem;
use crate::scalar::Scalar;
use crate::set::{SellerSet, MAX_AGENTS};
use crate::valuations::{SetTable, SetValuation, ValuationOracle, TABLE_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct BuyerSpec<T> {
    pub id: String,
    pub valuation: ValuationOracle<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SellerSpec<T> {
    pub id: String,
    pub value: T,
}

/// One realized market: buyers with valuations over seller subsets and
/// unit-supply sellers with scalar values.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance<T> {
    buyers: Vec<BuyerSpec<T>>,
    sellers: Vec<SellerSpec<T>>,
    constraint: ConstraintSystem,
    items_identical: bool,
}

impl<T: Scalar> MarketInstance<T> {
    pub fn new(
        buyers: Vec<BuyerSpec<T>>,
        sellers: Vec<SellerSpec<T>>,
        constraint: ConstraintSystem,
        items_identical: bool,
    ) -> Result<Self> {
        if buyers.len() > MAX_AGENTS || sellers.len() > MAX_AGENTS {
            return Err(MarketError::InvalidInput(format!(
                "at most {MAX_AGENTS} buyers and {MAX_AGENTS} sellers"
            )));
        }
        let mut ids = HashSet::new();
        for id in buyers
            .iter()
            .map(|b| &b.id)
            .chain(sellers.iter().map(|s| &s.id))
        {
            if !ids.insert(id.as_str()) {
                return Err(MarketError::InvalidInput(format!(
                    "duplicate agent id {id:?}"
                )));
            }
        }
        if let Some(s) = sellers.iter().find(|s| s.value < T::zero()) {
            return Err(MarketError::InvalidInput(format!(
                "seller {} has a negative value",
                s.id
            )));
        }
        let m = sellers.len();
        for b in &buyers {
            b.valuation
                .validate(m)
                .map_err(|e| MarketError::InvalidInput(format!("buyer {}: {e}", b.id)))?;
            if items_identical && !depends_on_cardinality_only(&b.valuation, m)? {
                return Err(MarketError::InvalidInput(format!(
                    "buyer {} distinguishes between identical items",
                    b.id
                )));
            }
        }
        Ok(MarketInstance {
            buyers,
            sellers,
            constraint,
            items_identical,
        })
    }

    /// Unconstrained market with ids `b1.., s1..`.
    pub fn from_parts(valuations: Vec<ValuationOracle<T>>, seller_values: Vec<T>) -> Result<Self> {
        let buyers = valuations
            .into_iter()
            .enumerate()
            .map(|(i, valuation)| BuyerSpec {
                id: format!("b{}", i + 1),
                valuation,
            })
            .collect();
        let sellers = seller_values
            .into_iter()
            .enumerate()
            .map(|(j, value)| SellerSpec {
                id: format!("s{}", j + 1),
                value,
            })
            .collect();
        MarketInstance::new(buyers, sellers, ConstraintSystem::unconstrained(), false)
    }

    /// Double auction: unit-demand buyers, identical unit-supply sellers.
    pub fn identical_items(buyer_values: Vec<T>, seller_values: Vec<T>) -> Result<Self> {
        let m = seller_values.len();
        let valuations = buyer_values
            .into_iter()
            .map(|x| ValuationOracle::identical(x, m))
            .collect();
        let mut market = MarketInstance::from_parts(valuations, seller_values)?;
        market.items_identical = true;
        Ok(market)
    }

    /// One seller with value `seller_value`, one buyer.
    pub fn bilateral(seller_value: T, buyer_value: T) -> Result<Self> {
        MarketInstance::identical_items(vec![buyer_value], vec![seller_value])
    }

    #[must_use]
    pub fn with_constraint(mut self, constraint: ConstraintSystem) -> Self {
        self.constraint = constraint;
        self
    }

    pub fn buyers(&self) -> &[BuyerSpec<T>] {
        &self.buyers
    }

    pub fn sellers(&self) -> &[SellerSpec<T>] {
        &self.sellers
    }

    pub fn num_buyers(&self) -> usize {
        self.buyers.len()
    }

    pub fn num_sellers(&self) -> usize {
        self.sellers.len()
    }

    pub fn constraint(&self) -> &ConstraintSystem {
        &self.constraint
    }

    pub fn items_identical(&self) -> bool {
        self.items_identical
    }

    pub fn all_sellers(&self) -> SellerSet {
        SellerSet::full(self.sellers.len())
    }

    pub fn seller_values(&self) -> Vec<T> {
        self.sellers.iter().map(|s| s.value).collect()
    }

    pub fn valuation(&self, buyer: usize) -> &ValuationOracle<T> {
        &self.buyers[buyer].valuation
    }

    /// Scalar values of unit-demand buyers over identical items.
    pub fn scalar_buyer_values(&self) -> Result<Vec<T>> {
        if !self.items_identical {
            return Err(MarketError::Unsupported(
                "mechanism needs identical items".into(),
            ));
        }
        self.buyers
            .iter()
            .map(|b| {
                if self.sellers.is_empty() {
                    return Ok(T::zero());
                }
                b.valuation.scalar_value().ok_or_else(|| {
                    MarketError::Unsupported(format!("buyer {} is not unit-demand", b.id))
                })
            })
            .collect()
    }

    /// Value tables of every buyer over all seller subsets.
    pub fn buyer_tables(&self) -> Result<Vec<SetTable<T>>> {
        self.buyers.iter().map(|b| b.valuation.tabulate()).collect()
    }

    /// Same market with buyer `i` reporting `valuation`.
    pub fn with_buyer_report(&self, i: usize, valuation: ValuationOracle<T>) -> Result<Self> {
        valuation.validate(self.sellers.len())?;
        let mut out = self.clone();
        out.buyers[i].valuation = valuation;
        Ok(out)
    }

    /// Same market with seller `j` reporting `value`.
    pub fn with_seller_report(&self, j: usize, value: T) -> Result<Self> {
        if value < T::zero() {
            return Err(MarketError::InvalidInput("negative seller report".into()));
        }
        let mut out = self.clone();
        out.sellers[j].value = value;
        Ok(out)
    }

    pub fn buyer_index(&self, id: &str) -> Option<usize> {
        self.buyers.iter().position(|b| b.id == id)
    }

    pub fn seller_index(&self, id: &str) -> Option<usize> {
        self.sellers.iter().position(|s| s.id == id)
    }
}

fn depends_on_cardinality_only<T: Scalar>(v: &ValuationOracle<T>, m: usize) -> Result<bool> {
    let all_equal = |w: &[T]| w.windows(2).all(|p| p[0] == p[1]);
    match v {
        ValuationOracle::Additive(w) | ValuationOracle::UnitDemand(w) => Ok(all_equal(w)),
        _ if m > TABLE_CAP => Err(MarketError::Capacity {
            what: "identical-items check",
            needed: 1u128 << m,
            budget: 1u128 << TABLE_CAP,
        }),
        _ => {
            let table = v.tabulate()?;
            let mut by_size: Vec<Option<T>> = vec![None; m + 1];
            for s in SellerSet::full(m).subsets() {
                let x = table.get(s);
                match by_size[s.len()] {
                    Some(y) if y != x => return Ok(false),
                    _ => by_size[s.len()] = Some(x),
                }
            }
            Ok(true)
        }
    }
}

/// A completed exchange between a buyer and a seller; `price` is what the
/// seller receives.
#[derive(Debug, Clone, PartialEq)]
pub struct Trade<T> {
    pub buyer: usize,
    pub seller: usize,
    pub price: T,
}

/// Allocation plus payments. Buyer payments go to the mechanism, seller
/// payments come from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub allocation: Vec<SellerSet>,
    pub buyer_payments: Vec<T>,
    pub seller_payments: Vec<T>,
    pub trades: Vec<Trade<T>>,
}

impl<T: Scalar> Outcome<T> {
    pub fn no_trade(buyers: usize, sellers: usize) -> Self {
        Outcome {
            allocation: vec![SellerSet::EMPTY; buyers],
            buyer_payments: vec![T::zero(); buyers],
            seller_payments: vec![T::zero(); sellers],
            trades: Vec::new(),
        }
    }

    pub fn sold(&self) -> SellerSet {
        self.allocation
            .iter()
            .fold(SellerSet::EMPTY, |acc, &s| acc.union(s))
    }

    pub fn unsold(&self) -> SellerSet {
        SellerSet::full(self.seller_payments.len()).difference(self.sold())
    }

    pub fn buyer_of(&self, seller: usize) -> Option<usize> {
        self.allocation.iter().position(|s| s.contains(seller))
    }

    /// Records that `buyer` receives `seller`'s item; the seller is paid `price`.
    pub fn assign(&mut self, buyer: usize, seller: usize, price: T) {
        self.allocation[buyer] = self.allocation[buyer].with(seller);
        self.seller_payments[seller] = price;
        self.trades.push(Trade {
            buyer,
            seller,
            price,
        });
    }

    /// Checks the outcome against `market`: sizes, disjoint bundles, zero
    /// payments for non-traders and non-negative payments.
    pub fn validate(&self, market: &MarketInstance<T>) -> Result<()> {
        let n = market.num_buyers();
        let m = market.num_sellers();
        if self.allocation.len() != n || self.buyer_payments.len() != n {
            return Err(MarketError::Structural(format!(
                "outcome covers {} buyers, market has {n}",
                self.allocation.len()
            )));
        }
        if self.seller_payments.len() != m {
            return Err(MarketError::Structural(format!(
                "outcome covers {} sellers, market has {m}",
                self.seller_payments.len()
            )));
        }
        let universe = SellerSet::full(m);
        let mut seen = SellerSet::EMPTY;
        for (b, &bundle) in self.allocation.iter().enumerate() {
            if !bundle.is_subset(universe) {
                return Err(MarketError::Structural(format!(
                    "buyer {b} receives unknown sellers {:?}",
                    bundle.difference(universe)
                )));
            }
            if !bundle.is_disjoint(seen) {
                return Err(MarketError::Structural(format!(
                    "sellers {:?} allocated twice",
                    bundle.intersection(seen)
                )));
            }
            seen = seen.union(bundle);
            if bundle.is_empty() && !self.buyer_payments[b].is_zero() {
                return Err(MarketError::Structural(format!(
                    "buyer {b} pays without trading"
                )));
            }
        }
        for s in universe.difference(seen).iter() {
            if !self.seller_payments[s].is_zero() {
                return Err(MarketError::Structural(format!(
                    "seller {s} is paid but keeps its item"
                )));
            }
        }
        if self
            .buyer_payments
            .iter()
            .chain(&self.seller_payments)
            .any(|p| *p < T::zero())
        {
            return Err(MarketError::Structural("negative payment".into()));
        }
        Ok(())
    }
}

/// `Σ_b v_b(S_b) + Σ_{s unsold} v_s`.
pub fn social_welfare<T: Scalar>(market: &MarketInstance<T>, outcome: &Outcome<T>) -> Result<T> {
    outcome.validate(market)?;
    let buyers: T = outcome
        .allocation
        .iter()
        .enumerate()
        .map(|(b, &s)| market.valuation(b).evaluate(s))
        .sum();
    let kept: T = outcome
        .unsold()
        .iter()
        .map(|s| market.sellers()[s].value)
        .sum();
    Ok(buyers + kept)
}

/// `Σ buyer payments - Σ seller payments`.
pub fn budget_surplus<T: Scalar>(outcome: &Outcome<T>) -> T {
    let collected: T = outcome.buyer_payments.iter().copied().sum();
    let paid: T = outcome.seller_payments.iter().copied().sum();
    collected - paid
}

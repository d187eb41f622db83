//! Exhaustive affine maximization over item-to-buyer assignments.

use crate::error::{MarketError, Result};
use crate::opt::ConstraintSystem;
use crate::scalar::Scalar;
use crate::set::{BuyerSet, SellerSet};
use crate::valuations::SetTable;

/// `max Σ_b table_b(S_b) - Σ_{s assigned} cost_s` over disjoint bundles drawn
/// from `items` whose set of receiving buyers is feasible.
pub(crate) struct AffineProblem<'a, T> {
    pub tables: &'a [SetTable<T>],
    pub items: SellerSet,
    pub costs: &'a [T],
    pub constraint: &'a ConstraintSystem,
    pub budget: u128,
}

pub(crate) struct Solution<T> {
    pub bundles: Vec<SellerSet>,
    pub objective: T,
}

struct Search<'p, 'a, T> {
    problem: &'p AffineProblem<'a, T>,
    order: Vec<usize>,
    active: Vec<usize>,
    bundles: Vec<SellerSet>,
    best: Option<(T, usize, Vec<SellerSet>)>,
}

impl<T: Scalar> AffineProblem<'_, T> {
    pub fn term(&self, buyer: usize, bundle: SellerSet) -> T {
        self.tables[buyer].get(bundle) - bundle.iter().map(|s| self.costs[s]).sum::<T>()
    }

    /// Solves with `excluded` removed from the market. Ties go to fewer
    /// assigned items, then to the first assignment in the order that tries
    /// "unsold" before buyers in index order for each item in index order.
    pub fn solve(&self, excluded: Option<usize>) -> Result<Solution<T>> {
        let n = self.tables.len();
        let active: Vec<usize> = (0..n).filter(|&b| Some(b) != excluded).collect();
        let leaves = (active.len() as u128 + 1).checked_pow(self.items.len() as u32);
        match leaves {
            Some(needed) if needed <= self.budget => {}
            needed => {
                return Err(MarketError::Capacity {
                    what: "allocation enumeration",
                    needed: needed.unwrap_or(u128::MAX),
                    budget: self.budget,
                })
            }
        }
        let mut search = Search {
            problem: self,
            order: self.items.iter().collect(),
            active,
            bundles: vec![SellerSet::EMPTY; n],
            best: None,
        };
        search.descend(0, 0, BuyerSet::EMPTY);
        let (objective, _, bundles) = search
            .best
            .expect("the empty allocation is always feasible");
        Ok(Solution { bundles, objective })
    }
}

impl<T: Scalar> Search<'_, '_, T> {
    fn descend(&mut self, depth: usize, traded: usize, support: BuyerSet) {
        if depth == self.order.len() {
            self.leaf(traded);
            return;
        }
        let item = self.order[depth];
        self.descend(depth + 1, traded, support);
        for i in 0..self.active.len() {
            let b = self.active[i];
            let grown = support.with(b);
            if grown != support && !self.problem.constraint.feasible(grown) {
                continue;
            }
            self.bundles[b] = self.bundles[b].with(item);
            self.descend(depth + 1, traded + 1, grown);
            self.bundles[b] = self.bundles[b].without(item);
        }
    }

    fn leaf(&mut self, traded: usize) {
        let objective: T = self
            .active
            .iter()
            .map(|&b| self.problem.term(b, self.bundles[b]))
            .sum();
        let better = match &self.best {
            None => true,
            Some((obj, count, _)) => objective > *obj || (objective == *obj && traded < *count),
        };
        if better {
            self.best = Some((objective, traded, self.bundles.clone()));
        }
    }
}

//! Downward-closed feasibility constraints on the set of trading buyers.

use crate::error::{MarketError, Result};
use crate::set::BuyerSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintKind {
    Unconstrained,
    /// Feasible iff at most `k` buyers trade.
    KUniform(usize),
    /// Feasible iff contained in one of the listed maximal sets.
    Explicit(Vec<BuyerSet>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub kind: ConstraintKind,
    pub intersect: Option<Box<ConstraintSystem>>,
}

impl Default for ConstraintSystem {
    fn default() -> Self {
        ConstraintSystem::unconstrained()
    }
}

impl ConstraintSystem {
    pub fn unconstrained() -> Self {
        ConstraintSystem {
            kind: ConstraintKind::Unconstrained,
            intersect: None,
        }
    }

    pub fn k_uniform(k: usize) -> Self {
        ConstraintSystem {
            kind: ConstraintKind::KUniform(k),
            intersect: None,
        }
    }

    /// Explicit system from its maximal sets. Sets contained in another listed
    /// set are dropped.
    pub fn explicit(maximal: Vec<BuyerSet>) -> Self {
        let mut kept: Vec<BuyerSet> = Vec::new();
        for (i, &s) in maximal.iter().enumerate() {
            let dominated = maximal
                .iter()
                .enumerate()
                .any(|(j, &t)| j != i && s.is_subset(t) && (s != t || j < i));
            if !dominated {
                kept.push(s);
            }
        }
        ConstraintSystem {
            kind: ConstraintKind::Explicit(kept),
            intersect: None,
        }
    }

    /// Explicit system from a full list of feasible sets, which must be
    /// downward closed.
    pub fn explicit_family(family: Vec<BuyerSet>) -> Result<Self> {
        for &set in &family {
            for sub in set.subsets() {
                if !family.contains(&sub) {
                    return Err(MarketError::InvalidInput(format!(
                        "family is not downward closed: {set:?} is listed but {sub:?} is not"
                    )));
                }
            }
        }
        Ok(ConstraintSystem::explicit(family))
    }

    /// Intersection with another system.
    #[must_use]
    pub fn intersect(mut self, other: ConstraintSystem) -> Self {
        self.intersect = Some(Box::new(match self.intersect.take() {
            Some(inner) => inner.intersect(other),
            None => other,
        }));
        self
    }

    pub fn feasible(&self, buyers: BuyerSet) -> bool {
        let own = match &self.kind {
            ConstraintKind::Unconstrained => true,
            ConstraintKind::KUniform(k) => buyers.len() <= *k,
            ConstraintKind::Explicit(maximal) => maximal.iter().any(|&m| buyers.is_subset(m)),
        };
        own && self.intersect.as_ref().is_none_or(|c| c.feasible(buyers))
    }

    /// For systems built only from cardinality bounds, the tightest bound
    /// (`usize::MAX` when unconstrained). `None` if an explicit system is involved.
    pub fn uniform_bound(&self) -> Option<usize> {
        let own = match &self.kind {
            ConstraintKind::Unconstrained => usize::MAX,
            ConstraintKind::KUniform(k) => *k,
            ConstraintKind::Explicit(_) => return None,
        };
        match &self.intersect {
            Some(inner) => inner.uniform_bound().map(|k| k.min(own)),
            None => Some(own),
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        self.uniform_bound() == Some(usize::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ix: &[usize]) -> BuyerSet {
        BuyerSet::from_indices(ix.iter().copied())
    }

    #[test]
    fn feasibility_examples() {
        assert!(!ConstraintSystem::k_uniform(2).feasible(set(&[0, 1, 2])));
        let explicit = ConstraintSystem::explicit(vec![set(&[0, 1])]);
        assert!(explicit.feasible(set(&[0])));
        assert!(explicit.feasible(BuyerSet::EMPTY));
        assert!(!explicit.feasible(set(&[2])));
        let both = ConstraintSystem::k_uniform(1).intersect(explicit);
        assert!(!both.feasible(set(&[0, 1])));
        assert!(both.feasible(set(&[1])));
    }

    #[test]
    fn explicit_family_must_be_downward_closed() {
        let bad = ConstraintSystem::explicit_family(vec![BuyerSet::EMPTY, set(&[0, 1]), set(&[0])]);
        assert!(bad.is_err());
        let good = ConstraintSystem::explicit_family(vec![
            BuyerSet::EMPTY,
            set(&[0]),
            set(&[1]),
            set(&[0, 1]),
        ])
        .unwrap();
        assert_eq!(good.kind, ConstraintKind::Explicit(vec![set(&[0, 1])]));
    }

    #[test]
    fn uniform_bound_composes() {
        let c = ConstraintSystem::unconstrained().intersect(ConstraintSystem::k_uniform(3));
        assert_eq!(c.uniform_bound(), Some(3));
        assert!(ConstraintSystem::unconstrained().is_unconstrained());
        let e = c.intersect(ConstraintSystem::explicit(vec![set(&[0])]));
        assert_eq!(e.uniform_bound(), None);
    }
}

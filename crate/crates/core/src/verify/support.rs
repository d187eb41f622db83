//! Exact enumeration of the joint support of values and samples.

use crate::distribution::{MarketDistribution, SampleProfile};
use crate::error::{MarketError, Result};
use crate::market::MarketInstance;
use crate::scalar::Scalar;
use crate::valuations::ValuationOracle;

/// Largest joint support enumerated in exact-expectation mode.
pub const EXACT_ATOM_CAP: usize = 1_000_000;

/// The product of all per-agent atom lists: buyer valuations, optional buyer
/// samples, seller values and seller samples, all independent.
pub struct JointSupport<'a, T> {
    dist: &'a MarketDistribution<T>,
    valuations: Vec<Vec<(ValuationOracle<T>, T)>>,
    buyer_samples: Option<Vec<Vec<(T, T)>>>,
    seller_values: Vec<Vec<(T, T)>>,
    atoms: usize,
}

impl<'a, T: Scalar> JointSupport<'a, T> {
    pub fn new(
        dist: &'a MarketDistribution<T>,
        with_buyer_samples: bool,
        cap: usize,
    ) -> Result<Self> {
        let too_big = || MarketError::Capacity {
            what: "joint support enumeration",
            needed: u128::MAX,
            budget: cap as u128,
        };
        let continuous =
            |who: &str| MarketError::Unsupported(format!("{who} has a continuous law"));
        let m = dist.num_sellers();
        let valuations = dist
            .buyers
            .iter()
            .map(|b| b.generator.support(m, cap).ok_or_else(too_big))
            .collect::<Result<Vec<_>>>()?;
        let buyer_samples = if with_buyer_samples {
            Some(
                dist.buyers
                    .iter()
                    .map(|b| {
                        b.generator
                            .scalar_law()
                            .and_then(|law| law.atoms())
                            .ok_or_else(|| continuous(&b.id))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let seller_values = dist
            .sellers
            .iter()
            .map(|s| s.distribution.atoms().ok_or_else(|| continuous(&s.id)))
            .collect::<Result<Vec<_>>>()?;
        let mut atoms: usize = 1;
        let radices = valuations
            .iter()
            .map(Vec::len)
            .chain(buyer_samples.iter().flatten().map(Vec::len))
            .chain(seller_values.iter().flat_map(|a| [a.len(), a.len()]));
        for r in radices {
            atoms = atoms.checked_mul(r).filter(|&a| a <= cap).ok_or_else(|| {
                MarketError::Capacity {
                    what: "joint support enumeration",
                    needed: (atoms as u128).saturating_mul(r as u128),
                    budget: cap as u128,
                }
            })?;
        }
        Ok(JointSupport {
            dist,
            valuations,
            buyer_samples,
            seller_values,
            atoms,
        })
    }

    /// Number of joint atoms.
    pub fn len(&self) -> usize {
        self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms == 0
    }

    /// Calls `f(market, samples, probability)` on every joint atom.
    pub fn for_each(
        &self,
        mut f: impl FnMut(&MarketInstance<T>, &SampleProfile<T>, T) -> Result<()>,
    ) -> Result<()> {
        for index in 0..self.atoms {
            let mut rest = index;
            let mut digit = |radix: usize| {
                let d = rest % radix;
                rest /= radix;
                d
            };
            let mut weight = T::one();
            let mut valuations = Vec::with_capacity(self.valuations.len());
            for atoms in &self.valuations {
                let (v, p) = &atoms[digit(atoms.len())];
                valuations.push(v.clone());
                weight = weight * *p;
            }
            let buyer_samples = self.buyer_samples.as_ref().map(|lists| {
                lists
                    .iter()
                    .map(|atoms| {
                        let (x, p) = atoms[digit(atoms.len())];
                        weight = weight * p;
                        x
                    })
                    .collect::<Vec<T>>()
            });
            let mut values = Vec::with_capacity(self.seller_values.len());
            let mut samples = Vec::with_capacity(self.seller_values.len());
            for atoms in &self.seller_values {
                let (v, p) = atoms[digit(atoms.len())];
                let (s, q) = atoms[digit(atoms.len())];
                values.push(v);
                samples.push(s);
                weight = weight * p * q;
            }
            let market = self.dist.instance(valuations, values)?;
            f(
                &market,
                &SampleProfile::fixed(samples, buyer_samples),
                weight,
            )?;
        }
        Ok(())
    }
}

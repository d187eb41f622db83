//! Priors over values and valuations, instance drawing and sample profiles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::market::{BuyerSpec, MarketInstance, SellerSpec};
use crate::opt::ConstraintSystem;
use crate::rng::RngContract;
use crate::scalar::Scalar;
use crate::valuations::ValuationOracle;

/// A distribution over non-negative scalars.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec<T> {
    PointMass(T),
    /// Equal weight on each listed atom (repeats count twice).
    UniformDiscrete(Vec<T>),
    /// Float path only.
    UniformContinuous {
        lo: f64,
        hi: f64,
    },
    /// Uniform over `{r, r², …, r^count}`.
    GeometricAtoms {
        base: T,
        count: u32,
    },
}

impl<T: Scalar> DistributionSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MarketError::InvalidInput(m.to_string()));
        match self {
            DistributionSpec::PointMass(x) if *x < T::zero() => bad("point mass below 0"),
            DistributionSpec::UniformDiscrete(atoms) if atoms.is_empty() => bad("no atoms"),
            DistributionSpec::UniformDiscrete(atoms) if atoms.iter().any(|x| *x < T::zero()) => {
                bad("negative atom")
            }
            DistributionSpec::UniformContinuous { lo, hi }
                if !(0.0 <= *lo && lo <= hi && hi.is_finite()) =>
            {
                bad("uniform range must satisfy 0 <= lo <= hi < inf")
            }
            DistributionSpec::GeometricAtoms { base, count }
                if *count < 1 || *base <= T::zero() || *base >= T::one() =>
            {
                bad("geometric atoms need 0 < r < 1 and count >= 1")
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Result<T> {
        Ok(match self {
            DistributionSpec::PointMass(x) => *x,
            DistributionSpec::UniformDiscrete(atoms) => atoms[rng.random_range(0..atoms.len())],
            DistributionSpec::UniformContinuous { lo, hi } => {
                T::from_f64(lo + (hi - lo) * rng.random::<f64>())?
            }
            DistributionSpec::GeometricAtoms { base, count } => {
                let i = rng.random_range(1..=*count);
                power(*base, i)
            }
        })
    }

    /// Atoms with their probabilities, or `None` for continuous laws.
    pub fn atoms(&self) -> Option<Vec<(T, T)>> {
        match self {
            DistributionSpec::PointMass(x) => Some(vec![(*x, T::one())]),
            DistributionSpec::UniformDiscrete(atoms) => {
                let w = T::one() / T::from_int(atoms.len() as i64);
                Some(atoms.iter().map(|&x| (x, w)).collect())
            }
            DistributionSpec::UniformContinuous { .. } => None,
            DistributionSpec::GeometricAtoms { base, count } => {
                let w = T::one() / T::from_int(i64::from(*count));
                Some((1..=*count).map(|i| (power(*base, i), w)).collect())
            }
        }
    }

    /// `Pr[X <= x]` as a float.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DistributionSpec::UniformContinuous { lo, hi } => {
                if x < *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            _ => self
                .atoms()
                .expect("discrete")
                .iter()
                .filter(|(a, _)| a.to_f64() <= x)
                .map(|(_, w)| w.to_f64())
                .sum::<f64>()
                .min(1.0),
        }
    }

    /// Smallest atom with `Pr[X <= q] >= 1/2` (the lower-middle atom for an
    /// even number of equal atoms); the midpoint for continuous laws.
    pub fn median(&self) -> Result<T> {
        match self {
            DistributionSpec::UniformContinuous { lo, hi } => T::from_f64((lo + hi) / 2.0),
            _ => {
                let mut atoms = self.atoms().expect("discrete");
                atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
                let half = T::one() / T::from_int(2);
                let mut mass = T::zero();
                for (x, w) in &atoms {
                    mass = mass + *w;
                    if mass >= half {
                        return Ok(*x);
                    }
                }
                Ok(atoms.last().expect("non-empty").0)
            }
        }
    }

    /// Largest point of the support.
    pub fn max_support(&self) -> Result<T> {
        match self {
            DistributionSpec::UniformContinuous { hi, .. } => T::from_f64(*hi),
            _ => Ok(self
                .atoms()
                .expect("discrete")
                .into_iter()
                .map(|(x, _)| x)
                .fold(T::zero(), T::max_of)),
        }
    }
}

fn power<T: Scalar>(base: T, exp: u32) -> T {
    (0..exp).fold(T::one(), |acc, _| acc * base)
}

/// How a buyer's valuation is drawn, given the number of sellers `m`.
#[derive(Debug, Clone, PartialEq)]
pub enum BuyerGenerator<T> {
    Fixed(ValuationOracle<T>),
    /// Uniform over the listed oracles.
    Choice(Vec<ValuationOracle<T>>),
    /// Each weight drawn independently.
    Additive(DistributionSpec<T>),
    /// Each per-seller value drawn independently.
    UnitDemand(DistributionSpec<T>),
    /// `supports` additive functions, every coordinate drawn independently.
    Xos {
        supports: usize,
        weights: DistributionSpec<T>,
    },
    /// Unit-demand over identical items: one scalar value.
    Identical(DistributionSpec<T>),
}

impl<T: Scalar> BuyerGenerator<T> {
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            BuyerGenerator::Fixed(v) => v.validate(m),
            BuyerGenerator::Choice(vs) if vs.is_empty() => {
                Err(MarketError::InvalidInput("empty valuation choice".into()))
            }
            BuyerGenerator::Choice(vs) => vs.iter().try_for_each(|v| v.validate(m)),
            BuyerGenerator::Xos { supports: 0, .. } => Err(MarketError::InvalidInput(
                "XOS generator needs a support".into(),
            )),
            BuyerGenerator::Additive(d)
            | BuyerGenerator::UnitDemand(d)
            | BuyerGenerator::Identical(d)
            | BuyerGenerator::Xos { weights: d, .. } => d.validate(),
        }
    }

    pub fn draw(&self, m: usize, rng: &mut impl Rng) -> Result<ValuationOracle<T>> {
        let weights = |d: &DistributionSpec<T>, rng: &mut _| -> Result<Vec<T>> {
            (0..m).map(|_| d.sample(rng)).collect()
        };
        Ok(match self {
            BuyerGenerator::Fixed(v) => v.clone(),
            BuyerGenerator::Choice(vs) => vs[rng.random_range(0..vs.len())].clone(),
            BuyerGenerator::Additive(d) => ValuationOracle::Additive(weights(d, rng)?),
            BuyerGenerator::UnitDemand(d) => ValuationOracle::UnitDemand(weights(d, rng)?),
            BuyerGenerator::Xos {
                supports,
                weights: d,
            } => ValuationOracle::Xos(
                (0..*supports)
                    .map(|_| weights(d, rng))
                    .collect::<Result<_>>()?,
            ),
            BuyerGenerator::Identical(d) => ValuationOracle::identical(d.sample(rng)?, m),
        })
    }

    /// Every valuation the generator can produce with its probability, or
    /// `None` when the law is continuous or has more than `cap` atoms.
    pub fn support(&self, m: usize, cap: usize) -> Option<Vec<(ValuationOracle<T>, T)>> {
        let product = |d: &DistributionSpec<T>, len: usize| -> Option<Vec<(Vec<T>, T)>> {
            let atoms = d.atoms()?;
            let total = atoms.len().checked_pow(len as u32)?;
            if total > cap {
                return None;
            }
            let mut out = vec![(Vec::with_capacity(len), T::one())];
            for _ in 0..len {
                out = out
                    .into_iter()
                    .flat_map(|(prefix, w)| {
                        atoms.iter().map(move |(x, p)| {
                            let mut next = prefix.clone();
                            next.push(*x);
                            (next, w * *p)
                        })
                    })
                    .collect();
            }
            Some(out)
        };
        match self {
            BuyerGenerator::Fixed(v) => Some(vec![(v.clone(), T::one())]),
            BuyerGenerator::Choice(vs) => {
                let w = T::one() / T::from_int(vs.len() as i64);
                Some(vs.iter().map(|v| (v.clone(), w)).collect())
            }
            BuyerGenerator::Additive(d) => Some(
                product(d, m)?
                    .into_iter()
                    .map(|(w, p)| (ValuationOracle::Additive(w), p))
                    .collect(),
            ),
            BuyerGenerator::UnitDemand(d) => Some(
                product(d, m)?
                    .into_iter()
                    .map(|(w, p)| (ValuationOracle::UnitDemand(w), p))
                    .collect(),
            ),
            BuyerGenerator::Xos { supports, weights } => {
                let flat = product(weights, m * supports)?;
                Some(
                    flat.into_iter()
                        .map(|(w, p)| {
                            (
                                ValuationOracle::Xos(
                                    w.chunks(m.max(1)).map(<[T]>::to_vec).collect(),
                                ),
                                p,
                            )
                        })
                        .collect(),
                )
            }
            BuyerGenerator::Identical(d) => {
                let atoms = d.atoms()?;
                (atoms.len() <= cap).then(|| {
                    atoms
                        .into_iter()
                        .map(|(x, p)| (ValuationOracle::identical(x, m), p))
                        .collect()
                })
            }
        }
    }

    /// The scalar law of a buyer over identical items.
    pub fn scalar_law(&self) -> Option<&DistributionSpec<T>> {
        match self {
            BuyerGenerator::Identical(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuyerPrior<T> {
    pub id: String,
    pub generator: BuyerGenerator<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SellerPrior<T> {
    pub id: String,
    pub distribution: DistributionSpec<T>,
}

/// Where the master seed and stream of a sample profile came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub label: String,
    pub trial: u64,
}

/// One sample per seller and, optionally, per buyer. Indexed like the market.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleProfile<T> {
    pub seller_samples: Vec<T>,
    pub buyer_samples: Option<Vec<T>>,
    pub seed_record: Option<SeedRecord>,
}

impl<T: Scalar> SampleProfile<T> {
    /// A hand-written profile.
    pub fn fixed(seller_samples: Vec<T>, buyer_samples: Option<Vec<T>>) -> Self {
        SampleProfile {
            seller_samples,
            buyer_samples,
            seed_record: None,
        }
    }
}

/// The Bayesian environment instances and samples are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketDistribution<T> {
    pub buyers: Vec<BuyerPrior<T>>,
    pub sellers: Vec<SellerPrior<T>>,
    pub constraint: ConstraintSystem,
    pub items_identical: bool,
}

impl<T: Scalar> MarketDistribution<T> {
    /// Buyers `b1..` and sellers `s1..`, unconstrained.
    pub fn new(buyers: Vec<BuyerGenerator<T>>, sellers: Vec<DistributionSpec<T>>) -> Result<Self> {
        let items_identical = buyers
            .iter()
            .all(|g| matches!(g, BuyerGenerator::Identical(_)));
        let dist = MarketDistribution {
            buyers: buyers
                .into_iter()
                .enumerate()
                .map(|(i, generator)| BuyerPrior {
                    id: format!("b{}", i + 1),
                    generator,
                })
                .collect(),
            sellers: sellers
                .into_iter()
                .enumerate()
                .map(|(j, distribution)| SellerPrior {
                    id: format!("s{}", j + 1),
                    distribution,
                })
                .collect(),
            constraint: ConstraintSystem::unconstrained(),
            items_identical,
        };
        dist.validate()?;
        Ok(dist)
    }

    /// `n` buyers and `m` sellers of identical items.
    pub fn double_auction(
        n: usize,
        buyer: DistributionSpec<T>,
        m: usize,
        seller: DistributionSpec<T>,
    ) -> Result<Self> {
        MarketDistribution::new(vec![BuyerGenerator::Identical(buyer); n], vec![seller; m])
    }

    #[must_use]
    pub fn with_constraint(mut self, constraint: ConstraintSystem) -> Self {
        self.constraint = constraint;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.sellers.len();
        for b in &self.buyers {
            b.generator
                .validate(m)
                .map_err(|e| MarketError::InvalidInput(format!("buyer {}: {e}", b.id)))?;
            if self.items_identical && b.generator.scalar_law().is_none() {
                return Err(MarketError::InvalidInput(format!(
                    "buyer {} needs a scalar law over identical items",
                    b.id
                )));
            }
        }
        for s in &self.sellers {
            s.distribution
                .validate()
                .map_err(|e| MarketError::InvalidInput(format!("seller {}: {e}", s.id)))?;
        }
        Ok(())
    }

    pub fn num_buyers(&self) -> usize {
        self.buyers.len()
    }

    pub fn num_sellers(&self) -> usize {
        self.sellers.len()
    }

    /// Assembles an instance from drawn valuations and seller values.
    pub fn instance(
        &self,
        valuations: Vec<ValuationOracle<T>>,
        seller_values: Vec<T>,
    ) -> Result<MarketInstance<T>> {
        let buyers = self
            .buyers
            .iter()
            .zip(valuations)
            .map(|(p, valuation)| BuyerSpec {
                id: p.id.clone(),
                valuation,
            })
            .collect();
        let sellers = self
            .sellers
            .iter()
            .zip(seller_values)
            .map(|(p, value)| SellerSpec {
                id: p.id.clone(),
                value,
            })
            .collect();
        MarketInstance::new(
            buyers,
            sellers,
            self.constraint.clone(),
            self.items_identical,
        )
    }

    /// True values: buyer `i` uses agent stream `i`, seller `j` stream `n + j`
    /// of the `"values"` child of `contract`.
    pub fn draw_instance(&self, contract: &RngContract) -> Result<MarketInstance<T>> {
        let c = contract.child("values");
        let (valuations, seller_values) = self.draw_with(&c, |g, m, rng| g.draw(m, rng))?;
        self.instance(valuations, seller_values)
    }

    /// Independent samples from the `"samples"` child of `contract`. Buyer
    /// samples are scalar and need identical items.
    pub fn sample_profile(
        &self,
        contract: &RngContract,
        with_buyer_samples: bool,
    ) -> Result<SampleProfile<T>> {
        let c = contract.child("samples");
        let n = self.buyers.len() as u64;
        let seller_samples = self
            .sellers
            .iter()
            .enumerate()
            .map(|(j, s)| s.distribution.sample(&mut c.agent_rng(n + j as u64)))
            .collect::<Result<Vec<T>>>()?;
        let buyer_samples = if with_buyer_samples {
            Some(
                self.buyers
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let law = b.generator.scalar_law().ok_or_else(|| {
                            MarketError::Unsupported(format!("buyer {} has no scalar sample", b.id))
                        })?;
                        law.sample(&mut c.agent_rng(i as u64))
                    })
                    .collect::<Result<Vec<T>>>()?,
            )
        } else {
            None
        };
        Ok(SampleProfile {
            seller_samples,
            buyer_samples,
            seed_record: Some(SeedRecord {
                seed: c.seed,
                label: c.label,
                trial: c.trial,
            }),
        })
    }

    fn draw_with(
        &self,
        c: &RngContract,
        mut draw: impl FnMut(
            &BuyerGenerator<T>,
            usize,
            &mut rand_chacha::ChaCha8Rng,
        ) -> Result<ValuationOracle<T>>,
    ) -> Result<(Vec<ValuationOracle<T>>, Vec<T>)> {
        let m = self.sellers.len();
        let n = self.buyers.len() as u64;
        let valuations = self
            .buyers
            .iter()
            .enumerate()
            .map(|(i, b)| draw(&b.generator, m, &mut c.agent_rng(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let seller_values = self
            .sellers
            .iter()
            .enumerate()
            .map(|(j, s)| s.distribution.sample(&mut c.agent_rng(n + j as u64)))
            .collect::<Result<Vec<T>>>()?;
        Ok((valuations, seller_values))
    }
}

//! Instance families used by experiments and acceptance checks.

use crate::distribution::{BuyerGenerator, DistributionSpec, MarketDistribution};
use crate::error::{MarketError, Result};
use crate::scalar::Scalar;

/// Bilateral trade with a buyer worth 1 and a seller uniform on
/// `{1/3, 1/3², …, 1/3^k}`.
pub fn lowerbound_instance<T: Scalar>(k: u32) -> Result<MarketDistribution<T>> {
    if k == 0 {
        return Err(MarketError::InvalidInput("k must be at least 1".into()));
    }
    MarketDistribution::double_auction(
        1,
        DistributionSpec::PointMass(T::one()),
        1,
        DistributionSpec::GeometricAtoms {
            base: T::from_frac(1, 3),
            count: k,
        },
    )
}

/// `E[OPT] / E[ALG]` of adjusted VCG on [`lowerbound_instance`]: trade happens
/// iff the sample is at least the value, so
/// `E[ALG] = (k+1)/(2k) + k^{-2} Σ_{i=1}^{k} (k-i) 3^{-i}` and `E[OPT] = 1`.
pub fn lowerbound_closed_form<T: Scalar>(k: u32) -> T {
    let kk = T::from_int(i64::from(k));
    let trade = (kk + T::one()) / (T::from_int(2) * kk);
    let third = T::from_frac(1, 3);
    let mut power = T::one();
    let mut tail = T::zero();
    for i in 1..=k {
        power = power * third;
        tail = tail + T::from_int(i64::from(k - i)) * power;
    }
    T::one() / (trade + tail / (kk * kk))
}

/// Integer atoms `{lo, …, hi}`.
pub fn integer_atoms<T: Scalar>(lo: i64, hi: i64) -> DistributionSpec<T> {
    DistributionSpec::UniformDiscrete((lo..=hi).map(T::from_int).collect())
}

/// `buyers` XOS buyers with `supports` random supports, coordinates uniform
/// on `{0, …, buyer_max}`; `sellers` sellers uniform on `{0, …, seller_max}`.
pub fn xos_family<T: Scalar>(
    buyers: usize,
    supports: usize,
    buyer_max: i64,
    sellers: usize,
    seller_max: i64,
) -> Result<MarketDistribution<T>> {
    MarketDistribution::new(
        vec![
            BuyerGenerator::Xos {
                supports,
                weights: integer_atoms(0, buyer_max),
            };
            buyers
        ],
        vec![integer_atoms(0, seller_max); sellers],
    )
}

/// Three XOS buyers with two supports on `{0, …, 10}` and four sellers on
/// `{0, …, 5}`.
pub fn default_xos_family<T: Scalar>() -> Result<MarketDistribution<T>> {
    xos_family(3, 2, 10, 4, 5)
}

/// Identical items, buyer and seller values uniform on `[0, 1]`.
pub fn uniform_double_auction(n: usize, m: usize) -> Result<MarketDistribution<f64>> {
    let u = DistributionSpec::UniformContinuous { lo: 0.0, hi: 1.0 };
    MarketDistribution::double_auction(n, u.clone(), m, u)
}

/// Identical items with values on `{0, 1/d, …, 1}`.
pub fn grid_double_auction<T: Scalar>(n: usize, m: usize, d: i64) -> Result<MarketDistribution<T>> {
    let grid = DistributionSpec::UniformDiscrete((0..=d).map(|i| T::from_frac(i, d)).collect());
    MarketDistribution::double_auction(n, grid.clone(), m, grid)
}

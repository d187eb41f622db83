//! Exact checks of the welfare-decomposition inequalities behind the
//! adjusted-VCG guarantee, and Monte Carlo checks of the rehearsal bounds.
//!
//! Notation, per realization: buyer gains of an allocation `A` are
//! `T_b = v_b(A_b) - Σ_{s∈A_b} v_s`; adjusted gains replace `v_s` by
//! `max{v_s, v'_s}`. `OPT_max` maximizes the sum of adjusted gains.

use serde::Serialize;

use crate::distribution::MarketDistribution;
use crate::error::{MarketError, Result};
use crate::market::social_welfare;
use crate::mechanisms::{AdjustedVcg, ReserveRehearsal, TwoSidedMechanism};
use crate::opt::Optimizer;
use crate::rng::RngContract;
use crate::scalar::Scalar;
use crate::valuations::SetTable;

use super::support::JointSupport;
use super::{draw_trial, fold_trials};

/// Both sides of an inequality `lhs >= rhs`, evaluated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactInequality<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Scalar> ExactInequality<T> {
    /// Exact on the exact backend, within tolerance on floats.
    pub fn holds(&self) -> bool {
        self.lhs.ge_tol(&self.rhs)
    }
}

/// Expected sums needed by both lemma checks.
#[derive(Debug, Clone, PartialEq)]
pub struct GainExpectations<T> {
    /// `E[Σ_b T_b^OPT]`.
    pub opt_gains: T,
    /// `E[Σ_b T̂_b^{OPT_max}]`.
    pub opt_max_gains: T,
    /// `E[Σ_s (v'_s - v_s)_+]`.
    pub sample_excess: T,
    /// `E[Σ_b T_b^ALG]` for adjusted VCG.
    pub alg_gains: T,
}

/// Enumerates the joint support of values and seller samples of `dist` and
/// returns the four expectations exactly.
pub fn gain_expectations<T: Scalar>(
    dist: &MarketDistribution<T>,
    cap: usize,
    optimizer: &Optimizer,
) -> Result<GainExpectations<T>> {
    if !dist.constraint.is_unconstrained() {
        return Err(MarketError::Unsupported(
            "the gain decomposition is stated for unconstrained markets".into(),
        ));
    }
    let support = JointSupport::new(dist, false, cap)?;
    let mechanism = AdjustedVcg {
        optimizer: *optimizer,
    };
    let rng = RngContract::new(0, "exact", 0);
    let mut out = GainExpectations {
        opt_gains: T::zero(),
        opt_max_gains: T::zero(),
        sample_excess: T::zero(),
        alg_gains: T::zero(),
    };
    support.for_each(|market, profile, w| {
        let kept: T = market.seller_values().into_iter().sum();
        let (_, opt) = optimizer.opt_welfare(market)?;
        let (_, opt_max) = optimizer.opt_max_allocation(market, &profile.seller_samples)?;
        let excess: T = market
            .seller_values()
            .iter()
            .zip(&profile.seller_samples)
            .map(|(&v, &s)| (s - v).positive_part())
            .sum();
        let outcome = mechanism.run(market, profile, &rng)?;
        let alg = social_welfare(market, &outcome)?;
        out.opt_gains = out.opt_gains + w * (opt - kept);
        out.opt_max_gains = out.opt_max_gains + w * opt_max;
        out.sample_excess = out.sample_excess + w * excess;
        out.alg_gains = out.alg_gains + w * (alg - kept);
        Ok(())
    })?;
    Ok(out)
}

impl<T: Scalar> GainExpectations<T> {
    /// `Σ E[T̂^{OPT_max}] >= Σ E[T^OPT] - Σ E[(v'_s - v_s)_+]`.
    pub fn lemma42(&self) -> ExactInequality<T> {
        ExactInequality {
            lhs: self.opt_max_gains,
            rhs: self.opt_gains - self.sample_excess,
        }
    }

    /// `E[Σ T^ALG] >= ½ E[Σ T̂^{OPT_max}]`.
    pub fn lemma43(&self) -> ExactInequality<T> {
        ExactInequality {
            lhs: self.alg_gains,
            rhs: self.opt_max_gains / T::from_int(2),
        }
    }
}

pub fn lemma42_check<T: Scalar>(
    dist: &MarketDistribution<T>,
    cap: usize,
) -> Result<ExactInequality<T>> {
    Ok(gain_expectations(dist, cap, &Optimizer::default())?.lemma42())
}

pub fn lemma43_check<T: Scalar>(
    dist: &MarketDistribution<T>,
    cap: usize,
) -> Result<ExactInequality<T>> {
    Ok(gain_expectations(dist, cap, &Optimizer::default())?.lemma43())
}

/// `E[f(X)] >= f(N)/2` for the uniformly random half `X` of the ground set.
pub fn lemma41_check<T: Scalar>(table: &SetTable<T>) -> Result<ExactInequality<T>> {
    let (lhs, rhs) = table.half_sample_expectation()?;
    Ok(ExactInequality { lhs, rhs })
}

/// `2 - √3`.
pub fn pairing_constant() -> f64 {
    2.0 - 3f64.sqrt()
}

/// Monte Carlo means on coupled draws of a double auction, for the
/// one-sided/two-sided comparison of the rehearsal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RehearsalBounds {
    pub trials: u64,
    pub seed: u64,
    /// `E[Σ_{b ∈ top k} v_b]`, the one-sided optimum.
    pub top_k: f64,
    /// `E[Σ_{b ∈ B'} v_b]` over the selector's tentative buyers.
    pub tentative: f64,
    /// `E[SW]` of reserve rehearsal: trading buyers plus sellers who keep.
    pub two_sided: f64,
    /// `E[SW_OPT]`.
    pub opt: f64,
    /// `top_k / tentative`.
    pub alpha: f64,
    /// `opt / two_sided`.
    pub ratio: f64,
    /// `1 + alpha / (2 - √3)`.
    pub composed_bound: f64,
    /// Standard error of `ratio - composed_bound`.
    pub se_ratio_gap: f64,
    /// `two_sided - (2 - √3) · tentative`.
    pub pairing_gap: f64,
    pub se_pairing_gap: f64,
}

/// Runs reserve rehearsal on `trials` draws and reads off the tentative set
/// of its selector on the same draws.
pub fn rehearsal_bounds<T: Scalar>(
    dist: &MarketDistribution<T>,
    mechanism: &ReserveRehearsal,
    trials: u64,
    seed: u64,
    optimizer: &Optimizer,
) -> Result<RehearsalBounds> {
    if !dist.items_identical {
        return Err(MarketError::Unsupported(
            "rehearsal bounds need identical items".into(),
        ));
    }
    let (n, m) = (dist.num_buyers(), dist.num_sellers());
    let k = n.min(m);
    let moments = fold_trials(trials, 4, |t| {
        let draw = draw_trial(dist, seed, "rehearsal", t, true)?;
        let (outcome, state) =
            mechanism.run_with_state(&draw.market, &draw.profile, &draw.mechanism_rng())?;
        let values = draw.market.scalar_buyer_values()?;
        let mut sorted: Vec<f64> = values.iter().map(Scalar::to_f64).collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("comparable"));
        let top_k: f64 = sorted.iter().take(k).sum();
        let tentative: f64 = state
            .pairings
            .iter()
            .map(|&(b, _)| values[b].to_f64())
            .sum();
        let two_sided = social_welfare(&draw.market, &outcome)?.to_f64();
        let opt = optimizer.opt_welfare(&draw.market)?.1.to_f64();
        Ok(vec![top_k, tentative, two_sided, opt])
    })?;
    let [z, w, x, y] = [0, 1, 2, 3].map(|i| moments.mean(i));
    let c = pairing_constant();
    let alpha = z / w;
    let ratio = y / x;
    let composed_bound = 1.0 + alpha / c;
    // Gradient of y/x - 1 - (z/w)/c with respect to (z, w, x, y).
    let grad = [-1.0 / (c * w), z / (c * w * w), -y / (x * x), 1.0 / x];
    Ok(RehearsalBounds {
        trials,
        seed,
        top_k: z,
        tentative: w,
        two_sided: x,
        opt: y,
        alpha,
        ratio,
        composed_bound,
        se_ratio_gap: moments.std_error(&grad),
        pairing_gap: x - c * w,
        se_pairing_gap: moments.std_error(&[0.0, -c, 1.0, 0.0]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{BuyerGenerator, DistributionSpec};
    use crate::scalar::Exact;
    use crate::valuations::ValuationOracle;
    use crate::verify::instances::grid_double_auction;

    fn ex(n: i64) -> Exact {
        Exact::from_int(n)
    }

    #[test]
    fn point_masses_with_equal_samples() {
        let dist = MarketDistribution::<Exact>::new(
            vec![BuyerGenerator::Fixed(ValuationOracle::Additive(vec![
                ex(5),
                ex(1),
            ]))],
            vec![
                DistributionSpec::PointMass(ex(2)),
                DistributionSpec::PointMass(ex(3)),
            ],
        )
        .unwrap();
        let g = gain_expectations(&dist, 100, &Optimizer::default()).unwrap();
        assert_eq!(g.sample_excess, ex(0));
        assert_eq!(g.lemma42().lhs, g.opt_gains);
        assert_eq!(g.opt_gains, ex(3));
        assert!(g.lemma43().holds());
    }

    #[test]
    fn bilateral_two_atom_seller() {
        let dist = MarketDistribution::<Exact>::new(
            vec![BuyerGenerator::Identical(DistributionSpec::PointMass(ex(
                3,
            )))],
            vec![DistributionSpec::UniformDiscrete(vec![ex(1), ex(2)])],
        )
        .unwrap();
        let g = gain_expectations(&dist, 100, &Optimizer::default()).unwrap();
        // OPT always trades: E[T] = 3 - 3/2. OPT_max: E[3 - max] = 3 - 7/4.
        assert_eq!(g.opt_gains, Exact::from_frac(3, 2));
        assert_eq!(g.opt_max_gains, Exact::from_frac(5, 4));
        assert_eq!(g.sample_excess, Exact::from_frac(1, 4));
        assert!(g.lemma42().holds() && g.lemma43().holds());
    }

    #[test]
    fn rehearsal_bounds_are_consistent() {
        let dist = grid_double_auction::<Exact>(6, 6, 4).unwrap();
        let b = rehearsal_bounds(
            &dist,
            &ReserveRehearsal::default(),
            400,
            2,
            &Optimizer::default(),
        )
        .unwrap();
        assert!(b.top_k >= b.tentative);
        assert!(b.opt >= b.two_sided);
        assert!(b.se_ratio_gap > 0.0);
    }
}

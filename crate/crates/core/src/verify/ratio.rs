//! Approximation-ratio estimation, by paired Monte Carlo or exact
//! enumeration of the joint support.

use serde::Serialize;

use crate::distribution::MarketDistribution;
use crate::error::{MarketError, Result};
use crate::market::{budget_surplus, social_welfare};
use crate::mechanisms::TwoSidedMechanism;
use crate::opt::Optimizer;
use crate::rng::RngContract;
use crate::scalar::Scalar;

use super::stats::{z95, Moments};
use super::support::JointSupport;
use super::{draw_trial, fold_trials, map_trials};

/// `E[SW_OPT] / E[SW_ALG]` with 95% confidence half-widths. In exact mode the
/// means are exact expectations and the half-widths are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub mechanism: String,
    pub trials: u64,
    pub seed: u64,
    pub exact: bool,
    pub mean_alg_sw: f64,
    pub mean_opt_sw: f64,
    pub ratio: f64,
    pub ci95_alg: f64,
    pub ci95_opt: f64,
    pub ci95_ratio: f64,
    /// Paired moments of `(SW_ALG, SW_OPT)`; absent in exact mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<Moments>,
}

impl RatioReport {
    fn from_moments(mechanism: String, seed: u64, moments: Moments) -> Self {
        let (a, o) = (moments.mean(0), moments.mean(1));
        let z = z95();
        let ratio = o / a;
        RatioReport {
            mechanism,
            trials: moments.count,
            seed,
            exact: false,
            mean_alg_sw: a,
            mean_opt_sw: o,
            ratio,
            ci95_alg: z * moments.std_error(&[1.0, 0.0]),
            ci95_opt: z * moments.std_error(&[0.0, 1.0]),
            ci95_ratio: z * moments.std_error(&[-o / (a * a), 1.0 / a]),
            moments: Some(moments),
        }
    }

    /// Standard error of `w_alg · mean_alg + w_opt · mean_opt`.
    pub fn std_error_of(&self, w_alg: f64, w_opt: f64) -> f64 {
        self.moments
            .as_ref()
            .map_or(0.0, |m| m.std_error(&[w_alg, w_opt]))
    }
}

/// One paired trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub alg_sw: f64,
    pub opt_sw: f64,
    pub budget_surplus: f64,
    pub trades: usize,
}

fn run_pair<T: Scalar>(
    mechanism: &dyn TwoSidedMechanism<T>,
    dist: &MarketDistribution<T>,
    optimizer: &Optimizer,
    seed: u64,
    t: u64,
) -> Result<TrialRecord> {
    let draw = draw_trial(dist, seed, "ratio", t, mechanism.needs_buyer_samples())?;
    let outcome = mechanism.run(&draw.market, &draw.profile, &draw.mechanism_rng())?;
    let alg = social_welfare(&draw.market, &outcome)?;
    let (_, opt) = optimizer.opt_welfare(&draw.market)?;
    Ok(TrialRecord {
        trial: t,
        alg_sw: alg.to_f64(),
        opt_sw: opt.to_f64(),
        budget_surplus: budget_surplus(&outcome).to_f64(),
        trades: outcome.trades.len(),
    })
}

/// Paired Monte Carlo: trial `t` draws values and samples from the streams
/// `(seed, "ratio", t)` and runs the mechanism and OPT on the same draw.
pub fn estimate_ratio<T: Scalar>(
    mechanism: &dyn TwoSidedMechanism<T>,
    dist: &MarketDistribution<T>,
    trials: u64,
    seed: u64,
    optimizer: &Optimizer,
) -> Result<RatioReport> {
    if trials == 0 {
        return Err(MarketError::InvalidInput("trials must be positive".into()));
    }
    let moments = fold_trials(trials, 2, |t| {
        let r = run_pair(mechanism, dist, optimizer, seed, t)?;
        Ok(vec![r.alg_sw, r.opt_sw])
    })?;
    Ok(RatioReport::from_moments(mechanism.name(), seed, moments))
}

/// The per-trial records behind [`estimate_ratio`].
pub fn ratio_traces<T: Scalar>(
    mechanism: &dyn TwoSidedMechanism<T>,
    dist: &MarketDistribution<T>,
    trials: u64,
    seed: u64,
    optimizer: &Optimizer,
) -> Result<Vec<TrialRecord>> {
    map_trials(trials, |t| run_pair(mechanism, dist, optimizer, seed, t))
}

/// Exact expectations over the joint support of a deterministic mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactRatio<T> {
    pub expected_alg: T,
    pub expected_opt: T,
    pub ratio: T,
    pub atoms: usize,
}

impl<T: Scalar> ExactRatio<T> {
    pub fn report(&self, mechanism: String) -> RatioReport {
        RatioReport {
            mechanism,
            trials: self.atoms as u64,
            seed: 0,
            exact: true,
            mean_alg_sw: self.expected_alg.to_f64(),
            mean_opt_sw: self.expected_opt.to_f64(),
            ratio: self.ratio.to_f64(),
            ci95_alg: 0.0,
            ci95_opt: 0.0,
            ci95_ratio: 0.0,
            moments: None,
        }
    }
}

/// `E[SW_OPT] / E[SW_ALG]` by enumerating every value and sample profile.
pub fn exact_ratio<T: Scalar>(
    mechanism: &dyn TwoSidedMechanism<T>,
    dist: &MarketDistribution<T>,
    cap: usize,
    optimizer: &Optimizer,
) -> Result<ExactRatio<T>> {
    if mechanism.guarantees().randomized {
        return Err(MarketError::Unsupported(format!(
            "{} is randomized; exact expectations cover deterministic mechanisms only",
            mechanism.name()
        )));
    }
    let support = JointSupport::new(dist, mechanism.needs_buyer_samples(), cap)?;
    let rng = RngContract::new(0, "exact", 0);
    let (mut alg, mut opt) = (T::zero(), T::zero());
    support.for_each(|market, profile, w| {
        let outcome = mechanism.run(market, profile, &rng)?;
        alg = alg + w * social_welfare(market, &outcome)?;
        opt = opt + w * optimizer.opt_welfare(market)?.1;
        Ok(())
    })?;
    if alg.is_zero() {
        return Err(MarketError::InvalidInput(
            "expected mechanism welfare is zero".into(),
        ));
    }
    Ok(ExactRatio {
        expected_alg: alg,
        expected_opt: opt,
        ratio: opt / alg,
        atoms: support.len(),
    })
}

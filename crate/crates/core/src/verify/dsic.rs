//! Falsification probes for dominant-strategy incentive compatibility.
//!
//! For a fixed agent, each misreport in a grid is compared with truthful
//! reporting on the same draws of values, samples and mechanism coins. The
//! grid cannot cover every possible misreport, so a clean report is evidence
//! against implementation bugs, not a proof.

use serde::Serialize;

use crate::distribution::MarketDistribution;
use crate::error::{MarketError, Result};
use crate::market::{MarketInstance, Outcome};
use crate::mechanisms::TwoSidedMechanism;
use crate::scalar::Scalar;

use super::ledger::AgentRef;
use super::stats::bonferroni_z;
use super::{draw_trial, fold_trials};

/// A report an agent may submit instead of the truth.
#[derive(Debug, Clone, PartialEq)]
pub enum Misreport<T> {
    Truthful,
    /// Seller reports this value.
    SellerBid(T),
    /// Buyer reports the valuation multiplied by this factor.
    BuyerScale(T),
    /// Buyer reports interest in this seller only.
    BuyerRestrict(usize),
}

impl<T: Scalar> Misreport<T> {
    pub fn label(&self) -> String {
        match self {
            Misreport::Truthful => "truthful".into(),
            Misreport::SellerBid(x) => format!("bid={}", x.render()),
            Misreport::BuyerScale(f) => format!("scale={}", f.render()),
            Misreport::BuyerRestrict(s) => format!("restrict={s}"),
        }
    }

    fn apply(&self, market: &MarketInstance<T>, agent: AgentRef) -> Result<MarketInstance<T>> {
        match (self, agent) {
            (Misreport::Truthful, _) => Ok(market.clone()),
            (Misreport::SellerBid(x), AgentRef::Seller(j)) => market.with_seller_report(j, *x),
            (Misreport::BuyerScale(f), AgentRef::Buyer(i)) => {
                market.with_buyer_report(i, market.valuation(i).scaled(*f))
            }
            (Misreport::BuyerRestrict(s), AgentRef::Buyer(i)) => {
                market.with_buyer_report(i, market.valuation(i).restricted_to(*s))
            }
            _ => Err(MarketError::InvalidInput(format!(
                "misreport {} does not apply to {agent:?}",
                self.label()
            ))),
        }
    }
}

/// Eleven bids `i · 2·max/10`, `i = 0..=10`, plus the truthful report.
pub fn seller_grid<T: Scalar>(max_support: T) -> Vec<Misreport<T>> {
    let step = T::from_int(2) * max_support / T::from_int(10);
    std::iter::once(Misreport::Truthful)
        .chain((0..=10).map(|i| Misreport::SellerBid(T::from_int(i) * step)))
        .collect()
}

/// Rescalings by `0, 1/2, 9/10, 11/10, 2`, restriction to each seller, and
/// the truthful report. Restrictions are omitted when items are identical.
pub fn buyer_grid<T: Scalar>(sellers: usize, items_identical: bool) -> Vec<Misreport<T>> {
    let mut grid = vec![Misreport::Truthful];
    grid.extend(
        [(0, 1), (1, 2), (9, 10), (11, 10), (2, 1)]
            .into_iter()
            .map(|(n, d)| Misreport::BuyerScale(T::from_frac(n, d))),
    );
    if !items_identical {
        grid.extend((0..sellers).map(Misreport::BuyerRestrict));
    }
    grid
}

/// The default grid for `agent` in markets drawn from `dist`.
pub fn default_grid<T: Scalar>(
    dist: &MarketDistribution<T>,
    agent: AgentRef,
) -> Result<Vec<Misreport<T>>> {
    match agent {
        AgentRef::Seller(j) => {
            let prior = dist
                .sellers
                .get(j)
                .ok_or_else(|| MarketError::InvalidInput(format!("no seller {j}")))?;
            Ok(seller_grid(prior.distribution.max_support()?))
        }
        AgentRef::Buyer(i) => {
            if i >= dist.num_buyers() {
                return Err(MarketError::InvalidInput(format!("no buyer {i}")));
            }
            Ok(buyer_grid(dist.num_sellers(), dist.items_identical))
        }
    }
}

/// Whether truth and misreport share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Same values, samples and mechanism coins for every report.
    #[default]
    Coupled,
    /// Each report gets its own draws.
    Uncoupled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainEstimate {
    pub misreport: String,
    pub mean_gain: f64,
    pub std_error: f64,
    /// Bonferroni-corrected one-sided bounds.
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoProfit,
    Suspicious(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub mechanism: String,
    pub agent: AgentRef,
    pub grid: String,
    pub coverage: String,
    pub coupling: Coupling,
    pub trials: u64,
    pub seed: u64,
    pub sigmas: f64,
    pub critical_z: f64,
    pub gains: Vec<GainEstimate>,
    pub max_gain: f64,
    pub verdict: Verdict,
}

/// True utility of `agent` under `outcome`: value minus payment for a buyer,
/// payment minus value for a seller who sells, zero otherwise.
pub fn utility<T: Scalar>(truth: &MarketInstance<T>, outcome: &Outcome<T>, agent: AgentRef) -> T {
    match agent {
        AgentRef::Buyer(i) => {
            truth.valuation(i).evaluate(outcome.allocation[i]) - outcome.buyer_payments[i]
        }
        AgentRef::Seller(j) => {
            if outcome.sold().contains(j) {
                outcome.seller_payments[j] - truth.sellers()[j].value
            } else {
                T::zero()
            }
        }
    }
}

/// Estimates `E[u(misreport)] - E[u(truth)]` for every grid entry. The
/// verdict is suspicious iff some gain's lower confidence bound, at `sigmas`
/// Bonferroni-corrected over the non-truthful entries, is above zero.
#[allow(clippy::too_many_arguments)]
pub fn dsic_probe<T: Scalar>(
    mechanism: &dyn TwoSidedMechanism<T>,
    dist: &MarketDistribution<T>,
    agent: AgentRef,
    grid: &[Misreport<T>],
    trials: u64,
    seed: u64,
    coupling: Coupling,
    sigmas: f64,
) -> Result<DeviationReport> {
    if trials < 2 {
        return Err(MarketError::InvalidInput(
            "a probe needs at least two trials".into(),
        ));
    }
    let with_buyer_samples = mechanism.needs_buyer_samples();
    let utility_under = |report: &Misreport<T>, label: &str, t: u64| -> Result<T> {
        let draw = draw_trial(dist, seed, label, t, with_buyer_samples)?;
        let reported = report.apply(&draw.market, agent)?;
        let outcome = mechanism.run(&reported, &draw.profile, &draw.mechanism_rng())?;
        Ok(utility(&draw.market, &outcome, agent))
    };
    let labels: Vec<String> = grid
        .iter()
        .enumerate()
        .map(|(i, _)| match coupling {
            Coupling::Coupled => "dsic".to_string(),
            Coupling::Uncoupled => format!("dsic/{i}"),
        })
        .collect();
    // Coordinates: truthful utility on the shared draw, then each entry.
    let dim = grid.len() + 1;
    let moments = fold_trials(trials, dim, |t| {
        let mut row = Vec::with_capacity(dim);
        row.push(utility_under(&Misreport::Truthful, "dsic", t)?.to_f64());
        for (report, label) in grid.iter().zip(&labels) {
            let u = if coupling == Coupling::Coupled && matches!(report, Misreport::Truthful) {
                row[0]
            } else {
                utility_under(report, label, t)?.to_f64()
            };
            row.push(u);
        }
        Ok(row)
    })?;
    let tests = grid
        .iter()
        .filter(|r| !matches!(r, Misreport::Truthful))
        .count();
    let z = bonferroni_z(sigmas, tests);
    let mut gains = Vec::with_capacity(grid.len());
    let mut verdict = Verdict::NoProfit;
    let mut max_gain = f64::NEG_INFINITY;
    for (i, report) in grid.iter().enumerate() {
        let mut w = vec![0.0; dim];
        w[0] = -1.0;
        w[i + 1] += 1.0;
        let mean_gain = moments.mean(i + 1) - moments.mean(0);
        let std_error = match coupling {
            Coupling::Coupled => moments.std_error(&w),
            Coupling::Uncoupled => (moments.std_error(&unit(dim, 0)).powi(2)
                + moments.std_error(&unit(dim, i + 1)).powi(2))
            .sqrt(),
        };
        let ci_lower = mean_gain - z * std_error;
        if ci_lower > crate::scalar::FLOAT_TOLERANCE && verdict == Verdict::NoProfit {
            verdict = Verdict::Suspicious(report.label());
        }
        max_gain = max_gain.max(mean_gain);
        gains.push(GainEstimate {
            misreport: report.label(),
            mean_gain,
            std_error,
            ci_lower,
            ci_upper: mean_gain + z * std_error,
        });
    }
    Ok(DeviationReport {
        mechanism: mechanism.name(),
        agent,
        grid: grid
            .iter()
            .map(Misreport::label)
            .collect::<Vec<_>>()
            .join(","),
        coverage: "finite misreport grid: rescalings and single-seller restrictions for buyers, \
                   an 11-point bid grid for sellers; other misreports are not tested"
            .into(),
        coupling,
        trials,
        seed,
        sigmas,
        critical_z: z,
        gains,
        max_gain,
        verdict,
    })
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

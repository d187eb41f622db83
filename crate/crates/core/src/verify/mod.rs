//! Property verification: IR and budget ledgers, incentive-compatibility
//! probes, approximation ratios, exact lemma checks and instance families.
//!
//! Trial `t` of an experiment with master seed `seed` and label `label` uses
//! the contract `(seed, label, t)`: values come from its `"values"` child,
//! samples from `"samples"` and mechanism coins from `"mechanism"`. Trials
//! are independent and run in parallel; results are combined in trial order.

pub mod dsic;
pub mod instances;
pub mod ledger;
pub mod lemmas;
pub mod ratio;
pub mod stats;
pub mod support;

pub use dsic::{default_grid, dsic_probe, Coupling, DeviationReport, Misreport, Verdict};
pub use instances::{lowerbound_closed_form, lowerbound_instance};
pub use ledger::{check_budget, check_ir, run_ledger, AgentRef, BudgetMode, LedgerReport};
pub use lemmas::{lemma41_check, lemma42_check, lemma43_check, rehearsal_bounds, RehearsalBounds};
pub use ratio::{estimate_ratio, exact_ratio, ratio_traces, RatioReport, TrialRecord};
pub use stats::Moments;
pub use support::{JointSupport, EXACT_ATOM_CAP};

use rayon::prelude::*;

use crate::distribution::{MarketDistribution, SampleProfile};
use crate::error::Result;
use crate::market::MarketInstance;
use crate::rng::RngContract;
use crate::scalar::Scalar;

/// One trial's realized market and samples.
#[derive(Debug, Clone)]
pub struct TrialDraw<T> {
    pub contract: RngContract,
    pub market: MarketInstance<T>,
    pub profile: SampleProfile<T>,
}

impl<T> TrialDraw<T> {
    pub fn mechanism_rng(&self) -> RngContract {
        self.contract.child("mechanism")
    }
}

pub fn draw_trial<T: Scalar>(
    dist: &MarketDistribution<T>,
    seed: u64,
    label: &str,
    trial: u64,
    with_buyer_samples: bool,
) -> Result<TrialDraw<T>> {
    let contract = RngContract::new(seed, label, trial);
    let market = dist.draw_instance(&contract)?;
    let profile = dist.sample_profile(&contract, with_buyer_samples)?;
    Ok(TrialDraw {
        contract,
        market,
        profile,
    })
}

const CHUNK: u64 = 1024;

/// `f(0), …, f(trials - 1)` computed in parallel, in trial order.
pub fn map_trials<R: Send>(trials: u64, f: impl Fn(u64) -> Result<R> + Sync) -> Result<Vec<R>> {
    (0..trials).into_par_iter().map(&f).collect()
}

/// Moments of the `dim`-dimensional rows `f(t)`. Chunks are summed in
/// parallel and merged in a fixed order, so the result does not depend on
/// scheduling.
pub fn fold_trials(
    trials: u64,
    dim: usize,
    f: impl Fn(u64) -> Result<Vec<f64>> + Sync,
) -> Result<Moments> {
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::new(dim);
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                m.push(&f(t)?);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let mut total = Moments::new(dim);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

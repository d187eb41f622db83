//! Ex-post individual rationality and budget-balance checks.

use serde::Serialize;

use crate::distribution::MarketDistribution;
use crate::error::Result;
use crate::market::{budget_surplus, MarketInstance, Outcome};
use crate::mechanisms::{BudgetClaim, TwoSidedMechanism};
use crate::scalar::Scalar;

use super::{draw_trial, map_trials};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRef {
    Buyer(usize),
    Seller(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrViolation {
    pub agent: AgentRef,
    /// Utility relative to not participating; negative.
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrReport {
    pub ok: bool,
    pub violations: Vec<IrViolation>,
}

/// Every trading buyer values the bundle at least at the payment and every
/// selling seller receives at least its value.
pub fn check_ir<T: Scalar>(market: &MarketInstance<T>, outcome: &Outcome<T>) -> Result<IrReport> {
    outcome.validate(market)?;
    let mut violations = Vec::new();
    for (b, &bundle) in outcome.allocation.iter().enumerate() {
        let value = market.valuation(b).evaluate(bundle);
        let paid = outcome.buyer_payments[b];
        if !value.ge_tol(&paid) {
            violations.push(IrViolation {
                agent: AgentRef::Buyer(b),
                utility: (value - paid).to_f64(),
            });
        }
    }
    let sold = outcome.sold();
    for s in sold.iter() {
        let value = market.sellers()[s].value;
        let received = outcome.seller_payments[s];
        if !received.ge_tol(&value) {
            violations.push(IrViolation {
                agent: AgentRef::Seller(s),
                utility: (received - value).to_f64(),
            });
        }
    }
    Ok(IrReport {
        ok: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    Wbb,
    Sbb,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetVerdict {
    pub mode: BudgetMode,
    pub pass: bool,
    pub surplus: f64,
}

/// WBB: surplus `>= 0`. SBB: surplus `= 0`, exactly on the exact path and
/// within `1e-9` on the float path.
pub fn check_budget<T: Scalar>(outcome: &Outcome<T>, mode: BudgetMode) -> BudgetVerdict {
    let surplus = budget_surplus(outcome);
    let pass = match mode {
        BudgetMode::Wbb => surplus.ge_tol(&T::zero()),
        BudgetMode::Sbb => surplus.near_zero(),
    };
    BudgetVerdict {
        mode,
        pass,
        surplus: surplus.to_f64(),
    }
}

/// Violation counts over many traces of one mechanism.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerReport {
    pub mechanism: String,
    pub trials: u64,
    pub seed: u64,
    pub budget_claim: BudgetClaim,
    pub ir_violations: u64,
    pub wbb_violations: u64,
    pub sbb_violations: u64,
    pub min_surplus: f64,
    pub max_surplus: f64,
    pub trades: u64,
    /// Trial index and description of the first violation, if any.
    pub first_violation: Option<(u64, String)>,
}

impl LedgerReport {
    /// Whether a property the mechanism claims was violated.
    pub fn violates_claims(&self) -> bool {
        self.ir_violations > 0
            || (self.budget_claim != BudgetClaim::None && self.wbb_violations > 0)
            || (self.budget_claim == BudgetClaim::Strong && self.sbb_violations > 0)
    }
}

struct TraceCheck {
    ir: bool,
    wbb: bool,
    sbb: bool,
    surplus: f64,
    trades: u64,
    note: Option<String>,
}

/// Runs `trials` traces and checks IR, WBB and SBB on each.
pub fn run_ledger<T: Scalar>(
    mechanism: &dyn TwoSidedMechanism<T>,
    dist: &MarketDistribution<T>,
    trials: u64,
    seed: u64,
) -> Result<LedgerReport> {
    let checks = map_trials(trials, |t| {
        let draw = draw_trial(dist, seed, "ledger", t, mechanism.needs_buyer_samples())?;
        let outcome = mechanism.run(&draw.market, &draw.profile, &draw.mechanism_rng())?;
        let ir = check_ir(&draw.market, &outcome)?;
        let wbb = check_budget(&outcome, BudgetMode::Wbb);
        let sbb = check_budget(&outcome, BudgetMode::Sbb);
        let note = (!ir.ok || !wbb.pass || !sbb.pass)
            .then(|| format!("ir: {:?}, surplus: {}", ir.violations, wbb.surplus));
        Ok(TraceCheck {
            ir: ir.ok,
            wbb: wbb.pass,
            sbb: sbb.pass,
            surplus: wbb.surplus,
            trades: outcome.trades.len() as u64,
            note,
        })
    })?;
    let mut report = LedgerReport {
        mechanism: mechanism.name(),
        trials,
        seed,
        budget_claim: mechanism.guarantees().budget,
        ir_violations: 0,
        wbb_violations: 0,
        sbb_violations: 0,
        min_surplus: f64::INFINITY,
        max_surplus: f64::NEG_INFINITY,
        trades: 0,
        first_violation: None,
    };
    for (t, c) in checks.into_iter().enumerate() {
        report.ir_violations += u64::from(!c.ir);
        report.wbb_violations += u64::from(!c.wbb);
        report.sbb_violations += u64::from(!c.sbb);
        report.min_surplus = report.min_surplus.min(c.surplus);
        report.max_surplus = report.max_surplus.max(c.surplus);
        report.trades += c.trades;
        let claimed = !c.ir
            || (report.budget_claim != BudgetClaim::None && !c.wbb)
            || (report.budget_claim == BudgetClaim::Strong && !c.sbb);
        if claimed && report.first_violation.is_none() {
            report.first_violation = Some((t as u64, c.note.unwrap_or_default()));
        }
    }
    Ok(report)
}

//! Decodes a config into a market law and a mechanism and runs it.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use twosided::distribution::{
    BuyerGenerator, BuyerPrior, DistributionSpec, MarketDistribution, SellerPrior,
};
use twosided::json::{distribution_from_json, market_from_json, parse_number};
use twosided::market::MarketInstance;
use twosided::mechanisms::{
    naive_two_sided_vcg, AdjustedVcg, BlackBoxTwo, BuyerOrder, ExactVcg, InfoMode, MedianMechanism,
    NaiveVcg, OneSidedMechanism, RehearsalSelector, ReserveRehearsal, SurplusMechanism,
    TwoSidedMechanism,
};
use twosided::opt::Optimizer;
use twosided::valuations::AdjustMode;
use twosided::verify::dsic::{default_grid, dsic_probe, Coupling, Verdict};
use twosided::verify::instances::{
    grid_double_auction, lowerbound_closed_form, lowerbound_instance, xos_family,
};
use twosided::verify::ledger::{run_ledger, AgentRef};
use twosided::verify::lemmas::gain_expectations;
use twosided::verify::ratio::{estimate_ratio, exact_ratio, ratio_traces};
use twosided::verify::support::EXACT_ATOM_CAP;
use twosided::{Exact, NumericMode, Scalar};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::Report;

/// Runs one experiment in the config's numeric mode.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    match config.numeric_mode {
        NumericMode::Exact => run_typed::<Exact>(config),
        NumericMode::Float => run_typed::<f64>(config),
    }
}

fn run_typed<T: Scalar>(config: &ExperimentConfig) -> Result<Report> {
    let optimizer =
        match config.raw.get("enumeration_budget") {
            None => Optimizer::default(),
            Some(v) => Optimizer::with_budget(u128::from(v.as_u64().ok_or_else(|| {
                anyhow!("config.enumeration_budget: expected a positive integer")
            })?)),
        };
    match config.kind {
        ExperimentKind::Ratio => ratio::<T>(config, &optimizer),
        ExperimentKind::Dsic => dsic::<T>(config),
        ExperimentKind::Ledger => ledger::<T>(config),
        ExperimentKind::LemmaSuite => lemma_suite::<T>(config, &optimizer),
        ExperimentKind::LowerboundSweep => lowerbound::<T>(config, &optimizer),
        ExperimentKind::DeficitDemo => deficit::<T>(config),
    }
}

fn u64_param(v: &Value, path: &str, key: &str, default: Option<u64>) -> Result<u64> {
    match v.get(key) {
        None => default.ok_or_else(|| anyhow!("{path}.{key}: missing")),
        Some(x) => x
            .as_u64()
            .ok_or_else(|| anyhow!("{path}.{key}: expected a non-negative integer")),
    }
}

fn read_json(path: &str, field: &str) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("{field}: reading {path}"))?;
    serde_json::from_str(&text).with_context(|| format!("{field}: parsing {path}"))
}

/// The law of a single instance: every buyer fixed, every seller a point mass.
pub fn point_mass_law<T: Scalar>(market: &MarketInstance<T>) -> Result<MarketDistribution<T>> {
    let scalars = if market.items_identical() {
        Some(market.scalar_buyer_values()?)
    } else {
        None
    };
    let buyers = market
        .buyers()
        .iter()
        .enumerate()
        .map(|(i, b)| BuyerPrior {
            id: b.id.clone(),
            generator: match &scalars {
                Some(v) => BuyerGenerator::Identical(DistributionSpec::PointMass(v[i])),
                None => BuyerGenerator::Fixed(b.valuation.clone()),
            },
        })
        .collect();
    let sellers = market
        .sellers()
        .iter()
        .map(|s| SellerPrior {
            id: s.id.clone(),
            distribution: DistributionSpec::PointMass(s.value),
        })
        .collect();
    let dist = MarketDistribution {
        buyers,
        sellers,
        constraint: market.constraint().clone(),
        items_identical: market.items_identical(),
    };
    dist.validate()?;
    Ok(dist)
}

fn instance<T: Scalar>(market: &Value) -> Result<Option<MarketInstance<T>>> {
    let doc = match (market.get("instance"), market.get("instance_file")) {
        (Some(doc), _) => doc.clone(),
        (None, Some(Value::String(path))) => read_json(path, "config.market.instance_file")?,
        (None, Some(_)) => bail!("config.market.instance_file: expected a path"),
        (None, None) => return Ok(None),
    };
    Ok(Some(market_from_json(&doc, "config.market.instance")?))
}

/// Decodes `config.market` into a law over markets.
pub fn market_law<T: Scalar>(market: &Value) -> Result<MarketDistribution<T>> {
    let path = "config.market";
    if let Some(m) = instance::<T>(market)? {
        return point_mass_law(&m);
    }
    if let Some(doc) = market.get("distribution") {
        return Ok(distribution_from_json(doc, "config.market.distribution")?);
    }
    if let Some(p) = market.get("distribution_file") {
        let p = p
            .as_str()
            .ok_or_else(|| anyhow!("{path}.distribution_file: expected a path"))?;
        return Ok(distribution_from_json(
            &read_json(p, "config.market.distribution_file")?,
            "distribution",
        )?);
    }
    let family = market
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| anyhow!("{path}: expected one of family, distribution, distribution_file, instance, instance_file"))?;
    let int = |key: &str, default: Option<u64>| u64_param(market, path, key, default);
    let dist = match family {
        "lowerbound" => lowerbound_instance::<T>(u32::try_from(int("k", None)?)?)?,
        "xos" => xos_family::<T>(
            int("buyers", Some(3))? as usize,
            int("supports", Some(2))? as usize,
            int("buyer_max", Some(10))? as i64,
            int("sellers", Some(4))? as usize,
            int("seller_max", Some(5))? as i64,
        )?,
        "grid_double_auction" => grid_double_auction::<T>(
            int("n", None)? as usize,
            int("m", None)? as usize,
            int("d", Some(10))? as i64,
        )?,
        "uniform_double_auction" => {
            if T::MODE != NumericMode::Float {
                bail!("{path}.family: uniform_double_auction has continuous values; set numeric_mode to \"float\"");
            }
            let u = DistributionSpec::UniformContinuous { lo: 0.0, hi: 1.0 };
            MarketDistribution::double_auction(int("n", None)? as usize, u.clone(), int("m", None)? as usize, u)?
        }
        other => bail!(
            "{path}.family: unknown family {other:?}; expected lowerbound, xos, grid_double_auction or \
             uniform_double_auction"
        ),
    };
    Ok(dist)
}

fn order(mech: &Value) -> Result<BuyerOrder> {
    match mech.get("order").map(|v| v.as_str()) {
        None | Some(Some("index")) => Ok(BuyerOrder::Index),
        Some(Some("random")) => Ok(BuyerOrder::Random),
        _ => {
            if let Some(list) = mech.get("order").and_then(Value::as_array) {
                let perm = list
                    .iter()
                    .map(|x| x.as_u64().map(|i| i as usize))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| anyhow!("config.mechanism.order: expected buyer indices"))?;
                return Ok(BuyerOrder::Fixed(perm));
            }
            bail!("config.mechanism.order: expected \"index\", \"random\" or a permutation")
        }
    }
}

fn onesided<T: Scalar>(mech: &Value) -> Result<Box<dyn OneSidedMechanism<T>>> {
    let k = match mech.get("k") {
        None => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| anyhow!("config.mechanism.k: expected an integer"))?
                as usize,
        ),
    };
    match mech.get("onesided").and_then(Value::as_str).unwrap_or("exact_vcg") {
        "exact_vcg" => Ok(Box::new(ExactVcg::default())),
        "rehearsal" => Ok(Box::new(RehearsalSelector { order: order(mech)?, k })),
        other => bail!("config.mechanism.onesided: unknown one-sided mechanism {other:?}; expected exact_vcg or rehearsal"),
    }
}

/// Decodes `config.mechanism`. `law` supplies the prior for `median: "auto"`.
pub fn mechanism<T: Scalar>(
    mech: &Value,
    law: &MarketDistribution<T>,
) -> Result<Box<dyn TwoSidedMechanism<T>>> {
    let name = mech.get("name").and_then(Value::as_str).unwrap_or_default();
    Ok(match name {
        "adjusted_vcg" => Box::new(AdjustedVcg::default()),
        "surplus" => {
            let mode = match mech.get("mode").and_then(Value::as_str).unwrap_or("hat") {
                "hat" => AdjustMode::Hat,
                "bar" => AdjustMode::Bar,
                other => {
                    bail!("config.mechanism.mode: unknown mode {other:?}; expected hat or bar")
                }
            };
            let inner = onesided(mech)?;
            if inner.info() == InfoMode::SingleSample {
                bail!(
                    "config.mechanism.onesided: {} needs scalar buyers with samples; the surplus mechanism \
                     passes bundle valuations, use exact_vcg",
                    inner.name()
                );
            }
            Box::new(SurplusMechanism::new(inner).with_mode(mode))
        }
        "reserve_rehearsal" => Box::new(ReserveRehearsal {
            order: order(mech)?,
        }),
        "black_box_two" => Box::new(BlackBoxTwo::new(onesided(mech)?)),
        "median" => {
            let auto = || -> Result<T> {
                if law.num_sellers() != 1 {
                    bail!("config.mechanism.median: \"auto\" needs a bilateral market");
                }
                Ok(law.sellers[0].distribution.median()?)
            };
            let median = match mech.get("median") {
                None => auto()?,
                Some(Value::String(s)) if s == "auto" => auto()?,
                Some(v) => parse_number(v, "config.mechanism.median")?,
            };
            Box::new(MedianMechanism { median })
        }
        "naive_vcg" => Box::new(NaiveVcg),
        other => bail!("config.mechanism.name: unknown mechanism {other:?}"),
    })
}

fn ratio<T: Scalar>(config: &ExperimentConfig, optimizer: &Optimizer) -> Result<Report> {
    let law = market_law::<T>(&config.market)?;
    let mech = mechanism(&config.mechanism, &law)?;
    let mut report = Report::new(config, &Report::RATIO_COLUMNS);
    if config.exact {
        let exact = exact_ratio(mech.as_ref(), &law, EXACT_ATOM_CAP, optimizer)?;
        let summary = exact.report(mech.name());
        report.details = json!({
            "expected_alg_sw": exact.expected_alg.render(),
            "expected_opt_sw": exact.expected_opt.render(),
            "ratio": exact.ratio.render(),
            "atoms": exact.atoms,
        });
        report.push_ratio(&summary);
    } else if config.trace {
        report.columns = Report::TRACE_COLUMNS.to_vec();
        for r in ratio_traces(mech.as_ref(), &law, config.trials, config.seed, optimizer)? {
            report.rows.push(vec![
                json!(r.trial),
                json!(r.alg_sw),
                json!(r.opt_sw),
                json!(r.budget_surplus),
                json!(r.trades),
            ]);
        }
    } else {
        let summary = estimate_ratio(mech.as_ref(), &law, config.trials, config.seed, optimizer)?;
        report.details = serde_json::to_value(&summary)?;
        report.push_ratio(&summary);
    }
    Ok(report)
}

fn agents<T: Scalar>(
    config: &ExperimentConfig,
    law: &MarketDistribution<T>,
) -> Result<Vec<(String, AgentRef)>> {
    let all: Vec<(String, AgentRef)> = law
        .buyers
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.clone(), AgentRef::Buyer(i)))
        .chain(
            law.sellers
                .iter()
                .enumerate()
                .map(|(j, s)| (s.id.clone(), AgentRef::Seller(j))),
        )
        .collect();
    match config.raw.get("agents") {
        None => Ok(all),
        Some(Value::Array(ids)) => ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let id = id
                    .as_str()
                    .ok_or_else(|| anyhow!("config.agents[{i}]: expected an agent id"))?;
                all.iter()
                    .find(|(a, _)| a == id)
                    .cloned()
                    .ok_or_else(|| anyhow!("config.agents[{i}]: unknown agent {id:?}"))
            })
            .collect(),
        Some(_) => bail!("config.agents: expected a list of agent ids"),
    }
}

fn dsic<T: Scalar>(config: &ExperimentConfig) -> Result<Report> {
    let law = market_law::<T>(&config.market)?;
    let mech = mechanism(&config.mechanism, &law)?;
    let coupling = match config.raw.get("coupling").and_then(Value::as_str) {
        None | Some("coupled") => Coupling::Coupled,
        Some("uncoupled") => Coupling::Uncoupled,
        Some(other) => {
            bail!("config.coupling: unknown coupling {other:?}; expected coupled or uncoupled")
        }
    };
    let sigmas = match config.raw.get("sigmas") {
        None => 3.0,
        Some(v) => v
            .as_f64()
            .ok_or_else(|| anyhow!("config.sigmas: expected a number"))?,
    };
    let claims_dsic = mech.guarantees().dsic;
    let mut report = Report::new(config, &Report::DSIC_COLUMNS);
    let mut details = Vec::new();
    for (id, agent) in agents(config, &law)? {
        let grid = default_grid(&law, agent)?;
        let probe = dsic_probe(
            mech.as_ref(),
            &law,
            agent,
            &grid,
            config.trials,
            config.seed,
            coupling,
            sigmas,
        )?;
        if let Verdict::Suspicious(misreport) = &probe.verdict {
            if claims_dsic && report.violation.is_none() {
                report.violation = Some(format!(
                    "{}: {id} gains by reporting {misreport}",
                    probe.mechanism
                ));
            }
        }
        let verdict = match &probe.verdict {
            Verdict::NoProfit => "no_profit".to_string(),
            Verdict::Suspicious(m) => format!("suspicious:{m}"),
        };
        for g in &probe.gains {
            report.rows.push(vec![
                json!(probe.mechanism),
                json!(id),
                json!(g.misreport),
                json!(probe.trials),
                json!(probe.seed),
                json!(g.mean_gain),
                json!(g.std_error),
                json!(g.ci_lower),
                json!(g.ci_upper),
                json!(probe.critical_z),
                json!(verdict),
            ]);
        }
        details.push(serde_json::to_value(&probe)?);
    }
    report.details = json!({ "claims_dsic": claims_dsic, "probes": details });
    Ok(report)
}

fn ledger<T: Scalar>(config: &ExperimentConfig) -> Result<Report> {
    let law = market_law::<T>(&config.market)?;
    let mech = mechanism(&config.mechanism, &law)?;
    let l = run_ledger(mech.as_ref(), &law, config.trials, config.seed)?;
    let mut report = Report::new(config, &Report::LEDGER_COLUMNS);
    report.rows.push(vec![
        json!(l.mechanism),
        json!(l.trials),
        json!(l.seed),
        serde_json::to_value(l.budget_claim)?,
        json!(l.ir_violations),
        json!(l.wbb_violations),
        json!(l.sbb_violations),
        json!(l.min_surplus),
        json!(l.max_surplus),
        json!(l.trades),
    ]);
    if l.violates_claims() {
        report.violation = Some(format!(
            "{}: claimed property violated at trial {:?}",
            l.mechanism, l.first_violation
        ));
    }
    report.details = serde_json::to_value(&l)?;
    Ok(report)
}

fn lemma_suite<T: Scalar>(config: &ExperimentConfig, optimizer: &Optimizer) -> Result<Report> {
    let law = market_law::<T>(&config.market)?;
    let g = gain_expectations(&law, EXACT_ATOM_CAP, optimizer)?;
    let mut report = Report::new(config, &Report::LEMMA_COLUMNS);
    for (name, ineq) in [
        ("sample_adjusted_opt_vs_opt_minus_excess", g.lemma42()),
        ("alg_vs_half_sample_adjusted_opt", g.lemma43()),
    ] {
        let holds = ineq.holds();
        if !holds && report.violation.is_none() {
            report.violation = Some(format!("{name}: {} < {}", ineq.lhs, ineq.rhs));
        }
        report.rows.push(vec![
            json!(name),
            json!(ineq.lhs.to_f64()),
            json!(ineq.rhs.to_f64()),
            json!(holds),
        ]);
    }
    report.details = json!({
        "opt_gains": g.opt_gains.render(),
        "opt_max_gains": g.opt_max_gains.render(),
        "sample_excess": g.sample_excess.render(),
        "alg_gains": g.alg_gains.render(),
    });
    Ok(report)
}

fn lowerbound<T: Scalar>(config: &ExperimentConfig, optimizer: &Optimizer) -> Result<Report> {
    if config.market.get("family").and_then(Value::as_str) != Some("lowerbound") {
        bail!("config.market.family: lowerbound-sweep needs the lowerbound family");
    }
    let ks: Vec<u64> = match config.raw.get("ks") {
        None => vec![u64_param(&config.market, "config.market", "k", None)?],
        Some(v) => v
            .as_array()
            .and_then(|a| a.iter().map(Value::as_u64).collect::<Option<Vec<_>>>())
            .ok_or_else(|| anyhow!("config.ks: expected a list of positive integers"))?,
    };
    let mut report = Report::new(config, &Report::LOWERBOUND_COLUMNS);
    let mut details = Vec::new();
    for k in ks {
        let k32 = u32::try_from(k).context("config.market.k")?;
        let law = lowerbound_instance::<T>(k32)?;
        let mech = mechanism(&config.mechanism, &law)?;
        let exact = exact_ratio(mech.as_ref(), &law, EXACT_ATOM_CAP, optimizer)?;
        let closed = lowerbound_closed_form::<T>(k32);
        report.rows.push(vec![
            json!(k),
            json!(mech.name()),
            json!(exact.expected_alg.to_f64()),
            json!(exact.expected_opt.to_f64()),
            json!(exact.ratio.to_f64()),
            json!(closed.to_f64()),
            json!((exact.ratio - closed).to_f64().abs()),
        ]);
        details.push(json!({
            "k": k,
            "ratio": exact.ratio.render(),
            "closed_form": closed.render(),
            "atoms": exact.atoms,
        }));
    }
    report.details = Value::Array(details);
    Ok(report)
}

fn deficit<T: Scalar>(config: &ExperimentConfig) -> Result<Report> {
    let market = instance::<T>(&config.market)?
        .ok_or_else(|| anyhow!("config.market: deficit-demo needs an instance or instance_file"))?;
    let (outcome, surplus) = naive_two_sided_vcg(&market)?;
    let values = market.scalar_buyer_values()?;
    let mut report = Report::new(config, &Report::DEFICIT_COLUMNS);
    let winner = outcome
        .trades
        .first()
        .map(|t| market.buyers()[t.buyer].id.clone());
    report.rows.push(vec![
        json!("naive_vcg"),
        json!(market.sellers()[0].value.to_f64()),
        json!(values
            .iter()
            .map(|v| v.render())
            .collect::<Vec<_>>()
            .join(";")),
        json!(winner.unwrap_or_default()),
        json!(outcome.buyer_payments.iter().copied().sum::<T>().to_f64()),
        json!(outcome.seller_payments.iter().copied().sum::<T>().to_f64()),
        json!(surplus.to_f64()),
    ]);
    report.details = json!({
        "budget_surplus": surplus.render(),
        "outcome": twosided::json::outcome_to_json(&market, &outcome),
    });
    Ok(report)
}

//! JSON documents for markets, distributions, sample profiles and outcomes.
//!
//! Every document carries `"numeric_mode"`. In exact mode numbers are written
//! as strings (`"1/3"`, `"5"`); in float mode as JSON numbers. Readers accept
//! both spellings. Subsets in tables are keyed by the comma-joined ids of
//! their sellers in market order, with `""` for the empty set. Agents are
//! referred to by id.
//!
//! ```json
//! {
//!   "numeric_mode": "exact",
//!   "buyers": [{"id": "b1", "valuation": {"class": "additive", "weights": ["3", "1"]}}],
//!   "sellers": [{"id": "s1", "value": "1"}, {"id": "s2", "value": "1/2"}],
//!   "constraint": {"kind": "k_uniform", "k": 1},
//!   "items_identical": false
//! }
//! ```

use serde_json::{json, Map, Value};

use crate::distribution::{
    BuyerGenerator, BuyerPrior, DistributionSpec, MarketDistribution, SampleProfile, SellerPrior,
};
use crate::error::{MarketError, Result};
use crate::market::{BuyerSpec, MarketInstance, Outcome, SellerSpec};
use crate::opt::{ConstraintKind, ConstraintSystem};
use crate::scalar::{NumericMode, Scalar};
use crate::set::{AgentSet, SellerSet};
use crate::valuations::{SetTable, ValuationOracle};

fn err(path: &str, msg: impl std::fmt::Display) -> MarketError {
    MarketError::InvalidInput(format!("{path}: {msg}"))
}

fn field<'v>(v: &'v Value, path: &str, key: &str) -> Result<&'v Value> {
    v.get(key)
        .ok_or_else(|| err(path, format!("missing field `{key}`")))
}

fn str_field<'v>(v: &'v Value, path: &str, key: &str) -> Result<&'v str> {
    field(v, path, key)?
        .as_str()
        .ok_or_else(|| err(&format!("{path}.{key}"), "expected a string"))
}

fn uint_field(v: &Value, path: &str, key: &str) -> Result<u64> {
    field(v, path, key)?
        .as_u64()
        .ok_or_else(|| err(&format!("{path}.{key}"), "expected a non-negative integer"))
}

fn f64_field(v: &Value, path: &str, key: &str) -> Result<f64> {
    let x = field(v, path, key)?;
    match x {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => f64::parse_str(s).ok(),
        _ => None,
    }
    .ok_or_else(|| err(&format!("{path}.{key}"), "expected a number"))
}

fn array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

/// Writes a number in the document's numeric mode.
pub fn number<T: Scalar>(x: T) -> Value {
    match T::MODE {
        NumericMode::Exact => Value::String(x.render()),
        NumericMode::Float => json!(x.to_f64()),
    }
}

pub fn parse_number<T: Scalar>(v: &Value, path: &str) -> Result<T> {
    match v {
        Value::String(s) => T::parse_str(s).map_err(|e| err(path, e)),
        Value::Number(n) => T::parse_str(&n.to_string()).map_err(|e| err(path, e)),
        _ => Err(err(path, "expected a number or a numeric string")),
    }
}

fn numbers<T: Scalar>(v: &Value, path: &str) -> Result<Vec<T>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| parse_number(x, &format!("{path}[{i}]")))
        .collect()
}

/// Fails unless `doc["numeric_mode"]`, when present, matches `T`.
pub fn check_mode<T: Scalar>(doc: &Value, path: &str) -> Result<()> {
    match doc.get("numeric_mode") {
        None => Ok(()),
        Some(Value::String(s)) if s == &T::MODE.to_string() => Ok(()),
        Some(other) => Err(err(
            &format!("{path}.numeric_mode"),
            format!("document is {other}, reader expects \"{}\"", T::MODE),
        )),
    }
}

/// Reads `doc["numeric_mode"]`, defaulting to exact.
pub fn numeric_mode(doc: &Value) -> Result<NumericMode> {
    match doc.get("numeric_mode") {
        None => Ok(NumericMode::Exact),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| err("numeric_mode", e)),
    }
}

fn ids_of(set: AgentSet, ids: &[String]) -> Value {
    Value::Array(set.iter().map(|i| Value::String(ids[i].clone())).collect())
}

fn set_of(v: &Value, path: &str, ids: &[String]) -> Result<AgentSet> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let p = format!("{path}[{i}]");
            let id = x.as_str().ok_or_else(|| err(&p, "expected an id"))?;
            ids.iter()
                .position(|k| k == id)
                .ok_or_else(|| err(&p, format!("unknown id {id:?}")))
        })
        .collect()
}

pub fn constraint_to_json(cs: &ConstraintSystem, buyer_ids: &[String]) -> Value {
    let mut v = match &cs.kind {
        ConstraintKind::Unconstrained => json!({"kind": "unconstrained"}),
        ConstraintKind::KUniform(k) => json!({"kind": "k_uniform", "k": k}),
        ConstraintKind::Explicit(sets) => json!({
            "kind": "explicit",
            "maximal_sets": sets.iter().map(|&s| ids_of(s, buyer_ids)).collect::<Vec<_>>(),
        }),
    };
    if let Some(inner) = &cs.intersect {
        v["intersect"] = constraint_to_json(inner, buyer_ids);
    }
    v
}

pub fn constraint_from_json(
    v: &Value,
    path: &str,
    buyer_ids: &[String],
) -> Result<ConstraintSystem> {
    let own = match str_field(v, path, "kind")? {
        "unconstrained" => ConstraintSystem::unconstrained(),
        "k_uniform" => ConstraintSystem::k_uniform(uint_field(v, path, "k")? as usize),
        "explicit" => {
            let p = format!("{path}.maximal_sets");
            let sets = array(field(v, path, "maximal_sets")?, &p)?
                .iter()
                .enumerate()
                .map(|(i, s)| set_of(s, &format!("{p}[{i}]"), buyer_ids))
                .collect::<Result<Vec<_>>>()?;
            ConstraintSystem::explicit(sets)
        }
        other => {
            return Err(err(
                &format!("{path}.kind"),
                format!("unknown constraint kind {other:?}"),
            ))
        }
    };
    match v.get("intersect") {
        Some(inner) => Ok(own.intersect(constraint_from_json(
            inner,
            &format!("{path}.intersect"),
            buyer_ids,
        )?)),
        None => Ok(own),
    }
}

fn subset_key(set: SellerSet, seller_ids: &[String]) -> String {
    set.iter()
        .map(|s| seller_ids[s].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn valuation_to_json<T: Scalar>(v: &ValuationOracle<T>, seller_ids: &[String]) -> Value {
    let list = |w: &[T]| Value::Array(w.iter().map(|&x| number(x)).collect());
    match v {
        ValuationOracle::Additive(w) => json!({"class": "additive", "weights": list(w)}),
        ValuationOracle::UnitDemand(w) => json!({"class": "unit_demand", "weights": list(w)}),
        ValuationOracle::Xos(supports) => json!({
            "class": "xos",
            "supports": supports.iter().map(|a| list(a)).collect::<Vec<_>>(),
        }),
        ValuationOracle::ExplicitSubadditive(table) => {
            let mut map = Map::new();
            for s in SellerSet::full(table.items()).subsets() {
                map.insert(subset_key(s, seller_ids), number(table.get(s)));
            }
            json!({"class": "explicit_subadditive", "table": map})
        }
    }
}

pub fn valuation_from_json<T: Scalar>(
    v: &Value,
    path: &str,
    seller_ids: &[String],
) -> Result<ValuationOracle<T>> {
    let weights = |key: &str| numbers::<T>(field(v, path, key)?, &format!("{path}.{key}"));
    match str_field(v, path, "class")? {
        "additive" => Ok(ValuationOracle::Additive(weights("weights")?)),
        "unit_demand" => Ok(ValuationOracle::UnitDemand(weights("weights")?)),
        "xos" => {
            let p = format!("{path}.supports");
            let supports = array(field(v, path, "supports")?, &p)?
                .iter()
                .enumerate()
                .map(|(i, a)| numbers(a, &format!("{p}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(ValuationOracle::Xos(supports))
        }
        "explicit_subadditive" => {
            let p = format!("{path}.table");
            let map = field(v, path, "table")?
                .as_object()
                .ok_or_else(|| err(&p, "expected an object keyed by subsets"))?;
            let m = seller_ids.len();
            let mut values: Vec<Option<T>> = vec![None; 1 << m.min(crate::valuations::TABLE_CAP)];
            for (key, x) in map {
                let kp = format!("{p}[{key:?}]");
                let set: SellerSet = if key.is_empty() {
                    SellerSet::EMPTY
                } else {
                    key.split(',')
                        .map(|id| {
                            seller_ids
                                .iter()
                                .position(|s| s == id.trim())
                                .ok_or_else(|| err(&kp, format!("unknown seller {id:?}")))
                        })
                        .collect::<Result<_>>()?
                };
                values[set.bits() as usize] = Some(parse_number(x, &kp)?);
            }
            let table =
                SetTable::from_fn(m, |s| values[s.bits() as usize].unwrap_or_else(T::zero))?;
            if let Some(missing) = values.iter().position(Option::is_none) {
                return Err(err(
                    &p,
                    format!(
                        "no value for subset {:?}",
                        subset_key(SellerSet::from_bits(missing as u64), seller_ids)
                    ),
                ));
            }
            Ok(ValuationOracle::ExplicitSubadditive(table))
        }
        other => Err(err(
            &format!("{path}.class"),
            format!("unknown valuation class {other:?}"),
        )),
    }
}

fn ids(list: &[Value], path: &str) -> Result<Vec<String>> {
    list.iter()
        .enumerate()
        .map(|(i, a)| Ok(str_field(a, &format!("{path}[{i}]"), "id")?.to_string()))
        .collect()
}

pub fn market_to_json<T: Scalar>(market: &MarketInstance<T>) -> Value {
    let seller_ids: Vec<String> = market.sellers().iter().map(|s| s.id.clone()).collect();
    let buyer_ids: Vec<String> = market.buyers().iter().map(|b| b.id.clone()).collect();
    json!({
        "numeric_mode": T::MODE,
        "buyers": market.buyers().iter().map(|b| json!({
            "id": b.id,
            "valuation": valuation_to_json(&b.valuation, &seller_ids),
        })).collect::<Vec<_>>(),
        "sellers": market.sellers().iter().map(|s| json!({"id": s.id, "value": number(s.value)})).collect::<Vec<_>>(),
        "constraint": constraint_to_json(market.constraint(), &buyer_ids),
        "items_identical": market.items_identical(),
    })
}

pub fn market_from_json<T: Scalar>(doc: &Value, path: &str) -> Result<MarketInstance<T>> {
    check_mode::<T>(doc, path)?;
    let bp = format!("{path}.buyers");
    let sp = format!("{path}.sellers");
    let buyers_v = array(field(doc, path, "buyers")?, &bp)?;
    let sellers_v = array(field(doc, path, "sellers")?, &sp)?;
    let seller_ids = ids(sellers_v, &sp)?;
    let buyer_ids = ids(buyers_v, &bp)?;
    let buyers = buyers_v
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let p = format!("{bp}[{i}]");
            Ok(BuyerSpec {
                id: buyer_ids[i].clone(),
                valuation: valuation_from_json(
                    field(b, &p, "valuation")?,
                    &format!("{p}.valuation"),
                    &seller_ids,
                )?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sellers = sellers_v
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let p = format!("{sp}[{j}]");
            Ok(SellerSpec {
                id: seller_ids[j].clone(),
                value: parse_number(field(s, &p, "value")?, &format!("{p}.value"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let constraint = match doc.get("constraint") {
        Some(c) => constraint_from_json(c, &format!("{path}.constraint"), &buyer_ids)?,
        None => ConstraintSystem::unconstrained(),
    };
    let identical = doc
        .get("items_identical")
        .and_then(Value::as_bool)
        .unwrap_or(false);
    MarketInstance::new(buyers, sellers, constraint, identical).map_err(|e| err(path, e))
}

pub fn distribution_spec_to_json<T: Scalar>(d: &DistributionSpec<T>) -> Value {
    match d {
        DistributionSpec::PointMass(x) => json!({"kind": "point_mass", "value": number(*x)}),
        DistributionSpec::UniformDiscrete(atoms) => json!({
            "kind": "uniform_discrete",
            "atoms": atoms.iter().map(|&x| number(x)).collect::<Vec<_>>(),
        }),
        DistributionSpec::UniformContinuous { lo, hi } => {
            json!({"kind": "uniform_continuous", "lo": lo, "hi": hi})
        }
        DistributionSpec::GeometricAtoms { base, count } => {
            json!({"kind": "geometric_atoms", "base": number(*base), "count": count})
        }
    }
}

pub fn distribution_spec_from_json<T: Scalar>(
    v: &Value,
    path: &str,
) -> Result<DistributionSpec<T>> {
    let d = match str_field(v, path, "kind")? {
        "point_mass" => DistributionSpec::PointMass(parse_number(
            field(v, path, "value")?,
            &format!("{path}.value"),
        )?),
        "uniform_discrete" => DistributionSpec::UniformDiscrete(numbers(
            field(v, path, "atoms")?,
            &format!("{path}.atoms"),
        )?),
        "uniform_continuous" => DistributionSpec::UniformContinuous {
            lo: f64_field(v, path, "lo")?,
            hi: f64_field(v, path, "hi")?,
        },
        "geometric_atoms" => DistributionSpec::GeometricAtoms {
            base: parse_number(field(v, path, "base")?, &format!("{path}.base"))?,
            count: u32::try_from(uint_field(v, path, "count")?)
                .map_err(|e| err(&format!("{path}.count"), e))?,
        },
        other => {
            return Err(err(
                &format!("{path}.kind"),
                format!("unknown distribution kind {other:?}"),
            ))
        }
    };
    d.validate().map_err(|e| err(path, e))?;
    Ok(d)
}

pub fn generator_to_json<T: Scalar>(g: &BuyerGenerator<T>, seller_ids: &[String]) -> Value {
    match g {
        BuyerGenerator::Fixed(v) => {
            json!({"kind": "fixed", "valuation": valuation_to_json(v, seller_ids)})
        }
        BuyerGenerator::Choice(vs) => json!({
            "kind": "choice",
            "valuations": vs.iter().map(|v| valuation_to_json(v, seller_ids)).collect::<Vec<_>>(),
        }),
        BuyerGenerator::Additive(d) => {
            json!({"kind": "additive", "weights": distribution_spec_to_json(d)})
        }
        BuyerGenerator::UnitDemand(d) => {
            json!({"kind": "unit_demand", "weights": distribution_spec_to_json(d)})
        }
        BuyerGenerator::Xos { supports, weights } => {
            json!({"kind": "xos", "supports": supports, "weights": distribution_spec_to_json(weights)})
        }
        BuyerGenerator::Identical(d) => {
            json!({"kind": "identical", "value": distribution_spec_to_json(d)})
        }
    }
}

pub fn generator_from_json<T: Scalar>(
    v: &Value,
    path: &str,
    seller_ids: &[String],
) -> Result<BuyerGenerator<T>> {
    let spec = |key: &str| {
        distribution_spec_from_json::<T>(field(v, path, key)?, &format!("{path}.{key}"))
    };
    Ok(match str_field(v, path, "kind")? {
        "fixed" => BuyerGenerator::Fixed(valuation_from_json(
            field(v, path, "valuation")?,
            &format!("{path}.valuation"),
            seller_ids,
        )?),
        "choice" => {
            let p = format!("{path}.valuations");
            BuyerGenerator::Choice(
                array(field(v, path, "valuations")?, &p)?
                    .iter()
                    .enumerate()
                    .map(|(i, x)| valuation_from_json(x, &format!("{p}[{i}]"), seller_ids))
                    .collect::<Result<_>>()?,
            )
        }
        "additive" => BuyerGenerator::Additive(spec("weights")?),
        "unit_demand" => BuyerGenerator::UnitDemand(spec("weights")?),
        "xos" => BuyerGenerator::Xos {
            supports: uint_field(v, path, "supports")? as usize,
            weights: spec("weights")?,
        },
        "identical" => BuyerGenerator::Identical(spec("value")?),
        other => {
            return Err(err(
                &format!("{path}.kind"),
                format!("unknown generator kind {other:?}"),
            ))
        }
    })
}

pub fn distribution_to_json<T: Scalar>(dist: &MarketDistribution<T>) -> Value {
    let seller_ids: Vec<String> = dist.sellers.iter().map(|s| s.id.clone()).collect();
    let buyer_ids: Vec<String> = dist.buyers.iter().map(|b| b.id.clone()).collect();
    json!({
        "numeric_mode": T::MODE,
        "buyers": dist.buyers.iter().map(|b| json!({
            "id": b.id,
            "generator": generator_to_json(&b.generator, &seller_ids),
        })).collect::<Vec<_>>(),
        "sellers": dist.sellers.iter().map(|s| json!({
            "id": s.id,
            "distribution": distribution_spec_to_json(&s.distribution),
        })).collect::<Vec<_>>(),
        "constraint": constraint_to_json(&dist.constraint, &buyer_ids),
        "items_identical": dist.items_identical,
    })
}

pub fn distribution_from_json<T: Scalar>(doc: &Value, path: &str) -> Result<MarketDistribution<T>> {
    check_mode::<T>(doc, path)?;
    let bp = format!("{path}.buyers");
    let sp = format!("{path}.sellers");
    let buyers_v = array(field(doc, path, "buyers")?, &bp)?;
    let sellers_v = array(field(doc, path, "sellers")?, &sp)?;
    let seller_ids = ids(sellers_v, &sp)?;
    let buyer_ids = ids(buyers_v, &bp)?;
    let buyers = buyers_v
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let p = format!("{bp}[{i}]");
            Ok(BuyerPrior {
                id: buyer_ids[i].clone(),
                generator: generator_from_json(
                    field(b, &p, "generator")?,
                    &format!("{p}.generator"),
                    &seller_ids,
                )?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sellers = sellers_v
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let p = format!("{sp}[{j}]");
            Ok(SellerPrior {
                id: seller_ids[j].clone(),
                distribution: distribution_spec_from_json(
                    field(s, &p, "distribution")?,
                    &format!("{p}.distribution"),
                )?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let constraint = match doc.get("constraint") {
        Some(c) => constraint_from_json(c, &format!("{path}.constraint"), &buyer_ids)?,
        None => ConstraintSystem::unconstrained(),
    };
    let identical = doc
        .get("items_identical")
        .and_then(Value::as_bool)
        .unwrap_or_else(|| {
            buyers
                .iter()
                .all(|b| matches!(b.generator, BuyerGenerator::Identical(_)))
        });
    let dist = MarketDistribution {
        buyers,
        sellers,
        constraint,
        items_identical: identical,
    };
    dist.validate().map_err(|e| err(path, e))?;
    Ok(dist)
}

fn keyed<T: Scalar>(ids: &[String], xs: &[T]) -> Value {
    Value::Object(
        ids.iter()
            .cloned()
            .zip(xs.iter().map(|&x| number(x)))
            .collect(),
    )
}

fn unkeyed<T: Scalar>(v: &Value, path: &str, ids: &[String]) -> Result<Vec<T>> {
    let map = v
        .as_object()
        .ok_or_else(|| err(path, "expected an object keyed by id"))?;
    ids.iter()
        .map(|id| {
            let p = format!("{path}.{id}");
            parse_number(map.get(id).ok_or_else(|| err(&p, "missing"))?, &p)
        })
        .collect()
}

pub fn profile_to_json<T: Scalar>(
    profile: &SampleProfile<T>,
    buyer_ids: &[String],
    seller_ids: &[String],
) -> Value {
    json!({
        "numeric_mode": T::MODE,
        "seller_samples": keyed(seller_ids, &profile.seller_samples),
        "buyer_samples": profile.buyer_samples.as_ref().map(|b| keyed(buyer_ids, b)),
        "seed_record": profile.seed_record,
    })
}

pub fn profile_from_json<T: Scalar>(
    doc: &Value,
    path: &str,
    buyer_ids: &[String],
    seller_ids: &[String],
) -> Result<SampleProfile<T>> {
    check_mode::<T>(doc, path)?;
    let seller_samples = unkeyed(
        field(doc, path, "seller_samples")?,
        &format!("{path}.seller_samples"),
        seller_ids,
    )?;
    let buyer_samples = match doc.get("buyer_samples") {
        None | Some(Value::Null) => None,
        Some(v) => Some(unkeyed(v, &format!("{path}.buyer_samples"), buyer_ids)?),
    };
    let seed_record = match doc.get("seed_record") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            serde_json::from_value(v.clone())
                .map_err(|e| err(&format!("{path}.seed_record"), e))?,
        ),
    };
    Ok(SampleProfile {
        seller_samples,
        buyer_samples,
        seed_record,
    })
}

pub fn outcome_to_json<T: Scalar>(market: &MarketInstance<T>, outcome: &Outcome<T>) -> Value {
    let seller_ids: Vec<String> = market.sellers().iter().map(|s| s.id.clone()).collect();
    let buyer_ids: Vec<String> = market.buyers().iter().map(|b| b.id.clone()).collect();
    json!({
        "numeric_mode": T::MODE,
        "allocation": Value::Object(buyer_ids.iter().cloned().zip(
            outcome.allocation.iter().map(|&s| ids_of(s, &seller_ids))).collect()),
        "buyer_payments": keyed(&buyer_ids, &outcome.buyer_payments),
        "seller_payments": keyed(&seller_ids, &outcome.seller_payments),
        "unsold": ids_of(outcome.unsold(), &seller_ids),
        "trades": outcome.trades.iter().map(|t| json!({
            "buyer": buyer_ids[t.buyer],
            "seller": seller_ids[t.seller],
            "price": number(t.price),
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use crate::set::BuyerSet;
    use crate::verify::instances::{
        default_xos_family, lowerbound_instance, uniform_double_auction,
    };

    fn ex(n: i64) -> Exact {
        Exact::from_int(n)
    }

    #[test]
    fn market_round_trip() {
        let table =
            SetTable::from_values(2, vec![ex(0), ex(2), ex(1), Exact::from_frac(5, 2)]).unwrap();
        let market = MarketInstance::new(
            vec![
                BuyerSpec {
                    id: "x".into(),
                    valuation: ValuationOracle::ExplicitSubadditive(table),
                },
                BuyerSpec {
                    id: "y".into(),
                    valuation: ValuationOracle::Xos(vec![
                        vec![ex(3), ex(0)],
                        vec![ex(1), Exact::from_frac(1, 3)],
                    ]),
                },
            ],
            vec![
                SellerSpec {
                    id: "s1".into(),
                    value: ex(1),
                },
                SellerSpec {
                    id: "s2".into(),
                    value: ex(0),
                },
            ],
            ConstraintSystem::explicit(vec![BuyerSet::from_indices([0, 1])])
                .intersect(ConstraintSystem::k_uniform(1)),
            false,
        )
        .unwrap();
        let doc = market_to_json(&market);
        assert_eq!(doc["numeric_mode"], "exact");
        assert_eq!(doc["buyers"][0]["valuation"]["table"]["s1,s2"], "5/2");
        assert_eq!(doc["buyers"][1]["valuation"]["supports"][1][1], "1/3");
        let back: MarketInstance<Exact> = market_from_json(&doc, "market").unwrap();
        assert_eq!(back, market);
        assert!(market_from_json::<f64>(&doc, "market").is_err());
    }

    #[test]
    fn distribution_round_trip() {
        let d = default_xos_family::<Exact>().unwrap();
        assert_eq!(
            distribution_from_json::<Exact>(&distribution_to_json(&d), "d").unwrap(),
            d
        );
        let d = lowerbound_instance::<Exact>(5).unwrap();
        assert_eq!(
            distribution_from_json::<Exact>(&distribution_to_json(&d), "d").unwrap(),
            d
        );
        let f = uniform_double_auction(3, 2).unwrap();
        let doc = distribution_to_json(&f);
        assert_eq!(doc["numeric_mode"], "float");
        assert_eq!(distribution_from_json::<f64>(&doc, "d").unwrap(), f);
    }

    #[test]
    fn errors_name_the_field() {
        let doc = json!({"buyers": [{"id": "b1", "valuation": {"class": "additive", "weights": ["x"]}}],
                         "sellers": [{"id": "s1", "value": "1"}]});
        let e = market_from_json::<Exact>(&doc, "market")
            .unwrap_err()
            .to_string();
        assert!(e.contains("market.buyers[0].valuation.weights[0]"), "{e}");
        let doc = json!({"buyers": [], "sellers": [{"id": "s1", "distribution": {"kind": "geometric_atoms", "base": "2", "count": 3}}]});
        let e = distribution_from_json::<Exact>(&doc, "d")
            .unwrap_err()
            .to_string();
        assert!(e.contains("d.sellers[0].distribution"), "{e}");
    }

    #[test]
    fn profile_and_outcome_documents() {
        let ids_b = vec!["b1".to_string()];
        let ids_s = vec!["s1".to_string(), "s2".to_string()];
        let p = SampleProfile::fixed(vec![ex(1), Exact::from_frac(1, 2)], Some(vec![ex(3)]));
        let doc = profile_to_json(&p, &ids_b, &ids_s);
        assert_eq!(doc["seller_samples"]["s2"], "1/2");
        assert_eq!(
            profile_from_json::<Exact>(&doc, "p", &ids_b, &ids_s).unwrap(),
            p
        );

        let market = MarketInstance::bilateral(ex(1), ex(5)).unwrap();
        let mut out = Outcome::no_trade(1, 1);
        out.assign(0, 0, ex(2));
        out.buyer_payments[0] = ex(2);
        let doc = outcome_to_json(&market, &out);
        assert_eq!(doc["allocation"]["b1"], json!(["s1"]));
        assert_eq!(doc["unsold"], json!([]));
        assert_eq!(doc["trades"][0]["price"], "2");
    }
}

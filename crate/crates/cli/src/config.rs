//! Experiment configs: one JSON document per experiment.
//!
//! ```json
//! {
//!   "kind": "ratio",
//!   "mechanism": {"name": "adjusted_vcg"},
//!   "market": {"family": "lowerbound", "k": 20},
//!   "numeric_mode": "exact",
//!   "exact": true,
//!   "trials": 1,
//!   "seed": 7,
//!   "output": {"path": "ratio.json", "format": "json"}
//! }
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;

use twosided::NumericMode;

pub const SEED_ENV: &str = "MASTER_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Ratio,
    Dsic,
    Ledger,
    LemmaSuite,
    LowerboundSweep,
    DeficitDemo,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ratio" => ExperimentKind::Ratio,
            "dsic" => ExperimentKind::Dsic,
            "ledger" => ExperimentKind::Ledger,
            "lemma-suite" => ExperimentKind::LemmaSuite,
            "lowerbound-sweep" => ExperimentKind::LowerboundSweep,
            "deficit-demo" => ExperimentKind::DeficitDemo,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Ratio => "ratio",
            ExperimentKind::Dsic => "dsic",
            ExperimentKind::Ledger => "ledger",
            ExperimentKind::LemmaSuite => "lemma-suite",
            ExperimentKind::LowerboundSweep => "lowerbound-sweep",
            ExperimentKind::DeficitDemo => "deficit-demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

pub const MECHANISMS: [&str; 6] = [
    "adjusted_vcg",
    "surplus",
    "reserve_rehearsal",
    "black_box_two",
    "median",
    "naive_vcg",
];

pub const SWEEPABLE: [&str; 4] = ["k", "n", "m", "trials"];

/// A validated config. `mechanism` and `market` stay as JSON and are decoded
/// per numeric mode when the experiment runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub mechanism: Value,
    pub market: Value,
    pub trials: u64,
    pub seed: u64,
    pub numeric_mode: NumericMode,
    pub exact: bool,
    pub trace: bool,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// The document as read, echoed into JSON reports.
    pub raw: Value,
}

fn at(path: &str, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("config.{path}: {msg}")
}

fn opt_bool(doc: &Value, key: &str) -> Result<bool> {
    match doc.get(key) {
        None => Ok(false),
        Some(v) => v.as_bool().ok_or_else(|| at(key, "expected true or false")),
    }
}

fn positive(doc: &Value, key: &str) -> Result<Option<u64>> {
    match doc.get(key) {
        None => Ok(None),
        Some(v) => match v.as_u64() {
            Some(x) if x >= 1 => Ok(Some(x)),
            _ => Err(at(key, "expected a positive integer")),
        },
    }
}

impl ExperimentConfig {
    /// Validates a config document. Relative file paths inside `market` and
    /// `output` are resolved against `base`.
    pub fn from_json(mut doc: Value, base: Option<&Path>) -> Result<Self> {
        if !doc.is_object() {
            bail!("config: expected a JSON object");
        }
        let kind_str = doc
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| at("kind", "missing experiment kind"))?;
        let kind = ExperimentKind::parse(kind_str).ok_or_else(|| {
            at(
                "kind",
                format!(
                    "unknown experiment kind {kind_str:?}; expected one of ratio, dsic, ledger, lemma-suite, \
                     lowerbound-sweep, deficit-demo"
                ),
            )
        })?;

        let mechanism = match doc.get("mechanism") {
            Some(Value::String(name)) => serde_json::json!({ "name": name }),
            Some(v @ Value::Object(_)) => v.clone(),
            Some(_) => return Err(at("mechanism", "expected a name or an object with a name")),
            None => match kind {
                ExperimentKind::LowerboundSweep | ExperimentKind::LemmaSuite => {
                    serde_json::json!({ "name": "adjusted_vcg" })
                }
                ExperimentKind::DeficitDemo => serde_json::json!({ "name": "naive_vcg" }),
                _ => return Err(at("mechanism", "missing")),
            },
        };
        let name = mechanism
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| at("mechanism.name", "missing"))?;
        if !MECHANISMS.contains(&name) {
            return Err(at(
                "mechanism.name",
                format!(
                    "unknown mechanism {name:?}; expected one of {}",
                    MECHANISMS.join(", ")
                ),
            ));
        }

        if let (Some(base), Some(market)) = (base, doc.get_mut("market")) {
            for key in ["distribution_file", "instance_file"] {
                if let Some(Value::String(p)) = market.get_mut(key) {
                    let resolved = base.join(&*p);
                    *p = resolved.to_string_lossy().into_owned();
                }
            }
        }
        let market = match doc.get("market") {
            Some(v @ Value::Object(_)) => v.clone(),
            Some(_) => return Err(at("market", "expected an object")),
            None if kind == ExperimentKind::DeficitDemo => serde_json::json!({
                "instance": {"sellers": [{"id": "s1", "value": "1"}],
                             "buyers": [{"id": "b1", "valuation": {"class": "unit_demand", "weights": ["10"]}},
                                        {"id": "b2", "valuation": {"class": "unit_demand", "weights": ["5"]}}],
                             "items_identical": true}
            }),
            None => return Err(at("market", "missing")),
        };

        let trials = positive(&doc, "trials")?.unwrap_or(1);
        let seed = match doc.get("seed") {
            Some(v) => v
                .as_u64()
                .ok_or_else(|| at("seed", "expected a non-negative integer"))?,
            None => bail!("config.seed: missing; every experiment needs an explicit seed"),
        };
        let numeric_mode = match doc.get("numeric_mode") {
            None => NumericMode::Exact,
            Some(v) => match v.as_str() {
                Some("exact") => NumericMode::Exact,
                Some("float") => NumericMode::Float,
                _ => return Err(at("numeric_mode", "expected \"exact\" or \"float\"")),
            },
        };
        let exact = opt_bool(&doc, "exact")?;
        let trace = opt_bool(&doc, "trace")?;
        if exact && trace {
            return Err(at(
                "trace",
                "trace mode needs sampled trials, not exact enumeration",
            ));
        }
        let (output, format) = match doc.get("output") {
            None => (None, Format::Json),
            Some(o) => {
                let path = match o.get("path") {
                    None => None,
                    Some(p) => {
                        let p = PathBuf::from(
                            p.as_str()
                                .ok_or_else(|| at("output.path", "expected a string"))?,
                        );
                        Some(match base {
                            Some(b) if p.is_relative() => b.join(p),
                            _ => p,
                        })
                    }
                };
                let format = match o.get("format") {
                    None => Format::Json,
                    Some(f) => f
                        .as_str()
                        .and_then(Format::parse)
                        .ok_or_else(|| at("output.format", "expected \"json\" or \"csv\""))?,
                };
                (path, format)
            }
        };
        Ok(ExperimentConfig {
            kind,
            mechanism,
            market,
            trials,
            seed,
            numeric_mode,
            exact,
            trace,
            output,
            format,
            raw: doc,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Self::from_json(doc, path.parent())
    }

    /// Applies `MASTER_SEED` from the environment, if set.
    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Ok(s) = std::env::var(SEED_ENV) {
            let seed = s
                .trim()
                .parse()
                .map_err(|_| anyhow!("{SEED_ENV}={s:?} is not a non-negative integer"))?;
            self.set_seed(seed);
        }
        Ok(())
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.raw["seed"] = seed.into();
    }

    /// Sets a sweepable parameter: `trials` on the config, `k`, `n`, `m` on
    /// the market family.
    pub fn set_param(&mut self, param: &str, value: u64) -> Result<()> {
        if param == "trials" {
            if value == 0 {
                bail!("trials must be positive");
            }
            self.trials = value;
            self.raw["trials"] = value.into();
            return Ok(());
        }
        if !SWEEPABLE.contains(&param) {
            bail!(
                "parameter {param:?} is not sweepable; expected one of {}",
                SWEEPABLE.join(", ")
            );
        }
        let family = self
            .market
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| anyhow!("sweeping {param} needs a market family"))?;
        let key = match (family, param) {
            ("lowerbound", "k") => "k",
            ("uniform_double_auction" | "grid_double_auction", "n" | "m") => param,
            ("xos", "n") => "buyers",
            ("xos", "m") => "sellers",
            _ => bail!("market family {family:?} has no parameter {param}"),
        };
        self.market[key] = value.into();
        self.raw["market"][key] = value.into();
        Ok(())
    }
}

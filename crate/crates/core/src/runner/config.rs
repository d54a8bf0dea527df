//! Flat `key = value` experiment files with dotted sections.
//!
//! ```text
//! # breiman.conf
//! scenario = breiman
//! x_law.kind = uniform01
//! y_law.kind = pareto
//! y_law.beta = 0.5
//! n = 10000
//! reps = 20000
//! seed = 20240601
//! tolerances.cutoff = 1e-4
//! ```
//!
//! Blank lines and text after `#` are ignored. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::distributions::{make_weight_law, MultiplierKind, MultiplierLaw, WeightKind, WeightLaw};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub ks_tol: f64,
    pub quad_tol: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSection {
    /// Any of `tn`, `pair`, `limit_pair`, `max_share`, `divergence`.
    pub products: Vec<String>,
    pub eps_list: Vec<f64>,
    pub n_list: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSection {
    /// Defaults to the Pareto index of `y_law`.
    pub beta: Option<f64>,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnoseSection {
    pub decade_lo: i32,
    pub decade_hi: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevySection {
    pub n_list: Vec<u64>,
    pub draws: usize,
    pub h_list: Vec<f64>,
    pub alpha: f64,
    pub k_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub x_law: WeightKind,
    pub y_law: MultiplierKind,
    pub y_scale: f64,
    pub n: u64,
    pub reps: usize,
    pub seed: u64,
    #[serde(skip)]
    pub outputs: PathBuf,
    pub tolerances: Tolerances,
    pub simulate: SimulateSection,
    pub limit: LimitSection,
    pub diagnose: DiagnoseSection,
    pub levy: LevySection,
}

const PRODUCTS: [&str; 5] = ["tn", "pair", "limit_pair", "max_share", "divergence"];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(_, v)| v)
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| LabError::Config(format!("field `{key}`: cannot parse `{s}`"))),
        }
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.take(key) {
            None => Ok(default),
            Some(s) => s
                .split(',')
                .map(|p| p.trim())
                .filter(|p| !p.is_empty())
                .map(|p| {
                    p.parse()
                        .map_err(|_| LabError::Config(format!("field `{key}`: cannot parse `{p}`")))
                })
                .collect(),
        }
    }

    /// Gather `prefix.*` into a JSON object, numbers where they parse.
    fn section(&mut self, prefix: &str) -> Map<String, Value> {
        let dotted = format!("{prefix}.");
        let keys: Vec<String> = self
            .map
            .keys()
            .filter(|k| k.starts_with(&dotted))
            .cloned()
            .collect();
        let mut obj = Map::new();
        for k in keys {
            let v = self.take(&k).unwrap_or_default();
            let field = k[dotted.len()..].to_string();
            let value = match v.parse::<f64>() {
                Ok(x) => serde_json::Number::from_f64(x).map_or(Value::String(v), Value::Number),
                Err(_) => Value::String(v),
            };
            obj.insert(field, value);
        }
        obj
    }
}

fn law_from_section<T: serde::de::DeserializeOwned>(
    entries: &mut Entries,
    prefix: &str,
    extra: &[&str],
) -> Result<(T, Map<String, Value>)> {
    let mut obj = entries.section(prefix);
    let mut held = Map::new();
    for &e in extra {
        if let Some(v) = obj.remove(e) {
            held.insert(e.to_string(), v);
        }
    }
    if !obj.contains_key("kind") {
        return Err(LabError::Config(format!(
            "field `{prefix}.kind` is required"
        )));
    }
    let known = obj.keys().cloned().collect::<Vec<_>>().join(", ");
    let kind = serde_json::from_value(Value::Object(obj))
        .map_err(|e| LabError::Config(format!("field `{prefix}` ({known}): {e}")))?;
    Ok((kind, held))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                LabError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = k.trim().to_string();
            if let Some((first, _)) = map.insert(key.clone(), (lineno + 1, v.trim().to_string())) {
                return Err(LabError::Config(format!(
                    "line {}: field `{key}` already set on line {first}",
                    lineno + 1
                )));
            }
        }
        let mut e = Entries { map };

        let (x_law, _) = law_from_section::<WeightKind>(&mut e, "x_law", &[])?;
        let (y_law, held) = law_from_section::<MultiplierKind>(&mut e, "y_law", &["scale"])?;
        let y_scale = held.get("scale").and_then(Value::as_f64).unwrap_or(1.0);

        let cfg = ExperimentConfig {
            scenario: e.take("scenario").unwrap_or_else(|| "custom".into()),
            x_law,
            y_law,
            y_scale,
            n: e.parsed("n", 10_000)?,
            reps: e.parsed("reps", 20_000)?,
            seed: e.parsed("seed", 1)?,
            outputs: PathBuf::from(e.take("outputs").unwrap_or_else(|| "out".into())),
            tolerances: Tolerances {
                ks_tol: e.parsed("tolerances.ks_tol", 0.02)?,
                quad_tol: e.parsed("tolerances.quad_tol", 1e-9)?,
                cutoff: e.parsed("tolerances.cutoff", 1e-4)?,
            },
            simulate: SimulateSection {
                products: e.list("simulate.products", vec!["tn".to_string()])?,
                eps_list: e.list("simulate.eps_list", vec![0.1])?,
                n_list: e.list("simulate.n_list", vec![100, 1000, 10_000])?,
            },
            limit: LimitSection {
                beta: match e.take("limit.beta") {
                    None => None,
                    Some(s) => Some(s.parse().map_err(|_| {
                        LabError::Config(format!("field `limit.beta`: cannot parse `{s}`"))
                    })?),
                },
                grid_lo: e.parsed("limit.grid_lo", -2.0)?,
                grid_hi: e.parsed("limit.grid_hi", 3.0)?,
                grid_points: e.parsed("limit.grid_points", 501)?,
            },
            diagnose: DiagnoseSection {
                decade_lo: e.parsed("diagnose.decade_lo", 1)?,
                decade_hi: e.parsed("diagnose.decade_hi", 40)?,
            },
            levy: LevySection {
                n_list: e.list("levy.n_list", vec![1000, 10_000, 100_000])?,
                draws: e.parsed("levy.draws", 100_000)?,
                h_list: e.list("levy.h_list", vec![0.25, 1.0])?,
                alpha: e.parsed("levy.alpha", 0.0)?,
                k_max: e.parsed("levy.k_max", 10)?,
            },
        };
        if let Some((key, (line, _))) = e.map.into_iter().next() {
            return Err(LabError::Config(format!(
                "line {line}: unknown field `{key}`"
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(LabError::Config(format!("field `{field}`: {why}")));
        if self.n == 0 {
            return bad("n", "must be at least 1");
        }
        if self.reps == 0 {
            return bad("reps", "must be at least 1");
        }
        if !(self.tolerances.cutoff > 0.0 && self.tolerances.cutoff < 1.0) {
            return bad("tolerances.cutoff", "must lie in (0,1)");
        }
        if !(self.tolerances.quad_tol > 0.0) {
            return bad("tolerances.quad_tol", "must be positive");
        }
        if !(self.tolerances.ks_tol > 0.0 && self.tolerances.ks_tol <= 1.0) {
            return bad("tolerances.ks_tol", "must lie in (0,1]");
        }
        if let Some(p) = self
            .simulate
            .products
            .iter()
            .find(|p| !PRODUCTS.contains(&p.as_str()))
        {
            return Err(LabError::Config(format!(
                "field `simulate.products`: unknown product `{p}` (expected one of {})",
                PRODUCTS.join(", ")
            )));
        }
        if !(self.limit.grid_hi > self.limit.grid_lo) || self.limit.grid_points < 2 {
            return bad(
                "limit.grid_points",
                "need grid_hi > grid_lo and at least 2 points",
            );
        }
        if self.diagnose.decade_hi - self.diagnose.decade_lo < 6 {
            return bad("diagnose.decade_hi", "grid must span at least 6 decades");
        }
        if self.levy.draws == 0 {
            return bad("levy.draws", "must be at least 1");
        }
        self.weight_law()?;
        self.multiplier_law()?;
        Ok(())
    }

    pub fn weight_law(&self) -> Result<WeightLaw> {
        make_weight_law(self.x_law).map_err(|e| LabError::Config(format!("field `x_law`: {e}")))
    }

    pub fn multiplier_law(&self) -> Result<MultiplierLaw> {
        MultiplierLaw::from_kind(self.y_law)
            .and_then(|y| y.scaled(self.y_scale))
            .map_err(|e| LabError::Config(format!("field `y_law`: {e}")))
    }

    /// The resolved configuration as flat `key = value` lines.
    pub fn to_lines(&self) -> Vec<String> {
        let value = serde_json::to_value(self).unwrap_or(Value::Null);
        let mut out = Vec::new();
        flatten("", &value, &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|i| match i {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            out.push(format!("{prefix} = {}", parts.join(",")));
        }
        Value::String(s) => out.push(format!("{prefix} = {s}")),
        other => out.push(format!("{prefix} = {other}")),
    }
}

//! Scenario configuration: flat `key=value` tokens, whitespace separated,
//! `#` starts a comment. Dotted prefixes group related keys.
//!
//! ```text
//! strategy=isotropic v=0.9 seed=7
//! optimizer.restarts=8  optimizer.eve_dim=16
//! output.format=machine
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpec {
    Ideal,
    Isotropic(f64),
    Product,
    Custom(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Human,
    Machine,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Human => "human",
            Self::Machine => "machine",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "human" => Ok(Self::Human),
            "machine" => Ok(Self::Machine),
            other => Err(format!("expected human or machine, got `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed `1 - W` for the maximal-violation premise.
    pub premise: f64,
    /// Max-entry deviation for Eve's table.
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { premise: 1e-7, consistency: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub eve_dim: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 8, iterations: 200, eve_dim: 16 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LhsSettings {
    pub restarts: usize,
    pub iterations: usize,
}

impl Default for LhsSettings {
    fn default() -> Self {
        Self { restarts: 32, iterations: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub strategy: StrategySpec,
    pub seed: u64,
    pub tol: Tolerances,
    pub optimizer: OptimizerConfig,
    pub lhs: LhsSettings,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    /// Visibilities for `sweep`.
    pub sweep_grid: Vec<f64>,
}

pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            strategy: StrategySpec::Ideal,
            seed: 0,
            tol: Tolerances::default(),
            optimizer: OptimizerConfig::default(),
            lhs: LhsSettings::default(),
            output_path: None,
            output_format: OutputFormat::Human,
            sweep_grid: default_grid(),
        }
    }
}

const KEYS: &[&str] = &[
    "file",
    "lhs.iterations",
    "lhs.restarts",
    "optimizer.eve_dim",
    "optimizer.iterations",
    "optimizer.restarts",
    "output.format",
    "output.path",
    "seed",
    "strategy",
    "sweep.grid",
    "tol.consistency",
    "tol.premise",
    "v",
];

fn err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Config { line, field: field.to_string(), message: message.into() }
}

fn parse_num<T: FromStr>(line: usize, field: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| err(line, field, format!("cannot parse `{value}`: {e}")))
}

fn parse_positive(line: usize, field: &str, value: &str) -> Result<usize> {
    let n: usize = parse_num(line, field, value)?;
    if n == 0 {
        return Err(err(line, field, "must be at least 1"));
    }
    Ok(n)
}

fn parse_tol(line: usize, field: &str, value: &str) -> Result<f64> {
    let x: f64 = parse_num(line, field, value)?;
    if !(x.is_finite() && x > 0.0 && x < 1.0) {
        return Err(err(line, field, format!("{x} is not in (0, 1)")));
    }
    Ok(x)
}

fn parse_unit(line: usize, field: &str, value: &str) -> Result<f64> {
    let x: f64 = parse_num(line, field, value)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(err(line, field, format!("{x} is outside [0, 1]")));
    }
    Ok(x)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| err(line, token, "expected key=value"))?;
            if !KEYS.contains(&key) {
                return Err(err(line, key, "unknown key"));
            }
            if value.is_empty() {
                return Err(err(line, key, "empty value"));
            }
            if let Some((first, _)) = entries.insert(key, (line, value)) {
                return Err(err(line, key, format!("duplicate key (first set on line {first})")));
            }
        }
    }

    let mut c = ScenarioConfig::default();
    let get = |k: &str| entries.get(k).copied();

    let kind = get("strategy").map(|(l, v)| (l, v.to_string()));
    let v = get("v");
    let file = get("file");
    c.strategy = match kind.as_ref().map(|(l, s)| (*l, s.as_str())) {
        None | Some((_, "ideal")) => StrategySpec::Ideal,
        Some((_, "product")) => StrategySpec::Product,
        Some((l, "isotropic")) => {
            let (vl, vv) = v.ok_or_else(|| err(l, "v", "isotropic strategy needs v"))?;
            StrategySpec::Isotropic(parse_unit(vl, "v", vv)?)
        }
        Some((l, "custom")) => {
            let (_, path) = file.ok_or_else(|| err(l, "file", "custom strategy needs file"))?;
            StrategySpec::Custom(PathBuf::from(path))
        }
        Some((l, other)) => {
            return Err(err(l, "strategy", format!("expected ideal, isotropic, product or custom, got `{other}`")));
        }
    };
    if !matches!(c.strategy, StrategySpec::Isotropic(_)) {
        if let Some((l, _)) = v {
            return Err(err(l, "v", "v only applies to strategy=isotropic"));
        }
    }
    if !matches!(c.strategy, StrategySpec::Custom(_)) {
        if let Some((l, _)) = file {
            return Err(err(l, "file", "file only applies to strategy=custom"));
        }
    }
    if let Some((l, s)) = get("seed") {
        c.seed = parse_num(l, "seed", s)?;
    }
    if let Some((l, s)) = get("tol.premise") {
        c.tol.premise = parse_tol(l, "tol.premise", s)?;
    }
    if let Some((l, s)) = get("tol.consistency") {
        c.tol.consistency = parse_tol(l, "tol.consistency", s)?;
    }
    if let Some((l, s)) = get("optimizer.restarts") {
        c.optimizer.restarts = parse_positive(l, "optimizer.restarts", s)?;
    }
    if let Some((l, s)) = get("optimizer.iterations") {
        c.optimizer.iterations = parse_positive(l, "optimizer.iterations", s)?;
    }
    if let Some((l, s)) = get("optimizer.eve_dim") {
        c.optimizer.eve_dim = parse_positive(l, "optimizer.eve_dim", s)?;
    }
    if let Some((l, s)) = get("lhs.restarts") {
        c.lhs.restarts = parse_positive(l, "lhs.restarts", s)?;
    }
    if let Some((l, s)) = get("lhs.iterations") {
        c.lhs.iterations = parse_positive(l, "lhs.iterations", s)?;
    }
    if let Some((_, s)) = get("output.path") {
        c.output_path = Some(PathBuf::from(s));
    }
    if let Some((l, s)) = get("output.format") {
        c.output_format = s.parse().map_err(|m: String| err(l, "output.format", m))?;
    }
    if let Some((l, s)) = get("sweep.grid") {
        c.sweep_grid = s
            .split(',')
            .map(|x| parse_unit(l, "sweep.grid", x))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(c)
}

fn path_str(p: &std::path::Path) -> Result<String> {
    let s = p
        .to_str()
        .ok_or_else(|| Error::InvalidConfig(format!("path {} is not UTF-8", p.display())))?;
    if s.is_empty() || s.contains(char::is_whitespace) || s.contains('#') {
        return Err(Error::InvalidConfig(format!("path `{s}` cannot be written as a config token")));
    }
    Ok(s.to_string())
}

/// Canonical text form; `parse_config(&render_config(c)?) == c`.
pub fn render_config(c: &ScenarioConfig) -> Result<String> {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    match &c.strategy {
        StrategySpec::Ideal => put("strategy", "ideal".into()),
        StrategySpec::Product => put("strategy", "product".into()),
        StrategySpec::Isotropic(v) => {
            put("strategy", "isotropic".into());
            put("v", format!("{v:?}"));
        }
        StrategySpec::Custom(p) => {
            put("strategy", "custom".into());
            put("file", path_str(p)?);
        }
    }
    put("seed", c.seed.to_string());
    put("tol.premise", format!("{:?}", c.tol.premise));
    put("tol.consistency", format!("{:?}", c.tol.consistency));
    put("optimizer.restarts", c.optimizer.restarts.to_string());
    put("optimizer.iterations", c.optimizer.iterations.to_string());
    put("optimizer.eve_dim", c.optimizer.eve_dim.to_string());
    put("lhs.restarts", c.lhs.restarts.to_string());
    put("lhs.iterations", c.lhs.iterations.to_string());
    if let Some(p) = &c.output_path {
        put("output.path", path_str(p)?);
    }
    put("output.format", c.output_format.as_str().into());
    put("sweep.grid", c.sweep_grid.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","));
    Ok(out)
}

//! Command dispatch.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{ScenarioConfig, StrategySpec};
use crate::error::{Error, Result};
use crate::randomness::{certify, entangled_source_attack, AttackDemo, CertificationResult, CertifyConfig, EveConfig};
use crate::scenario::{correlations, Strategy};
use crate::selftest::{verify_selftest, ExtractionReport};
use crate::strategy_file::load_strategy;
use crate::witness::{lhs_bound, witness_expectation_form, witness_value, LhsBoundEstimate, LhsConfig, WitnessResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Witness,
    Selftest,
    Certify,
    LhsBound,
    Sweep,
    AttackDemo,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Self::Witness, Self::Selftest, Self::Certify, Self::LhsBound, Self::Sweep, Self::AttackDemo];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Witness => "witness",
            Self::Selftest => "selftest",
            Self::Certify => "certify",
            Self::LhsBound => "lhs-bound",
            Self::Sweep => "sweep",
            Self::AttackDemo => "attack-demo",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown command `{s}`")))
    }
}

/// Results for one strategy (one sweep point, or the configured strategy).
#[derive(Clone, Debug)]
pub struct PointReport {
    /// Visibility for sweep points.
    pub v: Option<f64>,
    pub witness: WitnessResult,
    /// `Σ_a p(a, a)` from the probability table.
    pub table_witness: f64,
    pub extraction: Option<ExtractionReport>,
    pub certification: Option<CertificationResult>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: Command,
    pub config: ScenarioConfig,
    pub version: &'static str,
    pub points: Vec<PointReport>,
    pub lhs: Option<LhsBoundEstimate>,
    pub attack: Option<AttackDemo>,
    /// Wall-clock seconds per stage.
    pub timing: Vec<(String, f64)>,
}

pub fn load_configured_strategy(c: &ScenarioConfig) -> Result<Strategy> {
    match &c.strategy {
        StrategySpec::Ideal => Ok(Strategy::ideal()),
        StrategySpec::Product => Ok(Strategy::product()),
        StrategySpec::Isotropic(v) => Strategy::isotropic(*v),
        StrategySpec::Custom(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
            load_strategy(&text)
        }
    }
}

fn witness_point(s: &Strategy, v: Option<f64>) -> Result<PointReport> {
    Ok(PointReport {
        v,
        witness: witness_expectation_form(s)?,
        table_witness: witness_value(&correlations(s)),
        extraction: None,
        certification: None,
    })
}

fn context(command: Command, e: Error) -> Error {
    match e {
        Error::Numerical(m) => Error::Numerical(format!("{command}: {m}")),
        Error::InvalidConfig(m) => Error::InvalidConfig(format!("{command}: {m}")),
        other => other,
    }
}

pub fn run(command: Command, c: &ScenarioConfig) -> Result<RunReport> {
    run_inner(command, c).map_err(|e| context(command, e))
}

fn run_inner(command: Command, c: &ScenarioConfig) -> Result<RunReport> {
    let mut timing = Vec::new();
    let mut report = RunReport {
        command,
        config: c.clone(),
        version: crate::VERSION,
        points: Vec::new(),
        lhs: None,
        attack: None,
        timing: Vec::new(),
    };
    let clock = Instant::now();
    match command {
        Command::Witness | Command::Selftest | Command::Certify => {
            let s = load_configured_strategy(c)?;
            timing.push(("load".to_string(), clock.elapsed().as_secs_f64()));
            let t = Instant::now();
            let mut point = witness_point(&s, None)?;
            timing.push(("witness".to_string(), t.elapsed().as_secs_f64()));
            if command == Command::Selftest {
                let t = Instant::now();
                point.extraction = Some(verify_selftest(&s, c.tol.premise)?);
                timing.push(("selftest".to_string(), t.elapsed().as_secs_f64()));
            }
            if command == Command::Certify {
                let t = Instant::now();
                let cfg = CertifyConfig {
                    premise_tol: c.tol.premise,
                    eve: EveConfig {
                        eve_dim: c.optimizer.eve_dim,
                        restarts: c.optimizer.restarts,
                        iterations: c.optimizer.iterations,
                        consistency_tol: c.tol.consistency,
                    },
                };
                point.certification = Some(certify(&s, &cfg, c.seed)?);
                timing.push(("certify".to_string(), t.elapsed().as_secs_f64()));
            }
            report.points.push(point);
        }
        Command::LhsBound => {
            let cfg = LhsConfig { restarts: c.lhs.restarts, max_iterations: c.lhs.iterations };
            report.lhs = Some(lhs_bound(&cfg, c.seed)?);
            timing.push(("lhs-bound".to_string(), clock.elapsed().as_secs_f64()));
        }
        Command::Sweep => {
            report.points = c
                .sweep_grid
                .par_iter()
                .map(|&v| witness_point(&Strategy::isotropic(v)?, Some(v)))
                .collect::<Result<Vec<_>>>()?;
            timing.push(("sweep".to_string(), clock.elapsed().as_secs_f64()));
        }
        Command::AttackDemo => {
            report.attack = Some(entangled_source_attack()?);
            timing.push(("attack-demo".to_string(), clock.elapsed().as_secs_f64()));
        }
    }
    report.timing = timing;
    Ok(report)
}

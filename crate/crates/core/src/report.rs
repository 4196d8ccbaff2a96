//! Rendering of run reports.
//!
//! Machine records: one `key=value` per line, keys sorted, records separated
//! by a blank line, floats in shortest round-trip form. Wall-clock timing is
//! left out so identical runs give identical bytes. The human table prints
//! 12 significant digits and includes timing.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::config::{render_config, OutputFormat};
use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::run::{PointReport, RunReport};
use crate::scenario::OUTCOMES;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

pub type Record = BTreeMap<String, Value>;

/// `x` with 12 significant digits; scientific outside `[1e-4, 1e12)`.
pub fn significant(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.11}", 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..12).contains(&mag) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new digit (9.99… → 10.0…)
    if s.parse::<f64>().is_ok_and(|r| r.abs() >= 10f64.powi(mag + 1)) && decimals > 0 {
        return format!("{x:.prec$}", prec = decimals - 1);
    }
    s
}

fn matrix_value(m: &ComplexMatrix) -> Value {
    let rows: Vec<String> = (0..m.rows())
        .map(|r| (0..m.cols()).map(|k| format!("{:?},{:?}", m[(r, k)].re, m[(r, k)].im)).collect::<Vec<_>>().join(" "))
        .collect();
    Value::Text(rows.join(" ; "))
}

fn list(xs: &[usize]) -> Value {
    Value::Text(xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

fn put<V: Into<Value>>(r: &mut Record, k: &str, v: V) {
    r.insert(k.to_string(), v.into());
}

fn point_record(index: usize, p: &PointReport) -> Record {
    let mut r = Record::new();
    put(&mut r, "record", "point");
    put(&mut r, "index", index);
    if let Some(v) = p.v {
        put(&mut r, "v", v);
    }
    put(&mut r, "W", p.witness.value);
    put(&mut r, "W.table", p.table_witness);
    put(&mut r, "W.exceeds_lhs", p.witness.value > 0.5 + 1e-12);
    for k in 0..OUTCOMES {
        put(&mut r, &format!("term{k}.re"), p.witness.per_term[k].re);
        put(&mut r, &format!("term{k}.im"), p.witness.per_term[k].im);
        put(&mut r, &format!("residual{k}"), p.witness.residuals[k]);
    }
    if let Some(e) = &p.extraction {
        put(&mut r, "selftest.witness", e.witness);
        put(&mut r, "selftest.state_fidelity", e.state_fidelity);
        put(&mut r, "selftest.measurement_defect", e.measurement_defect);
        put(&mut r, "selftest.projective", e.projective);
        put(&mut r, "selftest.projective_defect", e.projective_defect);
        put(&mut r, "selftest.full_rank", e.full_rank);
        put(&mut r, "selftest.g_overlap_defect", e.support.g_overlap_defect);
        put(&mut r, "selftest.local_support_defect", e.support.local_support_defect);
        put(&mut r, "selftest.g_eigen_residual", e.support.g_eigen_residual);
        put(&mut r, "selftest.block_dims1", list(&e.support.block_dims.0));
        put(&mut r, "selftest.block_dims2", list(&e.support.block_dims.1));
        put(&mut r, "selftest.block_count", e.support.block_count());
        put(&mut r, "selftest.block_relation_residual", e.block_relation_residual);
        put(&mut r, "selftest.product_form_defect", e.product_form_defect);
        put(&mut r, "selftest.transpose_identity_residual", e.transpose_identity_residual);
        put(&mut r, "selftest.junk_dims", list(&[e.junk_dims.0, e.junk_dims.1]));
        put(&mut r, "selftest.junk_state", matrix_value(&e.junk_state));
        put(&mut r, "selftest.u1", matrix_value(&e.u1));
        put(&mut r, "selftest.u2", matrix_value(&e.u2));
    }
    if let Some(c) = &p.certification {
        put(&mut r, "certify.status", c.status.as_str());
        put(&mut r, "certify.certified", c.certified);
        put(&mut r, "certify.G", c.guessing_probability);
        put(&mut r, "certify.H_min", c.min_entropy_bits);
        put(&mut r, "certify.witness", c.witness);
        for (i, cav) in c.caveats.iter().enumerate() {
            put(&mut r, &format!("certify.caveat{i}"), cav.as_str());
        }
    }
    r
}

/// Records in output order: a header, then command results.
pub fn records(r: &RunReport) -> Result<Vec<Record>> {
    let mut header = Record::new();
    put(&mut header, "record", "run");
    put(&mut header, "command", r.command.as_str());
    put(&mut header, "version", r.version);
    for line in render_config(&r.config)?.lines() {
        if let Some((k, v)) = line.split_once('=') {
            put(&mut header, &format!("config.{k}"), v);
        }
    }
    let mut out = vec![header];
    for (i, p) in r.points.iter().enumerate() {
        out.push(point_record(i, p));
    }
    if let Some(l) = &r.lhs {
        let mut rec = Record::new();
        put(&mut rec, "record", "lhs-bound");
        put(&mut rec, "beta", l.beta);
        put(&mut rec, "outcome", l.argmax.outcome);
        put(&mut rec, "theta1", l.argmax.first.theta);
        put(&mut rec, "phi1", l.argmax.first.phi);
        put(&mut rec, "theta2", l.argmax.second.theta);
        put(&mut rec, "phi2", l.argmax.second.phi);
        put(&mut rec, "trace_len", l.trace.len());
        out.push(rec);
    }
    if let Some(a) = &r.attack {
        let mut rec = Record::new();
        put(&mut rec, "record", "attack-demo");
        put(&mut rec, "W", a.witness);
        put(&mut rec, "G", a.guessing_probability);
        for i in 0..OUTCOMES {
            for j in 0..OUTCOMES {
                put(&mut rec, &format!("p{i}{j}"), a.table.get(i, j));
            }
        }
        put(&mut rec, "eve_dim", a.strategy.eve_dim());
        out.push(rec);
    }
    Ok(out)
}

fn machine(recs: &[Record]) -> String {
    let mut out = String::new();
    for (i, rec) in recs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (k, v) in rec {
            let v = match v {
                Value::Num(x) => format!("{x:?}"),
                Value::Int(n) => n.to_string(),
                Value::Text(s) => s.clone(),
            };
            let _ = writeln!(out, "{k}={v}");
        }
    }
    out
}

fn human(recs: &[Record], timing: &[(String, f64)]) -> String {
    let width = recs.iter().flat_map(|r| r.keys()).map(String::len).max().unwrap_or(0);
    let mut out = String::new();
    for rec in recs {
        let title = match rec.get("record") {
            Some(Value::Text(t)) => t.clone(),
            _ => String::new(),
        };
        let _ = writeln!(out, "[{title}]");
        for (k, v) in rec.iter().filter(|(k, _)| k.as_str() != "record") {
            let v = match v {
                Value::Num(x) => significant(*x),
                Value::Int(n) => n.to_string(),
                Value::Text(s) => s.clone(),
            };
            let _ = writeln!(out, "{k:>width$} = {v}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "[timing]");
    for (stage, secs) in timing {
        let _ = writeln!(out, "{stage:>width$} = {} s", significant(*secs));
    }
    out
}

pub fn render_report(r: &RunReport, format: OutputFormat) -> Result<String> {
    let recs = records(r)?;
    Ok(match format {
        OutputFormat::Machine => machine(&recs),
        OutputFormat::Human => human(&recs, &r.timing),
    })
}

/// Reads machine output back into string records.
pub fn parse_records(text: &str) -> Vec<BTreeMap<String, String>> {
    text.split("\n\n")
        .filter(|block| !block.trim().is_empty())
        .map(|block| {
            block
                .lines()
                .filter_map(|l| l.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::run::{run, Command};

    #[test]
    fn significant_digits() {
        assert_eq!(significant(1.0), "1.00000000000");
        assert_eq!(significant(0.5), "0.500000000000");
        assert_eq!(significant(1234.5), "1234.50000000");
        assert_eq!(significant(2.5e-12), "2.50000000000e-12");
        assert_eq!(significant(0.0), "0.00000000000");
        assert_eq!(significant(9.9999999999999), "10.0000000000");
    }

    #[test]
    fn ideal_witness_row() {
        let r = run(Command::Witness, &ScenarioConfig::default()).unwrap();
        let text = render_report(&r, OutputFormat::Human).unwrap();
        assert!(text.contains("W = 1.00000000000"), "{text}");
    }

    #[test]
    fn machine_parse_back_is_exact() {
        let mut c = ScenarioConfig::default();
        c.sweep_grid = vec![0.0, 0.3, 0.7];
        let r = run(Command::Sweep, &c).unwrap();
        let text = render_report(&r, OutputFormat::Machine).unwrap();
        let recs = parse_records(&text);
        assert_eq!(recs.len(), 4);
        for (p, rec) in r.points.iter().zip(&recs[1..]) {
            assert_eq!(rec["W"].parse::<f64>().unwrap(), p.witness.value);
            assert_eq!(rec["residual2"].parse::<f64>().unwrap(), p.witness.residuals[2]);
            assert_eq!(rec["v"].parse::<f64>().unwrap(), p.v.unwrap());
        }
        for block in text.split("\n\n") {
            let keys: Vec<&str> = block.lines().map(|l| l.split_once('=').unwrap().0).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted);
        }
        assert!(!text.contains("timing"));
    }
}

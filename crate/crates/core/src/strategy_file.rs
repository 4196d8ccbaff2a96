//! Custom strategies as complex-matrix literals.
//!
//! ```text
//! matrix source1 4 4
//! 0.5,0 0,0 0,0 0.5,0
//! ...
//! ```
//!
//! Required blocks: `source1`, `source2` (on A_i ⊗ B_i) and `bob0`..`bob3`.
//! `alice0`..`alice3` are optional and default to the Bell measurement.
//! Entries are row-major `re,im` pairs; `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::scenario::{Povm, Strategy, OUTCOMES};

const NAMES: &[&str] = &[
    "source1", "source2", "bob0", "bob1", "bob2", "bob3", "alice0", "alice1", "alice2", "alice3",
];

fn err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Config { line, field: field.to_string(), message: message.into() }
}

/// All `(line, token)` pairs, comments removed.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .flat_map(|(i, l)| l.split('#').next().unwrap_or("").split_whitespace().map(move |t| (i + 1, t)))
        .collect()
}

pub fn parse_matrices(text: &str) -> Result<BTreeMap<String, (usize, ComplexMatrix)>> {
    let toks = tokens(text);
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < toks.len() {
        let (line, word) = toks[i];
        if word != "matrix" {
            return Err(err(line, word, "expected `matrix <name> <rows> <cols>`"));
        }
        let header = toks.get(i + 1..i + 4).ok_or_else(|| err(line, "matrix", "incomplete header"))?;
        let name = header[0].1;
        if !NAMES.contains(&name) {
            return Err(err(line, name, "unknown matrix name"));
        }
        let dim = |t: (usize, &str)| -> Result<usize> {
            t.1.parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| err(t.0, name, format!("bad dimension `{}`", t.1)))
        };
        let (rows, cols) = (dim(header[1])?, dim(header[2])?);
        let start = i + 4;
        let body = toks
            .get(start..start + rows * cols)
            .ok_or_else(|| err(line, name, format!("expected {} entries", rows * cols)))?;
        let mut entries = Vec::with_capacity(rows * cols);
        for &(l, t) in body {
            let (a, b) = t.split_once(',').ok_or_else(|| err(l, name, format!("entry `{t}` is not re,im")))?;
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(l, name, format!("bad number `{s}`")))
            };
            entries.push(c(parse(a)?, parse(b)?));
        }
        let m = ComplexMatrix::new(rows, cols, entries)?;
        if out.insert(name.to_string(), (line, m)).is_some() {
            return Err(err(line, name, "duplicate matrix"));
        }
        i = start + rows * cols;
    }
    Ok(out)
}

fn povm(blocks: &mut BTreeMap<String, (usize, ComplexMatrix)>, party: &str) -> Result<Option<Povm>> {
    let names: Vec<String> = (0..OUTCOMES).map(|b| format!("{party}{b}")).collect();
    let present = names.iter().filter(|n| blocks.contains_key(n.as_str())).count();
    if present == 0 {
        return Ok(None);
    }
    let mut elements = Vec::new();
    for n in &names {
        let (_, m) = blocks.remove(n).ok_or_else(|| err(0, n, "missing POVM element"))?;
        elements.push(m);
    }
    Povm::new(elements).map(Some).map_err(|e| Error::InvalidConfig(format!("{party} measurement: {e}")))
}

/// Parses and validates a custom strategy.
pub fn load_strategy(text: &str) -> Result<Strategy> {
    let mut blocks = parse_matrices(text)?;
    let (_, s1) = blocks.remove("source1").ok_or_else(|| err(0, "source1", "missing"))?;
    let (_, s2) = blocks.remove("source2").ok_or_else(|| err(0, "source2", "missing"))?;
    let bob = povm(&mut blocks, "bob")?.ok_or_else(|| err(0, "bob0", "missing Bob's measurement"))?;
    let alice = povm(&mut blocks, "alice")?.unwrap_or_else(Povm::bell);
    Strategy::new(s1, s2, alice, bob).map_err(|e| Error::InvalidConfig(format!("custom strategy: {e}")))
}

fn write_matrix(out: &mut String, name: &str, m: &ComplexMatrix) {
    let _ = writeln!(out, "matrix {name} {} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|k| format!("{:?},{:?}", m[(r, k)].re, m[(r, k)].im)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// Text form that [`load_strategy`] reads back exactly.
pub fn render_strategy(s: &Strategy) -> String {
    let mut out = String::new();
    write_matrix(&mut out, "source1", s.source1());
    write_matrix(&mut out, "source2", s.source2());
    for (b, e) in s.bob().elements().iter().enumerate() {
        write_matrix(&mut out, &format!("bob{b}"), e);
    }
    for (a, e) in s.alice().elements().iter().enumerate() {
        write_matrix(&mut out, &format!("alice{a}"), e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let s = Strategy::isotropic(0.37).unwrap();
        let back = load_strategy(&render_strategy(&s)).unwrap();
        assert_eq!(back.source1().max_abs_diff(s.source1()), 0.0);
        assert_eq!(back.bob().element(2).max_abs_diff(s.bob().element(2)), 0.0);
    }

    #[test]
    fn alice_defaults_to_bell() {
        let s = Strategy::ideal();
        let text: String = render_strategy(&s).split("matrix alice0").next().unwrap().to_string();
        let back = load_strategy(&text).unwrap();
        assert_eq!(back.alice().element(1).max_abs_diff(Povm::bell().element(1)), 0.0);
    }

    #[test]
    fn errors_point_at_lines() {
        assert!(matches!(parse_matrices("matrix source1 1 1\n1,x"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(parse_matrices("matrix nope 1 1\n1,0"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(parse_matrices("matrix source1 2 2\n1,0"), Err(Error::Config { .. })));
        let bad = render_strategy(&Strategy::ideal()).replace("matrix bob3", "matrix bob9");
        assert!(load_strategy(&bad).is_err());
    }
}

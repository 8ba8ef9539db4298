//! The shipped known-answer corpus.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::FinStdStructure;
use crate::oracle::{decide_finite_with, Assignment, OracleLimits};
use crate::sw::{decide_ec, reduce, Mode};
use crate::syntax::parse;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub formula: String,
    pub expected_ec: Option<bool>,
    /// Keyed by the ground size `n`, as a string.
    #[serde(default)]
    pub expected_finite: BTreeMap<String, bool>,
    pub mode: Mode,
}

impl Entry {
    pub fn finite_expectations(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.expected_finite
            .iter()
            .filter_map(|(n, v)| n.parse().ok().map(|n| (n, *v)))
    }
}

const SENTENCES: &str = include_str!("../corpus/sentences.jsonl");

/// Parses JSON lines, skipping blank lines.
pub fn parse_jsonl(text: &str) -> Result<Vec<Entry>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

pub fn entries() -> Vec<Entry> {
    parse_jsonl(SENTENCES).expect("shipped corpus is well-formed")
}

/// How one corpus entry fared against each backend.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub index: usize,
    pub formula: String,
    pub ec: Option<bool>,
    /// `(n, verdict)` per annotated ground size.
    pub finite: Vec<(usize, bool)>,
    pub problems: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks an entry against the decider and the finite oracle. Entries in
/// `tplus` mode must also reduce in that mode.
pub fn check(index: usize, entry: &Entry, limits: &OracleLimits) -> Outcome {
    let mut out = Outcome {
        index,
        formula: entry.formula.clone(),
        ec: None,
        finite: Vec::new(),
        problems: Vec::new(),
    };
    let phi = match parse(&entry.formula) {
        Ok(f) => f,
        Err(e) => {
            out.problems.push(e.to_string());
            return out;
        }
    };
    if entry.mode == Mode::Tplus {
        if let Err(e) = reduce(&phi, Mode::Tplus) {
            out.problems.push(format!("tplus reduction: {e}"));
        }
    }
    if let Some(expected) = entry.expected_ec {
        match decide_ec(&phi) {
            Ok(v) => {
                out.ec = Some(v);
                if v != expected {
                    out.problems.push(format!("decider says {v}, expected {expected}"));
                }
            }
            Err(e) => out.problems.push(format!("decider: {e}")),
        }
    }
    for (n, expected) in entry.finite_expectations() {
        let verdict = FinStdStructure::new(n)
            .map_err(|e| e.to_string())
            .and_then(|s| decide_finite_with(&s, &phi, &Assignment::new(), limits).map_err(|e| e.to_string()));
        match verdict {
            Ok(v) => {
                out.finite.push((n, v));
                if v != expected {
                    out.problems.push(format!("n={n}: oracle says {v}, expected {expected}"));
                }
            }
            Err(e) => out.problems.push(format!("n={n}: {e}")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_corpus_parses() {
        let all = entries();
        assert!(all.len() >= 9);
        for e in &all {
            let f = parse(&e.formula).unwrap_or_else(|err| panic!("{}: {err}", e.formula));
            assert!(f.is_sentence(), "{}", e.formula);
        }
    }
}

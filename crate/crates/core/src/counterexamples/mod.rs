//! Executable refutations of the two "bigger conjugate" sum questions, plus
//! the numeric cross-checks the refutations rest on. Every suite returns a
//! [`CounterexampleVerdict`].

mod example52;
mod facts;
mod implications;
mod theorem43;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::extreal::ExtReal;

pub use example52::{example52_gap, example52_maximality, Example52Config};
pub use facts::{conjugation_suite, fact33_crosscheck, fact41_crosscheck, fact42_crosscheck, fact51_suite, probe_probcon};
pub use implications::{implication43_check, implication52_check, ImplicationConfig};
pub use theorem43::{example44_suite, rotation, theorem43_suite, Theorem43Config};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A small CSV-shaped table attached to a verdict (sweeps, profiles).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleVerdict {
    pub name: String,
    pub hypotheses_checked: Vec<(String, bool)>,
    /// Numeric sub-checks that are not hypotheses (agreement within a
    /// tolerance, informativeness floors).
    pub checks: Vec<(String, bool)>,
    pub computed_values: BTreeMap<String, ExtReal>,
    pub strict_inequality_margin: Option<ExtReal>,
    pub slack: f64,
    pub verdict: Verdict,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl CounterexampleVerdict {
    pub(crate) fn new(name: &str, tol: f64) -> Self {
        CounterexampleVerdict {
            name: name.to_string(),
            hypotheses_checked: Vec::new(),
            checks: Vec::new(),
            computed_values: BTreeMap::new(),
            strict_inequality_margin: None,
            slack: 10.0 * tol,
            verdict: Verdict::Fail,
            tables: Vec::new(),
        }
    }

    /// The record of a suite that stopped at a failed hypothesis.
    pub fn hypothesis_failure(name: &str, message: &str, tol: f64) -> Self {
        let mut v = CounterexampleVerdict::new(name, tol);
        v.hypotheses_checked.push((message.to_string(), false));
        v.finish()
    }

    pub fn hypothesis_failed(&self) -> bool {
        self.hypotheses_checked.iter().any(|(_, ok)| !ok)
    }

    pub(crate) fn hypothesis(&mut self, name: &str, ok: bool) -> crate::Result<()> {
        self.hypotheses_checked.push((name.to_string(), ok));
        if ok {
            Ok(())
        } else {
            Err(crate::Error::HypothesisFailed(format!("{}: {name}", self.name)))
        }
    }

    pub(crate) fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
    }

    pub(crate) fn value(&mut self, name: &str, v: impl Into<ExtReal>) {
        self.computed_values.insert(name.to_string(), v.into());
    }

    pub(crate) fn finish(mut self) -> Self {
        let margin_ok = self
            .strict_inequality_margin
            .is_none_or(|m| m > ExtReal::Finite(self.slack));
        let all = self.hypotheses_checked.iter().chain(&self.checks).all(|(_, ok)| *ok);
        self.verdict = if all && margin_ok { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn get(&self, name: &str) -> Option<ExtReal> {
        self.computed_values.get(name).copied()
    }

    /// Names of the failed checks, and of the margin if it is too small.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .hypotheses_checked
            .iter()
            .chain(&self.checks)
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| n.clone())
            .collect();
        if let Some(m) = self.strict_inequality_margin {
            if m <= ExtReal::Finite(self.slack) {
                out.push(format!("margin {m} <= slack {}", self.slack));
            }
        }
        out
    }
}

fn close(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs() <= tol,
        _ => a == b,
    }
}

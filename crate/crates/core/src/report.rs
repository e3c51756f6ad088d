//! Law reports and their JSON form.

use std::fmt::Display;

use serde_json::{json, Map, Value};

use crate::quantale::StarTable;

/// Failures kept per law; the tally still counts every one.
pub const KEPT_FAILURES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub observed: String,
    pub expected: String,
}

impl Mismatch {
    pub fn new(observed: impl Into<String>, expected: impl Into<String>) -> Self {
        Mismatch { observed: observed.into(), expected: expected.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample<E> {
    pub law: &'static str,
    pub witnesses: Vec<E>,
    pub mismatch: Mismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawResult<E> {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
    pub failures: Vec<Counterexample<E>>,
}

impl<E> LawResult<E> {
    pub fn new(name: &'static str) -> Self {
        LawResult { name, checked: 0, failed: 0, failures: Vec::new() }
    }

    pub fn record(&mut self, c: Counterexample<E>) {
        self.failed += 1;
        if self.failures.len() < KEPT_FAILURES {
            self.failures.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport<E> {
    pub system: String,
    pub laws: Vec<LawResult<E>>,
}

impl<E> LawReport<E> {
    pub fn new(system: impl Into<String>) -> Self {
        LawReport { system: system.into(), laws: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.laws.iter().all(LawResult::passed)
    }

    pub fn law(&self, name: &str) -> Option<&LawResult<E>> {
        self.laws.iter().find(|l| l.name == name)
    }

    pub fn failed_laws(&self) -> Vec<&'static str> {
        self.laws.iter().filter(|l| !l.passed()).map(|l| l.name).collect()
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &Counterexample<E>> {
        self.laws.iter().flat_map(|l| l.failures.iter())
    }

    pub fn total_checked(&self) -> usize {
        self.laws.iter().map(|l| l.checked).sum()
    }

    pub fn extend(&mut self, other: LawReport<E>) {
        self.laws.extend(other.laws);
    }

    pub fn map<F, G: FnMut(E) -> F>(self, mut g: G) -> LawReport<F> {
        LawReport {
            system: self.system,
            laws: self
                .laws
                .into_iter()
                .map(|l| LawResult {
                    name: l.name,
                    checked: l.checked,
                    failed: l.failed,
                    failures: l
                        .failures
                        .into_iter()
                        .map(|c| Counterexample {
                            law: c.law,
                            witnesses: c.witnesses.into_iter().map(&mut g).collect(),
                            mismatch: c.mismatch,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl<E: Display> LawReport<E> {
    pub fn laws_json(&self) -> Value {
        Value::Array(
            self.laws
                .iter()
                .map(|l| {
                    json!({
                        "name": l.name,
                        "checked": l.checked,
                        "failures": l.failures.iter().map(|c| json!({
                            "witnesses": c.witnesses.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                            "observed": c.mismatch.observed,
                            "expected": c.mismatch.expected,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }

    /// `{"system", "laws", "star", "laxly_iterable"}`; the last two are null
    /// when no table was derived.
    pub fn to_json(&self, star: Option<&StarTable<E>>) -> Value
    where
        E: Ord,
    {
        let (star_v, lax) = match star {
            Some(t) => (star_json(t), Value::Bool(t.laxly_iterable)),
            None => (Value::Null, Value::Null),
        };
        json!({
            "system": self.system,
            "laws": self.laws_json(),
            "star": star_v,
            "laxly_iterable": lax,
        })
    }
}

pub fn star_json<E: Display + Ord>(t: &StarTable<E>) -> Value {
    let mut m = Map::new();
    for (k, v) in &t.entries {
        m.insert(
            k.to_string(),
            match v {
                Some(v) => Value::String(v.to_string()),
                None => Value::Null,
            },
        );
    }
    Value::Object(m)
}

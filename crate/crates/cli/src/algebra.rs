use std::collections::BTreeMap;
use std::fmt::Display;

use serde_json::json;

use eqkit_core::instances::atomicity::AtomicityQuantale;
use eqkit_core::instances::count::CountQuantale;
use eqkit_core::instances::crit::CritQuantale;
use eqkit_core::instances::deadlock::{DLQuantale, Level};
use eqkit_core::instances::lift::powerset;
use eqkit_core::instances::lock::LockQuantale;
use eqkit_core::instances::product::Product;
use eqkit_core::instances::regex::RegexQuantale;
use eqkit_core::instances::trivial::TrivialQuantale;
use eqkit_core::kleene::{as_effect_quantale, check_ka_laws, RegularLanguageKa};
use eqkit_core::report::star_json;
use eqkit_core::{check_laws, check_star_laws, derive_star_finite, Budget, LawReport, Quantale, StarTable, WithStar};

use crate::{Algebra, Failure, LawsArgs, StarArgs, OK, REJECTED};

fn text<E: Display>(r: LawReport<E>) -> LawReport<String> {
    r.map(|e| e.to_string())
}

/// The base laws, plus the star laws under the instance's own iteration or,
/// on a finite carrier, the derived one.
fn sweep<Q>(q: &Q, budget: Budget) -> Result<(LawReport<String>, Option<StarTable<String>>), Failure>
where
    Q: Quantale + Clone,
    Q::Elem: Display,
{
    let err = |e: eqkit_core::LawError| Failure::usage(e.to_string());
    let mut report = text(check_laws(q, budget).map_err(err)?);
    let mut table = None;
    if q.has_star() {
        report.extend(text(check_star_laws(q, budget).map_err(err)?));
    } else if q.elements().is_some() {
        let with = WithStar::derived(q.clone()).map_err(err)?;
        report.extend(text(check_star_laws(&with, budget).map_err(err)?));
        table = Some(text_table(&with.table));
    }
    Ok((report, table))
}

fn text_table<E: Display>(t: &StarTable<E>) -> StarTable<String> {
    StarTable {
        entries: t.entries.iter().map(|(k, v)| (k.to_string(), v.as_ref().map(|v| v.to_string()))).collect(),
        laxly_iterable: t.laxly_iterable,
        witness: t.witness.as_ref().map(|w| w.to_string()),
    }
}

/// The derived table on a finite carrier, otherwise the instance's own
/// iteration on its distinguished elements.
fn star_table<Q>(q: &Q) -> Result<StarTable<String>, Failure>
where
    Q: Quantale,
    Q::Elem: Display,
{
    if q.elements().is_some() {
        return derive_star_finite(q).map(|t| text_table(&t)).map_err(|e| Failure::usage(e.to_string()));
    }
    if !q.has_star() {
        return Err(Failure::usage(format!("{} is not enumerable and has no iteration operator", q.name())));
    }
    let entries: BTreeMap<String, Option<String>> =
        q.interesting().iter().map(|x| (x.to_string(), q.star(x).map(|s| s.to_string()))).collect();
    Ok(StarTable { entries, laxly_iterable: true, witness: None })
}

fn names(alphabet: &[String]) -> Vec<&str> {
    alphabet.iter().map(String::as_str).collect()
}

macro_rules! with_algebra {
    ($sys:expr, $alphabet:expr, |$q:ident| $body:expr) => {{
        let alphabet = names($alphabet);
        match $sys {
            Algebra::Atomicity => {
                let $q = AtomicityQuantale;
                $body
            }
            Algebra::Crit => {
                let $q = CritQuantale;
                $body
            }
            Algebra::AtomicityCrit => {
                let $q = Product::new(AtomicityQuantale, CritQuantale);
                $body
            }
            Algebra::Lockset => {
                let $q = LockQuantale::new(alphabet.iter().map(|s| s.to_string()).collect());
                $body
            }
            Algebra::Deadlock => {
                let levels = alphabet.iter().enumerate().map(|(i, s)| (s.to_string(), Level::Fin(i as u32 + 1))).collect();
                let $q = DLQuantale::new(levels);
                $body
            }
            Algebra::Regex | Algebra::History => {
                let $q = RegexQuantale::new(alphabet.iter().map(|s| s.to_string()).collect());
                $body
            }
            Algebra::KaRegex => {
                let $q = as_effect_quantale(RegularLanguageKa::new(alphabet.iter().copied()));
                $body
            }
            Algebra::Count => {
                let $q = CountQuantale::new();
                $body
            }
            Algebra::Lift => {
                let $q = powerset(&alphabet);
                $body
            }
            Algebra::Trivial => {
                let $q = TrivialQuantale;
                $body
            }
        }
    }};
}

pub fn laws(a: &LawsArgs) -> Result<u8, Failure> {
    let budget = if a.exhaustive { Budget::Exhaustive } else { Budget::sampled(a.samples, a.seed) };
    let (mut report, table) = with_algebra!(a.system, &a.common.alphabet, |q| sweep(&q, budget))?;
    if a.system == Algebra::KaRegex {
        let ka = RegularLanguageKa::new(a.common.alphabet.iter().cloned());
        report.extend(text(check_ka_laws(&ka, budget).map_err(|e| Failure::usage(e.to_string()))?));
    }
    if a.common.json {
        println!("{}", report.to_json(table.as_ref()));
    } else {
        println!("{}: {} checks", report.system, report.total_checked());
        for law in &report.laws {
            let verdict = if law.passed() { "pass".to_string() } else { format!("FAIL ({} counterexamples)", law.failed) };
            println!("  {:<28} {:>8}  {verdict}", law.name, law.checked);
        }
        if let Some(c) = report.counterexamples().next() {
            println!("first counterexample: {} at [{}]: observed {}, expected {}", c.law, c.witnesses.join(", "), c.mismatch.observed, c.mismatch.expected);
        }
    }
    Ok(if report.passed() { OK } else { REJECTED })
}

pub fn star(a: &StarArgs) -> Result<u8, Failure> {
    let table = with_algebra!(a.system, &a.common.alphabet, |q| star_table(&q))?;
    if a.common.json {
        println!("{}", json!({ "star": star_json(&table), "laxly_iterable": table.laxly_iterable }));
    } else {
        for (x, s) in &table.entries {
            println!("{x} ↦ {}", s.as_deref().unwrap_or("undefined"));
        }
        if !table.laxly_iterable {
            println!("not laxly iterable: {}", table.witness.as_deref().unwrap_or("?"));
        }
    }
    Ok(OK)
}

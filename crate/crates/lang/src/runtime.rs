//! Labelled small-step semantics `σ,e →γ σ′,e′` over an instantiation, with
//! the safety monitor and the interpretation checker.

use std::fmt;

use eqkit_core::{leq, Quantale};
use serde_json::{json, Value};

use crate::calculus::{infer, infer_closed, Ctx, Signature, StateEnv, TypeError};
use crate::domain::Domain;
use crate::effect::ground_of;
use crate::syntax::{Arg, EffectExpr, Ground, Term};

pub const DEFAULT_FUEL: usize = 10_000;

/// Result of one primitive reduction `⟦p v̄⟧(σ)`.
#[derive(Clone, Debug)]
pub struct PrimStep<S> {
    pub term: Term,
    pub effect: Ground,
    pub state: S,
    pub sigma: StateEnv,
}

/// The dynamic half of an instantiation.
pub trait Instantiation {
    type State: Clone + fmt::Debug + fmt::Display;

    fn name(&self) -> String;
    fn signature(&self) -> &Signature;
    fn initial_state(&self) -> Self::State;

    /// `⟦p args⟧(σ)` on a saturated spine of values; `None` where no rule applies.
    fn prim(&self, p: &str, args: &[Arg<'_>], state: &Self::State, sigma: &StateEnv) -> Option<PrimStep<Self::State>>;

    /// `⊢ σ : Σ`.
    fn state_typed(&self, state: &Self::State, sigma: &StateEnv) -> bool;

    /// `(σ, σ′) ∈ ℐ(γ)`, or `None` if this instantiation has no interpretation.
    fn interpret(&self, _g: &Ground, _pre: &Self::State, _post: &Self::State) -> Option<bool> {
        None
    }

    fn domain(&self) -> &Domain {
        &self.signature().domain
    }
}

#[derive(Clone, Debug)]
pub struct Config<S> {
    pub state: S,
    pub term: Term,
    pub sigma: StateEnv,
}

#[derive(Clone, Debug)]
pub enum Step<S> {
    Next { config: Config<S>, label: Ground, rule: &'static str },
    Value,
    Stuck,
    PrimError(String),
}

/// A primitive applied to fewer arguments than its arity, all of them values.
fn partial_spine(t: &Term, sigma: &StateEnv) -> bool {
    match t.spine() {
        Some((p, args)) => {
            let arity = sigma.get(p).map(|s| s.arity).unwrap_or(0);
            args.len() < arity && args.iter().all(|a| matches!(a, Arg::Ty(_)) || matches!(a, Arg::Val(v) if v.is_value()))
        }
        None => false,
    }
}

fn evaluated(t: &Term, sigma: &StateEnv) -> bool {
    t.is_value() || partial_spine(t, sigma)
}

enum Redex<S> {
    Done(Term, Ground, &'static str, Option<(S, StateEnv)>),
    Value,
    Stuck,
    PrimError(String),
}

fn reduce<I: Instantiation>(inst: &I, t: &Term, state: &I::State, sigma: &StateEnv) -> Redex<I::State> {
    let unit = inst.domain().unit();
    let inside = |r: Redex<I::State>, wrap: &dyn Fn(Term) -> Term| match r {
        Redex::Done(t, g, rule, s) => Redex::Done(wrap(t), g, rule, s),
        other => other,
    };
    if t.is_value() {
        return Redex::Value;
    }
    if let Some((p, args)) = t.spine() {
        let arity = sigma.get(p).map(|s| s.arity).unwrap_or(0);
        if args.len() == arity && arity > 0 && args.iter().all(|a| !matches!(a, Arg::Val(v) if !v.is_value())) {
            return match inst.prim(p, &args, state, sigma) {
                Some(s) => Redex::Done(s.term, s.effect, "E-PrimApp", Some((s.state, s.sigma))),
                None => Redex::PrimError(format!("no rule for {t}")),
            };
        }
    }
    match t {
        Term::App(f, a) => {
            if !evaluated(f, sigma) {
                return inside(reduce(inst, f, state, sigma), &|f| Term::app(f, (**a).clone()));
            }
            if !a.is_value() {
                let rule_wrap = |a| Term::app((**f).clone(), a);
                return match reduce(inst, a, state, sigma) {
                    Redex::Done(t, g, rule, s) => {
                        let rule = if partial_spine(f, sigma) { "E-PrimArg" } else { rule };
                        Redex::Done(rule_wrap(t), g, rule, s)
                    }
                    other => other,
                };
            }
            match &**f {
                Term::Lam(x, _, body) => Redex::Done(body.subst(x, a), unit, "E-App", None),
                _ => Redex::Stuck,
            }
        }
        Term::TyApp(f, ty) => {
            if !evaluated(f, sigma) {
                return inside(reduce(inst, f, state, sigma), &|f| Term::tyapp(f, (**ty).clone()));
            }
            match &**f {
                Term::TyLam(a, _, body) => Redex::Done(body.subst_ty(a, ty), unit, "E-TyApp", None),
                _ => Redex::Stuck,
            }
        }
        Term::If(c, a, b) => match &**c {
            Term::Bool(true) => Redex::Done((**a).clone(), unit, "E-IfTrue", None),
            Term::Bool(false) => Redex::Done((**b).clone(), unit, "E-IfFalse", None),
            c2 if !c2.is_value() => inside(reduce(inst, c2, state, sigma), &|c| Term::if_(c, (**a).clone(), (**b).clone())),
            _ => Redex::Stuck,
        },
        Term::While(c, b) => {
            let again = Term::seq((**b).clone(), t.clone());
            Redex::Done(Term::if_((**c).clone(), again, Term::Unit), unit, "E-While", None)
        }
        _ => Redex::Stuck,
    }
}

/// One leftmost call-by-value step.
pub fn step<I: Instantiation>(inst: &I, c: &Config<I::State>) -> Step<I::State> {
    match reduce(inst, &c.term, &c.state, &c.sigma) {
        Redex::Value => Step::Value,
        Redex::Stuck => Step::Stuck,
        Redex::PrimError(m) => Step::PrimError(m),
        Redex::Done(term, label, rule, s) => {
            let (state, sigma) = s.unwrap_or_else(|| (c.state.clone(), c.sigma.clone()));
            Step::Next { config: Config { state, term, sigma }, label, rule }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Value,
    OutOfFuel,
    Stuck,
    PrimError,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Value => "value",
            Status::OutOfFuel => "out-of-fuel",
            Status::Stuck => "stuck",
            Status::PrimError => "prim-error",
        })
    }
}

#[derive(Clone, Debug)]
pub struct StepRecord<S> {
    pub rule: &'static str,
    pub label: Ground,
    /// Pre- and post-state, kept only when snapshots are requested.
    pub states: Option<(S, S)>,
    pub sigma_grew: bool,
}

#[derive(Clone, Debug)]
pub struct RunRecord<S> {
    pub status: Status,
    pub steps: Vec<StepRecord<S>>,
    /// Left fold of the labels under `▷`, or `None` once it became undefined.
    pub accumulated: Option<Ground>,
    /// Index of the step whose label could not be folded.
    pub fold_failure: Option<usize>,
    pub initial: S,
    pub last: Config<S>,
    pub error: Option<String>,
}

pub fn run<I: Instantiation>(inst: &I, program: &Term, fuel: usize, snapshots: bool) -> RunRecord<I::State> {
    run_observed(inst, program, fuel, snapshots, &mut |_, _, _| {})
}

/// `run`, calling `observe(index, label, config)` after every step.
pub fn run_observed<I: Instantiation>(
    inst: &I,
    program: &Term,
    fuel: usize,
    snapshots: bool,
    observe: &mut dyn FnMut(usize, &Ground, &Config<I::State>),
) -> RunRecord<I::State> {
    let q = inst.domain();
    let initial = inst.initial_state();
    let mut cfg = Config { state: initial.clone(), term: program.clone(), sigma: inst.signature().delta.clone() };
    let mut rec = RunRecord {
        status: Status::OutOfFuel,
        steps: Vec::new(),
        accumulated: Some(q.unit()),
        fold_failure: None,
        initial,
        last: cfg.clone(),
        error: None,
    };
    for i in 0..=fuel {
        let s = step(inst, &cfg);
        match s {
            Step::Value => {
                rec.status = Status::Value;
                break;
            }
            Step::Stuck => {
                rec.status = Status::Stuck;
                rec.error = Some(format!("stuck at {}", cfg.term));
                break;
            }
            Step::PrimError(m) => {
                rec.status = Status::PrimError;
                rec.error = Some(m);
                break;
            }
            Step::Next { config, label, rule } => {
                if i == fuel {
                    break;
                }
                rec.accumulated = match &rec.accumulated {
                    Some(acc) => {
                        let next = q.seq(acc, &label);
                        if next.is_none() {
                            rec.fold_failure = Some(i);
                        }
                        next
                    }
                    None => None,
                };
                observe(i, &label, &config);
                rec.steps.push(StepRecord {
                    rule,
                    label,
                    states: snapshots.then(|| (cfg.state.clone(), config.state.clone())),
                    sigma_grew: cfg.sigma.le(&config.sigma),
                });
                cfg = config;
            }
        }
    }
    rec.last = cfg;
    rec
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violation { step: usize, observed: String, expected: String, reason: String },
    NotApplicable,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Violation { .. })
    }

    fn violation(step: usize, observed: impl fmt::Display, expected: impl fmt::Display, reason: &str) -> Verdict {
        Verdict::Violation { step, observed: observed.to_string(), expected: expected.to_string(), reason: reason.to_string() }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Violation { step, .. } => write!(f, "violation@{step}"),
            Verdict::NotApplicable => write!(f, "n/a"),
        }
    }
}

/// A monitored run with its static effect and verdicts.
#[derive(Clone, Debug)]
pub struct Monitored<S> {
    pub record: RunRecord<S>,
    pub static_effect: Ground,
    pub safety: Verdict,
    /// Per-step preservation audit, when requested.
    pub audit: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MonitorError {
    #[error("{0}")]
    Type(#[from] TypeError),
    #[error("static effect {0} does not collapse to a ground effect")]
    OpenEffect(String),
}

fn closed_ground(e: &EffectExpr, q: &Domain) -> Result<Ground, MonitorError> {
    ground_of(e, q).ok_or_else(|| MonitorError::OpenEffect(e.to_string()))
}

/// Types the program, runs it, and checks the dynamic effect against the
/// static one. With `audit`, the residual term is re-typed after every step.
pub fn monitor_safety<I: Instantiation>(
    inst: &I,
    program: &Term,
    fuel: usize,
    audit: bool,
    snapshots: bool,
) -> Result<Monitored<I::State>, MonitorError> {
    let sig = inst.signature();
    let q = &sig.domain;
    let typing = infer_closed(sig, program)?;
    let static_effect = closed_ground(&typing.eff, q)?;

    let mut audit_verdict = audit.then_some(Verdict::Pass);
    let mut prev = static_effect.clone();
    let mut observe = |i: usize, label: &Ground, cfg: &Config<I::State>| {
        let Some(Verdict::Pass) = audit_verdict else { return };
        let residual = infer(sig, &Ctx::default(), &cfg.sigma, &cfg.term).ok().and_then(|t| ground_of(&t.eff, q));
        let Some(residual) = residual else {
            audit_verdict = Some(Verdict::violation(i, &cfg.term, &prev, "residual term does not type"));
            return;
        };
        match q.seq(label, &residual) {
            Some(total) if leq(q, &total, &prev) => prev = residual,
            Some(total) => audit_verdict = Some(Verdict::violation(i, total, &prev, "label ▷ residual exceeds the previous effect")),
            None => audit_verdict = Some(Verdict::violation(i, label, &residual, "label ▷ residual is undefined")),
        }
    };
    let record = run_observed(inst, program, fuel, snapshots, &mut observe);

    let n = record.steps.len();
    let safety = if let Some(i) = record.fold_failure {
        Verdict::violation(i, &record.steps[i].label, "a defined fold", "effect labels stopped composing")
    } else if let Some(i) = record.steps.iter().position(|s| !s.sigma_grew) {
        Verdict::violation(i, "Σ′", "Σ ≤ Σ′", "state environment shrank")
    } else if !inst.state_typed(&record.last.state, &record.last.sigma) {
        Verdict::violation(n, &record.last.state, "a well-typed state", "state does not type")
    } else {
        let acc = record.accumulated.clone().expect("no fold failure");
        match record.status {
            Status::Value if leq(q, &acc, &static_effect) => Verdict::Pass,
            Status::Value => Verdict::violation(n, &acc, &static_effect, "dynamic effect exceeds the static effect"),
            Status::OutOfFuel => {
                let residual = infer(sig, &Ctx::default(), &record.last.sigma, &record.last.term)
                    .ok()
                    .and_then(|t| ground_of(&t.eff, q));
                match residual.and_then(|r| q.seq(&acc, &r)) {
                    Some(total) if leq(q, &total, &static_effect) => Verdict::Pass,
                    Some(total) => Verdict::violation(n, total, &static_effect, "prefix ▷ residual exceeds the static effect"),
                    None => Verdict::violation(n, &record.last.term, &static_effect, "residual term does not type"),
                }
            }
            Status::Stuck => Verdict::violation(n, &record.last.term, "a step or a value", "stuck"),
            Status::PrimError => {
                Verdict::violation(n, record.error.as_deref().unwrap_or(""), "a primitive rule", "primitive progress failed")
            }
        }
    };
    Ok(Monitored { record, static_effect, safety, audit: audit_verdict })
}

/// Checks every step and the whole run against the instantiation's
/// interpretation. Needs a record taken with snapshots.
pub fn check_interpretation<I: Instantiation>(inst: &I, record: &RunRecord<I::State>) -> Verdict {
    for (i, s) in record.steps.iter().enumerate() {
        let Some((pre, post)) = &s.states else {
            return Verdict::violation(i, "no snapshot", "a snapshot", "run without snapshots");
        };
        match inst.interpret(&s.label, pre, post) {
            None => return Verdict::NotApplicable,
            Some(true) => {}
            Some(false) => return Verdict::violation(i, format!("{pre} → {post}"), &s.label, "step outside its interpretation"),
        }
    }
    let Some(acc) = &record.accumulated else {
        return Verdict::violation(record.steps.len(), "undefined", "a folded effect", "no accumulated effect");
    };
    match inst.interpret(acc, &record.initial, &record.last.state) {
        None => Verdict::NotApplicable,
        Some(true) => Verdict::Pass,
        Some(false) => Verdict::violation(
            record.steps.len(),
            format!("{} → {}", record.initial, record.last.state),
            acc,
            "run outside the interpretation of its effect",
        ),
    }
}

/// The machine-readable summary of a monitored run.
pub fn run_json<S>(m: &Monitored<S>, interpretation: &Verdict) -> Value {
    json!({
        "status": m.record.status.to_string(),
        "steps": m.record.steps.len(),
        "dynamic_effect": m.record.accumulated.as_ref().map(|g| g.to_string()),
        "static_effect": m.static_effect.to_string(),
        "safety": m.safety.to_string(),
        "interpretation": interpretation.to_string(),
    })
}

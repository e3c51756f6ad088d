use eqkit_core::instances::atomicity::Atomicity;
use eqkit_core::instances::lock::LockEffect;
use eqkit_core::quantale::rng;
use eqkit_core::{leq, Quantale};
use rand::Rng as _;

use eqkit_lang::calculus::infer_closed;
use eqkit_lang::effect::ground_of;
use eqkit_lang::runtime::{
    check_interpretation, monitor_safety, run, run_json, step, Config, Instantiation, Status, Step, Verdict, DEFAULT_FUEL,
};
use eqkit_lang::systems::{gen, parse_program, History, HistoryState, LockAtom};
use eqkit_lang::{Ground, Term};

fn first_step<I: Instantiation>(inst: &I, src: &str) -> (Term, Ground, &'static str) {
    let term = parse_program(inst, src).unwrap();
    let cfg = Config { state: inst.initial_state(), term, sigma: inst.signature().delta.clone() };
    match step(inst, &cfg) {
        Step::Next { config, label, rule } => (config.term, label, rule),
        other => panic!("no step: {other:?}"),
    }
}

#[test]
fn while_unfolds_to_if() {
    let inst = History::new(&["a"]);
    let (t, label, rule) = first_step(&inst, "(while false (ev a))");
    let expected = parse_program(&inst, "(if false (seq (ev a) (while false (ev a))) unit)").unwrap();
    assert_eq!(t, expected);
    assert_eq!(rule, "E-While");
    assert_eq!(label, inst.domain().unit());
}

#[test]
fn beta_step_has_unit_label() {
    let inst = History::new(&["a"]);
    let (t, label, rule) = first_step(&inst, "((lam (x bool) x) true)");
    assert_eq!((t, rule), (Term::Bool(true), "E-App"));
    assert_eq!(label, inst.domain().unit());
}

#[test]
fn a_value_runs_to_itself_with_unit_effect() {
    let inst = LockAtom::new();
    let rec = run(&inst, &Term::Bool(true), DEFAULT_FUEL, false);
    assert_eq!(rec.status, Status::Value);
    assert!(rec.steps.is_empty());
    assert_eq!(rec.accumulated, Some(inst.domain().unit()));
}

#[test]
fn acquire_release_monitors_clean() {
    let inst = LockAtom::new();
    let prog = parse_program(&inst, "(let (l (new_lock unit)) (seq (acquire l) (release l)))").unwrap();
    let m = monitor_safety(&inst, &prog, DEFAULT_FUEL, true, true).unwrap();
    assert_eq!(m.safety, Verdict::Pass);
    assert_eq!(m.audit, Some(Verdict::Pass));
    assert_eq!(m.static_effect.to_string(), "(∅,∅)⊗A");
    assert_eq!(check_interpretation(&inst, &m.record), Verdict::Pass);
}

#[test]
fn lockatom_corpus_is_safe() {
    let inst = LockAtom::new();
    let q = inst.domain();
    let mut r = rng(0);
    for i in 0..120 {
        let prog = gen::lockatom_program(&mut r);
        let m = monitor_safety(&inst, &prog, DEFAULT_FUEL, true, false).unwrap_or_else(|e| panic!("#{i}: {e}\n{prog}"));
        assert_eq!(m.safety, Verdict::Pass, "#{i}: {prog}");
        assert_eq!(m.audit, Some(Verdict::Pass), "#{i}: {prog}");
        assert!(matches!(m.record.status, Status::Value | Status::OutOfFuel));
        let Ground::Pair(locks, _) = &m.static_effect else { panic!("not a product") };
        if m.record.status == Status::Value && **locks == Ground::Locks(LockEffect::unit()) {
            assert!(m.record.last.state.held().is_empty(), "#{i} leaves locks held");
        }
        assert!(leq(q, m.record.accumulated.as_ref().unwrap(), &m.static_effect) || m.record.status == Status::OutOfFuel);
    }
}

#[test]
fn faulty_release_is_caught() {
    let inst = LockAtom::with_faulty_release().with_universe(&["m"]);
    let prog = parse_program(&inst, "(seq (acquire m) (release m))").unwrap();
    let m = monitor_safety(&inst, &prog, DEFAULT_FUEL, true, false).unwrap();
    assert_eq!(m.static_effect.to_string(), "(∅,{m})⊗R");
    assert_eq!(m.record.accumulated.as_ref().unwrap().to_string(), "(∅,∅)⊗A");
    assert!(matches!(m.safety, Verdict::Violation { .. }), "{:?}", m.safety);
    let Some(Verdict::Violation { observed, expected, .. }) = &m.audit else { panic!("{:?}", m.audit) };
    assert_eq!((observed.as_str(), expected.as_str()), ("({m},∅)⊗L", "(∅,∅)⊗B"));
}

#[test]
fn faulty_release_alone_exceeds_unit() {
    let inst = LockAtom::with_faulty_release().with_universe(&["m"]);
    let q = inst.domain();
    let released = Ground::pair(Ground::Locks(LockEffect::release(Term::prim("m"))), Ground::Atom(Atomicity::L));
    let declared = ground_of(&infer_closed(inst.signature(), &parse_program(&inst, "(release m)").unwrap()).unwrap().eff, q).unwrap();
    assert_eq!(declared, q.unit());
    assert!(!leq(q, &released, &declared));
}

#[test]
fn history_corpus_respects_interpretation() {
    let events = ["a", "b", "c"];
    let inst = History::new(&events);
    let mut r = rng(0);
    for i in 0..60 {
        let prog = gen::history_program(&mut r, &events, 4);
        let m = monitor_safety(&inst, &prog, DEFAULT_FUEL, true, true).unwrap_or_else(|e| panic!("#{i}: {e}\n{prog}"));
        assert_eq!(m.record.status, Status::Value, "#{i}");
        assert_eq!(m.safety, Verdict::Pass, "#{i}");
        assert_eq!(m.audit, Some(Verdict::Pass), "#{i}");
        let Ground::Trace(h) = &m.static_effect else { panic!("not a trace") };
        let trace: Vec<Term> = m.record.last.state.trace.iter().map(|c| Term::prim(c)).collect();
        assert!(h.accepts(&trace), "#{i}: {} ∉ {h}", m.record.last.state);
        assert_eq!(check_interpretation(&inst, &m.record), Verdict::Pass, "#{i}");
    }
}

#[test]
fn run_json_has_the_documented_keys() {
    let inst = History::new(&["a", "b"]);
    let prog = parse_program(&inst, "(seq (ev a) (ev b))").unwrap();
    let m = monitor_safety(&inst, &prog, DEFAULT_FUEL, false, true).unwrap();
    let v = run_json(&m, &check_interpretation(&inst, &m.record));
    assert_eq!(v["status"], "value");
    assert_eq!(v["steps"], m.record.steps.len());
    assert_eq!(v["safety"], "pass");
    assert_eq!(v["interpretation"], "pass");
    assert_eq!(v["static_effect"], v["dynamic_effect"]);
}

fn random_trace_effect(inst: &History, r: &mut eqkit_core::quantale::Rng) -> Ground {
    loop {
        let e = gen::random_effect(inst.domain(), &[], 4, r);
        if let Some(g) = ground_of(&e, inst.domain()) {
            return g;
        }
    }
}

fn random_trace(r: &mut eqkit_core::quantale::Rng, max: usize) -> Vec<String> {
    let n = r.gen_range(0..=max);
    (0..n).map(|_| if r.gen() { "a".to_string() } else { "b".to_string() }).collect()
}

/// `ℐ(x▷y)` is relational composition and `ℐ(x⊔y)` is union, checked by
/// membership on sampled state pairs. Intermediate states are the prefixes
/// of the post-state that extend the pre-state.
#[test]
fn history_interpretation_laws() {
    let inst = History::new(&["a", "b"]);
    let q = inst.domain();
    let mut r = rng(0);
    let st = |t: &[String]| HistoryState { trace: t.to_vec() };
    for _ in 0..300 {
        let (x, y) = (random_trace_effect(&inst, &mut r), random_trace_effect(&inst, &mut r));
        let pre = random_trace(&mut r, 2);
        let mut post = pre.clone();
        post.extend(random_trace(&mut r, 3));
        let (s, t) = (st(&pre), st(&post));

        let composed = (pre.len()..=post.len()).any(|k| {
            let mid = st(&post[..k]);
            inst.interpret(&x, &s, &mid) == Some(true) && inst.interpret(&y, &mid, &t) == Some(true)
        });
        assert_eq!(inst.interpret(&q.seq(&x, &y).unwrap(), &s, &t), Some(composed), "{x} ▷ {y} on {s} → {t}");

        let union = inst.interpret(&x, &s, &t) == Some(true) || inst.interpret(&y, &s, &t) == Some(true);
        assert_eq!(inst.interpret(&q.join(&x, &y).unwrap(), &s, &t), Some(union), "{x} ⊔ {y} on {s} → {t}");
        assert_eq!(inst.interpret(&q.unit(), &s, &t), Some(s == t));
    }
}

#[test]
fn runs_are_deterministic() {
    let inst = LockAtom::new();
    let mut r = rng(9);
    for _ in 0..20 {
        let prog = gen::lockatom_program(&mut r);
        let a = run(&inst, &prog, 2000, false);
        let b = run(&inst, &prog, 2000, false);
        assert_eq!(a.status, b.status);
        assert_eq!(a.accumulated, b.accumulated);
        assert_eq!(a.last.term, b.last.term);
        assert_eq!(a.steps.iter().map(|s| s.rule).collect::<Vec<_>>(), b.steps.iter().map(|s| s.rule).collect::<Vec<_>>());
    }
}

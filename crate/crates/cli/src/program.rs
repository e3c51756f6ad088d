use serde_json::{json, Value};

use eqkit_lang::calculus::{infer_closed, Typing};
use eqkit_lang::runtime::{check_interpretation, monitor_safety, run_json, Instantiation, MonitorError, Status, Verdict};
use eqkit_lang::systems::lambda_trace::{self, LtError};
use eqkit_lang::systems::{parse_program, CritSystem, History, LockAtom};
use eqkit_lang::{EffectExpr, Term, Type};

use crate::{read_input, Failure, ProgramArgs, RunArgs, System, TranslateArgs, OK, UNSAFE, USAGE};

macro_rules! with_system {
    ($args:expr, |$inst:ident| $body:expr) => {{
        let alphabet: Vec<&str> = $args.common.alphabet.iter().map(String::as_str).collect();
        match $args.system {
            System::Lockatom => {
                let $inst = LockAtom::new();
                $body
            }
            System::LockatomFaulty => {
                let $inst = LockAtom::with_faulty_release();
                $body
            }
            System::Atomicity => {
                let $inst = LockAtom::movers_only();
                $body
            }
            System::Crit => {
                let $inst = CritSystem::new();
                $body
            }
            System::History => {
                let $inst = History::new(&alphabet);
                $body
            }
            System::KaRegex => {
                let $inst = History::ka(&alphabet);
                $body
            }
        }
    }};
}

/// The latent effect of the last arrow reached through codomains.
fn innermost_latent(t: &Type) -> Option<&EffectExpr> {
    match t {
        Type::Pi(_, _, eff, cod) | Type::Forall(_, _, eff, cod) => innermost_latent(cod).or(Some(eff)),
        _ => None,
    }
}

fn parse<I: Instantiation>(inst: &I, a: &ProgramArgs) -> Result<Term, Failure> {
    let src = read_input(&a.file, &a.expr)?;
    parse_program(inst, &src).map_err(|e| Failure::usage(format!("parse error: {e}")))
}

fn typing_json(inst_name: &str, t: &Typing) -> Value {
    json!({
        "system": inst_name,
        "type": t.ty.to_string(),
        "effect": t.eff.to_string(),
        "latent": innermost_latent(&t.ty).map(|e| e.to_string()),
        "rules": t.rules,
    })
}

fn check_with<I: Instantiation>(inst: &I, a: &ProgramArgs) -> Result<u8, Failure> {
    let prog = parse(inst, a)?;
    let t = infer_closed(inst.signature(), &prog).map_err(|e| Failure::rejected(format!("type error: {e}")))?;
    if a.common.json {
        println!("{}", typing_json(&inst.name(), &t));
    } else {
        println!("type:   {}", t.ty);
        println!("effect: {}", t.eff);
        if let Some(l) = innermost_latent(&t.ty) {
            println!("latent: {l}");
        }
    }
    Ok(OK)
}

pub fn check(a: &ProgramArgs) -> Result<u8, Failure> {
    if a.system == System::History || a.system == System::KaRegex {
        validate_alphabet(&a.common.alphabet)?;
    }
    with_system!(a, |inst| check_with(&inst, a))
}

fn validate_alphabet(alphabet: &[String]) -> Result<(), Failure> {
    if alphabet.is_empty() || alphabet.iter().any(|c| c.is_empty()) {
        return Err(Failure::usage("the alphabet must list at least one nonempty event name"));
    }
    Ok(())
}

fn explain(label: &str, v: &Verdict) {
    if let Verdict::Violation { step, observed, expected, reason } = v {
        println!("{label} violation at step {step}: {reason}; observed {observed}, expected {expected}");
    }
}

fn run_with<I: Instantiation>(inst: &I, a: &RunArgs) -> Result<u8, Failure> {
    let p = &a.program;
    let prog = parse(inst, p)?;
    if a.unchecked {
        return run_unchecked(inst, &prog, a);
    }
    let m = monitor_safety(inst, &prog, a.fuel, a.audit, true).map_err(|e| match e {
        MonitorError::Type(e) => Failure::rejected(format!("type error: {e}")),
        e @ MonitorError::OpenEffect(_) => Failure::rejected(e.to_string()),
    })?;
    let interp = check_interpretation(inst, &m.record);
    let ok = m.safety.passed() && interp.passed() && m.audit.as_ref().is_none_or(Verdict::passed);
    if p.common.json {
        let mut v = run_json(&m, &interp);
        if let Some(audit) = &m.audit {
            v["audit"] = json!(audit.to_string());
        }
        println!("{v}");
    } else {
        println!("status:         {}", m.record.status);
        println!("steps:          {}", m.record.steps.len());
        println!("result:         {}", m.record.last.term);
        println!("final state:    {}", m.record.last.state);
        println!("dynamic effect: {}", m.record.accumulated.as_ref().map_or("undefined".into(), |g| g.to_string()));
        println!("static effect:  {}", m.static_effect);
        println!("safety:         {}", m.safety);
        println!("interpretation: {interp}");
        if let Some(audit) = &m.audit {
            println!("audit:          {audit}");
        }
        explain("safety", &m.safety);
        explain("interpretation", &interp);
        if let Some(audit) = &m.audit {
            explain("audit", audit);
        }
    }
    Ok(if ok { OK } else { UNSAFE })
}

fn run_unchecked<I: Instantiation>(inst: &I, prog: &Term, a: &RunArgs) -> Result<u8, Failure> {
    let rec = eqkit_lang::runtime::run(inst, prog, a.fuel, true);
    let n = rec.steps.len();
    let safety = match rec.status {
        Status::Stuck | Status::PrimError => format!("violation@{n}"),
        _ if rec.fold_failure.is_some() => format!("violation@{}", rec.fold_failure.unwrap_or(n)),
        _ => "pass".to_string(),
    };
    let interp = check_interpretation(inst, &rec);
    let dynamic = rec.accumulated.as_ref().map(|g| g.to_string());
    if a.program.common.json {
        println!(
            "{}",
            json!({
                "status": rec.status.to_string(),
                "steps": n,
                "dynamic_effect": dynamic,
                "static_effect": null,
                "safety": safety,
                "interpretation": interp.to_string(),
            })
        );
    } else {
        println!("status:         {}", rec.status);
        println!("steps:          {n}");
        println!("stopped at:     {}", rec.last.term);
        println!("final state:    {}", rec.last.state);
        println!("dynamic effect: {}", dynamic.as_deref().unwrap_or("undefined"));
        println!("safety:         {safety}");
        println!("interpretation: {interp}");
        if let Some(e) = &rec.error {
            println!("primitive error: {e}");
        }
    }
    Ok(if safety == "pass" && interp.passed() { OK } else { UNSAFE })
}

pub fn run(a: &RunArgs) -> Result<u8, Failure> {
    let p = &a.program;
    if p.system == System::History || p.system == System::KaRegex {
        validate_alphabet(&p.common.alphabet)?;
    }
    with_system!(p, |inst| run_with(&inst, a))
}

pub fn translate(a: &TranslateArgs) -> Result<u8, Failure> {
    let src = read_input(&a.file, &a.expr)?;
    let alphabet: Option<Vec<&str>> = a.alphabet.as_ref().map(|v| v.iter().map(String::as_str).collect());
    let fail = |e: LtError| match e {
        LtError::Parse(_) | LtError::OutsideFragment(_) => Failure { code: USAGE, msg: e.to_string() },
        e => Failure::rejected(format!("λ_trace type error: {e}")),
    };
    let p = lambda_trace::parse(&src, alphabet.as_deref()).map_err(fail)?;
    let (ty, h) = lambda_trace::check(&[], &p.term).map_err(fail)?;
    let core = lambda_trace::translate(&p.term).map_err(fail)?;
    if a.json {
        println!(
            "{}",
            json!({ "term": core.to_string(), "type": ty.to_string(), "history": h.to_string(), "events": p.events })
        );
    } else {
        println!("{core}");
        println!(";; {ty} with history {h}");
    }
    Ok(OK)
}

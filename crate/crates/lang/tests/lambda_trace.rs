use eqkit_lang::calculus::{infer_closed, type_equiv};
use eqkit_lang::runtime::{monitor_safety, Instantiation, Verdict, DEFAULT_FUEL};
use eqkit_lang::systems::lambda_trace::{check, parse, translate, translate_type};
use eqkit_lang::systems::{gen, History};
use eqkit_lang::{EffectExpr, Ground};

const EVENTS: &[&str] = &["a", "b", "c"];

#[test]
fn embedding_preserves_types_and_histories() {
    assert!(gen::LAMBDA_TRACE_CORPUS.len() >= 10);
    let inst = History::new(EVENTS);
    for src in gen::LAMBDA_TRACE_CORPUS {
        let p = parse(src, Some(EVENTS)).unwrap_or_else(|e| panic!("{src}: {e}"));
        let (ty, h) = check(&[], &p.term).unwrap_or_else(|e| panic!("{src}: {e}"));
        let core = translate(&p.term).unwrap();
        let t = infer_closed(inst.signature(), &core).unwrap_or_else(|e| panic!("{src}: {e}"));
        assert!(type_equiv(&t.ty, &translate_type(&ty), inst.domain()), "{src}: {} vs {}", t.ty, translate_type(&ty));
        let EffectExpr::Ground(Ground::Trace(h2)) = &t.eff else { panic!("{src}: effect {} is not a trace", t.eff) };
        assert!(h.subset_of(h2) && h2.subset_of(&h), "{src}: {h} vs {h2}");
    }
}

#[test]
fn translated_programs_run_safely() {
    let inst = History::new(EVENTS);
    for src in gen::LAMBDA_TRACE_CORPUS {
        let core = translate(&parse(src, Some(EVENTS)).unwrap().term).unwrap();
        let m = monitor_safety(&inst, &core, DEFAULT_FUEL, true, true).unwrap();
        assert_eq!(m.safety, Verdict::Pass, "{src}");
        assert_eq!(m.audit, Some(Verdict::Pass), "{src}");
    }
}

#[test]
fn skalka_example_file() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../programs/skalka.lt")).unwrap();
    let p = parse(&src, None).unwrap();
    assert_eq!(p.events, vec!["a", "b", "c"]);
    let (_, h) = check(&[], &p.term).unwrap();
    let inst = History::new(&["a", "b", "c"]);
    let t = infer_closed(inst.signature(), &translate(&p.term).unwrap()).unwrap();
    let EffectExpr::Ground(Ground::Trace(h2)) = &t.eff else { panic!() };
    assert!(h.subset_of(h2) && h2.subset_of(&h));
}

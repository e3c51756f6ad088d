use eqkit_core::automata::{parse_regex, Dfa, Regex};
use eqkit_core::instances::regex::{random_regex, RegexEffect};
use eqkit_core::quantale::rng;

/// Backtracking matcher over the syntax tree, independent of automata.
fn matches(r: &Regex<String>, w: &[String]) -> bool {
    match r {
        Regex::Empty => false,
        Regex::Eps => w.is_empty(),
        Regex::Sym(s) => w.len() == 1 && w[0] == *s,
        Regex::Alt(a, b) => matches(a, w) || matches(b, w),
        Regex::Cat(a, b) => (0..=w.len()).any(|i| matches(a, &w[..i]) && matches(b, &w[i..])),
        Regex::Star(a) => w.is_empty() || (1..=w.len()).any(|i| matches(a, &w[..i]) && matches(r, &w[i..])),
    }
}

fn words(alphabet: &[&str], max: usize) -> Vec<Vec<String>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            for a in alphabet {
                let mut v: Vec<String> = w.clone();
                v.push(a.to_string());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn w(s: &str) -> Vec<String> {
    s.chars().map(|c| c.to_string()).collect()
}

#[test]
fn iterated_union_versus_union_of_iterations() {
    let a = RegexEffect::sym("a".to_string());
    let b = RegexEffect::sym("b".to_string());
    assert!(a.join(&b).star().accepts(&w("ab")));
    assert!(!a.star().join(&b.star()).accepts(&w("ab")));
}

#[test]
fn star_of_union_equals_star_of_stars() {
    let x = parse_regex("(a|b)*").unwrap();
    let y = parse_regex("(a*b*)*").unwrap();
    for word in words(&["a", "b"], 7) {
        assert_eq!(matches(&x, &word), matches(&y, &word));
    }
    assert_eq!(RegexEffect::from_regex(x), RegexEffect::from_regex(y));
}

#[test]
fn dfa_membership_agrees_with_backtracking() {
    let mut r = rng(1);
    let alphabet = ["a".to_string(), "b".to_string(), "c".to_string()];
    let ws = words(&["a", "b", "c"], 4);
    for _ in 0..150 {
        let re = random_regex(&alphabet, 3, true, &mut r);
        let d = Dfa::from_regex(&re);
        for word in &ws {
            assert_eq!(d.accepts(word), matches(&re, word), "{re} on {word:?}");
        }
    }
}

#[test]
fn equal_canonical_forms_have_equal_languages() {
    let mut r = rng(2);
    let alphabet = ["a".to_string(), "b".to_string()];
    let ws = words(&["a", "b"], 5);
    let mut hits = 0;
    for _ in 0..400 {
        let x = random_regex(&alphabet, 2, false, &mut r);
        let y = random_regex(&alphabet, 2, false, &mut r);
        let same_dfa = Dfa::from_regex(&x) == Dfa::from_regex(&y);
        let same_words = ws.iter().all(|w| matches(&x, w) == matches(&y, w));
        if same_dfa {
            hits += 1;
            assert!(same_words, "{x} vs {y}");
        }
        assert_eq!(same_dfa, Dfa::from_regex(&x).bisimilar(&Dfa::from_regex(&y)));
    }
    assert!(hits > 0);
}

#[test]
fn syntactic_star_is_the_least_iterable_above() {
    let x = RegexEffect::from_regex(parse_regex("ab|c").unwrap());
    let s = x.star();
    let cands = ["(ab|c)*", "(a|b|c)*", "(ab|c|d)*", "(ab)*c*(ab|c)*"];
    for c in cands {
        let y = RegexEffect::from_regex(parse_regex(c).unwrap());
        assert!(s.subset_of(&y), "{c}");
    }
    assert!(!s.subset_of(&x.join(&RegexEffect::eps())));
}

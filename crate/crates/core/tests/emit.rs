mod common;

use common::*;
use zrefine::emit::{emit_sal, normalize};
use zrefine::refine::ConditionKind;
use zrefine::translate::{derive_bounds, translate, Overrides};
use zrefine::zparse::parse_spec;

fn diff_lines(a: &str, b: &str) -> usize {
    let (a, b) = (normalize(a), normalize(b));
    if a == b {
        return 0;
    }
    // Report where the normalized texts part ways.
    let at = a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count();
    eprintln!("differs at char {at}:\n  {}\n  {}", &a[at.saturating_sub(40)..], &b[at.saturating_sub(40)..]);
    1
}

#[test]
fn concrete_translation_matches_golden() {
    let c = parse_spec(&corpus("setseq/concrete.tex")).unwrap();
    let b = derive_bounds(&[&c], &Overrides::default()).unwrap();
    let text = emit_sal(&translate(&c, &b).unwrap(), "c");
    assert_eq!(diff_lines(&text, &corpus("setseq/golden/concrete.sal")), 0);
}

#[test]
fn correctness_system_matches_golden() {
    let p = problem(&setseq(), &Overrides::default()).unwrap();
    let sys = p.build(ConditionKind::Correctness).unwrap();
    let text = emit_sal(&sys.model, "r2corr");
    assert_eq!(diff_lines(&text, &corpus("setseq/golden/r2corr.sal")), 0);
}

#[test]
fn normalization_ignores_layout_only() {
    assert_eq!(normalize("a  AND\n   b"), normalize("a AND b"));
    assert_eq!(normalize("remove(l, p?)"), normalize("remove(l,p?)"));
    assert_ne!(normalize("a AND b"), normalize("aAND b"));
}

#[test]
fn every_corpus_system_emits() {
    for s in [setseq(), boxoffice()] {
        let p = problem(&s, &Overrides::default()).unwrap();
        for k in ConditionKind::ALL {
            let sys = p.build(k).unwrap();
            let text = emit_sal(&sys.model, k.context());
            assert!(text.starts_with(&format!("{} : CONTEXT = BEGIN", k.context())));
            assert!(text.trim_end().ends_with("END;\nEND"));
            for c in &sys.model.commands {
                assert!(text.contains(&format!("   {} :\n", c.label)));
            }
        }
    }
}

#[test]
fn output_variables_are_declared() {
    let k = parse_spec(&corpus("boxoffice/kurbel.tex")).unwrap();
    let b = derive_bounds(&[&k], &Overrides::default()).unwrap();
    let text = emit_sal(&translate(&k, &b).unwrap(), "kurbel");
    assert!(text.contains(" OUTPUT t__ : Ticket\n"), "{text}");
    assert!(text.contains("Booked : TYPE = {yes, no};"));
}

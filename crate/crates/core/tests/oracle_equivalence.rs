mod common;

use std::collections::BTreeMap;

use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use zrefine::mc::{check_refinement, oracle_downward_sim, CheckOptions, Verdict};
use zrefine::refine::ConditionKind;
use zrefine::translate::Overrides;

fn opts() -> CheckOptions {
    CheckOptions {
        workers: 2,
        ..CheckOptions::default()
    }
}

/// Per-condition verdicts from both routes.
fn both(s: &Sources, ov: &Overrides) -> (Vec<Verdict>, Vec<Verdict>) {
    let p = problem(s, ov).expect("problem builds");
    let r = check_refinement(&p, &opts()).unwrap();
    let o = oracle_downward_sim(&p, p.bounds.enum_cap).unwrap();
    let kinds = ConditionKind::ALL;
    (
        kinds.iter().map(|&k| r.condition(k).verdict).collect(),
        kinds.iter().map(|&k| o.verdict_of(k)).collect(),
    )
}

#[test]
fn corpus_examples_agree() {
    use Verdict::*;
    let (c, o) = both(&setseq(), &Overrides::default());
    assert_eq!(c, vec![Pass, Pass, Pass]);
    assert_eq!(c, o);
    let (c, o) = both(&boxoffice(), &Overrides::default());
    assert_eq!(c, vec![Pass, Pass, Fail]);
    assert_eq!(c, o);
}

#[test]
fn identity_refinement_agrees() {
    let (c, o) = both(&identity(), &Overrides::default());
    assert_eq!(c, vec![Verdict::Pass; 3]);
    assert_eq!(c, o);
}

#[test]
fn broken_retrieve_is_caught_by_both() {
    let mut s = setseq();
    s.retrieve = s.retrieve.replace("s = \\ran l", "s = \\emptyset");
    let p = problem(&s, &Overrides::default()).unwrap();
    let o = oracle_downward_sim(&p, p.bounds.enum_cap).unwrap();
    let w = o.violation.clone().expect("violated");
    // A full sequence related to the empty set: AEnter is enabled, CEnter not.
    assert_eq!(w.condition, ConditionKind::Applicability);
    assert_eq!(w.pair, Some(("AEnter".into(), "CEnter".into())));
    assert!(w.state.iter().any(|(n, v)| n == "s" && v == "{}"));
    let r = check_refinement(&p, &opts()).unwrap();
    for k in ConditionKind::ALL {
        assert_eq!(r.condition(k).verdict, o.verdict_of(k), "{k}");
    }
}

#[test]
fn random_mutations_agree() {
    let mut rng = StdRng::seed_from_u64(7);
    let base = setseq();
    let mut tally: BTreeMap<Vec<Verdict>, usize> = BTreeMap::new();
    for _ in 0..40 {
        let (s, idx) = mutate(&base, &mut rng);
        let (c, o) = both(&s, &small());
        assert_eq!(c, o, "mutations {idx:?}");
        *tally.entry(c).or_default() += 1;
    }
    // The mutants are not all alike.
    assert!(tally.len() >= 3, "{tally:?}");
}

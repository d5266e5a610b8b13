mod common;

use common::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use zrefine::ir::{CtlFormula, Expr};
use zrefine::mc::{check_ctl, explore, replay, At, ExploreOptions, Verdict};
use zrefine::mc::{check_refinement, CheckOptions};
use zrefine::refine::ConditionKind;
use zrefine::translate::Overrides;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn duality_and_replay(seed in any::<u64>()) {
        kernel_properties(seed);
    }
}

#[test]
fn ax_false_fails_with_a_successor() {
    let mut rng = StdRng::seed_from_u64(11);
    let m = loop {
        let m = random_model(&mut rng);
        if m.else_frame.is_some() {
            break m;
        }
    };
    let space = explore(&m, &ExploreOptions::default()).unwrap();
    if space.is_empty() {
        return;
    }
    let f = CtlFormula::ax(CtlFormula::atom(Expr::Bool(false)));
    let out = check_ctl(&space, &m, &f, At::Initial).unwrap();
    let ev = out.violation.unwrap();
    assert_eq!(ev.trace().len(), 1);
}

#[test]
fn init_obligation_holds_at_every_initial_state() {
    let p = problem(&setseq(), &Overrides::default()).unwrap();
    let sys = p.build(ConditionKind::Init).unwrap();
    let space = explore(&sys.model, &ExploreOptions::default()).unwrap();
    let out = check_ctl(&space, &sys.model, &sys.obligation, At::Initial).unwrap();
    assert!(out.holds);
    assert_eq!(out.checked, space.initial.len());
}

#[test]
fn box_office_counterexample_replays() {
    let p = problem(&boxoffice(), &Overrides::default()).unwrap();
    let r = check_refinement(&p, &CheckOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let c = r.condition(ConditionKind::Correctness);
    let cx = c.counterexample.as_ref().unwrap();
    let sys = p.build(ConditionKind::Correctness).unwrap();
    assert!(!replay(&sys.model, &sys.obligation, &cx.values, p.bounds.enum_cap).unwrap());
    // The concrete arrival hands out a ticket the abstract one cannot.
    let labels: Vec<&str> = cx.trace.iter().map(|s| s.label.as_str()).collect();
    assert_eq!(labels, ["MArrive", "KArrive"]);
    let out = &cx.trace[1].changes;
    assert!(out.iter().any(|(n, _, _)| n == "bkd"));
}

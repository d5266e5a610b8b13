//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use zrefine::emit::{emit_sal, normalize};
use zrefine::mc::{
    check_refinement, explore, oracle_downward_sim, replay, CheckOptions, ExploreOptions, Verdict,
};
use zrefine::refine::ConditionKind;
use zrefine::translate::{derive_bounds, translate, Overrides};
use zrefine::zparse::parse_spec;

const TIME_LIMIT: Duration = Duration::from_secs(60);
const MUTANTS: usize = 100;
const MUTATION_SEED: u64 = 2024;
const KERNEL_PAIRS: u64 = 1000;
const KERNEL_SEED: u64 = 0x5eed;
const WORKERS: [usize; 3] = [1, 4, 8];
const RANDOM_WORKER_MODELS: usize = 50;

fn verdicts(s: &Sources, ov: &Overrides) -> (Vec<Verdict>, Vec<Verdict>) {
    let p = problem(s, ov).expect("problem builds");
    let r = check_refinement(&p, &CheckOptions::default()).unwrap();
    let o = oracle_downward_sim(&p, p.bounds.enum_cap).unwrap();
    (
        ConditionKind::ALL.iter().map(|&k| r.condition(k).verdict).collect(),
        ConditionKind::ALL.iter().map(|&k| o.verdict_of(k)).collect(),
    )
}

fn default_bounds_pass() -> String {
    let t = Instant::now();
    let p = problem(&setseq(), &Overrides::default()).unwrap();
    let r = check_refinement(&p, &CheckOptions::default()).unwrap();
    let took = t.elapsed();
    let got: Vec<Verdict> = r.conditions.iter().map(|c| c.verdict).collect();
    assert_eq!(got, vec![Verdict::Pass; 3]);
    assert!(took < TIME_LIMIT, "took {took:?}");
    let states: Vec<String> = r.conditions.iter().map(|c| c.states.to_string()).collect();
    format!("{got:?} in {:.2}s (limit {}s), states {}", took.as_secs_f64(), TIME_LIMIT.as_secs(), states.join("/"))
}

fn box_office_fails_with_replayable_counterexample() -> String {
    let p = problem(&boxoffice(), &Overrides::default()).unwrap();
    let r = check_refinement(&p, &CheckOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let failed = r
        .conditions
        .iter()
        .find(|c| c.verdict == Verdict::Fail)
        .expect("a failing condition");
    let cx = failed.counterexample.as_ref().expect("counterexample");
    let sys = p.build(failed.condition).unwrap();
    assert!(!replay(&sys.model, &sys.obligation, &cx.values, p.bounds.enum_cap).unwrap());
    let space = explore(&sys.model, &ExploreOptions::default()).unwrap();
    assert!(space.initial.contains(&cx.state));
    steps_are_edges(&space, &cx.evidence);
    let o = oracle_downward_sim(&p, p.bounds.enum_cap).unwrap();
    for k in ConditionKind::ALL {
        assert_eq!(o.verdict_of(k), r.condition(k).verdict, "{k}");
    }
    assert_eq!(o.violation.as_ref().unwrap().condition, failed.condition);
    let labels: Vec<&str> = cx.trace.iter().map(|s| s.label.as_str()).collect();
    format!("{} fails at state {}, trace {}, replay and oracle agree", failed.condition, cx.state, labels.join(" -> "))
}

fn oracle_equivalence() -> String {
    let mut cases = 0;
    for (name, s) in [("set/sequence", setseq()), ("box office", boxoffice()), ("identity", identity())] {
        let (c, o) = verdicts(&s, &Overrides::default());
        assert_eq!(c, o, "{name}");
        cases += 1;
    }
    let mut rng = StdRng::seed_from_u64(MUTATION_SEED);
    let base = setseq();
    let mut failing = 0;
    for _ in 0..MUTANTS {
        let (s, idx) = mutate(&base, &mut rng);
        let (c, o) = verdicts(&s, &small());
        assert_eq!(c, o, "mutations {idx:?}");
        failing += usize::from(c.contains(&Verdict::Fail));
        cases += 1;
    }
    format!("{cases}/{cases} agree (3 fixed, {MUTANTS} mutants of which {failing} fail, seed {MUTATION_SEED})")
}

fn emitter_goldens() -> String {
    let c = parse_spec(&corpus("setseq/concrete.tex")).unwrap();
    let b = derive_bounds(&[&c], &Overrides::default()).unwrap();
    let concrete = emit_sal(&translate(&c, &b).unwrap(), "c");
    assert_eq!(normalize(&concrete), normalize(&corpus("setseq/golden/concrete.sal")), "concrete");
    let p = problem(&setseq(), &Overrides::default()).unwrap();
    let corr = emit_sal(&p.build(ConditionKind::Correctness).unwrap().model, "r2corr");
    assert_eq!(normalize(&corr), normalize(&corpus("setseq/golden/r2corr.sal")), "r2corr");
    "concrete.sal and r2corr.sal: zero diff after normalization".into()
}

fn kernel_and_workers() -> String {
    for i in 0..KERNEL_PAIRS {
        kernel_properties(KERNEL_SEED + i);
    }
    let mut models = Vec::new();
    for s in [setseq(), boxoffice()] {
        let p = problem(&s, &Overrides::default()).unwrap();
        models.extend(ConditionKind::ALL.iter().map(|&k| p.build(k).unwrap().model));
    }
    let mut rng = StdRng::seed_from_u64(KERNEL_SEED);
    models.extend((0..RANDOM_WORKER_MODELS).map(|_| random_model(&mut rng)));
    for m in &models {
        let spaces: Vec<_> = WORKERS
            .iter()
            .map(|&w| {
                let opts = ExploreOptions {
                    workers: w,
                    ..ExploreOptions::default()
                };
                explore(m, &opts).unwrap()
            })
            .collect();
        for (w, s) in WORKERS.iter().zip(&spaces).skip(1) {
            assert_eq!(s.len(), spaces[0].len(), "{} with {w} workers", m.name);
            assert_eq!(s.states, spaces[0].states, "{} with {w} workers", m.name);
        }
    }
    format!(
        "{KERNEL_PAIRS} (model, formula) pairs; state counts equal for workers {WORKERS:?} on {} models",
        models.len()
    )
}

fn totality_and_soundness() -> String {
    let mut n = 0;
    for s in [setseq(), boxoffice(), identity()] {
        let p = problem(&s, &Overrides::default()).unwrap();
        let mut models = vec![p.abs.clone(), p.conc.clone()];
        models.extend(ConditionKind::ALL.iter().map(|&k| p.build(k).unwrap().model));
        for m in &models {
            let space = explore(m, &ExploreOptions::default()).unwrap();
            assert_eq!(space.check_totality_and_soundness().unwrap(), None, "{}", m.name);
            n += 1;
        }
    }
    format!("{n} corpus models total with invariant preserved")
}

type Criterion = (&'static str, fn() -> String);

fn main() {
    let criteria: [Criterion; 6] = [
        ("default-bounds check passes", default_bounds_pass),
        ("box office fails with counterexample", box_office_fails_with_replayable_counterexample),
        ("oracle equivalence", oracle_equivalence),
        ("emitter goldens", emitter_goldens),
        ("duality, replay, worker invariance", kernel_and_workers),
        ("totality and invariant soundness", totality_and_soundness),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let line = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(detail) => format!("PASS [{}] {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                format!("FAIL [{}] {name}: {msg}", i + 1)
            }
        };
        println!("{line} ({:.1}s)", t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

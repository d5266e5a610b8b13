#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use zrefine::ir::model::{cur, next};
use zrefine::ir::{
    Carry, CmpOp, CtlFormula, Expr, FiniteModel, GroundType, GuardedCommand, VarDecl, VarKind,
    INVARIANT,
};
use zrefine::mc::ctl::{Checker, Compiled};
use zrefine::mc::{check_ctl, explore, replay, At, Evidence, ExploreOptions, StateSpace};
use zrefine::refine::RefinementProblem;
use zrefine::translate::Overrides;

pub fn corpus(rel: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "corpus", rel].iter().collect();
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub struct Sources {
    pub abs: String,
    pub conc: String,
    pub retrieve: String,
}

pub fn setseq() -> Sources {
    Sources {
        abs: corpus("setseq/abstract.tex"),
        conc: corpus("setseq/concrete.tex"),
        retrieve: corpus("setseq/retrieve.tex"),
    }
}

pub fn boxoffice() -> Sources {
    Sources {
        abs: corpus("boxoffice/marlowe.tex"),
        conc: corpus("boxoffice/kurbel.tex"),
        retrieve: corpus("boxoffice/retrieve.tex"),
    }
}

/// The concrete set/sequence specification against itself, related by
/// equality of the shared state.
pub fn identity() -> Sources {
    let c = corpus("setseq/concrete.tex");
    Sources {
        abs: c.clone(),
        conc: c,
        retrieve: "\\[ R == [ C; C \\bbar l = Concrete__l ] \\]\n".into(),
    }
}

pub fn problem(s: &Sources, ov: &Overrides) -> zrefine::Result<RefinementProblem> {
    RefinementProblem::from_sources(&s.abs, &s.conc, &s.retrieve, ov, None)
}

pub fn small() -> Overrides {
    Overrides {
        given_size: Some(2),
        ..Overrides::default()
    }
}

/// Text substitutions applied to the set/sequence pair: (file, from, to)
/// with file 0 = abstract, 1 = concrete, 2 = retrieve.
pub const MUTATIONS: &[(usize, &str, &str)] = &[
    (0, "\\# s < max", "\\# s \\leq max"),
    (0, "p? \\nmem s \\\\", ""),
    (0, "s' = s \\cup \\{ p? \\}", "s' = s"),
    (0, "p? \\mem s \\\\", "p? \\nmem s \\\\"),
    (0, "s' = s \\setminus \\{ p? \\}", "s' = \\emptyset"),
    (0, "s' = \\emptyset ]", "s' \\neq \\emptyset ]"),
    (0, "\\# s \\leq max ]", "\\# s < max ]"),
    (1, "\\# l < max", "\\# l \\leq max"),
    (1, "p? \\nmem \\ran l \\\\", ""),
    (1, "l' = l \\cat \\lseq p? \\rseq", "l' = l"),
    (1, "p? \\mem \\ran l \\\\", "p? \\nmem \\ran l \\\\"),
    (1, "l' = l \\filter (T \\setminus \\{ p? \\})", "l' = l"),
    (1, "l' = \\emptyseq]", "\\# l' = 1]"),
    (1, "\\# l < max", "\\# l < 1"),
    (2, "s = \\ran l", "s = \\emptyset"),
    (2, "s = \\ran l", "\\# s = \\# l"),
    (2, "s = \\ran l", "s \\neq \\ran l"),
    (2, "s = \\ran l", "\\# s \\leq \\# l"),
    (2, "s = \\ran l", "s = \\ran l \\land \\# l < max"),
    (2, "s = \\ran l", "\\# l \\leq 1 \\implies s = \\ran l"),
    (1, "l' = \\emptyseq]", "\\# l' < 0]"),
    (2, "s = \\ran l", "\\# s < 0"),
];

/// Applies one to three distinct mutations; overlapping ones are skipped. Returns the mutated sources
/// and the indices used.
pub fn mutate(base: &Sources, rng: &mut StdRng) -> (Sources, Vec<usize>) {
    let k = rng.gen_range(1..=3);
    let mut idx: Vec<usize> = (0..MUTATIONS.len()).collect();
    idx.shuffle(rng);
    idx.truncate(k);
    idx.sort_unstable();
    let mut files = [base.abs.clone(), base.conc.clone(), base.retrieve.clone()];
    // A later mutation whose target text is gone is dropped.
    idx.retain(|&i| {
        let (f, from, to) = MUTATIONS[i];
        let hit = files[f].contains(from);
        if hit {
            files[f] = files[f].replacen(from, to, 1);
        }
        hit
    });
    let [abs, conc, retrieve] = files;
    (Sources { abs, conc, retrieve }, idx)
}

fn int(hi: i64) -> GroundType {
    GroundType::IntRange { lo: 0, hi }
}

fn rand_operand(rng: &mut StdRng, names: &[String], primed: bool) -> Expr {
    if rng.gen_bool(0.35) {
        Expr::Int(rng.gen_range(0..=2))
    } else {
        let n = names.choose(rng).unwrap();
        if primed && rng.gen_bool(0.5) {
            next(n)
        } else {
            cur(n)
        }
    }
}

fn rand_cmp(rng: &mut StdRng, names: &[String], primed: bool) -> Expr {
    let op = *[CmpOp::Eq, CmpOp::Neq, CmpOp::Lt, CmpOp::Le].choose(rng).unwrap();
    Expr::cmp(op, rand_operand(rng, names, primed), rand_operand(rng, names, primed))
}

/// A small random model over integer variables. Every model has an
/// invariant; some lack an ELSE branch and so may deadlock.
pub fn random_model(rng: &mut StdRng) -> FiniteModel {
    let nloc = rng.gen_range(1..=3);
    let mut vars = Vec::new();
    let mut locals = Vec::new();
    for i in 0..nloc {
        let name = format!("x{i}");
        vars.push(VarDecl {
            name: name.clone(),
            kind: VarKind::Local,
            ty: int(rng.gen_range(1..=2)),
            constant: false,
        });
        locals.push(name);
    }
    let mut ints = locals.clone();
    if rng.gen_bool(0.4) {
        vars.push(VarDecl {
            name: "i?".into(),
            kind: VarKind::Input,
            ty: int(1),
            constant: false,
        });
        ints.push("i?".into());
    }
    vars.push(VarDecl {
        name: INVARIANT.into(),
        kind: VarKind::Local,
        ty: GroundType::Bool,
        constant: false,
    });
    let inv = if rng.gen_bool(0.3) {
        rand_cmp(rng, &ints, false)
    } else {
        Expr::Bool(true)
    };
    let init = Expr::and(
        (0..rng.gen_range(0..=2))
            .map(|_| rand_cmp(rng, &ints, false))
            .collect(),
    );
    let mut commands = Vec::new();
    for k in 0..rng.gen_range(1..=3) {
        let mut parts: Vec<Expr> = (0..rng.gen_range(0..=3))
            .map(|_| rand_cmp(rng, &ints, true))
            .collect();
        let assigns: Vec<String> = locals.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        for a in &assigns {
            if rng.gen_bool(0.5) {
                parts.push(Expr::eq(next(a), rand_operand(rng, &ints, false)));
            }
        }
        parts.push(cur(INVARIANT));
        parts.push(next(INVARIANT));
        commands.push(GuardedCommand {
            label: format!("c{k}"),
            guard: Expr::and(parts),
            assigns,
            inputs: if rng.gen_bool(0.5) { Carry::Fresh } else { Carry::Held },
            outputs: Carry::Fresh,
        });
    }
    FiniteModel {
        name: "Random".into(),
        types: vec![],
        vars,
        definitions: vec![(INVARIANT.into(), inv)],
        init: Expr::and(vec![init, cur(INVARIANT)]),
        commands,
        else_frame: rng.gen_bool(0.5).then(|| locals.clone()),
    }
}

/// A random formula over the integer variables of `m`.
pub fn random_formula(rng: &mut StdRng, m: &FiniteModel, depth: u32) -> CtlFormula {
    let ints: Vec<String> = m
        .vars
        .iter()
        .filter(|v| v.name != INVARIANT)
        .map(|v| v.name.clone())
        .collect();
    if depth == 0 || rng.gen_bool(0.25) {
        return CtlFormula::atom(rand_cmp(rng, &ints, false));
    }
    match rng.gen_range(0..5) {
        0 => CtlFormula::not(random_formula(rng, m, depth - 1)),
        1 => CtlFormula::and(vec![
            random_formula(rng, m, depth - 1),
            random_formula(rng, m, depth - 1),
        ]),
        2 => CtlFormula::implies(random_formula(rng, m, depth - 1), random_formula(rng, m, depth - 1)),
        3 => CtlFormula::ex(random_formula(rng, m, depth - 1)),
        _ => CtlFormula::ax(random_formula(rng, m, depth - 1)),
    }
}

/// Every step recorded in an explanation is an edge of the space, and the
/// step's target is the state of the evidence it labels.
pub fn steps_are_edges(space: &StateSpace, ev: &Evidence) {
    if let Some(s) = &ev.step {
        assert_eq!(s.to, ev.state);
        let found = space
            .successors(s.from)
            .iter()
            .any(|(k, ts)| space.labels[*k as usize] == s.label && ts.contains(&s.to));
        assert!(found, "{} -> {} by {}", s.from, s.to, s.label);
    }
    for c in &ev.children {
        steps_are_edges(space, c);
    }
}

/// AX/EX duality, replay against the explored graph and counterexample
/// checks on one random (model, formula) pair.
pub fn kernel_properties(seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    let m = random_model(&mut rng);
    let f = random_formula(&mut rng, &m, 3);
    let space = explore(&m, &ExploreOptions::default()).unwrap();

    let ax = CtlFormula::ax(f.clone());
    let not_ex_not = CtlFormula::not(CtlFormula::ex(CtlFormula::not(f.clone())));
    let (ca, cb) = (Compiled::new(&ax, &m).unwrap(), Compiled::new(&not_ex_not, &m).unwrap());
    let (mut ka, mut kb) = (Checker::new(&space, &ca), Checker::new(&space, &cb));
    let cf = Compiled::new(&f, &m).unwrap();
    let mut kf = Checker::new(&space, &cf);
    for s in 0..space.len() as u32 {
        assert_eq!(ka.eval(ca.root(), s).unwrap(), kb.eval(cb.root(), s).unwrap(), "state {s}");
        // Recomputing from the model agrees with the explored graph.
        let v = kf.eval(cf.root(), s).unwrap();
        assert_eq!(replay(&m, &f, space.state(s), 1 << 20).unwrap(), v, "state {s}");
    }
    let out = check_ctl(&space, &m, &f, At::All).unwrap();
    match &out.violation {
        Some(ev) => {
            assert!(!out.holds && !ev.holds);
            assert!(!replay(&m, &f, space.state(ev.state), 1 << 20).unwrap());
            // Lowest-numbered violating state.
            for s in 0..ev.state {
                assert!(kf.eval(cf.root(), s).unwrap());
            }
            steps_are_edges(&space, ev);
        }
        None => assert!(out.holds && out.checked == space.len()),
    }
}

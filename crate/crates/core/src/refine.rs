//! Combined systems for the three downward-simulation conditions.
//!
//! Each condition becomes one finite model over the disjoint union of the
//! abstract and concrete state, together with a CTL obligation that is
//! checked at the model's initial states.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ir::model::{cur, next};
use crate::ir::{
    Carry, CtlFormula, EnumType, Expr, FiniteModel, GroundType, GuardedCommand, VarDecl, VarKind,
    VarName, INVARIANT,
};
use crate::translate::{
    derive_bounds, op_io, translate, translate_retrieve, Bounds, Overrides,
};
use crate::zparse::{
    collision_renames, concrete_prefix, parse_retrieve, parse_spec, ZExpr, ZSpec,
};

pub const EVENT_VAR: &str = "ev__";
pub const EVENT_TYPE: &str = "EVENT__";
pub const CHOOSE: &str = "Choose__";
pub const INIT_COMMAND: &str = "InitA_init";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionKind {
    Init,
    Applicability,
    Correctness,
}

impl ConditionKind {
    pub const ALL: [ConditionKind; 3] = [
        ConditionKind::Init,
        ConditionKind::Applicability,
        ConditionKind::Correctness,
    ];

    /// Context name used when emitting the combined system.
    pub fn context(self) -> &'static str {
        match self {
            ConditionKind::Init => "r2init",
            ConditionKind::Applicability => "r2app",
            ConditionKind::Correctness => "r2corr",
        }
    }
}

impl std::fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConditionKind::Init => "init",
            ConditionKind::Applicability => "applicability",
            ConditionKind::Correctness => "correctness",
        };
        f.write_str(s)
    }
}

/// Abstract and concrete models over disjoint names, a retrieve predicate
/// over their locals, and the operation pairing (by command label).
#[derive(Clone, Debug)]
pub struct RefinementProblem {
    pub abs: FiniteModel,
    pub conc: FiniteModel,
    pub retrieve: Expr,
    pub pairing: Vec<(String, String)>,
    pub bounds: Bounds,
}

/// One condition's combined model and obligation.
#[derive(Clone, Debug)]
pub struct CombinedSystem {
    pub kind: ConditionKind,
    pub model: FiniteModel,
    pub obligation: CtlFormula,
}

/// Renames the concrete model so that its locals and command labels are
/// disjoint from the abstract model's. Constants with the same name and type
/// are identified; inputs and outputs are shared by name.
pub fn rename_disjoint(
    abs: &FiniteModel,
    conc: &FiniteModel,
) -> Result<(FiniteModel, FiniteModel)> {
    for (n, t) in &conc.types {
        if let Some((_, u)) = abs.types.iter().find(|(m, _)| m == n) {
            if t != u {
                return Err(Error::TypeClash(n.clone()));
            }
        }
    }
    for v in conc.vars.iter().filter(|v| v.kind != VarKind::Local) {
        if let Some(w) = abs.var(&v.name) {
            if w.ty != v.ty || w.kind != v.kind {
                return Err(Error::TypeClash(v.name.clone()));
            }
        }
    }
    let locals = |m: &FiniteModel| -> Vec<(String, Option<GroundType>)> {
        m.vars
            .iter()
            .filter(|v| v.kind == VarKind::Local && v.name != INVARIANT)
            .map(|v| (v.name.clone(), v.constant.then(|| v.ty.clone())))
            .collect()
    };
    let prefix = concrete_prefix(&abs.name, &conc.name);
    let vars = collision_renames(&locals(abs), &locals(conc), &prefix);
    for (n, m) in &vars {
        if abs.var(m).is_some() || conc.var(m).is_some() {
            return Err(Error::InvalidSpec(format!("cannot rename {n}: {m} is taken")));
        }
    }
    let labels: BTreeMap<String, String> = conc
        .commands
        .iter()
        .filter(|c| abs.command(&c.label).is_some())
        .map(|c| (c.label.clone(), format!("{prefix}__{}", c.label)))
        .collect();
    Ok((abs.clone(), rename_model(conc, &vars, &labels)))
}

fn rename_model(
    m: &FiniteModel,
    vars: &BTreeMap<String, String>,
    labels: &BTreeMap<String, String>,
) -> FiniteModel {
    let rn = |n: &str| vars.get(n).cloned();
    let name = |n: &String| vars.get(n).cloned().unwrap_or_else(|| n.clone());
    FiniteModel {
        name: m.name.clone(),
        types: m.types.clone(),
        vars: m
            .vars
            .iter()
            .map(|v| VarDecl {
                name: name(&v.name),
                ..v.clone()
            })
            .collect(),
        definitions: m
            .definitions
            .iter()
            .map(|(n, e)| (name(n), e.rename(&rn)))
            .collect(),
        init: m.init.rename(&rn),
        commands: m
            .commands
            .iter()
            .map(|c| GuardedCommand {
                label: labels.get(&c.label).cloned().unwrap_or_else(|| c.label.clone()),
                guard: c.guard.rename(&rn),
                assigns: c.assigns.iter().map(name).collect(),
                ..c.clone()
            })
            .collect(),
        else_frame: m
            .else_frame
            .as_ref()
            .map(|f| f.iter().map(name).collect()),
    }
}

/// Pairs operations: explicitly by name, or else by declaration order.
/// Paired operations must declare the same inputs and outputs.
pub fn resolve_pairing(
    abs: &ZSpec,
    conc: &ZSpec,
    explicit: Option<&[(String, String)]>,
) -> Result<Vec<(String, String)>> {
    let pairs: Vec<(String, String)> = match explicit {
        Some(p) => p.to_vec(),
        None => {
            if abs.operations.len() != conc.operations.len() {
                return Err(Error::Pairing(format!(
                    "{} has {} operations but {} has {}",
                    abs.name,
                    abs.operations.len(),
                    conc.name,
                    conc.operations.len()
                )));
            }
            abs.operations
                .iter()
                .zip(&conc.operations)
                .map(|(a, c)| (a.name.clone(), c.name.clone()))
                .collect()
        }
    };
    let mut seen_a = BTreeSet::new();
    let mut seen_c = BTreeSet::new();
    for (a, c) in &pairs {
        let ao = abs
            .operation(a)
            .ok_or_else(|| Error::Pairing(format!("{a} is not an operation of {}", abs.name)))?;
        let co = conc
            .operation(c)
            .ok_or_else(|| Error::Pairing(format!("{c} is not an operation of {}", conc.name)))?;
        if !seen_a.insert(a.clone()) || !seen_c.insert(c.clone()) {
            return Err(Error::Pairing(format!("{a}={c} pairs an operation twice")));
        }
        let io = |o| {
            let (mut i, mut out) = op_io(o);
            i.sort();
            out.sort();
            (i, out)
        };
        if io(ao) != io(co) {
            return Err(Error::Pairing(format!(
                "{a} and {c} declare different inputs or outputs"
            )));
        }
    }
    if seen_a.len() != abs.operations.len() || seen_c.len() != conc.operations.len() {
        return Err(Error::Pairing("pairing must cover every operation".into()));
    }
    Ok(pairs)
}

impl RefinementProblem {
    /// Translates both specifications under shared bounds and pairs their
    /// operations.
    pub fn new(
        abs: &ZSpec,
        conc: &ZSpec,
        retrieve: &ZExpr,
        overrides: &Overrides,
        pairing: Option<&[(String, String)]>,
    ) -> Result<Self> {
        let bounds = derive_bounds(&[abs, conc], overrides)?;
        let pairs = resolve_pairing(abs, conc, pairing)?;
        let am = translate(abs, &bounds)?;
        let cm = translate(conc, &bounds)?;
        let r = translate_retrieve(retrieve, abs, conc, &bounds)?;
        let (am, cm) = rename_disjoint(&am, &cm)?;
        let label = |orig: &str| -> String {
            if am.command(orig).is_some() {
                format!("{}__{orig}", concrete_prefix(&abs.name, &conc.name))
            } else {
                orig.to_string()
            }
        };
        let pairing = pairs.iter().map(|(a, c)| (a.clone(), label(c))).collect();
        Ok(RefinementProblem {
            abs: am,
            conc: cm,
            retrieve: r,
            pairing,
            bounds,
        })
    }

    /// Parses the three sources and builds the problem.
    pub fn from_sources(
        abs_src: &str,
        conc_src: &str,
        retrieve_src: &str,
        overrides: &Overrides,
        pairing: Option<&[(String, String)]>,
    ) -> Result<Self> {
        let abs = parse_spec(abs_src)?;
        let conc = parse_spec(conc_src)?;
        let r = parse_retrieve(retrieve_src, &abs, &conc)?;
        RefinementProblem::new(&abs, &conc, &r, overrides, pairing)
    }

    fn abs_locals(&self) -> Vec<&VarDecl> {
        locals(&self.abs)
    }

    /// Concrete locals that are not shared with the abstract model.
    fn conc_own_locals(&self) -> Vec<&VarDecl> {
        locals(&self.conc)
            .into_iter()
            .filter(|v| self.abs.var(&v.name).is_none())
            .collect()
    }

    pub fn build(&self, kind: ConditionKind) -> Result<CombinedSystem> {
        match kind {
            ConditionKind::Init => build_m_init(self),
            ConditionKind::Applicability => build_m_app(self),
            ConditionKind::Correctness => build_m_corr(self),
        }
    }
}

fn locals(m: &FiniteModel) -> Vec<&VarDecl> {
    m.vars
        .iter()
        .filter(|v| v.kind == VarKind::Local && v.name != INVARIANT)
        .collect()
}

fn merged_types(p: &RefinementProblem) -> Vec<(String, GroundType)> {
    let mut types = p.abs.types.clone();
    for (n, t) in &p.conc.types {
        if !types.iter().any(|(m, _)| m == n) {
            types.push((n.clone(), t.clone()));
        }
    }
    types
}

/// Abstract variables, then concrete ones not already present.
fn merged_vars(p: &RefinementProblem) -> Vec<VarDecl> {
    let mut vars: Vec<VarDecl> = p
        .abs
        .vars
        .iter()
        .filter(|v| v.name != INVARIANT)
        .cloned()
        .collect();
    for v in p.conc.vars.iter().filter(|v| v.name != INVARIANT) {
        if !vars.iter().any(|w| w.name == v.name) {
            vars.push(v.clone());
        }
    }
    vars
}

fn invariant_decl() -> VarDecl {
    VarDecl {
        name: INVARIANT.into(),
        kind: VarKind::Local,
        ty: GroundType::Bool,
        constant: false,
    }
}

fn invariant_of(m: &FiniteModel) -> Result<&Expr> {
    m.invariant()
        .ok_or_else(|| Error::InvalidSpec(format!("model {} has no {INVARIANT}", m.name)))
}

fn frame(names: &[&VarDecl]) -> Vec<Expr> {
    names
        .iter()
        .filter(|v| !v.constant)
        .map(|v| Expr::eq(next(&v.name), cur(&v.name)))
        .collect()
}

fn is_invariant_ref(e: &Expr) -> bool {
    matches!(e, Expr::Var(VarName { name, .. }) if name == INVARIANT)
}

/// The operation's own conjuncts, without the translated invariant guards.
fn op_conjuncts(c: &GuardedCommand) -> Vec<Expr> {
    c.guard
        .conjuncts()
        .into_iter()
        .filter(|e| !is_invariant_ref(e))
        .cloned()
        .collect()
}

/// M_init: concrete initial states; one step establishes an abstract
/// initial state with the concrete part framed. `EX R` must hold.
pub fn build_m_init(p: &RefinementProblem) -> Result<CombinedSystem> {
    let mut vars = merged_vars(p);
    vars.push(invariant_decl());
    let conc_inv = invariant_of(&p.conc)?.clone();
    let abs_init = p.abs.init.inline(&p.abs.definitions).primed();
    let conc_own = p.conc_own_locals();
    let mut guard = vec![abs_init];
    guard.extend(frame(&conc_own));
    guard.push(cur(INVARIANT));
    guard.push(next(INVARIANT));
    let assigns: Vec<String> = p
        .abs_locals()
        .iter()
        .filter(|v| p.conc.var(&v.name).is_none())
        .map(|v| v.name.clone())
        .collect();
    let model = FiniteModel {
        name: ConditionKind::Init.context().into(),
        types: merged_types(p),
        vars,
        definitions: vec![(INVARIANT.into(), conc_inv)],
        init: p.conc.init.clone(),
        commands: vec![GuardedCommand {
            label: INIT_COMMAND.into(),
            guard: Expr::and(guard),
            assigns,
            inputs: Carry::Fresh,
            outputs: Carry::Fresh,
        }],
        else_frame: None,
    };
    model.validate()?;
    Ok(CombinedSystem {
        kind: ConditionKind::Init,
        model,
        obligation: CtlFormula::ex(CtlFormula::atom(p.retrieve.clone())),
    })
}

fn event_type(p: &RefinementProblem) -> Arc<EnumType> {
    let mut labels: Vec<String> = p.abs.commands.iter().map(|c| c.label.clone()).collect();
    labels.extend(p.conc.commands.iter().map(|c| c.label.clone()));
    labels.push(CHOOSE.into());
    Arc::new(EnumType::new(EVENT_TYPE, labels))
}

fn ev_is(ev: &Arc<EnumType>, label: &str, primed: bool) -> Expr {
    let value = ev.index_of(label).expect("label in event type");
    let v = if primed { next(EVENT_VAR) } else { cur(EVENT_VAR) };
    Expr::eq(
        v,
        Expr::Elem {
            name: label.into(),
            value,
        },
    )
}

fn shadow_system(p: &RefinementProblem, kind: ConditionKind) -> Result<FiniteModel> {
    let framed = kind == ConditionKind::Correctness;
    let ev = event_type(p);
    let mut types = merged_types(p);
    types.push((EVENT_TYPE.into(), GroundType::Enum(ev.clone())));
    let mut vars = merged_vars(p);
    vars.push(VarDecl {
        name: EVENT_VAR.into(),
        kind: VarKind::Local,
        ty: GroundType::Enum(ev.clone()),
        constant: false,
    });
    vars.push(invariant_decl());

    let mut inv: Vec<Expr> = Vec::new();
    for e in [invariant_of(&p.abs)?, invariant_of(&p.conc)?] {
        for c in e.conjuncts() {
            if !inv.contains(c) {
                inv.push(c.clone());
            }
        }
    }

    let movable: Vec<String> = vars
        .iter()
        .filter(|v| v.kind == VarKind::Local && !v.constant && v.name != INVARIANT)
        .map(|v| v.name.clone())
        .collect();
    let abs_locals = p.abs_locals();
    let conc_own = p.conc_own_locals();
    let mut commands = Vec::new();
    for (side, cmds) in [(0, &p.abs.commands), (1, &p.conc.commands)] {
        for c in cmds {
            let mut guard = op_conjuncts(c);
            if framed {
                guard.extend(frame(if side == 0 { &conc_own } else { &abs_locals }));
            }
            guard.push(ev_is(&ev, &c.label, true));
            guard.push(cur(INVARIANT));
            guard.push(next(INVARIANT));
            let outputs = if framed && side == 0 {
                Carry::Held
            } else {
                Carry::Fresh
            };
            let mut assigns = movable.clone();
            if outputs == Carry::Fresh {
                assigns.extend(
                    c.assigns
                        .iter()
                        .filter(|a| !assigns.contains(a))
                        .cloned()
                        .collect::<Vec<_>>(),
                );
            }
            commands.push(GuardedCommand {
                label: c.label.clone(),
                guard: Expr::and(guard),
                assigns,
                inputs: Carry::Held,
                outputs,
            });
        }
    }
    commands.push(GuardedCommand {
        label: CHOOSE.into(),
        guard: Expr::and(vec![
            ev_is(&ev, CHOOSE, true),
            cur(INVARIANT),
            next(INVARIANT),
        ]),
        assigns: movable,
        inputs: Carry::Fresh,
        outputs: Carry::Fresh,
    });

    let model = FiniteModel {
        name: kind.context().into(),
        types,
        vars,
        definitions: vec![(INVARIANT.into(), Expr::and(inv))],
        init: Expr::and(vec![p.retrieve.clone(), cur(INVARIANT)]),
        commands,
        else_frame: None,
    };
    model.validate()?;
    Ok(model)
}

fn ex_event(ev: &Arc<EnumType>, label: &str) -> CtlFormula {
    CtlFormula::ex(CtlFormula::atom(ev_is(ev, label, false)))
}

/// M_app: from R-related states, whenever an abstract operation can fire
/// its concrete partner can too.
pub fn build_m_app(p: &RefinementProblem) -> Result<CombinedSystem> {
    let model = shadow_system(p, ConditionKind::Applicability)?;
    let ev = event_type(p);
    let obligation = CtlFormula::and(
        p.pairing
            .iter()
            .map(|(a, c)| CtlFormula::implies(ex_event(&ev, a), ex_event(&ev, c)))
            .collect(),
    );
    Ok(CombinedSystem {
        kind: ConditionKind::Applicability,
        model,
        obligation,
    })
}

/// M_corr: every concrete step from an R-related state where the abstract
/// operation is enabled can be matched by an abstract step re-establishing R.
pub fn build_m_corr(p: &RefinementProblem) -> Result<CombinedSystem> {
    let model = shadow_system(p, ConditionKind::Correctness)?;
    let ev = event_type(p);
    let obligation = CtlFormula::and(
        p.pairing
            .iter()
            .map(|(a, c)| {
                let matched = CtlFormula::ex(CtlFormula::atom(Expr::and(vec![
                    ev_is(&ev, a, false),
                    p.retrieve.clone(),
                ])));
                CtlFormula::implies(
                    ex_event(&ev, a),
                    CtlFormula::ax(CtlFormula::implies(
                        CtlFormula::atom(ev_is(&ev, c, false)),
                        matched,
                    )),
                )
            })
            .collect(),
    );
    Ok(CombinedSystem {
        kind: ConditionKind::Correctness,
        model,
        obligation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: &str = include_str!("../corpus/setseq/abstract.tex");
    const C: &str = include_str!("../corpus/setseq/concrete.tex");
    const R: &str = include_str!("../corpus/setseq/retrieve.tex");

    fn problem() -> RefinementProblem {
        RefinementProblem::from_sources(A, C, R, &Overrides::default(), None).unwrap()
    }

    #[test]
    fn shared_constant_is_identified() {
        let p = problem();
        let m = build_m_corr(&p).unwrap().model;
        let names: Vec<&str> = m.vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["max", "s", "p?", "l", "ev__", "invariant__"]);
        assert_eq!(m.commands.len(), 5);
        assert_eq!(m.commands[4].label, CHOOSE);
    }

    #[test]
    fn init_command_frames_concrete_part() {
        let p = problem();
        let sys = build_m_init(&p).unwrap();
        let g = sys.model.commands[0].guard.to_string();
        assert!(g.contains("l' = l"), "{g}");
        assert_eq!(sys.model.commands[0].assigns, ["s"]);
        assert_eq!(sys.obligation.to_string(), "EX(s = sequence {T; T__B, 3} ! range(l))");
    }

    #[test]
    fn correctness_frames_other_side() {
        let p = problem();
        let m = build_m_corr(&p).unwrap().model;
        assert!(m.commands[0].guard.to_string().contains("l' = l"));
        assert!(m.commands[2].guard.to_string().contains("s' = s"));
        let app = build_m_app(&p).unwrap().model;
        assert!(!app.commands[0].guard.to_string().contains("l' = l"));
        assert_eq!(app.init, m.init);
    }

    #[test]
    fn colliding_names_are_prefixed() {
        let a = parse_spec(A).unwrap();
        let b = derive_bounds(&[&a], &Overrides::default()).unwrap();
        let m = translate(&a, &b).unwrap();
        let (_, c) = rename_disjoint(&m, &m).unwrap();
        let names: Vec<&str> = c.vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["max", "Concrete__s", "p?", "invariant__"]);
        assert_eq!(c.commands[0].label, "Concrete__AEnter");
    }

    #[test]
    fn pairing_must_match_io() {
        let a = parse_spec(A).unwrap();
        let c = parse_spec(C).unwrap();
        let bad = [("AEnter".to_string(), "CEnter".to_string())];
        assert!(matches!(
            resolve_pairing(&a, &c, Some(&bad)),
            Err(Error::Pairing(_))
        ));
        let swapped = [
            ("AEnter".to_string(), "CLeave".to_string()),
            ("ALeave".to_string(), "CEnter".to_string()),
        ];
        assert!(resolve_pairing(&a, &c, Some(&swapped)).is_ok());
    }
}

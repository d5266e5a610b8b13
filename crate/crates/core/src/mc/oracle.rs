//! Direct evaluation of the three downward-simulation conditions by
//! enumerating state and input valuations. Shares nothing with the
//! combined-system construction or the CTL checker beyond the translated
//! single models.

use std::collections::BTreeMap;

use serde::Serialize;

use super::report::Verdict;
use crate::error::{Error, Result};
use crate::ir::{enumerate_type, holds, Assignment, Expr, FiniteModel, GroundType, Value, VarKind, VarName};
use crate::refine::{ConditionKind, RefinementProblem};
use crate::translate::precondition_of;

#[derive(Clone, Debug, Serialize)]
pub struct OracleCondition {
    pub condition: ConditionKind,
    pub verdict: Verdict,
    /// Valuations over which the condition's outer quantifier ranged.
    pub checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleWitness {
    pub condition: ConditionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<(String, String)>,
    /// State and input values.
    pub state: Vec<(String, String)>,
    /// After-state of the unmatched concrete step, if any.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub step: Vec<(String, String)>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub holds: bool,
    pub verdict: Verdict,
    pub conditions: Vec<OracleCondition>,
    /// First violation, in condition order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<OracleWitness>,
}

impl OracleReport {
    pub fn verdict_of(&self, kind: ConditionKind) -> Verdict {
        self.conditions
            .iter()
            .find(|c| c.condition == kind)
            .map(|c| c.verdict)
            .expect("all conditions are evaluated")
    }
}

type Domain = Vec<(String, Vec<Value>)>;

/// Calls `f` on every extension of `base` by the variables of `dom`;
/// stops early when `f` returns `false`. Returns whether it ran to the end.
fn each(
    base: &mut Assignment,
    dom: &[(String, Vec<Value>)],
    f: &mut dyn FnMut(&Assignment) -> Result<bool>,
) -> Result<bool> {
    let Some(((name, vals), rest)) = dom.split_first() else {
        return f(base);
    };
    for v in vals {
        base.insert(name.clone(), v.clone());
        if !each(base, rest, f)? {
            base.remove(name);
            return Ok(false);
        }
    }
    base.remove(name);
    Ok(true)
}

fn test(e: &Expr, cur: &Assignment, next: &Assignment) -> Result<bool> {
    let env = |v: &VarName| {
        if v.primed {
            next.get(&v.name).cloned()
        } else {
            cur.get(&v.name).cloned()
        }
    };
    holds(e, &env)
}

struct Ctx<'a> {
    p: &'a RefinementProblem,
    cap: u128,
    types: BTreeMap<String, GroundType>,
    /// Locals of the concrete model, including shared constants.
    conc_locals: Domain,
    /// Abstract locals that the concrete model lacks.
    abs_only: Domain,
    /// Concrete locals that the abstract model lacks.
    conc_only: Domain,
    abs_locals: Domain,
    inputs: Domain,
    a_inv: Expr,
    c_inv: Expr,
}

impl<'a> Ctx<'a> {
    fn new(p: &'a RefinementProblem, cap: u128) -> Result<Self> {
        let mut types = BTreeMap::new();
        let dom = |m: &FiniteModel, keep: &dyn Fn(&str, VarKind) -> bool| -> Result<Domain> {
            m.layout()
                .vars
                .iter()
                .filter(|v| keep(&v.name, v.kind))
                .map(|v| Ok((v.name.clone(), enumerate_type(&v.ty, cap)?)))
                .collect()
        };
        for m in [&p.abs, &p.conc] {
            for v in m.layout().vars {
                types.insert(v.name.clone(), v.ty.clone());
            }
        }
        let local = |_: &str, k| k == VarKind::Local;
        let conc_locals = dom(&p.conc, &local)?;
        let abs_locals = dom(&p.abs, &local)?;
        let abs_only = dom(&p.abs, &|n, k| k == VarKind::Local && p.conc.var(n).is_none())?;
        let conc_only = dom(&p.conc, &|n, k| k == VarKind::Local && p.abs.var(n).is_none())?;
        let mut inputs = dom(&p.abs, &|_, k| k == VarKind::Input)?;
        for (n, d) in dom(&p.conc, &|_, k| k == VarKind::Input)? {
            if !inputs.iter().any(|(m, _)| *m == n) {
                inputs.push((n, d));
            }
        }
        let inv = |m: &FiniteModel| {
            m.invariant()
                .map(|e| e.inline(&m.definitions))
                .unwrap_or(Expr::Bool(true))
        };
        Ok(Ctx {
            p,
            cap,
            types,
            conc_locals,
            abs_only,
            conc_only,
            abs_locals,
            inputs,
            a_inv: inv(&p.abs),
            c_inv: inv(&p.conc),
        })
    }

    fn show(&self, a: &Assignment) -> Vec<(String, String)> {
        a.iter()
            .map(|(n, v)| {
                let s = self.types.get(n).map_or_else(|| v.to_string(), |t| t.show(v));
                (n.clone(), s)
            })
            .collect()
    }

    fn related(&self, s: &Assignment) -> Result<bool> {
        Ok(test(&self.a_inv, s, s)? && test(&self.c_inv, s, s)? && test(&self.p.retrieve, s, s)?)
    }

    /// Every related (abstract, concrete, input) valuation, until `f` says stop.
    fn each_related(&self, f: &mut dyn FnMut(&Assignment) -> Result<bool>) -> Result<bool> {
        let mut base = Assignment::new();
        let a_inv = &self.a_inv;
        let conc_only = &self.conc_only;
        let mut outer = |s: &Assignment| -> Result<bool> {
            if !test(a_inv, s, s)? {
                return Ok(true);
            }
            let mut s = s.clone();
            each(&mut s, conc_only, &mut |s| {
                if self.related(s)? {
                    f(s)
                } else {
                    Ok(true)
                }
            })
        };
        let mut dom = self.inputs.clone();
        dom.extend(self.abs_locals.iter().cloned());
        each(&mut base, &dom, &mut outer)
    }

    fn init(&self) -> Result<(OracleCondition, Option<OracleWitness>)> {
        let c_init = self.p.conc.init.inline(&self.p.conc.definitions);
        let a_init = self.p.abs.init.inline(&self.p.abs.definitions);
        let mut checked = 0;
        let mut witness = None;
        let mut dom = self.inputs.clone();
        dom.extend(self.conc_locals.iter().cloned());
        let mut alt = self.abs_only.clone();
        alt.extend(self.inputs.iter().cloned());
        each(&mut Assignment::new(), &dom, &mut |s| {
            if !test(&c_init, s, s)? {
                return Ok(true);
            }
            checked += 1;
            // Some abstract initial state, under some input valuation the
            // concrete invariant admits, is related to `s`.
            let mut t = s.clone();
            let found = !each(&mut t, &alt, &mut |t| {
                let ok = test(&a_init, t, t)? && test(&self.c_inv, t, t)? && test(&self.p.retrieve, t, t)?;
                Ok(!ok)
            })?;
            if !found {
                witness = Some(OracleWitness {
                    condition: ConditionKind::Init,
                    pair: None,
                    state: self.show(s),
                    step: Vec::new(),
                    detail: "no related abstract initial state".into(),
                });
            }
            Ok(found)
        })?;
        Ok((cond(ConditionKind::Init, checked, witness.is_some()), witness))
    }

    fn applicability(&self) -> Result<(OracleCondition, Option<OracleWitness>)> {
        let mut checked = 0;
        let mut witness = None;
        self.each_related(&mut |s| {
            checked += 1;
            for (a, c) in &self.p.pairing {
                if precondition_of(a, &self.p.abs, s, s)? && !precondition_of(c, &self.p.conc, s, s)? {
                    witness = Some(OracleWitness {
                        condition: ConditionKind::Applicability,
                        pair: Some((a.clone(), c.clone())),
                        state: self.show(s),
                        step: Vec::new(),
                        detail: format!("{a} is enabled but {c} is not"),
                    });
                    return Ok(false);
                }
            }
            Ok(true)
        })?;
        Ok((cond(ConditionKind::Applicability, checked, witness.is_some()), witness))
    }

    /// Variables chosen by a command, with their domains.
    fn chosen(&self, m: &FiniteModel, label: &str, outputs: bool) -> Result<(Expr, Domain)> {
        let cmd = m
            .command(label)
            .ok_or_else(|| Error::Pairing(format!("no operation {label} in {}", m.name)))?;
        let mut dom = Vec::new();
        for n in &cmd.assigns {
            let v = m.var(n).expect("assigned variables are declared");
            if v.kind == VarKind::Output && !outputs {
                continue;
            }
            dom.push((n.clone(), enumerate_type(&v.ty, self.cap)?));
        }
        Ok((cmd.guard.inline(&m.definitions), dom))
    }

    fn correctness(&self) -> Result<(OracleCondition, Option<OracleWitness>)> {
        let mut steps = Vec::new();
        for (a, c) in &self.p.pairing {
            let (cg, cdom) = self.chosen(&self.p.conc, c, true)?;
            let (ag, adom) = self.chosen(&self.p.abs, a, false)?;
            steps.push((a, c, cg, cdom, ag, adom));
        }
        let mut checked = 0;
        let mut witness = None;
        self.each_related(&mut |s| {
            checked += 1;
            for (a, c, cg, cdom, ag, adom) in &steps {
                if !precondition_of(a, &self.p.abs, s, s)? {
                    continue;
                }
                let mut next = s.clone();
                let mut bad = None;
                each(&mut next, cdom, &mut |cn| {
                    if !test(cg, s, cn)? {
                        return Ok(true);
                    }
                    // Concrete step taken: find a matching abstract step
                    // with the same outputs ending in a related state.
                    let mut an = cn.clone();
                    let matched = !each(&mut an, adom, &mut |an| {
                        Ok(!(test(ag, s, an)? && test(&self.p.retrieve, an, an)?))
                    })?;
                    if !matched {
                        bad = Some(cn.clone());
                    }
                    Ok(matched)
                })?;
                if let Some(after) = bad {
                    let step = cdom
                        .iter()
                        .map(|(n, _)| {
                            let v = &after[n];
                            (n.clone(), self.types[n].show(v))
                        })
                        .collect();
                    witness = Some(OracleWitness {
                        condition: ConditionKind::Correctness,
                        pair: Some(((*a).clone(), (*c).clone())),
                        state: self.show(s),
                        step,
                        detail: format!("no {a} step matches this {c} step"),
                    });
                    return Ok(false);
                }
            }
            Ok(true)
        })?;
        Ok((cond(ConditionKind::Correctness, checked, witness.is_some()), witness))
    }
}

fn cond(kind: ConditionKind, checked: usize, violated: bool) -> OracleCondition {
    OracleCondition {
        condition: kind,
        verdict: if violated {
            Verdict::Fail
        } else if checked == 0 {
            Verdict::Vacuous
        } else {
            Verdict::Pass
        },
        checked,
    }
}

/// Evaluates the three conditions by brute force over all valuations within
/// the problem's bounds.
pub fn oracle_downward_sim(p: &RefinementProblem, enum_cap: u128) -> Result<OracleReport> {
    let ctx = Ctx::new(p, enum_cap)?;
    let mut conditions = Vec::new();
    let mut violation = None;
    for r in [ctx.init()?, ctx.applicability()?, ctx.correctness()?] {
        conditions.push(r.0);
        if violation.is_none() {
            violation = r.1;
        }
    }
    let verdict = Verdict::combine(conditions.iter().map(|c| c.verdict));
    Ok(OracleReport {
        holds: violation.is_none(),
        verdict,
        conditions,
        violation,
    })
}

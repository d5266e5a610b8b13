//! Z specification to finite guarded-command model.

mod bounds;
mod lower;

pub use bounds::{
    derive_bounds, Bounds, Overrides, DEFAULT_GIVEN_SIZE, DEFAULT_NAT_HI, MAX_GIVEN_SIZE,
};
pub use lower::TypeEnv;

use std::collections::BTreeMap;

use lower::Lowerer;

use crate::error::{Error, Result};
use crate::ir::{
    enumerate_type, holds, Assignment, Carry, CmpOp, Expr, FuncFn, GroundType, GuardedCommand,
    SeqFn, VarDecl, VarKind, VarName, FiniteModel, INVARIANT,
};
use crate::zparse::{concrete_aliases, Decoration, SchemaDef, ZExpr, ZSpec};

/// IR name of an input variable `p?`.
pub fn input_name(z: &str) -> String {
    format!("{z}?")
}

/// IR name of an output variable `t!`.
pub fn output_name(z: &str) -> String {
    format!("{z}__")
}

/// Declared inputs and outputs of an operation, as IR names.
pub fn op_io(op: &SchemaDef) -> (Vec<String>, Vec<String>) {
    (
        op.decls_with(Decoration::Input)
            .map(|d| input_name(&d.name))
            .collect(),
        op.decls_with(Decoration::Output)
            .map(|d| output_name(&d.name))
            .collect(),
    )
}

fn bottom_of(t: &GroundType) -> Option<Expr> {
    match t {
        GroundType::Enum(e) => e.bottom.map(|b| Expr::Elem {
            name: e.elems[b as usize].clone(),
            value: b,
        }),
        _ => None,
    }
}

/// Well-formedness conjuncts for a variable of type `t`.
fn shape_conjuncts(name: &str, t: &GroundType, injective: bool) -> Vec<Expr> {
    let v = Expr::Var(VarName::cur(name));
    match t {
        GroundType::Seq(sort) => {
            let mut out = Vec::new();
            if injective {
                out.push(Expr::Seq {
                    func: SeqFn::Injective,
                    sort: sort.clone(),
                    args: vec![v.clone()],
                });
            }
            out.push(Expr::Seq {
                func: SeqFn::Valid,
                sort: sort.clone(),
                args: vec![v],
            });
            out
        }
        GroundType::Func(sort) if sort.total => vec![Expr::Func {
            func: FuncFn::Total,
            sort: sort.clone(),
            args: vec![v],
        }],
        _ => Vec::new(),
    }
}

/// Translates one specification under `bounds`.
pub fn translate(spec: &ZSpec, bounds: &Bounds) -> Result<FiniteModel> {
    let env = TypeEnv::new(&[spec], bounds)?;
    let mut types = vec![("NAT".to_string(), env.nat.clone())];
    types.extend(env.named.iter().cloned());

    let mut vars: Vec<VarDecl> = Vec::new();
    for a in &spec.axdefs {
        vars.push(VarDecl {
            name: a.name.clone(),
            kind: VarKind::Local,
            ty: env.lower(&a.ty)?,
            constant: true,
        });
    }
    let mut injective = BTreeMap::new();
    for d in &spec.state_schema.decls {
        injective.insert(d.name.clone(), d.injective);
        vars.push(VarDecl {
            name: d.name.clone(),
            kind: VarKind::Local,
            ty: env.lower(&d.ty)?,
            constant: false,
        });
    }
    let mut io_injective = BTreeMap::new();
    for op in &spec.operations {
        for d in &op.decls {
            let (name, kind) = match d.decoration {
                Decoration::Input => (input_name(&d.name), VarKind::Input),
                Decoration::Output => (output_name(&d.name), VarKind::Output),
                _ => continue,
            };
            let ty = env.lower(&d.ty)?;
            match vars.iter().find(|v| v.name == name) {
                Some(v) if v.ty != ty || v.kind != kind => {
                    return Err(Error::TypeMismatch(format!(
                        "{name} declared as {} and as {ty}",
                        v.ty
                    )))
                }
                Some(_) => {}
                None => {
                    io_injective.insert(name.clone(), d.injective);
                    vars.push(VarDecl {
                        name,
                        kind,
                        ty,
                        constant: false,
                    });
                }
            }
        }
    }

    let types_of: BTreeMap<String, GroundType> =
        vars.iter().map(|v| (v.name.clone(), v.ty.clone())).collect();
    let is_state = |n: &str| spec.state_schema.decls.iter().any(|d| d.name == n);
    let is_const = |n: &str| spec.axdefs.iter().any(|a| a.name == n);
    let ty = |n: &str| types_of.get(n).cloned();

    // Invariant: shape conditions, input bottoms, axioms, state predicate.
    let mut inv = Vec::new();
    for v in vars.iter().filter(|v| !v.constant && v.kind == VarKind::Local) {
        inv.extend(shape_conjuncts(&v.name, &v.ty, injective[&v.name]));
    }
    for v in vars.iter().filter(|v| v.kind == VarKind::Input) {
        if let Some(b) = bottom_of(&v.ty) {
            inv.push(Expr::cmp(CmpOp::Neq, Expr::Var(VarName::cur(&v.name)), b));
        }
        inv.extend(shape_conjuncts(&v.name, &v.ty, io_injective[&v.name]));
    }
    let state_scope = |n: &str, d: Decoration| -> Option<(VarName, GroundType)> {
        match d {
            Decoration::Plain if is_state(n) || is_const(n) => Some((VarName::cur(n), ty(n)?)),
            _ => None,
        }
    };
    let lw = Lowerer {
        env: &env,
        lookup: &state_scope,
    };
    for a in &spec.axdefs {
        if let Some(p) = &a.pred {
            inv.push(lw.pred(p)?);
        }
    }
    inv.push(lw.pred(&spec.state_schema.pred)?);
    let invariant = Expr::and(inv);
    vars.push(VarDecl {
        name: INVARIANT.into(),
        kind: VarKind::Local,
        ty: GroundType::Bool,
        constant: false,
    });
    let inv_cur = Expr::Var(VarName::cur(INVARIANT));
    let inv_next = Expr::Var(VarName::next(INVARIANT));

    let init_scope = |n: &str, d: Decoration| -> Option<(VarName, GroundType)> {
        match d {
            Decoration::Primed if is_state(n) => Some((VarName::cur(n), ty(n)?)),
            _ => state_scope(n, d),
        }
    };
    let init = Lowerer {
        env: &env,
        lookup: &init_scope,
    }
    .pred(&spec.init_schema.pred)?;
    let init = Expr::and(vec![init, inv_cur.clone()]);

    let locals: Vec<String> = spec.state_schema.decls.iter().map(|d| d.name.clone()).collect();
    let mut commands = Vec::new();
    for op in &spec.operations {
        let declared = |n: &str, d: Decoration| op.decl(n, d).is_some();
        let op_scope = |n: &str, d: Decoration| -> Option<(VarName, GroundType)> {
            match d {
                Decoration::Primed if is_state(n) => Some((VarName::next(n), ty(n)?)),
                Decoration::Input if declared(n, d) => {
                    let m = input_name(n);
                    Some((VarName::cur(&m), ty(&m)?))
                }
                Decoration::Output if declared(n, d) => {
                    let m = output_name(n);
                    Some((VarName::next(&m), ty(&m)?))
                }
                _ => state_scope(n, d),
            }
        };
        let pred = Lowerer {
            env: &env,
            lookup: &op_scope,
        }
        .pred(&op.pred)?;
        let (_, outs) = op_io(op);
        let mut assigns = locals.clone();
        assigns.extend(outs);
        commands.push(GuardedCommand {
            label: op.name.clone(),
            guard: Expr::and(vec![pred, inv_cur.clone(), inv_next.clone()]),
            assigns,
            inputs: Carry::Fresh,
            outputs: Carry::Fresh,
        });
    }

    let model = FiniteModel {
        name: spec.name.clone(),
        types,
        vars,
        definitions: vec![(INVARIANT.into(), invariant)],
        init,
        commands,
        else_frame: Some(locals),
    };
    model.validate()?;
    Ok(model)
}

/// Translates a retrieve predicate over the state variables of `abs` and
/// `conc`. Concrete names that collide with abstract ones are referred to
/// by their aliases (see [`concrete_aliases`]).
pub fn translate_retrieve(
    pred: &ZExpr,
    abs: &ZSpec,
    conc: &ZSpec,
    bounds: &Bounds,
) -> Result<Expr> {
    let env = TypeEnv::new(&[abs, conc], bounds)?;
    let aliases = concrete_aliases(abs, conc);
    let mut scope: BTreeMap<String, GroundType> = BTreeMap::new();
    for (s, alias) in [(abs, None), (conc, Some(&aliases))] {
        let rename = |n: &str| {
            alias
                .and_then(|a| a.get(n).cloned())
                .unwrap_or_else(|| n.to_string())
        };
        for a in &s.axdefs {
            scope.insert(rename(&a.name), env.lower(&a.ty)?);
        }
        for d in &s.state_schema.decls {
            scope.insert(rename(&d.name), env.lower(&d.ty)?);
        }
    }
    let lookup = |n: &str, d: Decoration| -> Option<(VarName, GroundType)> {
        match d {
            Decoration::Plain => scope.get(n).map(|t| (VarName::cur(n), t.clone())),
            _ => None,
        }
    };
    Lowerer {
        env: &env,
        lookup: &lookup,
    }
    .pred(pred)
}

/// Brute-force precondition: does some after-state satisfy the guard of
/// `op`, given the before-state values of locals (`state`) and inputs
/// (`input`)? Outputs of a `Fresh` command are chosen freely.
pub fn precondition_of(
    op: &str,
    model: &FiniteModel,
    state: &Assignment,
    input: &Assignment,
) -> Result<bool> {
    let cmd = model
        .command(op)
        .ok_or_else(|| Error::InvalidSpec(format!("no operation {op} in {}", model.name)))?;
    let guard = cmd.guard.inline(&model.definitions);
    let layout = model.layout();
    let mut cur = Assignment::new();
    let mut next = Assignment::new();
    let mut free: Vec<(String, Vec<crate::ir::Value>)> = Vec::new();
    let missing = |n: &str| Error::InvalidSpec(format!("no value for {n}"));
    for v in &layout.vars {
        let given = match v.kind {
            VarKind::Input => input.get(&v.name),
            _ => state.get(&v.name),
        };
        if let Some(x) = given {
            cur.insert(v.name.clone(), x.clone());
        }
        let chosen = match v.kind {
            VarKind::Local => cmd.assigns.contains(&v.name),
            // Inputs belong to the before-state and are kept.
            VarKind::Input => false,
            VarKind::Output => cmd.outputs == Carry::Fresh,
        };
        if chosen {
            free.push((v.name.clone(), enumerate_type(&v.ty, u128::MAX)?));
        } else {
            let x = given.ok_or_else(|| missing(&v.name))?;
            next.insert(v.name.clone(), x.clone());
        }
    }
    let mut idx = vec![0usize; free.len()];
    if free.iter().any(|(_, d)| d.is_empty()) {
        return Ok(false);
    }
    loop {
        for (k, (n, dom)) in free.iter().enumerate() {
            next.insert(n.clone(), dom[idx[k]].clone());
        }
        let env = |v: &VarName| {
            if v.primed {
                next.get(&v.name).cloned()
            } else {
                cur.get(&v.name).cloned()
            }
        };
        if holds(&guard, &env)? {
            return Ok(true);
        }
        let mut k = 0;
        loop {
            if k == free.len() {
                return Ok(false);
            }
            idx[k] += 1;
            if idx[k] < free[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests;

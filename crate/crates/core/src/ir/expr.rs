use std::fmt;
use std::sync::Arc;

use super::types::{FreeSort, FuncSort, GroundType, SeqSort};
use super::value::Value;
use crate::error::Error;
use crate::toolkit;

/// A variable reference by name; `primed` selects the after-state copy.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName {
    pub name: String,
    pub primed: bool,
}

impl VarName {
    pub fn cur(name: impl Into<String>) -> Self {
        VarName {
            name: name.into(),
            primed: false,
        }
    }

    pub fn next(name: impl Into<String>) -> Self {
        VarName {
            name: name.into(),
            primed: true,
        }
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.primed {
            write!(f, "{}'", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Le,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetFn {
    Empty,
    /// Every proper (non-bottom) element of the carrier.
    Full,
    Contains,
    Insert,
    Remove,
    Union,
    Difference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeqFn {
    Empty,
    Append,
    /// Delete every occurrence of an element and compact.
    Remove,
    Filter,
    Concat,
    Range,
    Domain,
    Size,
    Injective,
    Valid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FreeFn {
    Construct(usize),
    IsBranch(usize),
    Inverse(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FuncFn {
    Apply,
    Domain,
    Range,
    Size,
    Total,
}

/// First-order boolean/value expressions over IR variables, generic in the
/// variable representation so that the same tree can be evaluated by name or
/// after lowering to slot indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr<V = VarName> {
    Bool(bool),
    Int(i64),
    /// Enumerated constant; `name` is kept for rendering.
    Elem {
        name: String,
        value: u32,
    },
    Var(V),
    Not(Box<Expr<V>>),
    And(Vec<Expr<V>>),
    Or(Vec<Expr<V>>),
    Implies(Box<Expr<V>>, Box<Expr<V>>),
    Cmp(CmpOp, Box<Expr<V>>, Box<Expr<V>>),
    Set {
        func: SetFn,
        carrier: Arc<GroundType>,
        args: Vec<Expr<V>>,
    },
    Count {
        carrier: Arc<GroundType>,
        arg: Box<Expr<V>>,
    },
    Seq {
        func: SeqFn,
        sort: Arc<SeqSort>,
        args: Vec<Expr<V>>,
    },
    Free {
        func: FreeFn,
        sort: Arc<FreeSort>,
        arg: Box<Expr<V>>,
    },
    Func {
        func: FuncFn,
        sort: Arc<FuncSort>,
        args: Vec<Expr<V>>,
    },
    /// Bounded existential over a finite type.
    Exists {
        var: V,
        ty: GroundType,
        body: Box<Expr<V>>,
    },
}

impl<V> Expr<V> {
    pub fn var(v: V) -> Self {
        Expr::Var(v)
    }

    pub fn not(e: Expr<V>) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn cmp(op: CmpOp, a: Expr<V>, b: Expr<V>) -> Self {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr<V>, b: Expr<V>) -> Self {
        Expr::cmp(CmpOp::Eq, a, b)
    }

    pub fn implies(a: Expr<V>, b: Expr<V>) -> Self {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    /// Conjunction that flattens nested `And`s and drops literal `true`.
    pub fn and(parts: Vec<Expr<V>>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Expr::And(inner) => out.extend(inner),
                Expr::Bool(true) => {}
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::Bool(true),
            1 => out.pop().unwrap(),
            _ => Expr::And(out),
        }
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Expr<V>> {
        match self {
            Expr::And(ps) => ps.iter().flat_map(|p| p.conjuncts()).collect(),
            Expr::Bool(true) => Vec::new(),
            other => vec![other],
        }
    }

    pub fn map_vars<W>(&self, f: &mut impl FnMut(&V) -> W) -> Expr<W> {
        self.map_dyn(f)
    }

    fn map_dyn<W>(&self, f: &mut dyn FnMut(&V) -> W) -> Expr<W> {
        let list = |xs: &[Expr<V>], f: &mut dyn FnMut(&V) -> W| -> Vec<Expr<W>> {
            xs.iter().map(|x| x.map_dyn(f)).collect()
        };
        match self {
            Expr::Bool(b) => Expr::Bool(*b),
            Expr::Int(i) => Expr::Int(*i),
            Expr::Elem { name, value } => Expr::Elem {
                name: name.clone(),
                value: *value,
            },
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::Not(a) => Expr::Not(Box::new(a.map_dyn(f))),
            Expr::And(xs) => Expr::And(list(xs, f)),
            Expr::Or(xs) => Expr::Or(list(xs, f)),
            Expr::Implies(a, b) => {
                let a = a.map_dyn(f);
                Expr::Implies(Box::new(a), Box::new(b.map_dyn(f)))
            }
            Expr::Cmp(op, a, b) => {
                let a = a.map_dyn(f);
                Expr::Cmp(*op, Box::new(a), Box::new(b.map_dyn(f)))
            }
            Expr::Set {
                func,
                carrier,
                args,
            } => Expr::Set {
                func: *func,
                carrier: carrier.clone(),
                args: list(args, f),
            },
            Expr::Count { carrier, arg } => Expr::Count {
                carrier: carrier.clone(),
                arg: Box::new(arg.map_dyn(f)),
            },
            Expr::Seq { func, sort, args } => Expr::Seq {
                func: *func,
                sort: sort.clone(),
                args: list(args, f),
            },
            Expr::Free { func, sort, arg } => Expr::Free {
                func: *func,
                sort: sort.clone(),
                arg: Box::new(arg.map_dyn(f)),
            },
            Expr::Func { func, sort, args } => Expr::Func {
                func: *func,
                sort: sort.clone(),
                args: list(args, f),
            },
            Expr::Exists { var, ty, body } => Expr::Exists {
                var: f(var),
                ty: ty.clone(),
                body: Box::new(body.map_dyn(f)),
            },
        }
    }

    /// Visits every variable occurrence, including bound ones.
    pub fn visit_vars(&self, f: &mut dyn FnMut(&V)) {
        match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Elem { .. } => {}
            Expr::Var(v) => f(v),
            Expr::Not(a) => a.visit_vars(f),
            Expr::Count { arg, .. } | Expr::Free { arg, .. } => arg.visit_vars(f),
            Expr::Implies(a, b) | Expr::Cmp(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.visit_vars(f)),
            Expr::Set { args, .. } | Expr::Seq { args, .. } | Expr::Func { args, .. } => {
                args.iter().for_each(|x| x.visit_vars(f))
            }
            Expr::Exists { var, body, .. } => {
                f(var);
                body.visit_vars(f)
            }
        }
    }

    /// Visits every sub-expression in pre-order.
    pub fn visit(&self, f: &mut dyn FnMut(&Expr<V>)) {
        f(self);
        match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Elem { .. } | Expr::Var(_) => {}
            Expr::Not(a) => a.visit(f),
            Expr::Count { arg, .. } | Expr::Free { arg, .. } => arg.visit(f),
            Expr::Implies(a, b) | Expr::Cmp(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.visit(f)),
            Expr::Set { args, .. } | Expr::Seq { args, .. } | Expr::Func { args, .. } => {
                args.iter().for_each(|x| x.visit(f))
            }
            Expr::Exists { body, .. } => body.visit(f),
        }
    }
}

impl Expr<VarName> {
    /// Primes every unprimed variable (the `invariant__'` construction).
    pub fn primed(&self) -> Self {
        self.map_vars(&mut |v: &VarName| VarName::next(v.name.clone()))
    }

    /// Free variables, deduplicated, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<VarName> {
        let mut bound = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Exists { var, .. } = e {
                bound.push(var.clone());
            }
        });
        let mut out: Vec<VarName> = Vec::new();
        self.visit_vars(&mut |v| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }

    /// Replaces `Var(name)` / `Var(name')` with the given definitions.
    pub fn inline(&self, defs: &[(String, Expr)]) -> Self {
        match self {
            Expr::Var(v) => match defs.iter().find(|(n, _)| *n == v.name) {
                Some((_, body)) if v.primed => body.inline(defs).primed(),
                Some((_, body)) => body.inline(defs),
                None => self.clone(),
            },
            Expr::Not(a) => Expr::not(a.inline(defs)),
            Expr::And(xs) => Expr::and(xs.iter().map(|x| x.inline(defs)).collect()),
            Expr::Or(xs) => Expr::Or(xs.iter().map(|x| x.inline(defs)).collect()),
            Expr::Implies(a, b) => Expr::implies(a.inline(defs), b.inline(defs)),
            Expr::Cmp(op, a, b) => Expr::cmp(*op, a.inline(defs), b.inline(defs)),
            Expr::Count { carrier, arg } => Expr::Count {
                carrier: carrier.clone(),
                arg: Box::new(arg.inline(defs)),
            },
            Expr::Free { func, sort, arg } => Expr::Free {
                func: *func,
                sort: sort.clone(),
                arg: Box::new(arg.inline(defs)),
            },
            Expr::Set {
                func,
                carrier,
                args,
            } => Expr::Set {
                func: *func,
                carrier: carrier.clone(),
                args: args.iter().map(|x| x.inline(defs)).collect(),
            },
            Expr::Seq { func, sort, args } => Expr::Seq {
                func: *func,
                sort: sort.clone(),
                args: args.iter().map(|x| x.inline(defs)).collect(),
            },
            Expr::Func { func, sort, args } => Expr::Func {
                func: *func,
                sort: sort.clone(),
                args: args.iter().map(|x| x.inline(defs)).collect(),
            },
            Expr::Exists { var, ty, body } => Expr::Exists {
                var: var.clone(),
                ty: ty.clone(),
                body: Box::new(body.inline(defs)),
            },
            Expr::Bool(_) | Expr::Int(_) | Expr::Elem { .. } => self.clone(),
        }
    }

    /// Renames variables (both decorations) according to `f`.
    pub fn rename(&self, f: &dyn Fn(&str) -> Option<String>) -> Self {
        self.map_vars(&mut |v: &VarName| VarName {
            name: f(&v.name).unwrap_or_else(|| v.name.clone()),
            primed: v.primed,
        })
    }
}

/// Evaluation outcome other than a value. `Undefined` arises from partial
/// toolkit operations (append at capacity, constructor inverse on the wrong
/// branch without a bottom element); `Fatal` means the expression was
/// ill-typed for its environment, i.e. a translator bug.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    Undefined(String),
    Fatal(Error),
}

impl From<Error> for EvalError {
    fn from(e: Error) -> Self {
        match e {
            Error::CapacityExceeded { .. } | Error::WrongBranch(_) => {
                EvalError::Undefined(e.to_string())
            }
            other => EvalError::Fatal(other),
        }
    }
}

pub type EvalResult<T> = Result<T, EvalError>;

fn mismatch(msg: impl Into<String>) -> EvalError {
    EvalError::Fatal(Error::TypeMismatch(msg.into()))
}

/// Variable lookup used by the evaluator.
pub trait Env<V> {
    fn lookup(&self, v: &V) -> Option<Value>;
}

impl<V, F: Fn(&V) -> Option<Value>> Env<V> for F {
    fn lookup(&self, v: &V) -> Option<Value> {
        self(v)
    }
}

/// Evaluates `expr` under `env`.
///
/// Boolean connectives are strong Kleene: a `false` conjunct (or `true`
/// disjunct) decides the result even if a sibling is undefined, so the
/// outcome does not depend on conjunct order.
pub fn eval<V: PartialEq + Clone + fmt::Debug>(
    expr: &Expr<V>,
    env: &dyn Env<V>,
) -> EvalResult<Value> {
    let mut binds = Vec::new();
    eval_in(expr, env, &mut binds)
}

/// Evaluates a boolean expression, reading undefinedness as `false`.
pub fn holds<V: PartialEq + Clone + fmt::Debug>(
    expr: &Expr<V>,
    env: &dyn Env<V>,
) -> Result<bool, Error> {
    match eval(expr, env) {
        Ok(Value::Bool(b)) => Ok(b),
        Ok(other) => Err(Error::TypeMismatch(format!(
            "expected boolean, found {other}"
        ))),
        Err(EvalError::Undefined(_)) => Ok(false),
        Err(EvalError::Fatal(e)) => Err(e),
    }
}

fn eval_bool<V: PartialEq + Clone + fmt::Debug>(
    e: &Expr<V>,
    env: &dyn Env<V>,
    binds: &mut Vec<(V, Value)>,
) -> EvalResult<bool> {
    match eval_in(e, env, binds)? {
        Value::Bool(b) => Ok(b),
        other => Err(mismatch(format!("expected boolean, found {other}"))),
    }
}

fn eval_in<V: PartialEq + Clone + fmt::Debug>(
    expr: &Expr<V>,
    env: &dyn Env<V>,
    binds: &mut Vec<(V, Value)>,
) -> EvalResult<Value> {
    Ok(match expr {
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Int(i) => Value::Int(*i),
        Expr::Elem { value, .. } => Value::Elem(*value),
        Expr::Var(v) => {
            if let Some((_, val)) = binds.iter().rev().find(|(b, _)| b == v) {
                val.clone()
            } else {
                env.lookup(v)
                    .ok_or_else(|| EvalError::Fatal(Error::Scope(format!("{v:?}"))))?
            }
        }
        Expr::Not(a) => Value::Bool(!eval_bool(a, env, binds)?),
        Expr::And(xs) => {
            let mut undefined = None;
            for x in xs {
                match eval_bool(x, env, binds) {
                    Ok(false) => return Ok(Value::Bool(false)),
                    Ok(true) => {}
                    Err(EvalError::Undefined(m)) => undefined = Some(m),
                    Err(fatal) => return Err(fatal),
                }
            }
            match undefined {
                Some(m) => return Err(EvalError::Undefined(m)),
                None => Value::Bool(true),
            }
        }
        Expr::Or(xs) => {
            let mut undefined = None;
            for x in xs {
                match eval_bool(x, env, binds) {
                    Ok(true) => return Ok(Value::Bool(true)),
                    Ok(false) => {}
                    Err(EvalError::Undefined(m)) => undefined = Some(m),
                    Err(fatal) => return Err(fatal),
                }
            }
            match undefined {
                Some(m) => return Err(EvalError::Undefined(m)),
                None => Value::Bool(false),
            }
        }
        Expr::Implies(a, b) => {
            let lhs = eval_bool(a, env, binds);
            if let Ok(false) = lhs {
                return Ok(Value::Bool(true));
            }
            let rhs = eval_bool(b, env, binds);
            match (lhs, rhs) {
                (_, Ok(true)) => Value::Bool(true),
                (Ok(true), Ok(false)) => Value::Bool(false),
                (Err(EvalError::Fatal(e)), _) | (_, Err(EvalError::Fatal(e))) => {
                    return Err(EvalError::Fatal(e))
                }
                (Err(u), _) | (_, Err(u)) => return Err(u),
                (Ok(false), _) => unreachable!(),
            }
        }
        Expr::Cmp(op, a, b) => {
            let x = eval_in(a, env, binds)?;
            let y = eval_in(b, env, binds)?;
            Value::Bool(match op {
                CmpOp::Eq => x == y,
                CmpOp::Neq => x != y,
                CmpOp::Lt | CmpOp::Le => match (&x, &y) {
                    (Value::Int(i), Value::Int(j)) => {
                        if *op == CmpOp::Lt {
                            i < j
                        } else {
                            i <= j
                        }
                    }
                    _ => return Err(mismatch(format!("ordering on {x} and {y}"))),
                },
            })
        }
        Expr::Set {
            func,
            carrier,
            args,
        } => {
            let vals = eval_args(args, env, binds)?;
            toolkit::set_ops(*func, carrier, &vals)?
        }
        Expr::Count { carrier, arg } => {
            let v = eval_in(arg, env, binds)?;
            Value::Int(toolkit::count_size(&v, carrier)?)
        }
        Expr::Seq { func, sort, args } => {
            let vals = eval_args(args, env, binds)?;
            toolkit::seq_ops(*func, sort, &vals)?
        }
        Expr::Free { func, sort, arg } => {
            let v = eval_in(arg, env, binds)?;
            toolkit::freetype_ops(*func, sort, &v)?
        }
        Expr::Func { func, sort, args } => {
            let vals = eval_args(args, env, binds)?;
            toolkit::func_ops(*func, sort, &vals)?
        }
        Expr::Exists { var, ty, body } => {
            let domain = super::value::enumerate_type(ty, u128::MAX).map_err(EvalError::Fatal)?;
            let mut undefined = None;
            for v in domain {
                binds.push((var.clone(), v));
                let r = eval_bool(body, env, binds);
                binds.pop();
                match r {
                    Ok(true) => return Ok(Value::Bool(true)),
                    Ok(false) => {}
                    Err(EvalError::Undefined(m)) => undefined = Some(m),
                    Err(fatal) => return Err(fatal),
                }
            }
            match undefined {
                Some(m) => return Err(EvalError::Undefined(m)),
                None => Value::Bool(false),
            }
        }
    })
}

fn eval_args<V: PartialEq + Clone + fmt::Debug>(
    args: &[Expr<V>],
    env: &dyn Env<V>,
    binds: &mut Vec<(V, Value)>,
) -> EvalResult<Vec<Value>> {
    args.iter().map(|a| eval_in(a, env, binds)).collect()
}

//! Finite transition-system intermediate representation.

pub mod ctl;
pub mod expr;
pub mod model;
pub mod render;
pub mod types;
pub mod value;

pub use ctl::CtlFormula;
pub use expr::{eval, holds, CmpOp, EvalError, Expr, FreeFn, FuncFn, SeqFn, SetFn, VarName};
pub use model::{Carry, FiniteModel, GuardedCommand, Layout, VarDecl, VarKind, INVARIANT};
pub use types::{EnumType, FreeSort, FuncSort, GroundType, SeqSort};
pub use value::{enumerate_type, Valuation, Value};

use std::collections::BTreeMap;

/// Name-keyed assignment, used at API boundaries.
pub type Assignment = BTreeMap<String, Value>;

/// Evaluates `expr` with unprimed and primed variables read from `cur` and
/// `next` respectively.
pub fn eval_expr(expr: &Expr, cur: &Assignment, next: &Assignment) -> Result<Value, EvalError> {
    let env = |v: &VarName| {
        if v.primed {
            next.get(&v.name).cloned()
        } else {
            cur.get(&v.name).cloned()
        }
    };
    eval(expr, &env)
}

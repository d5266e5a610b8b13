//! SAL-syntax rendering of IR expressions.

use std::fmt;

use super::expr::{CmpOp, Expr, FreeFn, FuncFn, SeqFn, SetFn, VarName};
use super::types::{FreeSort, GroundType};

/// Maps a ground type to the name used for it in rendered text.
pub type TypeNamer<'a> = &'a dyn Fn(&GroundType) -> String;

pub fn default_namer(t: &GroundType) -> String {
    t.to_string()
}

/// Name of the counting context generated for a carrier.
pub fn counter_name(carrier_name: &str) -> String {
    format!("{carrier_name}__counter")
}

pub fn set_prefix(carrier: &GroundType, names: TypeNamer) -> String {
    format!("set {{{};}}", names(carrier))
}

pub fn seq_prefix(t: &GroundType, names: TypeNamer) -> String {
    match t {
        GroundType::Seq(s) => format!(
            "sequence {{{}; {}, {}}}",
            s.carrier.name,
            s.carrier.elems[s.bottom() as usize],
            s.cap
        ),
        other => names(other),
    }
}

fn free_prefix(sort: &FreeSort) -> String {
    format!("free {{{};}}", sort.ty.name)
}

/// Type as it appears in a variable declaration.
pub fn decl_type(t: &GroundType, names: TypeNamer) -> String {
    match t {
        GroundType::Set(c) => format!("{} ! Set", set_prefix(c, names)),
        GroundType::Seq(_) => format!("{} ! Sequence", seq_prefix(t, names)),
        GroundType::Func(f) => format!(
            "function {{{}; {}; {}}} ! Function",
            names(&f.dom),
            f.ran.name,
            f.ran.elems[f.ran.bottom.unwrap_or(0) as usize]
        ),
        other => names(other),
    }
}

fn prec<V>(e: &Expr<V>) -> u8 {
    match e {
        Expr::Implies(..) => 1,
        Expr::Or(_) => 2,
        Expr::And(_) => 3,
        Expr::Not(_) => 4,
        Expr::Cmp(..) => 5,
        _ => 6,
    }
}

pub fn render(e: &Expr, names: TypeNamer) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, names);
    out
}

fn child(out: &mut String, e: &Expr, min: u8, names: TypeNamer) {
    if prec(e) < min {
        out.push('(');
        write_expr(out, e, names);
        out.push(')');
    } else {
        write_expr(out, e, names);
    }
}

fn call(out: &mut String, prefix: &str, func: &str, args: &[Expr], names: TypeNamer) {
    out.push_str(prefix);
    out.push_str(" ! ");
    out.push_str(func);
    if !args.is_empty() {
        out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_expr(out, a, names);
        }
        out.push(')');
    }
}

fn write_expr(out: &mut String, e: &Expr, names: TypeNamer) {
    match e {
        Expr::Bool(true) => out.push_str("TRUE"),
        Expr::Bool(false) => out.push_str("FALSE"),
        Expr::Int(i) => out.push_str(&i.to_string()),
        Expr::Elem { name, .. } => out.push_str(name),
        Expr::Var(v) => out.push_str(&v.to_string()),
        Expr::Not(a) => {
            out.push_str("NOT ");
            child(out, a, 5, names);
        }
        Expr::And(xs) | Expr::Or(xs) => {
            let (sep, p) = if matches!(e, Expr::And(_)) {
                (" AND ", 4)
            } else {
                (" OR ", 3)
            };
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                child(out, x, p, names);
            }
        }
        Expr::Implies(a, b) => {
            child(out, a, 2, names);
            out.push_str(" => ");
            child(out, b, 1, names);
        }
        Expr::Cmp(op, a, b) => {
            child(out, a, 6, names);
            out.push_str(match op {
                CmpOp::Eq => " = ",
                CmpOp::Neq => " /= ",
                CmpOp::Lt => " < ",
                CmpOp::Le => " <= ",
            });
            child(out, b, 6, names);
        }
        Expr::Set {
            func,
            carrier,
            args,
        } => {
            let f = match func {
                SetFn::Empty => "empty",
                SetFn::Full => "full",
                SetFn::Contains => "contains?",
                SetFn::Insert => "insert",
                SetFn::Remove => "remove",
                SetFn::Union => "union",
                SetFn::Difference => "difference",
            };
            call(out, &set_prefix(carrier, names), f, args, names);
        }
        Expr::Count { carrier, arg } => {
            let prefix = counter_name(&names(carrier));
            call(out, &prefix, "size?", std::slice::from_ref(arg), names);
        }
        Expr::Seq { func, sort, args } => {
            let f = match func {
                SeqFn::Empty => "empty",
                SeqFn::Append => "append",
                SeqFn::Remove => "remove",
                SeqFn::Filter => "filter",
                SeqFn::Concat => "concat",
                SeqFn::Range => "range",
                SeqFn::Domain => "domain",
                SeqFn::Size => "size?",
                SeqFn::Injective => "injective?",
                SeqFn::Valid => "valid?",
            };
            let prefix = seq_prefix(&GroundType::Seq(sort.clone()), names);
            call(out, &prefix, f, args, names);
        }
        Expr::Free { func, sort, arg } => {
            let f = match func {
                FreeFn::Construct(b) => sort.branches[*b].name.clone(),
                FreeFn::IsBranch(b) => format!("{}?", sort.branches[*b].name),
                FreeFn::Inverse(b) => format!("{}__inv", sort.branches[*b].name),
            };
            call(out, &free_prefix(sort), &f, std::slice::from_ref(arg), names);
        }
        Expr::Func { func, sort, args } => {
            let f = match func {
                FuncFn::Apply => "apply",
                FuncFn::Domain => "domain",
                FuncFn::Range => "range",
                FuncFn::Size => "size?",
                FuncFn::Total => "total?",
            };
            let t = GroundType::Func(sort.clone());
            let prefix = decl_type(&t, names);
            let prefix = prefix.trim_end_matches(" ! Function");
            call(out, prefix, f, args, names);
        }
        Expr::Exists { var, ty, body } => {
            out.push_str(&format!("(EXISTS ({var} : {}) : ", names(ty)));
            write_expr(out, body, names);
            out.push(')');
        }
    }
}

impl fmt::Display for Expr<VarName> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, &default_namer))
    }
}

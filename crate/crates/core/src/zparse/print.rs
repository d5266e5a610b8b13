//! LaTeX pretty-printer; its output parses back to the same AST.

use super::ast::*;

fn print_type(t: &TypeExpr, injective: bool) -> String {
    match t {
        TypeExpr::Nat => "\\nat".into(),
        TypeExpr::Named(n) => n.clone(),
        TypeExpr::Power(a) => format!("\\pset {}", type_atom(a)),
        TypeExpr::Seq(a) => {
            let kw = if injective { "iseq" } else { "seq" };
            format!("{kw}~{}", type_atom(a))
        }
        TypeExpr::Func { total, dom, ran } => {
            let arrow = if *total { "\\fun" } else { "\\pfun" };
            format!("{} {arrow} {}", type_atom(dom), print_type(ran, false))
        }
        TypeExpr::Rel(a, b) => format!("{} \\rel {}", type_atom(a), print_type(b, false)),
        TypeExpr::Product(ts) => ts
            .iter()
            .map(type_atom)
            .collect::<Vec<_>>()
            .join(" \\cross "),
    }
}

fn type_atom(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Func { .. } | TypeExpr::Rel(..) | TypeExpr::Product(_) => {
            format!("({})", print_type(t, false))
        }
        _ => print_type(t, false),
    }
}

fn prec(e: &ZExpr) -> u8 {
    match e {
        ZExpr::Implies(..) => 1,
        ZExpr::And(_) => 2,
        ZExpr::Rel(..) => 3,
        ZExpr::Bin(op, ..) if *op != BinOp::Filter => 4,
        ZExpr::Bin(..) => 5,
        ZExpr::Card(_) | ZExpr::Ran(_) | ZExpr::Dom(_) => 6,
        _ => 7,
    }
}

fn wrap(e: &ZExpr, min: u8) -> String {
    if prec(e) < min {
        format!("({})", print_expr(e))
    } else {
        print_expr(e)
    }
}

fn list(xs: &[ZExpr]) -> String {
    xs.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

/// Prints an expression on one line.
pub fn print_expr(e: &ZExpr) -> String {
    match e {
        ZExpr::Bool(b) => b.to_string(),
        ZExpr::Num(n) => n.to_string(),
        ZExpr::Ident(n, d) => format!("{n}{}", d.suffix()),
        ZExpr::EmptySet => "\\emptyset".into(),
        ZExpr::EmptySeq => "\\emptyseq".into(),
        ZExpr::SetDisplay(xs) => format!("\\{{ {} \\}}", list(xs)),
        ZExpr::SeqDisplay(xs) => format!("\\lseq {} \\rseq", list(xs)),
        ZExpr::Bin(op, a, b) => {
            let (sym, p) = match op {
                BinOp::Union => ("\\cup", 4),
                BinOp::SetMinus => ("\\setminus", 4),
                BinOp::Cat => ("\\cat", 4),
                BinOp::Filter => ("\\filter", 5),
            };
            format!("{} {sym} {}", wrap(a, p), wrap(b, p + 1))
        }
        ZExpr::Card(a) => format!("\\# {}", wrap(a, 6)),
        ZExpr::Ran(a) => format!("\\ran {}", wrap(a, 6)),
        ZExpr::Dom(a) => format!("\\dom {}", wrap(a, 6)),
        ZExpr::Apply(f, a) => format!("{f}({})", print_expr(a)),
        ZExpr::Inverse(f, a) => format!("{f}^{{-1}}({})", print_expr(a)),
        ZExpr::Rel(op, a, b) => {
            let sym = match op {
                RelOp::Eq => "=",
                RelOp::Neq => "\\neq",
                RelOp::Lt => "<",
                RelOp::Le => "\\leq",
                RelOp::In => "\\in",
                RelOp::NotIn => "\\notin",
            };
            format!("{} {sym} {}", wrap(a, 4), wrap(b, 4))
        }
        ZExpr::And(xs) => xs
            .iter()
            .map(|x| wrap(x, 3))
            .collect::<Vec<_>>()
            .join(" \\land "),
        ZExpr::Implies(a, b) => format!("{} \\implies {}", wrap(a, 2), wrap(b, 1)),
    }
}

/// Prints a predicate with one top-level conjunct per line.
fn print_pred(e: &ZExpr) -> String {
    e.conjuncts()
        .iter()
        .map(|c| print_expr(c))
        .collect::<Vec<_>>()
        .join(" \\\\\n")
}

fn print_schema(s: &SchemaDef) -> String {
    let mut decls: Vec<String> = s
        .includes
        .iter()
        .map(|i| {
            if i.delta {
                format!("\\Delta {}", i.schema)
            } else if i.primed {
                format!("{}'", i.schema)
            } else {
                i.schema.clone()
            }
        })
        .collect();
    decls.extend(s.decls.iter().filter(|d| !d.included).map(|d| {
        format!(
            "{}{} : {}",
            d.name,
            d.decoration.suffix(),
            print_type(&d.ty, d.injective)
        )
    }));
    let mut out = format!("\\begin{{schema}}{{{}}}\n{}\n", s.name, decls.join(" \\\\\n"));
    if s.pred != ZExpr::Bool(true) {
        out.push_str("\\where\n");
        out.push_str(&print_pred(&s.pred));
        out.push('\n');
    }
    out.push_str("\\end{schema}\n");
    out
}

/// Prints a whole specification as LaTeX markup.
pub fn print_spec(s: &ZSpec) -> String {
    let mut out = String::new();
    if !s.given_types.is_empty() {
        out.push_str(&format!(
            "\\begin{{zed}}\n[{}]\n\\end{{zed}}\n\n",
            s.given_types.join(", ")
        ));
    }
    for f in &s.free_types {
        let branches: Vec<String> = f
            .branches
            .iter()
            .map(|(b, arg)| match arg {
                Some(t) => format!("{b} \\lang {} \\rang", print_type(t, false)),
                None => b.clone(),
            })
            .collect();
        out.push_str(&format!(
            "\\begin{{zed}}\n{} ::= {}\n\\end{{zed}}\n\n",
            f.name,
            branches.join(" \\bbar ")
        ));
    }
    for a in &s.axdefs {
        out.push_str(&format!(
            "\\begin{{axdef}}\n{} : {}\n",
            a.name,
            print_type(&a.ty, false)
        ));
        if let Some(p) = &a.pred {
            out.push_str(&format!("\\where\n{}\n", print_pred(p)));
        }
        out.push_str("\\end{axdef}\n\n");
    }
    out.push_str(&print_schema(&s.state_schema));
    out.push('\n');
    out.push_str(&print_schema(&s.init_schema));
    for op in &s.operations {
        out.push('\n');
        out.push_str(&print_schema(op));
    }
    out
}

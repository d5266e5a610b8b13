//! SAL text for finite models.

use crate::ir::render::{counter_name, decl_type, render};
use crate::ir::{Expr, FiniteModel, GroundType, VarKind};

fn type_def(t: &GroundType) -> String {
    match t {
        GroundType::IntRange { lo, hi } => format!("[{lo}..{hi}]"),
        GroundType::Enum(e) => format!("{{{}}}", e.elems.join(", ")),
        other => other.to_string(),
    }
}

/// Carriers counted with `size?` anywhere in the model, in type order.
fn counted(m: &FiniteModel) -> Vec<(String, GroundType)> {
    let mut found: Vec<GroundType> = Vec::new();
    let mut look = |e: &Expr| {
        e.visit(&mut |x| {
            if let Expr::Count { carrier, .. } = x {
                if !found.contains(carrier) {
                    found.push((**carrier).clone());
                }
            }
        })
    };
    m.definitions.iter().for_each(|(_, e)| look(e));
    look(&m.init);
    m.commands.iter().for_each(|c| look(&c.guard));
    m.types
        .iter()
        .filter(|(_, t)| found.contains(t))
        .cloned()
        .collect()
}

/// A conjunct, parenthesized when it is weaker than AND.
fn conjunct(e: &Expr, names: &dyn Fn(&GroundType) -> String) -> String {
    render(&Expr::And(vec![e.clone()]), names)
}

fn conjunction(e: &Expr, names: &dyn Fn(&GroundType) -> String, sep: &str) -> String {
    let cs = e.conjuncts();
    if cs.is_empty() {
        return "TRUE".into();
    }
    cs.iter()
        .map(|c| conjunct(c, names))
        .collect::<Vec<_>>()
        .join(sep)
}

/// Renders `m` as a SAL context named `context` holding one module `State`.
pub fn emit_sal(m: &FiniteModel, context: &str) -> String {
    let names = |t: &GroundType| -> String {
        m.types
            .iter()
            .find(|(_, u)| u == t)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| t.to_string())
    };
    let mut out = format!("{context} : CONTEXT = BEGIN\n\n");
    for (n, t) in &m.types {
        out += &format!("{n} : TYPE = {};\n", type_def(t));
    }
    for (n, t) in counted(m) {
        if let GroundType::Enum(e) = &t {
            out += &format!(
                "{} : CONTEXT = count{} {{{n}; {}}};\n",
                counter_name(&n),
                e.card(),
                e.elems.join(", ")
            );
        }
    }
    out += "\nState : MODULE =\nBEGIN\n";
    for v in &m.vars {
        let kind = match v.kind {
            VarKind::Local => "LOCAL",
            VarKind::Input => "INPUT",
            VarKind::Output => "OUTPUT",
        };
        out += &format!(" {kind} {} : {}\n", v.name, decl_type(&v.ty, &names));
    }
    if !m.definitions.is_empty() {
        out += " DEFINITION\n";
        for (n, e) in &m.definitions {
            out += &format!(
                "   {n} = ({})\n",
                conjunction(e, &names, " AND\n     ")
            );
        }
    }
    out += &format!(
        " INITIALIZATION [\n     {}\n   -->\n ]\n TRANSITION [\n",
        conjunction(&m.init, &names, " AND\n     ")
    );
    let mut branches = Vec::new();
    for c in &m.commands {
        let body: Vec<String> = c
            .assigns
            .iter()
            .map(|a| {
                let t = m.var(a).map(|v| decl_type(&v.ty, &names)).unwrap_or_default();
                format!("       {a}' IN {{x : {t} | TRUE}}")
            })
            .collect();
        branches.push(format!(
            "   {} :\n       {}\n     -->\n{}\n",
            c.label,
            conjunction(&c.guard, &names, " AND\n       "),
            body.join(";\n")
        ));
    }
    if let Some(frame) = &m.else_frame {
        let eqs: Vec<String> = frame.iter().map(|l| format!("{l}' = {l}")).collect();
        branches.push(format!("   ELSE -->    {}\n", eqs.join(";\n       ")));
    }
    out += &branches.join("   []\n");
    out += " ]\nEND;\nEND\n";
    out
}

/// Whitespace-insensitive form for comparing SAL text: runs of whitespace
/// collapse to one space, which is dropped unless it separates two word
/// characters.
pub fn normalize(text: &str) -> String {
    let word = |c: char| c.is_alphanumeric() || matches!(c, '_' | '?' | '\'');
    let words: Vec<&str> = text.split_whitespace().collect();
    let mut out = String::new();
    for w in words {
        if let (Some(a), Some(b)) = (out.chars().last(), w.chars().next()) {
            if word(a) && word(b) {
                out.push(' ');
            }
        }
        out.push_str(w);
    }
    out
}

//! Parser for the supported Z LaTeX-markup subset.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod print;

use std::collections::{BTreeMap, BTreeSet};

pub use ast::*;
pub use parser::parse_predicate;
use parser::{parse_items, DeclItem, Item, RawSchema};
pub use print::{print_expr, print_spec};

use crate::error::{Error, Result};

/// Parses one specification: given and free types, axiomatic constants, a
/// state schema, an initialisation schema and operations.
pub fn parse_spec(source: &str) -> Result<ZSpec> {
    let items = parse_items(source)?;
    let mut given = Vec::new();
    let mut free = Vec::new();
    let mut axdefs: Vec<AxDef> = Vec::new();
    let mut schemas: Vec<RawSchema> = Vec::new();
    for it in items {
        match it {
            Item::Given(ns) => given.extend(ns),
            Item::Free(f) => free.push(f),
            Item::Axdef(ds) => axdefs.extend(ds),
            Item::Schema(s) => schemas.push(s),
        }
    }
    let mut globals = BTreeSet::new();
    for n in given.iter().chain(free.iter().map(|f| &f.name)) {
        if !globals.insert(n.clone()) {
            return Err(Error::InvalidSpec(format!("type {n} declared twice")));
        }
    }
    let type_names = globals.clone();
    for f in &free {
        for (b, arg) in &f.branches {
            if !globals.insert(b.clone()) {
                return Err(Error::InvalidSpec(format!("constructor {b} declared twice")));
            }
            if let Some(t) = arg {
                check_type(t, &type_names)?;
            }
        }
    }
    for a in &axdefs {
        check_type(&a.ty, &type_names)?;
        if !globals.insert(a.name.clone()) {
            return Err(Error::InvalidSpec(format!("constant {} declared twice", a.name)));
        }
    }

    let mut names = BTreeSet::new();
    for s in &schemas {
        if !names.insert(s.name.clone()) {
            return Err(Error::InvalidSpec(format!("schema {} defined twice", s.name)));
        }
    }

    let delta_targets: BTreeSet<&str> = schemas
        .iter()
        .flat_map(includes)
        .filter(|i| i.delta)
        .map(|i| i.schema.as_str())
        .collect();
    let state_name = match delta_targets.len() {
        1 => delta_targets.into_iter().next().unwrap().to_string(),
        0 => {
            let included: BTreeSet<&str> = schemas
                .iter()
                .flat_map(includes)
                .map(|i| i.schema.as_str())
                .collect();
            let mut it = included.into_iter();
            match (it.next(), it.next()) {
                (Some(n), None) => n.to_string(),
                _ => {
                    return Err(Error::InvalidSpec(
                        "cannot identify a unique state schema".into(),
                    ))
                }
            }
        }
        _ => {
            return Err(Error::InvalidSpec(format!(
                "operations change different schemas: {delta_targets:?}"
            )))
        }
    };
    let raw_state = schemas
        .iter()
        .find(|s| s.name == state_name)
        .ok_or_else(|| Error::Scope(state_name.clone()))?;
    if !includes(raw_state).is_empty() {
        return Err(Error::Unsupported(format!(
            "schema inclusion inside state schema {state_name}"
        )));
    }
    let mut state_decls = Vec::new();
    for it in &raw_state.items {
        if let DeclItem::Vars {
            names,
            ty,
            injective,
        } = it
        {
            check_type(ty, &type_names)?;
            for (n, d) in names {
                if *d != Decoration::Plain {
                    return Err(Error::InvalidSpec(format!(
                        "state variable {n}{} must be undecorated",
                        d.suffix()
                    )));
                }
                if globals.contains(n) || state_decls.iter().any(|x: &Decl| &x.name == n) {
                    return Err(Error::InvalidSpec(format!("{n} declared twice")));
                }
                state_decls.push(Decl {
                    name: n.clone(),
                    decoration: Decoration::Plain,
                    ty: ty.clone(),
                    injective: *injective,
                    included: false,
                });
            }
        }
    }
    let state = SchemaDef {
        name: state_name.clone(),
        includes: Vec::new(),
        decls: state_decls.clone(),
        pred: raw_state.pred.clone(),
    };
    let scope = Scope {
        globals: &globals,
        free: &free,
        axdefs: &axdefs,
    };
    scope.check_pred(&state)?;

    let mut init = None;
    let mut ops = Vec::new();
    for raw in &schemas {
        if raw.name == state_name {
            continue;
        }
        let incs = includes(raw);
        let role_delta = incs.iter().any(|i| i.delta);
        if incs.iter().any(|i| i.schema != state_name) {
            let other = incs.iter().find(|i| i.schema != state_name).unwrap();
            return Err(if names.contains(&other.schema) {
                Error::Unsupported(format!(
                    "{} includes {}, which is not the state schema",
                    raw.name, other.schema
                ))
            } else {
                Error::Scope(other.schema.clone())
            });
        }
        if incs.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "schema {} does not include the state schema {state_name}",
                raw.name
            )));
        }
        let def = desugar(raw, &state_decls, &type_names, &globals)?;
        scope.check_pred(&def)?;
        if role_delta {
            ops.push(def);
        } else if init.is_none() {
            init = Some(def);
        } else {
            return Err(Error::InvalidSpec(format!(
                "two initialisation schemas: {} and {}",
                init.as_ref().unwrap().name,
                raw.name
            )));
        }
    }
    let init = init.ok_or_else(|| {
        Error::InvalidSpec(format!("no initialisation schema for {state_name}"))
    })?;
    for a in &axdefs {
        if let Some(p) = &a.pred {
            scope.check_expr(p, &[])?;
        }
    }
    Ok(ZSpec {
        name: state_name,
        given_types: given,
        free_types: free,
        axdefs,
        state_schema: state,
        init_schema: init,
        operations: ops,
    })
}

fn includes(s: &RawSchema) -> Vec<&Inclusion> {
    s.items
        .iter()
        .filter_map(|i| match i {
            DeclItem::Include(inc) => Some(inc),
            _ => None,
        })
        .collect()
}

fn check_type(t: &TypeExpr, types: &BTreeSet<String>) -> Result<()> {
    match t {
        TypeExpr::Nat => Ok(()),
        TypeExpr::Named(n) if types.contains(n) => Ok(()),
        TypeExpr::Named(n) => Err(Error::Scope(n.clone())),
        TypeExpr::Power(a) | TypeExpr::Seq(a) => check_type(a, types),
        TypeExpr::Func { dom, ran, .. } => {
            check_type(dom, types)?;
            check_type(ran, types)
        }
        TypeExpr::Rel(a, b) => {
            check_type(a, types)?;
            check_type(b, types)
        }
        TypeExpr::Product(ts) => ts.iter().try_for_each(|t| check_type(t, types)),
    }
}

/// Expands inclusions of the state schema into explicit declarations.
fn desugar(
    raw: &RawSchema,
    state: &[Decl],
    types: &BTreeSet<String>,
    globals: &BTreeSet<String>,
) -> Result<SchemaDef> {
    let mut decls: Vec<Decl> = Vec::new();
    let mut incs = Vec::new();
    let add = |d: Decl, decls: &mut Vec<Decl>| -> Result<()> {
        if decls
            .iter()
            .any(|x| x.name == d.name && x.decoration == d.decoration)
        {
            return Err(Error::InvalidSpec(format!(
                "{}{} declared twice in {}",
                d.name,
                d.decoration.suffix(),
                raw.name
            )));
        }
        decls.push(d);
        Ok(())
    };
    for it in &raw.items {
        match it {
            DeclItem::Include(inc) => {
                let decos: &[Decoration] = if inc.delta {
                    &[Decoration::Plain, Decoration::Primed]
                } else if inc.primed {
                    &[Decoration::Primed]
                } else {
                    &[Decoration::Plain]
                };
                for &deco in decos {
                    for d in state {
                        add(
                            Decl {
                                decoration: deco,
                                included: true,
                                ..d.clone()
                            },
                            &mut decls,
                        )?;
                    }
                }
                incs.push(inc.clone());
            }
            DeclItem::Vars {
                names,
                ty,
                injective,
            } => {
                check_type(ty, types)?;
                for (n, deco) in names {
                    if globals.contains(n) {
                        return Err(Error::InvalidSpec(format!("{n} shadows a global name")));
                    }
                    add(
                        Decl {
                            name: n.clone(),
                            decoration: *deco,
                            ty: ty.clone(),
                            injective: *injective,
                            included: false,
                        },
                        &mut decls,
                    )?;
                }
            }
        }
    }
    Ok(SchemaDef {
        name: raw.name.clone(),
        includes: incs,
        decls,
        pred: raw.pred.clone(),
    })
}

struct Scope<'a> {
    globals: &'a BTreeSet<String>,
    free: &'a [FreeTypeDef],
    axdefs: &'a [AxDef],
}

impl Scope<'_> {
    fn check_pred(&self, s: &SchemaDef) -> Result<()> {
        self.check_expr(&s.pred, &s.decls)
    }

    fn is_function(&self, name: &str, decls: &[Decl]) -> bool {
        let is_fn = |t: &TypeExpr| matches!(t, TypeExpr::Func { .. } | TypeExpr::Seq(_));
        decls.iter().any(|d| d.name == name && is_fn(&d.ty))
            || self.axdefs.iter().any(|a| a.name == name && is_fn(&a.ty))
    }

    fn check_expr(&self, e: &ZExpr, decls: &[Decl]) -> Result<()> {
        let mut err = None;
        let mut visit = |e: &ZExpr| {
            let bad = match e {
                ZExpr::Ident(n, d) => {
                    let local = decls.iter().any(|x| &x.name == n && x.decoration == *d);
                    let global = *d == Decoration::Plain && self.globals.contains(n);
                    (!local && !global).then(|| format!("{n}{}", d.suffix()))
                }
                ZExpr::Apply(n, _) => {
                    let ctor = self.free.iter().any(|f| {
                        f.branches.iter().any(|(b, a)| b == n && a.is_some())
                    });
                    (!ctor && !self.is_function(n, decls)).then(|| n.clone())
                }
                ZExpr::Inverse(n, _) => {
                    let ctor = self.free.iter().any(|f| {
                        f.branches.iter().any(|(b, a)| b == n && a.is_some())
                    });
                    (!ctor).then(|| n.clone())
                }
                _ => None,
            };
            if let (Some(n), None) = (bad, &err) {
                err = Some(n);
            }
        };
        walk(e, &mut visit);
        match err {
            Some(n) => Err(Error::Scope(n)),
            None => Ok(()),
        }
    }
}

fn walk(e: &ZExpr, f: &mut dyn FnMut(&ZExpr)) {
    f(e);
    match e {
        ZExpr::SetDisplay(xs) | ZExpr::SeqDisplay(xs) | ZExpr::And(xs) => {
            xs.iter().for_each(|x| walk(x, f))
        }
        ZExpr::Bin(_, a, b) | ZExpr::Rel(_, a, b) | ZExpr::Implies(a, b) => {
            walk(a, f);
            walk(b, f)
        }
        ZExpr::Card(a)
        | ZExpr::Ran(a)
        | ZExpr::Dom(a)
        | ZExpr::Apply(_, a)
        | ZExpr::Inverse(_, a) => walk(a, f),
        _ => {}
    }
}

/// Prefix used for concrete names that collide with abstract ones.
pub fn concrete_prefix(abstract_name: &str, concrete_name: &str) -> String {
    if abstract_name == concrete_name {
        "Concrete".to_string()
    } else {
        concrete_name.to_string()
    }
}

/// Shared renaming rule: a concrete name that is also an abstract name is
/// prefixed, except for constants declared with the same type on both sides,
/// which are identified. Entries are `(name, Some(type key))` for constants
/// and `(name, None)` for state variables.
pub fn collision_renames<K: PartialEq>(
    abstract_names: &[(String, Option<K>)],
    concrete_names: &[(String, Option<K>)],
    prefix: &str,
) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (n, ck) in concrete_names {
        if let Some((_, ak)) = abstract_names.iter().find(|(a, _)| a == n) {
            let shared = matches!((ak, ck), (Some(a), Some(c)) if a == c);
            if !shared {
                out.insert(n.clone(), format!("{prefix}__{n}"));
            }
        }
    }
    out
}

fn local_names(s: &ZSpec) -> Vec<(String, Option<TypeExpr>)> {
    s.axdefs
        .iter()
        .map(|a| (a.name.clone(), Some(a.ty.clone())))
        .chain(s.state_schema.decls.iter().map(|d| (d.name.clone(), None)))
        .collect()
}

/// Renames applied to the concrete specification's constants and state
/// variables when combined with `abs`.
pub fn concrete_aliases(abs: &ZSpec, conc: &ZSpec) -> BTreeMap<String, String> {
    collision_renames(
        &local_names(abs),
        &local_names(conc),
        &concrete_prefix(&abs.name, &conc.name),
    )
}

/// Parses a retrieve relation: a schema that includes both state schemas
/// (horizontal `R == [A; C | P]` or boxed). Returns its predicate. Concrete
/// names that collide with abstract ones must be written in their prefixed
/// form (see [`concrete_aliases`]).
pub fn parse_retrieve(source: &str, abs: &ZSpec, conc: &ZSpec) -> Result<ZExpr> {
    let items = parse_items(source)?;
    let mut schemas = items.into_iter().filter_map(|i| match i {
        Item::Schema(s) => Some(s),
        _ => None,
    });
    let raw = schemas
        .next()
        .ok_or_else(|| Error::InvalidSpec("no retrieve schema found".into()))?;
    if schemas.next().is_some() {
        return Err(Error::InvalidSpec(
            "retrieve source must contain exactly one schema".into(),
        ));
    }
    let mut seen = BTreeSet::new();
    for it in &raw.items {
        match it {
            DeclItem::Include(i) if !i.delta && !i.primed => {
                if i.schema != abs.state_schema.name && i.schema != conc.state_schema.name {
                    return Err(Error::Scope(i.schema.clone()));
                }
                seen.insert(i.schema.clone());
            }
            DeclItem::Include(i) => {
                return Err(Error::PrimedInRetrieve(format!(
                    "{}{}",
                    if i.delta { "\\Delta " } else { "" },
                    i.schema
                )))
            }
            DeclItem::Vars { .. } => {
                return Err(Error::Unsupported(
                    "declarations in a retrieve relation".into(),
                ))
            }
        }
    }
    for s in [&abs.state_schema.name, &conc.state_schema.name] {
        if !seen.contains(s) {
            return Err(Error::InvalidSpec(format!(
                "retrieve relation {} does not include {s}",
                raw.name
            )));
        }
    }
    let mut primed = None;
    raw.pred.visit_idents(&mut |n, d| {
        if d != Decoration::Plain && primed.is_none() {
            primed = Some(format!("{n}{}", d.suffix()));
        }
    });
    if let Some(p) = primed {
        return Err(Error::PrimedInRetrieve(p));
    }
    let aliases = concrete_aliases(abs, conc);
    let mut known: BTreeSet<String> = BTreeSet::new();
    for s in [abs, conc] {
        known.extend(s.given_types.iter().cloned());
        for f in &s.free_types {
            known.insert(f.name.clone());
            known.extend(f.branches.iter().map(|(b, _)| b.clone()));
        }
    }
    known.extend(abs.axdefs.iter().map(|a| a.name.clone()));
    known.extend(abs.state_schema.decls.iter().map(|d| d.name.clone()));
    for a in &conc.axdefs {
        known.insert(aliases.get(&a.name).cloned().unwrap_or(a.name.clone()));
    }
    for d in &conc.state_schema.decls {
        known.insert(aliases.get(&d.name).cloned().unwrap_or(d.name.clone()));
    }
    let mut unknown = None;
    raw.pred.visit_idents(&mut |n, _| {
        if !known.contains(n) && unknown.is_none() {
            unknown = Some(n.to_string());
        }
    });
    if let Some(n) = unknown {
        return Err(Error::Scope(n));
    }
    Ok(raw.pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ABSTRACT: &str = r"
\[ [T] \]
\begin{axdef}
max : \nat
\end{axdef}
\[ A = [ s : \pset T \bbar \# s \leq max ] \]
\[ AInit = [ A' \bbar  s' = \emptyset ] \]
\begin{schema}{AEnter}
   \Delta A \\
   p? : T
\ST
  \# s < max \\
p? \nmem s \\
s' = s \cup \{ p? \}
\end{schema}
";

    #[test]
    fn roles_and_desugaring() {
        let s = parse_spec(ABSTRACT).unwrap();
        assert_eq!(s.name, "A");
        assert_eq!(s.given_types, vec!["T"]);
        assert_eq!(s.init_schema.name, "AInit");
        assert_eq!(s.operations.len(), 1);
        let op = &s.operations[0];
        assert!(op.decl("s", Decoration::Plain).is_some());
        assert!(op.decl("s", Decoration::Primed).is_some());
        assert!(op.decl("p", Decoration::Input).is_some());
        assert_eq!(op.pred.conjuncts().len(), 3);
    }

    #[test]
    fn empty_predicate_is_true() {
        let src = r"\[ [X] \]
\begin{schema}{S} x : X \end{schema}
\begin{schema}{SInit} S' \end{schema}";
        let s = parse_spec(src).unwrap();
        assert_eq!(s.state_schema.pred, ZExpr::Bool(true));
        assert!(s.operations.is_empty());
    }

    #[test]
    fn undeclared_name_is_a_scope_error() {
        let src = ABSTRACT.replace("p? \\nmem s", "q? \\nmem s");
        assert_eq!(parse_spec(&src), Err(Error::Scope("q?".into())));
    }

    #[test]
    fn unsupported_constructs_are_reported() {
        let src = ABSTRACT.replace("\\Delta A", "\\Xi A");
        assert!(matches!(parse_spec(&src), Err(Error::Unsupported(_))));
        let src = ABSTRACT.replace("p? \\nmem s", "\\forall x : T @ x \\in s");
        assert!(matches!(parse_spec(&src), Err(Error::Unsupported(_))));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let src = ABSTRACT.replace("s' = s \\cup", "s' = = s \\cup");
        match parse_spec(&src) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collision_rule_shares_equal_constants_only() {
        let a = vec![
            ("max".to_string(), Some(1)),
            ("x".to_string(), None),
            ("k".to_string(), Some(1)),
        ];
        let c = vec![
            ("max".to_string(), Some(1)),
            ("x".to_string(), None),
            ("k".to_string(), Some(2)),
            ("y".to_string(), None),
        ];
        let r = collision_renames(&a, &c, "C");
        assert_eq!(r.get("x").map(String::as_str), Some("C__x"));
        assert_eq!(r.get("k").map(String::as_str), Some("C__k"));
        assert!(!r.contains_key("max"));
        assert!(!r.contains_key("y"));
    }
}

//! Type and expression lowering from Z syntax to the IR.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::bounds::Bounds;
use crate::error::{Error, Result};
use crate::ir::{
    CmpOp, EnumType, Expr, FreeFn, FreeSort, FuncFn, FuncSort, GroundType, SeqFn, SeqSort, SetFn,
    VarName,
};
use crate::zparse::{BinOp, Decoration, RelOp, TypeExpr, ZExpr, ZSpec};

/// Lowered types of the given and free types in scope.
#[derive(Clone, Debug)]
pub struct TypeEnv {
    pub nat: GroundType,
    /// Given and free types by name, in declaration order.
    pub named: Vec<(String, GroundType)>,
    pub free: BTreeMap<String, Arc<FreeSort>>,
    ctors: BTreeMap<String, (Arc<FreeSort>, usize)>,
    seq_caps: BTreeMap<String, u8>,
}

impl TypeEnv {
    pub fn new(specs: &[&ZSpec], bounds: &Bounds) -> Result<Self> {
        let mut env = TypeEnv {
            nat: GroundType::nat(bounds.nat_hi),
            named: Vec::new(),
            free: BTreeMap::new(),
            ctors: BTreeMap::new(),
            seq_caps: bounds.seq_capacity.clone(),
        };
        for s in specs {
            for g in &s.given_types {
                if env.named(g).is_some() {
                    continue;
                }
                let n = *bounds
                    .given_sizes
                    .get(g)
                    .ok_or_else(|| Error::InvalidSpec(format!("no bound for given type {g}")))?;
                let mut e = EnumType::new(g, (1..=n).map(|i| format!("{g}__{i}")).collect());
                if bounds.bottoms.contains(g) {
                    e = e.with_bottom();
                }
                env.named.push((g.clone(), GroundType::Enum(Arc::new(e))));
            }
        }
        let mut defs: BTreeMap<&str, &crate::zparse::FreeTypeDef> = BTreeMap::new();
        for s in specs {
            for f in &s.free_types {
                if let Some(prev) = defs.get(f.name.as_str()) {
                    if *prev != f {
                        return Err(Error::TypeClash(f.name.clone()));
                    }
                    continue;
                }
                if env.named(&f.name).is_some() {
                    return Err(Error::TypeClash(f.name.clone()));
                }
                defs.insert(&f.name, f);
                let mut branches = Vec::new();
                for (b, arg) in &f.branches {
                    let arg = match arg {
                        None => None,
                        Some(t) => match env.lower(t)? {
                            GroundType::Enum(e) => Some(e),
                            other => {
                                return Err(Error::Unsupported(format!(
                                    "constructor {b} over {other}"
                                )))
                            }
                        },
                    };
                    branches.push((b.clone(), arg));
                }
                let mut sort = FreeSort::new(&f.name, branches);
                if bounds.bottoms.contains(&f.name) {
                    sort.ty = Arc::new((*sort.ty).clone().with_bottom());
                }
                let sort = Arc::new(sort);
                for (i, (b, _)) in f.branches.iter().enumerate() {
                    if env.ctors.insert(b.clone(), (sort.clone(), i)).is_some() {
                        return Err(Error::TypeClash(b.clone()));
                    }
                }
                env.named
                    .push((f.name.clone(), GroundType::Enum(sort.ty.clone())));
                env.free.insert(f.name.clone(), sort);
            }
        }
        Ok(env)
    }

    pub fn named(&self, name: &str) -> Option<&GroundType> {
        self.named.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn ctor(&self, name: &str) -> Option<&(Arc<FreeSort>, usize)> {
        self.ctors.get(name)
    }

    fn enum_of(&self, t: &TypeExpr) -> Result<Arc<EnumType>> {
        match self.lower(t)? {
            GroundType::Enum(e) => Ok(e),
            other => Err(Error::Unsupported(format!(
                "{other} where an enumerated type is needed"
            ))),
        }
    }

    pub fn lower(&self, t: &TypeExpr) -> Result<GroundType> {
        Ok(match t {
            TypeExpr::Nat => self.nat.clone(),
            TypeExpr::Named(n) => self
                .named(n)
                .cloned()
                .ok_or_else(|| Error::Scope(n.clone()))?,
            TypeExpr::Power(a) => {
                let c = self.lower(a)?;
                if !c.is_scalar() {
                    return Err(Error::Unsupported(format!("sets of {c}")));
                }
                if c.scalar_card() > 63 {
                    return Err(Error::CapacityExceeded {
                        what: format!("set carrier {c}"),
                        size: c.scalar_card() as u128,
                        cap: 63,
                    });
                }
                GroundType::Set(Arc::new(c))
            }
            TypeExpr::Seq(a) => {
                let TypeExpr::Named(n) = a.as_ref() else {
                    return Err(Error::Unsupported(
                        "sequences over anything but a named type".into(),
                    ));
                };
                let carrier = self.enum_of(a)?;
                let cap = *self
                    .seq_caps
                    .get(n)
                    .ok_or_else(|| Error::InvalidSpec(format!("no capacity for seq {n}")))?;
                GroundType::Seq(Arc::new(SeqSort { carrier, cap }))
            }
            TypeExpr::Func { total, dom, ran } => {
                let d = self.lower(dom)?;
                if !d.is_scalar() || d.scalar_card() > crate::ir::types::MAX_COLLECTION_SLOTS {
                    return Err(Error::Unsupported(format!("function domain {d}")));
                }
                let r = self.enum_of(ran)?;
                if r.bottom.is_none() {
                    return Err(Error::InvalidSpec(format!("function range {} lacks bottom", r.name)));
                }
                GroundType::Func(Arc::new(FuncSort {
                    dom: Arc::new(d),
                    ran: r,
                    total: *total,
                }))
            }
            TypeExpr::Rel(..) => return Err(Error::Unsupported("relation types".into())),
            TypeExpr::Product(_) => return Err(Error::Unsupported("product types".into())),
        })
    }

    fn seq_sort_of(&self, elem: &GroundType) -> Option<Arc<SeqSort>> {
        match elem {
            GroundType::Enum(e) if e.bottom.is_some() => {
                self.seq_caps.get(&e.name).map(|&cap| {
                    Arc::new(SeqSort {
                        carrier: e.clone(),
                        cap,
                    })
                })
            }
            _ => None,
        }
    }
}

pub type Lookup<'a> = dyn Fn(&str, Decoration) -> Option<(VarName, GroundType)> + 'a;

/// Lowers Z predicates and terms against a variable scope.
pub struct Lowerer<'a> {
    pub env: &'a TypeEnv,
    pub lookup: &'a Lookup<'a>,
}

fn compatible(a: &GroundType, b: &GroundType) -> bool {
    match (a, b) {
        (GroundType::IntRange { .. }, GroundType::IntRange { .. }) => true,
        _ => a == b,
    }
}

fn mismatch(what: impl Into<String>) -> Error {
    Error::TypeMismatch(what.into())
}

fn untyped(e: &ZExpr) -> bool {
    matches!(e, ZExpr::EmptySet | ZExpr::EmptySeq)
        || matches!(e, ZExpr::SetDisplay(xs) | ZExpr::SeqDisplay(xs) if xs.is_empty())
}

fn singleton(e: &ZExpr) -> Option<&ZExpr> {
    match e {
        ZExpr::SetDisplay(xs) if xs.len() == 1 => Some(&xs[0]),
        _ => None,
    }
}

impl Lowerer<'_> {
    pub fn pred(&self, e: &ZExpr) -> Result<Expr> {
        let (x, t) = self.term(e, Some(&GroundType::Bool))?;
        if t != GroundType::Bool {
            return Err(mismatch(format!("expected a predicate, found a term of type {t}")));
        }
        Ok(x)
    }

    fn set_carrier(&self, t: &GroundType, what: &str) -> Result<Arc<GroundType>> {
        match t {
            GroundType::Set(c) => Ok(c.clone()),
            other => Err(mismatch(format!("{what} expects a set, found {other}"))),
        }
    }

    fn seq_sort(&self, t: &GroundType, what: &str) -> Result<Arc<SeqSort>> {
        match t {
            GroundType::Seq(s) => Ok(s.clone()),
            other => Err(mismatch(format!("{what} expects a sequence, found {other}"))),
        }
    }

    fn expect(&self, e: &ZExpr, want: &GroundType) -> Result<Expr> {
        let (x, t) = self.term(e, Some(want))?;
        if !compatible(&t, want) {
            return Err(mismatch(format!("expected {want}, found {t}")));
        }
        Ok(x)
    }

    fn set_display(&self, xs: &[ZExpr], carrier: Arc<GroundType>) -> Result<Expr> {
        let mut acc = Expr::Set {
            func: SetFn::Empty,
            carrier: carrier.clone(),
            args: vec![],
        };
        for x in xs {
            let v = self.expect(x, &carrier)?;
            acc = Expr::Set {
                func: SetFn::Insert,
                carrier: carrier.clone(),
                args: vec![acc, v],
            };
        }
        Ok(acc)
    }

    fn append_all(&self, base: Expr, xs: &[ZExpr], sort: &Arc<SeqSort>) -> Result<Expr> {
        let elem = GroundType::Enum(sort.carrier.clone());
        let mut acc = base;
        for x in xs {
            let v = self.expect(x, &elem)?;
            acc = Expr::Seq {
                func: SeqFn::Append,
                sort: sort.clone(),
                args: vec![acc, v],
            };
        }
        Ok(acc)
    }

    pub fn term(&self, e: &ZExpr, want: Option<&GroundType>) -> Result<(Expr, GroundType)> {
        Ok(match e {
            ZExpr::Bool(b) => (Expr::Bool(*b), GroundType::Bool),
            ZExpr::Num(n) => (Expr::Int(*n), self.env.nat.clone()),
            ZExpr::Ident(n, d) => {
                if let Some((v, t)) = (self.lookup)(n, *d) {
                    (Expr::Var(v), t)
                } else if let (Some((sort, b)), Decoration::Plain) = (self.env.ctor(n), d) {
                    let br = &sort.branches[*b];
                    if br.arg.is_some() {
                        return Err(mismatch(format!("constructor {n} used without argument")));
                    }
                    (
                        Expr::Elem {
                            name: n.clone(),
                            value: br.offset,
                        },
                        GroundType::Enum(sort.ty.clone()),
                    )
                } else if let (Some(t), Decoration::Plain) = (self.env.named(n), d) {
                    let c = Arc::new(t.clone());
                    (
                        Expr::Set {
                            func: SetFn::Full,
                            carrier: c.clone(),
                            args: vec![],
                        },
                        GroundType::Set(c),
                    )
                } else {
                    return Err(Error::Scope(format!("{n}{}", d.suffix())));
                }
            }
            ZExpr::EmptySet | ZExpr::SetDisplay(_) if matches!(want, Some(GroundType::Set(_))) => {
                let Some(GroundType::Set(c)) = want else { unreachable!() };
                let xs = match e {
                    ZExpr::SetDisplay(xs) => xs.as_slice(),
                    _ => &[],
                };
                (self.set_display(xs, c.clone())?, GroundType::Set(c.clone()))
            }
            ZExpr::SetDisplay(xs) if !xs.is_empty() => {
                let (_, t) = self.term(&xs[0], None)?;
                if !t.is_scalar() {
                    return Err(Error::Unsupported(format!("sets of {t}")));
                }
                let c = Arc::new(t);
                (self.set_display(xs, c.clone())?, GroundType::Set(c))
            }
            ZExpr::EmptySeq | ZExpr::SeqDisplay(_) => {
                let xs = match e {
                    ZExpr::SeqDisplay(xs) => xs.as_slice(),
                    _ => &[],
                };
                let sort = match want {
                    Some(GroundType::Seq(s)) => s.clone(),
                    _ if !xs.is_empty() => {
                        let (_, t) = self.term(&xs[0], None)?;
                        self.env
                            .seq_sort_of(&t)
                            .ok_or_else(|| mismatch(format!("no sequence sort over {t}")))?
                    }
                    _ => return Err(mismatch("cannot infer the type of an empty sequence")),
                };
                let empty = Expr::Seq {
                    func: SeqFn::Empty,
                    sort: sort.clone(),
                    args: vec![],
                };
                (self.append_all(empty, xs, &sort)?, GroundType::Seq(sort))
            }
            ZExpr::EmptySet | ZExpr::SetDisplay(_) => {
                return Err(mismatch("cannot infer the type of an empty set"))
            }
            ZExpr::Bin(op, a, b) => self.binary(*op, a, b, want)?,
            ZExpr::Card(a) => {
                let (x, t) = self.term(a, None)?;
                let x = match t {
                    GroundType::Set(c) => Expr::Count {
                        carrier: c,
                        arg: Box::new(x),
                    },
                    GroundType::Seq(sort) => Expr::Seq {
                        func: SeqFn::Size,
                        sort,
                        args: vec![x],
                    },
                    GroundType::Func(sort) => Expr::Func {
                        func: FuncFn::Size,
                        sort,
                        args: vec![x],
                    },
                    other => return Err(mismatch(format!("# applied to {other}"))),
                };
                (x, self.env.nat.clone())
            }
            ZExpr::Ran(a) => {
                let (x, t) = self.term(a, None)?;
                match t {
                    GroundType::Seq(sort) => {
                        let c = Arc::new(GroundType::Enum(sort.carrier.clone()));
                        (
                            Expr::Seq {
                                func: SeqFn::Range,
                                sort,
                                args: vec![x],
                            },
                            GroundType::Set(c),
                        )
                    }
                    GroundType::Func(sort) => {
                        let c = Arc::new(GroundType::Enum(sort.ran.clone()));
                        (
                            Expr::Func {
                                func: FuncFn::Range,
                                sort,
                                args: vec![x],
                            },
                            GroundType::Set(c),
                        )
                    }
                    other => return Err(mismatch(format!("ran applied to {other}"))),
                }
            }
            ZExpr::Dom(a) => {
                let (x, t) = self.term(a, None)?;
                match t {
                    GroundType::Seq(sort) => {
                        let c = Arc::new(GroundType::IntRange {
                            lo: 1,
                            hi: sort.cap as i64,
                        });
                        (
                            Expr::Seq {
                                func: SeqFn::Domain,
                                sort,
                                args: vec![x],
                            },
                            GroundType::Set(c),
                        )
                    }
                    GroundType::Func(sort) => {
                        let c = sort.dom.clone();
                        (
                            Expr::Func {
                                func: FuncFn::Domain,
                                sort,
                                args: vec![x],
                            },
                            GroundType::Set(c),
                        )
                    }
                    other => return Err(mismatch(format!("dom applied to {other}"))),
                }
            }
            ZExpr::Apply(f, a) => {
                if let Some((sort, b)) = self.env.ctor(f) {
                    let Some(arg_ty) = &sort.branches[*b].arg else {
                        return Err(mismatch(format!("constant {f} applied to an argument")));
                    };
                    let x = self.expect(a, &GroundType::Enum(arg_ty.clone()))?;
                    (
                        Expr::Free {
                            func: FreeFn::Construct(*b),
                            sort: sort.clone(),
                            arg: Box::new(x),
                        },
                        GroundType::Enum(sort.ty.clone()),
                    )
                } else {
                    let (fx, ft) = self.term(&ZExpr::Ident(f.clone(), Decoration::Plain), None)?;
                    match ft {
                        GroundType::Func(sort) => {
                            let x = self.expect(a, &sort.dom)?;
                            let r = GroundType::Enum(sort.ran.clone());
                            (
                                Expr::Func {
                                    func: FuncFn::Apply,
                                    sort,
                                    args: vec![fx, x],
                                },
                                r,
                            )
                        }
                        other => {
                            return Err(Error::Unsupported(format!("application of {f} : {other}")))
                        }
                    }
                }
            }
            ZExpr::Inverse(c, a) => {
                let Some((sort, b)) = self.env.ctor(c) else {
                    return Err(Error::Scope(c.clone()));
                };
                let Some(arg_ty) = &sort.branches[*b].arg else {
                    return Err(mismatch(format!("inverse of constant {c}")));
                };
                let x = self.expect(a, &GroundType::Enum(sort.ty.clone()))?;
                (
                    Expr::Free {
                        func: FreeFn::Inverse(*b),
                        sort: sort.clone(),
                        arg: Box::new(x),
                    },
                    GroundType::Enum(arg_ty.clone()),
                )
            }
            ZExpr::Rel(op, a, b) => (self.relation(*op, a, b)?, GroundType::Bool),
            ZExpr::And(xs) => {
                let parts = xs.iter().map(|x| self.pred(x)).collect::<Result<Vec<_>>>()?;
                (Expr::and(parts), GroundType::Bool)
            }
            ZExpr::Implies(a, b) => (
                Expr::implies(self.pred(a)?, self.pred(b)?),
                GroundType::Bool,
            ),
        })
    }

    fn binary(
        &self,
        op: BinOp,
        a: &ZExpr,
        b: &ZExpr,
        want: Option<&GroundType>,
    ) -> Result<(Expr, GroundType)> {
        match op {
            BinOp::Union | BinOp::SetMinus => {
                let (xa, ta) = if untyped(a) {
                    let (_, tb) = self.term(b, want)?;
                    (self.expect(a, &tb)?, tb)
                } else {
                    self.term(a, want)?
                };
                let c = self.set_carrier(&ta, "set operator")?;
                let func = if op == BinOp::Union {
                    (SetFn::Insert, SetFn::Union)
                } else {
                    (SetFn::Remove, SetFn::Difference)
                };
                let x = if let Some(elem) = singleton(b) {
                    Expr::Set {
                        func: func.0,
                        carrier: c.clone(),
                        args: vec![xa, self.expect(elem, &c)?],
                    }
                } else {
                    Expr::Set {
                        func: func.1,
                        carrier: c.clone(),
                        args: vec![xa, self.expect(b, &ta)?],
                    }
                };
                Ok((x, ta))
            }
            BinOp::Cat => {
                let (xa, ta) = if untyped(a) {
                    let (_, tb) = self.term(b, want)?;
                    (self.expect(a, &tb)?, tb)
                } else {
                    self.term(a, want)?
                };
                let sort = self.seq_sort(&ta, "concatenation")?;
                let x = match b {
                    ZExpr::SeqDisplay(xs) => self.append_all(xa, xs, &sort)?,
                    _ => Expr::Seq {
                        func: SeqFn::Concat,
                        sort: sort.clone(),
                        args: vec![xa, self.expect(b, &ta)?],
                    },
                };
                Ok((x, ta))
            }
            BinOp::Filter => {
                let (xa, ta) = self.term(a, want)?;
                let sort = self.seq_sort(&ta, "filter")?;
                let set_ty = GroundType::Set(Arc::new(GroundType::Enum(sort.carrier.clone())));
                let xb = self.expect(b, &set_ty)?;
                let x = match xb {
                    Expr::Set {
                        func: SetFn::Remove,
                        mut args,
                        ..
                    } if matches!(args[0], Expr::Set { func: SetFn::Full, .. }) => {
                        let elem = args.pop().unwrap();
                        Expr::Seq {
                            func: SeqFn::Remove,
                            sort: sort.clone(),
                            args: vec![xa, elem],
                        }
                    }
                    xb => Expr::Seq {
                        func: SeqFn::Filter,
                        sort: sort.clone(),
                        args: vec![xa, xb],
                    },
                };
                Ok((x, ta))
            }
        }
    }

    fn relation(&self, op: RelOp, a: &ZExpr, b: &ZExpr) -> Result<Expr> {
        match op {
            RelOp::Eq | RelOp::Neq => {
                let (xa, xb) = if untyped(a) && !untyped(b) {
                    let (xb, tb) = self.term(b, None)?;
                    (self.expect(a, &tb)?, xb)
                } else {
                    let (xa, ta) = self.term(a, None)?;
                    (xa, self.expect(b, &ta)?)
                };
                let cmp = if op == RelOp::Eq { CmpOp::Eq } else { CmpOp::Neq };
                Ok(Expr::cmp(cmp, xa, xb))
            }
            RelOp::Lt | RelOp::Le => {
                let nat = self.env.nat.clone();
                let xa = self.expect(a, &nat)?;
                let xb = self.expect(b, &nat)?;
                let cmp = if op == RelOp::Lt { CmpOp::Lt } else { CmpOp::Le };
                Ok(Expr::cmp(cmp, xa, xb))
            }
            RelOp::In | RelOp::NotIn => {
                let (xs, ts) = self.term(b, None)?;
                let c = self.set_carrier(&ts, "membership")?;
                let x = self.expect(a, &c)?;
                let contains = Expr::Set {
                    func: SetFn::Contains,
                    carrier: c,
                    args: vec![xs, x],
                };
                Ok(if op == RelOp::In {
                    contains
                } else {
                    Expr::not(contains)
                })
            }
        }
    }
}

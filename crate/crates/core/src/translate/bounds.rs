use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ir::types::MAX_COLLECTION_SLOTS;
use crate::ir::value::DEFAULT_ENUMERATION_CAP;
use crate::zparse::{TypeExpr, ZExpr, ZSpec};

pub const DEFAULT_NAT_HI: i64 = 4;
pub const DEFAULT_GIVEN_SIZE: usize = 3;
/// Set carriers are bitmasks in a `u64`.
pub const MAX_GIVEN_SIZE: usize = 62;

/// Finite bounds for one translation (or one combined run).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub nat_hi: i64,
    /// Proper element count of every given type.
    pub given_sizes: BTreeMap<String, usize>,
    /// Types (given or free) that carry a bottom element.
    pub bottoms: BTreeSet<String>,
    /// Capacity of sequences, per element type.
    pub seq_capacity: BTreeMap<String, u8>,
    #[serde(skip)]
    pub enum_cap: u128,
}

/// User-supplied bound overrides; `None` means "derive".
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub nat_hi: Option<i64>,
    pub given_size: Option<usize>,
    pub type_sizes: BTreeMap<String, usize>,
    pub seq_capacity: Option<u8>,
    pub enum_cap: Option<u128>,
}

impl Bounds {
    pub fn card_of(&self, name: &str) -> Option<usize> {
        let bottom = usize::from(self.bottoms.contains(name));
        self.given_sizes.get(name).map(|n| n + bottom)
    }
}

fn walk_types(t: &TypeExpr, f: &mut dyn FnMut(&TypeExpr)) {
    f(t);
    match t {
        TypeExpr::Power(a) | TypeExpr::Seq(a) => walk_types(a, f),
        TypeExpr::Func { dom, ran, .. } => {
            walk_types(dom, f);
            walk_types(ran, f);
        }
        TypeExpr::Rel(a, b) => {
            walk_types(a, f);
            walk_types(b, f);
        }
        TypeExpr::Product(ts) => ts.iter().for_each(|t| walk_types(t, f)),
        TypeExpr::Nat | TypeExpr::Named(_) => {}
    }
}

fn all_types(s: &ZSpec) -> Vec<&TypeExpr> {
    let mut out: Vec<&TypeExpr> = s.axdefs.iter().map(|a| &a.ty).collect();
    for sch in std::iter::once(&s.state_schema)
        .chain(std::iter::once(&s.init_schema))
        .chain(s.operations.iter())
    {
        out.extend(sch.decls.iter().map(|d| &d.ty));
    }
    for f in &s.free_types {
        out.extend(f.branches.iter().filter_map(|(_, a)| a.as_ref()));
    }
    out
}

fn all_preds(s: &ZSpec) -> Vec<&ZExpr> {
    let mut out: Vec<&ZExpr> = s.axdefs.iter().filter_map(|a| a.pred.as_ref()).collect();
    out.push(&s.state_schema.pred);
    out.push(&s.init_schema.pred);
    out.extend(s.operations.iter().map(|o| &o.pred));
    out
}

fn inverses(e: &ZExpr, out: &mut BTreeSet<String>) {
    match e {
        ZExpr::Inverse(c, a) => {
            out.insert(c.clone());
            inverses(a, out);
        }
        ZExpr::SetDisplay(xs) | ZExpr::SeqDisplay(xs) | ZExpr::And(xs) => {
            xs.iter().for_each(|x| inverses(x, out))
        }
        ZExpr::Bin(_, a, b) | ZExpr::Rel(_, a, b) | ZExpr::Implies(a, b) => {
            inverses(a, out);
            inverses(b, out);
        }
        ZExpr::Card(a) | ZExpr::Ran(a) | ZExpr::Dom(a) | ZExpr::Apply(_, a) => inverses(a, out),
        _ => {}
    }
}

/// Bounds for one specification, or for two that are checked together (in
/// which case every shared type gets one bound, wide enough for both).
pub fn derive_bounds(specs: &[&ZSpec], ov: &Overrides) -> Result<Bounds> {
    let mut given: Vec<String> = Vec::new();
    for s in specs {
        for g in &s.given_types {
            if !given.contains(g) {
                given.push(g.clone());
            }
        }
    }
    for t in ov.type_sizes.keys() {
        if !given.contains(t) {
            return Err(Error::ConflictingOverride(format!(
                "size given for {t}, which is not a given type"
            )));
        }
    }
    let mut given_sizes = BTreeMap::new();
    for g in &given {
        let n = ov
            .type_sizes
            .get(g)
            .copied()
            .or(ov.given_size)
            .unwrap_or(DEFAULT_GIVEN_SIZE);
        if !(1..=MAX_GIVEN_SIZE).contains(&n) {
            return Err(Error::ConflictingOverride(format!(
                "size {n} for {g} outside 1..={MAX_GIVEN_SIZE}"
            )));
        }
        given_sizes.insert(g.clone(), n);
    }

    // Bottom elements: sequence element types, function domains and ranges,
    // and argument types of constructors that are inverted somewhere.
    let mut bottoms = BTreeSet::new();
    let mut inverted = BTreeSet::new();
    for s in specs {
        for t in all_types(s) {
            walk_types(t, &mut |t| match t {
                TypeExpr::Seq(e) => {
                    if let TypeExpr::Named(n) = e.as_ref() {
                        bottoms.insert(n.clone());
                    }
                }
                TypeExpr::Func { dom, ran, .. } => {
                    for x in [dom, ran] {
                        if let TypeExpr::Named(n) = x.as_ref() {
                            bottoms.insert(n.clone());
                        }
                    }
                }
                _ => {}
            });
        }
        for p in all_preds(s) {
            inverses(p, &mut inverted);
        }
    }
    for s in specs {
        for f in &s.free_types {
            for (b, arg) in &f.branches {
                if let (true, Some(TypeExpr::Named(n))) = (inverted.contains(b), arg) {
                    bottoms.insert(n.clone());
                }
            }
        }
    }

    let card = |n: &str| -> usize {
        let base = given_sizes.get(n).copied().unwrap_or_else(|| {
            specs
                .iter()
                .find_map(|s| s.free_type(n))
                .map(|f| free_card(f, &given_sizes))
                .unwrap_or(0)
        });
        base + usize::from(bottoms.contains(n))
    };

    let mut seq_capacity = BTreeMap::new();
    let mut set_cards = Vec::new();
    for s in specs {
        for t in all_types(s) {
            walk_types(t, &mut |t| match t {
                TypeExpr::Seq(e) => {
                    if let TypeExpr::Named(n) = e.as_ref() {
                        let proper = card(n) - usize::from(bottoms.contains(n));
                        seq_capacity.insert(n.clone(), proper);
                    }
                }
                TypeExpr::Power(e) => {
                    if let TypeExpr::Named(n) = e.as_ref() {
                        set_cards.push(card(n));
                    }
                }
                TypeExpr::Func { dom, .. } => {
                    if let TypeExpr::Named(n) = dom.as_ref() {
                        set_cards.push(card(n));
                    }
                }
                _ => {}
            });
        }
    }
    let mut caps = BTreeMap::new();
    for (n, proper) in seq_capacity {
        let cap = match ov.seq_capacity {
            Some(c) if c < 1 || c as usize > MAX_COLLECTION_SLOTS => {
                return Err(Error::ConflictingOverride(format!(
                    "sequence capacity {c} outside 1..={MAX_COLLECTION_SLOTS}"
                )))
            }
            Some(c) => c,
            None if proper > MAX_COLLECTION_SLOTS => {
                return Err(Error::CapacityExceeded {
                    what: format!("sequences over {n}"),
                    size: proper as u128,
                    cap: MAX_COLLECTION_SLOTS as u128,
                })
            }
            None => proper as u8,
        };
        caps.insert(n, cap);
    }

    let nat_hi = match ov.nat_hi {
        Some(n) if n < 0 => {
            return Err(Error::ConflictingOverride(format!("negative NAT bound {n}")))
        }
        Some(n) => n,
        None => {
            let widest_set = set_cards.iter().copied().max().unwrap_or(0) as i64;
            let widest_seq = caps.values().copied().max().unwrap_or(0) as i64;
            DEFAULT_NAT_HI.max(widest_set + 1).max(widest_seq + 1)
        }
    };
    Ok(Bounds {
        nat_hi,
        given_sizes,
        bottoms,
        seq_capacity: caps,
        enum_cap: ov.enum_cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
    })
}

fn free_card(
    f: &crate::zparse::FreeTypeDef,
    given: &BTreeMap<String, usize>,
) -> usize {
    f.branches
        .iter()
        .map(|(_, a)| match a {
            None => 1,
            Some(TypeExpr::Named(n)) => given.get(n).copied().unwrap_or(1),
            Some(_) => 1,
        })
        .sum()
}

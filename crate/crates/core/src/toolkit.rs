//! Finite semantics of the Z mathematical toolkit as used by the translation:
//! sets as membership bitmaps over a carrier, sequences as bottom-padded slot
//! arrays of fixed capacity, counting over a carrier, and free types encoded
//! as flat enumerations.
//!
//! A sequence *denotes* its prefix up to the first bottom slot; `valid?`
//! checks that nothing but bottom follows that prefix and `injective?` that
//! no proper element occurs twice anywhere in the slots.

use crate::error::Error;
use crate::ir::expr::{FreeFn, FuncFn, SeqFn, SetFn};
use crate::ir::types::{FreeSort, FuncSort, GroundType, SeqSort};
use crate::ir::value::{Slots, Value};

fn mismatch(op: &str, args: &[Value]) -> Error {
    let shown: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    Error::TypeMismatch(format!("{op}({})", shown.join(", ")))
}

fn bit(carrier: &GroundType, v: &Value) -> Result<u32, Error> {
    carrier
        .index_of(v)
        .filter(|&i| i < 64)
        .ok_or_else(|| Error::TypeMismatch(format!("{v} is not an element of {carrier}")))
}

fn full_mask(carrier: &GroundType) -> u64 {
    let proper = carrier.proper_card() as u32;
    if proper >= 64 {
        u64::MAX
    } else {
        (1u64 << proper) - 1
    }
}

pub fn set_ops(op: SetFn, carrier: &GroundType, args: &[Value]) -> Result<Value, Error> {
    use Value::Set;
    Ok(match (op, args) {
        (SetFn::Empty, []) => Set(0),
        (SetFn::Full, []) => Set(full_mask(carrier)),
        (SetFn::Contains, [Set(m), x]) => Value::Bool(m >> bit(carrier, x)? & 1 == 1),
        (SetFn::Insert, [Set(m), x]) => Set(m | 1 << bit(carrier, x)?),
        (SetFn::Remove, [Set(m), x]) => Set(m & !(1 << bit(carrier, x)?)),
        (SetFn::Union, [Set(a), Set(b)]) => Set(a | b),
        (SetFn::Difference, [Set(a), Set(b)]) => Set(a & !b),
        _ => return Err(mismatch(&format!("{op:?}"), args)),
    })
}

/// Number of members of a set; bottom counts when present.
pub fn count_size(s: &Value, carrier: &GroundType) -> Result<i64, Error> {
    match s {
        Value::Set(m) => {
            let n = carrier.scalar_card() as u32;
            let m = if n >= 64 { *m } else { m & ((1u64 << n) - 1) };
            Ok(m.count_ones() as i64)
        }
        other => Err(mismatch("size?", std::slice::from_ref(other))),
    }
}

fn prefix(s: &Slots, bottom: u8) -> Vec<u8> {
    s.iter().take_while(|&x| x != bottom).collect()
}

fn pack(items: &[u8], sort: &SeqSort) -> Result<Slots, Error> {
    let cap = sort.cap as usize;
    if items.len() > cap {
        return Err(Error::CapacityExceeded {
            what: format!("sequence over {}", sort.carrier.name),
            size: items.len() as u128,
            cap: cap as u128,
        });
    }
    let mut out = Slots::filled(cap, sort.bottom());
    for (i, &x) in items.iter().enumerate() {
        out.set(i, x);
    }
    Ok(out)
}

fn elem_index(sort: &SeqSort, v: &Value) -> Result<u8, Error> {
    match v {
        Value::Elem(i) if (*i as usize) < sort.carrier.card() => Ok(*i as u8),
        other => Err(Error::TypeMismatch(format!(
            "{other} is not an element of {}",
            sort.carrier.name
        ))),
    }
}

pub fn seq_ops(op: SeqFn, sort: &SeqSort, args: &[Value]) -> Result<Value, Error> {
    let bottom = sort.bottom();
    Ok(match (op, args) {
        (SeqFn::Empty, []) => Value::Slots(Slots::filled(sort.cap as usize, bottom)),
        (SeqFn::Append, [Value::Slots(s), x]) => {
            let x = elem_index(sort, x)?;
            if x == bottom {
                return Err(Error::WrongBranch(format!(
                    "append of bottom element {}",
                    sort.carrier.elems[x as usize]
                )));
            }
            let mut items = prefix(s, bottom);
            items.push(x);
            Value::Slots(pack(&items, sort)?)
        }
        (SeqFn::Remove, [Value::Slots(s), x]) => {
            let x = elem_index(sort, x)?;
            let items: Vec<u8> = prefix(s, bottom).into_iter().filter(|&y| y != x).collect();
            Value::Slots(pack(&items, sort)?)
        }
        (SeqFn::Filter, [Value::Slots(s), Value::Set(m)]) => {
            let items: Vec<u8> = prefix(s, bottom)
                .into_iter()
                .filter(|&y| m >> y & 1 == 1)
                .collect();
            Value::Slots(pack(&items, sort)?)
        }
        (SeqFn::Concat, [Value::Slots(a), Value::Slots(b)]) => {
            let mut items = prefix(a, bottom);
            items.extend(prefix(b, bottom));
            Value::Slots(pack(&items, sort)?)
        }
        (SeqFn::Range, [Value::Slots(s)]) => Value::Set(
            prefix(s, bottom)
                .into_iter()
                .fold(0u64, |m, x| m | 1 << x),
        ),
        (SeqFn::Domain, [Value::Slots(s)]) => {
            let n = prefix(s, bottom).len() as u32;
            Value::Set(if n == 0 { 0 } else { (1u64 << n) - 1 })
        }
        (SeqFn::Size, [Value::Slots(s)]) => Value::Int(prefix(s, bottom).len() as i64),
        (SeqFn::Valid, [Value::Slots(s)]) => {
            let n = prefix(s, bottom).len();
            Value::Bool(s.iter().skip(n).all(|x| x == bottom))
        }
        (SeqFn::Injective, [Value::Slots(s)]) => {
            let mut seen = 0u64;
            let mut ok = true;
            for x in s.iter().filter(|&x| x != bottom) {
                ok &= seen >> x & 1 == 0;
                seen |= 1 << x;
            }
            Value::Bool(ok)
        }
        _ => return Err(mismatch(&format!("{op:?}"), args)),
    })
}

/// Free-type constructors, branch tests and constructor inverses over the
/// flat enum encoding. Inverse on a foreign branch yields the argument
/// carrier's bottom when it has one, and `WrongBranch` otherwise.
pub fn freetype_ops(op: FreeFn, sort: &FreeSort, arg: &Value) -> Result<Value, Error> {
    match op {
        FreeFn::Construct(b) => {
            let branch = &sort.branches[b];
            let carrier = branch
                .arg
                .as_ref()
                .ok_or_else(|| Error::TypeMismatch(format!("{} takes no argument", branch.name)))?;
            match arg {
                Value::Elem(i) if (*i as usize) < carrier.proper_card() => {
                    Ok(Value::Elem(branch.offset + i))
                }
                Value::Elem(i) if carrier.is_bottom(*i) => Err(Error::WrongBranch(format!(
                    "{} applied to bottom",
                    branch.name
                ))),
                other => Err(mismatch(&branch.name, std::slice::from_ref(other))),
            }
        }
        FreeFn::IsBranch(b) => match arg {
            Value::Elem(i) => Ok(Value::Bool(sort.branch_of(*i) == Some(b))),
            other => Err(mismatch("is_branch?", std::slice::from_ref(other))),
        },
        FreeFn::Inverse(b) => {
            let branch = &sort.branches[b];
            let carrier = branch
                .arg
                .as_ref()
                .ok_or_else(|| Error::TypeMismatch(format!("{} has no inverse", branch.name)))?;
            match arg {
                Value::Elem(i) if sort.branch_of(*i) == Some(b) => {
                    Ok(Value::Elem(i - branch.offset))
                }
                Value::Elem(i) => match carrier.bottom {
                    Some(bot) => Ok(Value::Elem(bot)),
                    None => Err(Error::WrongBranch(format!(
                        "{}^-1 of {}",
                        branch.name,
                        sort.ty
                            .elems
                            .get(*i as usize)
                            .map(String::as_str)
                            .unwrap_or("?")
                    ))),
                },
                other => Err(mismatch("inverse", std::slice::from_ref(other))),
            }
        }
    }
}

pub fn func_ops(op: FuncFn, sort: &FuncSort, args: &[Value]) -> Result<Value, Error> {
    let bottom = sort.ran.bottom.map(|b| b as u8);
    let defined = |x: u8| Some(x) != bottom;
    Ok(match (op, args) {
        (FuncFn::Apply, [Value::Slots(f), x]) => {
            let i = sort
                .dom
                .index_of(x)
                .ok_or_else(|| mismatch("apply", args))?;
            Value::Elem(f.get(i as usize) as u32)
        }
        (FuncFn::Domain, [Value::Slots(f)]) => Value::Set(
            f.iter()
                .enumerate()
                .filter(|(_, r)| defined(*r))
                .fold(0u64, |m, (d, _)| m | 1 << d),
        ),
        (FuncFn::Range, [Value::Slots(f)]) => Value::Set(
            f.iter()
                .filter(|r| defined(*r))
                .fold(0u64, |m, r| m | 1 << r),
        ),
        (FuncFn::Size, [Value::Slots(f)]) => {
            Value::Int(f.iter().filter(|r| defined(*r)).count() as i64)
        }
        (FuncFn::Total, [Value::Slots(f)]) => Value::Bool(f.iter().all(defined)),
        _ => return Err(mismatch(&format!("{op:?}"), args)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::types::EnumType;
    use crate::ir::value::enumerate_type;
    use std::sync::Arc;

    fn t3() -> Arc<EnumType> {
        Arc::new(EnumType::new(
            "T",
            vec!["T__1".into(), "T__2".into(), "T__3".into()],
        ))
    }

    fn seq_sort() -> SeqSort {
        SeqSort {
            carrier: Arc::new((*t3()).clone().with_bottom()),
            cap: 3,
        }
    }

    fn seq(items: &[u8]) -> Value {
        Value::Slots(pack(items, &seq_sort()).unwrap())
    }

    fn set_of(items: &[u32]) -> Value {
        Value::Set(items.iter().fold(0, |m, i| m | 1 << i))
    }

    #[test]
    fn union_and_insert_remove() {
        let c = GroundType::Enum(t3());
        assert_eq!(
            set_ops(SetFn::Union, &c, &[set_of(&[0]), set_of(&[1])]).unwrap(),
            set_of(&[0, 1])
        );
        let s = set_ops(SetFn::Insert, &c, &[Value::Set(0), Value::Elem(0)]).unwrap();
        let back = set_ops(SetFn::Remove, &c, &[s, Value::Elem(0)]).unwrap();
        assert_eq!(back, Value::Set(0));
        assert_eq!(
            set_ops(SetFn::Contains, &c, &[Value::Set(0), Value::Elem(0)]).unwrap(),
            Value::Bool(false)
        );
    }

    #[test]
    fn setminus_matches_pointwise_definition() {
        let c = GroundType::Enum(t3());
        let all = enumerate_type(&GroundType::Set(Arc::new(c.clone())), 1 << 10).unwrap();
        assert_eq!(all.len() * all.len(), 64);
        for a in &all {
            for b in &all {
                let d = set_ops(SetFn::Difference, &c, &[a.clone(), b.clone()]).unwrap();
                for x in 0..3 {
                    let mem = |s: &Value| {
                        set_ops(SetFn::Contains, &c, &[s.clone(), Value::Elem(x)]).unwrap()
                            == Value::Bool(true)
                    };
                    assert_eq!(mem(&d), mem(a) && !mem(b));
                }
            }
        }
        assert_eq!(
            set_ops(SetFn::Difference, &c, &[set_of(&[0, 1]), set_of(&[1])]).unwrap(),
            set_of(&[0])
        );
    }

    #[test]
    fn sequence_operations() {
        let s = seq_sort();
        let one = seq_ops(SeqFn::Append, &s, &[seq(&[]), Value::Elem(0)]).unwrap();
        assert_eq!(one, seq(&[0]));
        assert_eq!(seq_ops(SeqFn::Size, &s, &[one]).unwrap(), Value::Int(1));
        assert_eq!(
            seq_ops(SeqFn::Remove, &s, &[seq(&[0, 1]), Value::Elem(0)]).unwrap(),
            seq(&[1])
        );
        assert_eq!(
            seq_ops(SeqFn::Range, &s, &[seq(&[1, 0])]).unwrap(),
            set_of(&[0, 1])
        );
    }

    #[test]
    fn append_at_capacity_is_an_error() {
        let s = seq_sort();
        let full = seq(&[0, 1, 2]);
        assert!(matches!(
            seq_ops(SeqFn::Append, &s, &[full, Value::Elem(0)]),
            Err(Error::CapacityExceeded { .. })
        ));
        assert!(matches!(
            seq_ops(SeqFn::Append, &s, &[seq(&[]), Value::Elem(3)]),
            Err(Error::WrongBranch(_))
        ));
    }

    #[test]
    fn valid_and_injective_detect_bad_slots() {
        let s = seq_sort();
        let gap = Value::Slots(Slots::from_slice(&[0, 3, 1]));
        assert_eq!(seq_ops(SeqFn::Valid, &s, &[gap]).unwrap(), Value::Bool(false));
        let dup = Value::Slots(Slots::from_slice(&[1, 1, 3]));
        assert_eq!(
            seq_ops(SeqFn::Injective, &s, &[dup]).unwrap(),
            Value::Bool(false)
        );
    }

    #[test]
    fn range_matches_brute_force_for_short_sequences() {
        let s = seq_sort();
        for len in 0..=2usize {
            for code in 0..3u32.pow(len as u32) {
                let items: Vec<u8> = (0..len).map(|i| (code / 3u32.pow(i as u32) % 3) as u8).collect();
                let expected = items.iter().fold(0u64, |m, &x| m | 1 << x);
                assert_eq!(
                    seq_ops(SeqFn::Range, &s, &[seq(&items)]).unwrap(),
                    Value::Set(expected)
                );
            }
        }
    }

    #[test]
    fn counting_includes_bottom_members() {
        let c3 = GroundType::Enum(t3());
        assert_eq!(count_size(&Value::Set(0), &c3).unwrap(), 0);
        assert_eq!(count_size(&set_of(&[0, 1, 2]), &c3).unwrap(), 3);
        let c4 = GroundType::Enum(Arc::new((*t3()).clone().with_bottom()));
        assert_eq!(count_size(&set_of(&[0, 3]), &c4).unwrap(), 2);
    }

    fn mticket() -> FreeSort {
        let ticket = Arc::new(
            EnumType::new(
                "Ticket",
                vec!["Ticket__1".into(), "Ticket__2".into(), "Ticket__3".into()],
            )
            .with_bottom(),
        );
        FreeSort::new(
            "MTicket",
            vec![("null".into(), None), ("ticket".into(), Some(ticket))],
        )
    }

    #[test]
    fn free_type_encoding() {
        let m = mticket();
        assert_eq!(m.ty.card(), 4);
        let built = freetype_ops(FreeFn::Construct(1), &m, &Value::Elem(1)).unwrap();
        assert_eq!(m.ty.elems[match built {
            Value::Elem(i) => i as usize,
            _ => unreachable!(),
        }], "ticket__Ticket__2");
        assert_eq!(
            freetype_ops(FreeFn::IsBranch(0), &m, &Value::Elem(0)).unwrap(),
            Value::Bool(true)
        );
        let t1 = freetype_ops(FreeFn::Construct(1), &m, &Value::Elem(0)).unwrap();
        assert_eq!(
            freetype_ops(FreeFn::Inverse(1), &m, &t1).unwrap(),
            Value::Elem(0)
        );
        // null has no ticket inside: totalised to Ticket__B
        assert_eq!(
            freetype_ops(FreeFn::Inverse(1), &m, &Value::Elem(0)).unwrap(),
            Value::Elem(3)
        );
    }

    #[test]
    fn inverse_without_bottom_reports_wrong_branch() {
        let plain = Arc::new(EnumType::new("X", vec!["X__1".into()]));
        let f = FreeSort::new("F", vec![("c".into(), None), ("k".into(), Some(plain))]);
        assert!(matches!(
            freetype_ops(FreeFn::Inverse(1), &f, &Value::Elem(0)),
            Err(Error::WrongBranch(_))
        ));
    }
}

use super::*;
use crate::ir::Value;
use crate::zparse::{parse_retrieve, parse_spec};

const A: &str = include_str!("../../corpus/setseq/abstract.tex");
const C: &str = include_str!("../../corpus/setseq/concrete.tex");
const R: &str = include_str!("../../corpus/setseq/retrieve.tex");
const K: &str = include_str!("../../corpus/boxoffice/kurbel.tex");
const M: &str = include_str!("../../corpus/boxoffice/marlowe.tex");
const KM: &str = include_str!("../../corpus/boxoffice/retrieve.tex");

fn spec(s: &str) -> ZSpec {
    parse_spec(s).unwrap()
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn nat_bound_follows_widest_collection() {
    let (a, c) = (spec(A), spec(C));
    let ov = Overrides::default();
    assert_eq!(derive_bounds(&[&a], &ov).unwrap().nat_hi, 4);
    assert_eq!(derive_bounds(&[&c], &ov).unwrap().nat_hi, 4);
    assert_eq!(derive_bounds(&[&a, &c], &ov).unwrap().nat_hi, 5);
    let (k, m) = (spec(K), spec(M));
    let b = derive_bounds(&[&k, &m], &ov).unwrap();
    assert_eq!(b.nat_hi, 5);
    assert!(b.bottoms.contains("Ticket"));
    assert!(!derive_bounds(&[&k], &ov).unwrap().bottoms.contains("Ticket"));
}

#[test]
fn overrides_are_validated() {
    let c = spec(C);
    let bad = |ov: Overrides| matches!(derive_bounds(&[&c], &ov), Err(Error::ConflictingOverride(_)));
    assert!(bad(Overrides {
        type_sizes: [("U".to_string(), 2)].into(),
        ..Default::default()
    }));
    assert!(bad(Overrides {
        given_size: Some(0),
        ..Default::default()
    }));
    assert!(bad(Overrides {
        seq_capacity: Some(9),
        ..Default::default()
    }));
    let b = derive_bounds(
        &[&c],
        &Overrides {
            nat_hi: Some(0),
            given_size: Some(2),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!((b.nat_hi, b.seq_capacity["T"]), (0, 2));
}

#[test]
fn concrete_invariant_and_commands() {
    let c = spec(C);
    let b = derive_bounds(&[&c], &Overrides::default()).unwrap();
    let m = translate(&c, &b).unwrap();
    let names: Vec<&str> = m.vars.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(names, ["max", "l", "p?", "invariant__"]);
    let seq = "sequence {T; T__B, 3}";
    assert_eq!(
        squash(&m.invariant().unwrap().to_string()),
        squash(&format!(
            "{seq} ! injective?(l) AND {seq} ! valid?(l) AND p? /= T__B AND {seq} ! size?(l) <= max"
        ))
    );
    assert_eq!(
        squash(&m.init.to_string()),
        squash(&format!("l = {seq} ! empty AND invariant__"))
    );
    assert_eq!(
        squash(&m.commands[1].guard.to_string()),
        squash(&format!(
            "set {{T;}} ! contains?({seq} ! range(l), p?) AND l' = {seq} ! remove(l, p?) \
             AND invariant__ AND invariant__'"
        ))
    );
    assert_eq!(m.else_frame.as_deref(), Some(&["l".to_string()][..]));
}

#[test]
fn free_type_encoding() {
    let (k, m) = (spec(K), spec(M));
    let b = derive_bounds(&[&k, &m], &Overrides::default()).unwrap();
    let mm = translate(&m, &b).unwrap();
    let GroundType::Enum(e) = &mm.var("tkt").unwrap().ty else {
        panic!()
    };
    assert_eq!(
        e.elems,
        ["null", "ticket__Ticket__1", "ticket__Ticket__2", "ticket__Ticket__3"]
    );
    let km = translate(&k, &b).unwrap();
    assert_eq!(km.names_of(VarKind::Output), ["t__"]);
}

#[test]
fn retrieve_translates_over_both_states() {
    let (a, c) = (spec(A), spec(C));
    let b = derive_bounds(&[&a, &c], &Overrides::default()).unwrap();
    let r = translate_retrieve(&parse_retrieve(R, &a, &c).unwrap(), &a, &c, &b).unwrap();
    assert_eq!(squash(&r.to_string()), "s = sequence {T; T__B, 3} ! range(l)");
    let (k, m) = (spec(K), spec(M));
    let b = derive_bounds(&[&k, &m], &Overrides::default()).unwrap();
    let r = translate_retrieve(&parse_retrieve(KM, &k, &m).unwrap(), &k, &m, &b).unwrap();
    assert_eq!(r.conjuncts().len(), 2);
}

#[test]
fn brute_force_precondition() {
    let c = spec(C);
    let b = derive_bounds(&[&c], &Overrides::default()).unwrap();
    let m = translate(&c, &b).unwrap();
    let GroundType::Seq(sort) = &m.var("l").unwrap().ty else {
        panic!()
    };
    let seq = |xs: &[u8]| {
        let mut s = crate::ir::value::Slots::filled(sort.cap as usize, sort.bottom());
        for (i, &x) in xs.iter().enumerate() {
            s.set(i, x);
        }
        Value::Slots(s)
    };
    let st = |max: i64, l: Value| -> Assignment {
        [("max".to_string(), Value::Int(max)), ("l".to_string(), l)].into()
    };
    let p = |x: u32| -> Assignment { [("p?".to_string(), Value::Elem(x))].into() };
    assert!(precondition_of("CEnter", &m, &st(2, seq(&[])), &p(0)).unwrap());
    assert!(!precondition_of("CEnter", &m, &st(2, seq(&[1, 2])), &p(0)).unwrap());
    assert!(!precondition_of("CEnter", &m, &st(3, seq(&[0])), &p(0)).unwrap());
    assert!(precondition_of("CLeave", &m, &st(3, seq(&[0])), &p(0)).unwrap());
    assert!(!precondition_of("CLeave", &m, &st(3, seq(&[0])), &p(1)).unwrap());
}

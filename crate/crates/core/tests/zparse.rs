mod common;

use common::corpus;
use zrefine::zparse::{parse_predicate, parse_spec, print_expr, print_spec};
use zrefine::Error;

const FILES: [&str; 4] = [
    "setseq/abstract.tex",
    "setseq/concrete.tex",
    "boxoffice/marlowe.tex",
    "boxoffice/kurbel.tex",
];

#[test]
fn corpus_specs_parse() {
    let names: Vec<String> = FILES.iter().map(|f| parse_spec(&corpus(f)).unwrap().name).collect();
    assert_eq!(names, ["A", "C", "Marlowe", "Kurbel"]);
    let a = parse_spec(&corpus("setseq/abstract.tex")).unwrap();
    let ops: Vec<&str> = a.operations.iter().map(|o| o.name.as_str()).collect();
    assert_eq!(ops, ["AEnter", "ALeave"]);
}

#[test]
fn printing_round_trips() {
    for f in FILES {
        let s = parse_spec(&corpus(f)).unwrap();
        let printed = print_spec(&s);
        let again = parse_spec(&printed).unwrap_or_else(|e| panic!("{f}: {e}\n{printed}"));
        assert_eq!(s, again, "{f}");
        assert_eq!(printed, print_spec(&again), "{f}");
    }
}

#[test]
fn predicates_round_trip() {
    for p in [
        "x \\in s \\land \\# s \\leq max",
        "a \\neq b \\implies c' = c \\cup \\{ d \\}",
        "l' = l \\cat \\langle p? \\rangle \\implies p? \\notin \\ran l",
        "s' = s \\setminus \\{ p? \\}",
        "\\# (l \\filter s) \\leq 1 \\land \\dom l = \\emptyset",
    ] {
        let e = parse_predicate(p).unwrap();
        let again = parse_predicate(&print_expr(&e)).unwrap();
        assert_eq!(e, again, "{p}");
    }
}

#[test]
fn negation_is_outside_the_language() {
    assert!(matches!(parse_predicate("\\lnot a = b"), Err(Error::Unsupported(_))));
}

#[test]
fn malformed_input_is_rejected() {
    let e = parse_spec("\\begin{schema}{S}\nx : \\nat\n\\where\nx \\leq\n\\end{schema}\n").unwrap_err();
    assert!(matches!(e, Error::Syntax { .. }), "{e:?}");
}

use std::fmt;

use super::expr::Expr;

/// The CTL fragment needed by the simulation obligations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CtlFormula {
    Atom(Expr),
    Not(Box<CtlFormula>),
    And(Vec<CtlFormula>),
    Implies(Box<CtlFormula>, Box<CtlFormula>),
    EX(Box<CtlFormula>),
    AX(Box<CtlFormula>),
}

impl CtlFormula {
    pub fn atom(e: Expr) -> Self {
        CtlFormula::Atom(e)
    }

    pub fn not(f: CtlFormula) -> Self {
        CtlFormula::Not(Box::new(f))
    }

    pub fn ex(f: CtlFormula) -> Self {
        CtlFormula::EX(Box::new(f))
    }

    pub fn ax(f: CtlFormula) -> Self {
        CtlFormula::AX(Box::new(f))
    }

    pub fn implies(a: CtlFormula, b: CtlFormula) -> Self {
        CtlFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn and(mut parts: Vec<CtlFormula>) -> Self {
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            CtlFormula::And(parts)
        }
    }

    /// Every atom, in pre-order.
    pub fn atoms(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            CtlFormula::Atom(e) => out.push(e),
            CtlFormula::Not(a) | CtlFormula::EX(a) | CtlFormula::AX(a) => a.collect_atoms(out),
            CtlFormula::And(xs) => xs.iter().for_each(|x| x.collect_atoms(out)),
            CtlFormula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            CtlFormula::Implies(..) => 1,
            CtlFormula::And(_) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for CtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |g: &CtlFormula, min: u8| {
            if g.prec() < min {
                format!("({g})")
            } else {
                g.to_string()
            }
        };
        match self {
            CtlFormula::Atom(e) => write!(f, "{e}"),
            CtlFormula::Not(a) => write!(f, "NOT {}", wrap(a, 3)),
            CtlFormula::And(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| wrap(x, 3)).collect();
                write!(f, "{}", parts.join(" AND "))
            }
            CtlFormula::Implies(a, b) => write!(f, "{} => {}", wrap(a, 2), wrap(b, 1)),
            CtlFormula::EX(a) => write!(f, "EX({a})"),
            CtlFormula::AX(a) => write!(f, "AX({a})"),
        }
    }
}

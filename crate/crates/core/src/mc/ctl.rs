//! CTL (Atom, Not, And, Implies, EX, AX) over an explored state space.

use std::collections::HashMap;

use serde::Serialize;

use super::compile::{compile, truth, CExpr};
use super::explore::{show_values, StateSpace};
use crate::error::Result;
use crate::ir::{CtlFormula, FiniteModel, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum At {
    Initial,
    All,
}

enum Node {
    Atom(CExpr),
    Not(usize),
    And(Vec<usize>),
    Implies(usize, usize),
    EX(usize),
    AX(usize),
}

/// Formula compiled against a layout, in post-order (children first).
pub struct Compiled {
    nodes: Vec<Node>,
    text: Vec<String>,
    root: usize,
}

impl Compiled {
    pub fn new(f: &CtlFormula, model: &FiniteModel) -> Result<Self> {
        let layout = model.layout();
        let mut c = Compiled {
            nodes: Vec::new(),
            text: Vec::new(),
            root: 0,
        };
        c.root = c.add(f, model, &layout)?;
        Ok(c)
    }

    /// Node of the whole formula.
    pub fn root(&self) -> usize {
        self.root
    }

    fn add(
        &mut self,
        f: &CtlFormula,
        model: &FiniteModel,
        layout: &crate::ir::Layout,
    ) -> Result<usize> {
        let node = match f {
            CtlFormula::Atom(e) => Node::Atom(compile(&e.inline(&model.definitions), layout)?),
            CtlFormula::Not(a) => Node::Not(self.add(a, model, layout)?),
            CtlFormula::And(xs) => Node::And(
                xs.iter()
                    .map(|x| self.add(x, model, layout))
                    .collect::<Result<_>>()?,
            ),
            CtlFormula::Implies(a, b) => {
                let a = self.add(a, model, layout)?;
                Node::Implies(a, self.add(b, model, layout)?)
            }
            CtlFormula::EX(a) => Node::EX(self.add(a, model, layout)?),
            CtlFormula::AX(a) => Node::AX(self.add(a, model, layout)?),
        };
        self.nodes.push(node);
        self.text.push(f.to_string());
        Ok(self.nodes.len() - 1)
    }
}

/// One transition of a counterexample or witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub from: u32,
    pub to: u32,
    pub label: String,
    /// Input values read by the step.
    pub inputs: Vec<(String, String)>,
    /// Variables whose value changed: (name, before, after).
    pub changes: Vec<(String, String, String)>,
}

/// Why a subformula holds or fails at a state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub formula: String,
    pub state: u32,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<TraceStep>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Evidence>,
}

impl Evidence {
    /// Steps in pre-order.
    pub fn trace(&self) -> Vec<TraceStep> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<TraceStep>) {
        if let Some(s) = &self.step {
            out.push(s.clone());
        }
        for c in &self.children {
            c.collect(out);
        }
    }
}

#[derive(Clone, Debug)]
pub struct CtlOutcome {
    pub holds: bool,
    /// States at which the formula was evaluated.
    pub checked: usize,
    /// First (lowest-numbered) violating state with its explanation.
    pub violation: Option<Evidence>,
}

/// Memoizing evaluator.
pub struct Checker<'a> {
    space: &'a StateSpace,
    f: &'a Compiled,
    memo: HashMap<(usize, u32), bool>,
}

impl<'a> Checker<'a> {
    pub fn new(space: &'a StateSpace, f: &'a Compiled) -> Self {
        Checker {
            space,
            f,
            memo: HashMap::new(),
        }
    }

    fn targets(&self, s: u32) -> impl Iterator<Item = (u16, u32)> + '_ {
        self.space
            .successors(s)
            .iter()
            .flat_map(|(k, ts)| ts.iter().map(move |&t| (*k, t)))
    }

    pub fn eval(&mut self, n: usize, s: u32) -> Result<bool> {
        if let Some(&b) = self.memo.get(&(n, s)) {
            return Ok(b);
        }
        let b = match &self.f.nodes[n] {
            Node::Atom(e) => truth(e, self.space.state(s), &[])?,
            Node::Not(a) => !self.eval(*a, s)?,
            Node::And(xs) => {
                let mut all = true;
                for &x in xs {
                    if !self.eval(x, s)? {
                        all = false;
                        break;
                    }
                }
                all
            }
            Node::Implies(a, b) => !self.eval(*a, s)? || self.eval(*b, s)?,
            Node::EX(a) => {
                let ts: Vec<u32> = self.targets(s).map(|(_, t)| t).collect();
                let mut any = false;
                for t in ts {
                    if self.eval(*a, t)? {
                        any = true;
                        break;
                    }
                }
                any
            }
            Node::AX(a) => {
                let ts: Vec<u32> = self.targets(s).map(|(_, t)| t).collect();
                let mut all = true;
                for t in ts {
                    if !self.eval(*a, t)? {
                        all = false;
                        break;
                    }
                }
                all
            }
        };
        self.memo.insert((n, s), b);
        Ok(b)
    }

    fn step(&self, k: u16, from: u32, to: u32) -> TraceStep {
        let layout = &self.space.layout;
        let before = show_values(layout, self.space.state(from));
        let after = show_values(layout, self.space.state(to));
        let inputs = layout
            .vars
            .iter()
            .zip(&before)
            .filter(|(v, _)| v.kind == crate::ir::VarKind::Input)
            .map(|(_, nv)| nv.clone())
            .collect();
        let changes = before
            .into_iter()
            .zip(after)
            .filter(|(b, a)| b.1 != a.1)
            .map(|(b, a)| (b.0, b.1, a.1))
            .collect();
        TraceStep {
            from,
            to,
            label: self.space.labels[k as usize].clone(),
            inputs,
            changes,
        }
    }

    /// Lowest-numbered successor satisfying (`want`) or violating (`!want`)
    /// node `a`, with the label of its first edge.
    fn pick(&mut self, a: usize, s: u32, want: bool) -> Result<Option<(u16, u32)>> {
        let edges: Vec<(u16, u32)> = self.targets(s).collect();
        let mut best: Option<(u16, u32)> = None;
        for (k, t) in edges {
            if best.is_some_and(|(_, b)| b <= t) {
                continue;
            }
            if self.eval(a, t)? == want {
                best = Some((k, t));
            }
        }
        Ok(best)
    }

    /// Explanation of the value of node `n` at `s`.
    pub fn explain(&mut self, n: usize, s: u32) -> Result<Evidence> {
        let holds = self.eval(n, s)?;
        let mut children = Vec::new();
        match &self.f.nodes[n] {
            Node::Atom(_) => {}
            Node::Not(a) => children.push(self.explain(*a, s)?),
            Node::And(xs) => {
                if !holds {
                    for &x in xs.clone().iter() {
                        if !self.eval(x, s)? {
                            children.push(self.explain(x, s)?);
                            break;
                        }
                    }
                }
            }
            Node::Implies(a, b) => {
                let (a, b) = (*a, *b);
                if !holds {
                    children.push(self.explain(a, s)?);
                    children.push(self.explain(b, s)?);
                } else if !self.eval(a, s)? {
                    children.push(self.explain(a, s)?);
                } else {
                    children.push(self.explain(b, s)?);
                }
            }
            Node::EX(a) | Node::AX(a) => {
                let a = *a;
                let existential = matches!(self.f.nodes[n], Node::EX(_));
                // A witness for EX, a violation for AX; otherwise no step.
                if existential == holds {
                    if let Some((k, t)) = self.pick(a, s, existential)? {
                        let mut ev = self.explain(a, t)?;
                        let step = self.step(k, s, t);
                        ev = Evidence {
                            step: Some(step),
                            ..ev
                        };
                        children.push(ev);
                    }
                }
            }
        }
        Ok(Evidence {
            formula: self.f.text[n].clone(),
            state: s,
            holds,
            step: None,
            children,
        })
    }
}

/// Evaluates `f` at the initial states or at every reachable state.
pub fn check_ctl(space: &StateSpace, model: &FiniteModel, f: &CtlFormula, at: At) -> Result<CtlOutcome> {
    let compiled = Compiled::new(f, model)?;
    let mut ck = Checker::new(space, &compiled);
    let states: Vec<u32> = match at {
        At::Initial => {
            let mut v = space.initial.clone();
            v.sort_unstable();
            v
        }
        At::All => (0..space.len() as u32).collect(),
    };
    for (i, &s) in states.iter().enumerate() {
        if !ck.eval(compiled.root, s)? {
            let ev = ck.explain(compiled.root, s)?;
            return Ok(CtlOutcome {
                holds: false,
                checked: i + 1,
                violation: Some(ev),
            });
        }
    }
    Ok(CtlOutcome {
        holds: true,
        checked: states.len(),
        violation: None,
    })
}

/// Evaluates `f` at a valuation, computing successors afresh from the model
/// rather than reading an explored graph.
pub fn replay(model: &FiniteModel, f: &CtlFormula, state: &[Value], enum_cap: u128) -> Result<bool> {
    let gen = super::explore::Successors::new(model, enum_cap)?;
    let compiled = Compiled::new(f, model)?;
    replay_node(&gen, &compiled, compiled.root, state)
}

fn replay_node(
    gen: &super::explore::Successors,
    c: &Compiled,
    n: usize,
    s: &[Value],
) -> Result<bool> {
    Ok(match &c.nodes[n] {
        Node::Atom(e) => truth(e, s, &[])?,
        Node::Not(a) => !replay_node(gen, c, *a, s)?,
        Node::And(xs) => {
            for &x in xs {
                if !replay_node(gen, c, x, s)? {
                    return Ok(false);
                }
            }
            true
        }
        Node::Implies(a, b) => !replay_node(gen, c, *a, s)? || replay_node(gen, c, *b, s)?,
        Node::EX(a) | Node::AX(a) => {
            let existential = matches!(c.nodes[n], Node::EX(_));
            for (_, ts) in gen.step(s)? {
                for t in ts {
                    if replay_node(gen, c, *a, &t)? == existential {
                        return Ok(existential);
                    }
                }
            }
            !existential
        }
    })
}

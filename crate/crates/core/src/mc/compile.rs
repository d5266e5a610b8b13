//! Expressions over slot indices, and per-command successor plans.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ir::expr::{eval, EvalError};
use crate::ir::{
    enumerate_type, Carry, CmpOp, Expr, Layout, Value, VarKind, VarName,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotRef {
    Cur(u32),
    Next(u32),
    Bound(u32),
}

pub type CExpr = Expr<SlotRef>;

/// Resolves variable names to slots. Defined variables must be inlined first.
pub fn compile(e: &Expr, layout: &Layout) -> Result<CExpr> {
    let mut bound: Vec<String> = Vec::new();
    e.visit(&mut |x| {
        if let Expr::Exists { var, .. } = x {
            if !bound.contains(&var.name) {
                bound.push(var.name.clone());
            }
        }
    });
    for v in e.free_vars() {
        if layout.slot(&v.name).is_none() && !bound.contains(&v.name) {
            return Err(Error::Scope(v.to_string()));
        }
    }
    Ok(e.map_vars(&mut |v: &VarName| {
        if let Some(i) = bound.iter().position(|b| *b == v.name) {
            SlotRef::Bound(i as u32)
        } else {
            let i = layout.slot(&v.name).expect("checked above") as u32;
            if v.primed {
                SlotRef::Next(i)
            } else {
                SlotRef::Cur(i)
            }
        }
    }))
}

fn refs(e: &CExpr) -> (Vec<usize>, Vec<usize>) {
    let mut cur = Vec::new();
    let mut next = Vec::new();
    e.visit_vars(&mut |r| match r {
        SlotRef::Cur(i) if !cur.contains(&(*i as usize)) => cur.push(*i as usize),
        SlotRef::Next(i) if !next.contains(&(*i as usize)) => next.push(*i as usize),
        _ => {}
    });
    (cur, next)
}

/// Outcome of evaluating a boolean in a partial environment.
pub fn truth(e: &CExpr, cur: &[Value], next: &[Option<Value>]) -> Result<bool> {
    let env = |r: &SlotRef| match r {
        SlotRef::Cur(i) => cur.get(*i as usize).cloned(),
        SlotRef::Next(i) => next.get(*i as usize).cloned().flatten(),
        SlotRef::Bound(_) => None,
    };
    match eval(e, &env) {
        Ok(Value::Bool(b)) => Ok(b),
        Ok(v) => Err(Error::TypeMismatch(format!("guard evaluated to {v}"))),
        Err(EvalError::Undefined(_)) => Ok(false),
        Err(EvalError::Fatal(e)) => Err(e),
    }
}

fn value(e: &CExpr, cur: &[Value], next: &[Option<Value>]) -> Result<Option<Value>> {
    let env = |r: &SlotRef| match r {
        SlotRef::Cur(i) => cur.get(*i as usize).cloned(),
        SlotRef::Next(i) => next.get(*i as usize).cloned().flatten(),
        SlotRef::Bound(_) => None,
    };
    match eval(e, &env) {
        Ok(v) => Ok(Some(v)),
        Err(EvalError::Undefined(_)) => Ok(None),
        Err(EvalError::Fatal(e)) => Err(e),
    }
}

#[derive(Debug)]
enum How {
    Solve(CExpr),
    Enumerate,
}

#[derive(Debug)]
struct Step {
    slot: usize,
    how: How,
    checks: Vec<CExpr>,
}

/// How to enumerate the after-states of one command: copy the framed slots,
/// then fix the free slots one at a time (solving `x' = e` where possible),
/// checking each conjunct as soon as its slots are known.
#[derive(Debug)]
pub struct Plan {
    pre: Vec<CExpr>,
    copied: Vec<usize>,
    early: Vec<CExpr>,
    steps: Vec<Step>,
    /// Before-state slots the after-states depend on.
    pub key: Vec<usize>,
}

/// Per-slot value domains of a layout.
pub fn domains(layout: &Layout, cap: u128) -> Result<Vec<Arc<Vec<Value>>>> {
    layout
        .vars
        .iter()
        .map(|v| enumerate_type(&v.ty, cap).map(Arc::new))
        .collect()
}

fn solvable(c: &CExpr, slot: usize, known: &[bool]) -> Option<CExpr> {
    let Expr::Cmp(CmpOp::Eq, a, b) = c else {
        return None;
    };
    for (lhs, rhs) in [(a, b), (b, a)] {
        if **lhs == Expr::Var(SlotRef::Next(slot as u32)) {
            let (_, nx) = refs(rhs);
            if nx.iter().all(|&j| known[j]) {
                return Some((**rhs).clone());
            }
        }
    }
    None
}

impl Plan {
    /// `free[i]` marks the slots chosen by the command; the rest are copied.
    pub fn new(guard: &CExpr, free: &[bool]) -> Plan {
        let n = free.len();
        let mut pre = Vec::new();
        let mut post: Vec<(CExpr, Vec<usize>)> = Vec::new();
        for c in guard.conjuncts() {
            let (_, nx) = refs(c);
            if nx.is_empty() {
                pre.push(c.clone());
            } else {
                post.push((c.clone(), nx));
            }
        }
        let copied: Vec<usize> = (0..n).filter(|&i| !free[i]).collect();
        let mut known: Vec<bool> = free.iter().map(|f| !f).collect();
        let mut done = vec![false; post.len()];
        let take_ready = |known: &[bool], done: &mut Vec<bool>| -> Vec<CExpr> {
            let mut out = Vec::new();
            for (k, (c, nx)) in post.iter().enumerate() {
                if !done[k] && nx.iter().all(|&j| known[j]) {
                    done[k] = true;
                    out.push(c.clone());
                }
            }
            out
        };
        let early = take_ready(&known, &mut done);
        let mut steps = Vec::new();
        let lhs_slots: Vec<usize> = post
            .iter()
            .flat_map(|(c, _)| match c {
                Expr::Cmp(CmpOp::Eq, a, b) => [a, b]
                    .iter()
                    .filter_map(|x| match x.as_ref() {
                        Expr::Var(SlotRef::Next(i)) => Some(*i as usize),
                        _ => None,
                    })
                    .collect::<Vec<_>>(),
                _ => Vec::new(),
            })
            .collect();
        while known.iter().any(|k| !k) {
            let mut pick = None;
            'search: for i in (0..n).filter(|&i| !known[i]) {
                for (k, (c, _)) in post.iter().enumerate() {
                    if done[k] {
                        continue;
                    }
                    if let Some(rhs) = solvable(c, i, &known) {
                        pick = Some((i, How::Solve(rhs)));
                        break 'search;
                    }
                }
            }
            let (slot, how) = pick.unwrap_or_else(|| {
                let i = (0..n)
                    .find(|&i| !known[i] && !lhs_slots.contains(&i))
                    .or_else(|| (0..n).find(|&i| !known[i]))
                    .unwrap();
                (i, How::Enumerate)
            });
            known[slot] = true;
            steps.push(Step {
                slot,
                how,
                checks: take_ready(&known, &mut done),
            });
        }
        let mut key: Vec<usize> = copied.clone();
        let mut add_cur = |e: &CExpr| {
            for i in refs(e).0 {
                if !key.contains(&i) {
                    key.push(i);
                }
            }
        };
        early.iter().for_each(&mut add_cur);
        for s in &steps {
            if let How::Solve(e) = &s.how {
                add_cur(e);
            }
            s.checks.iter().for_each(&mut add_cur);
        }
        key.sort_unstable();
        Plan {
            pre,
            copied,
            early,
            steps,
            key,
        }
    }

    /// Whether the before-state passes the conjuncts that mention no
    /// after-state variable.
    pub fn enabled_pre(&self, cur: &[Value]) -> Result<bool> {
        for c in &self.pre {
            if !truth(c, cur, &[])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every after-state, in enumeration order. Assumes `enabled_pre`.
    pub fn successors(
        &self,
        cur: &[Value],
        domains: &[Arc<Vec<Value>>],
        types: &[crate::ir::GroundType],
    ) -> Result<Vec<Box<[Value]>>> {
        let mut next: Vec<Option<Value>> = vec![None; domains.len()];
        for &i in &self.copied {
            next[i] = Some(cur[i].clone());
        }
        for c in &self.early {
            if !truth(c, cur, &next)? {
                return Ok(Vec::new());
            }
        }
        let mut out = Vec::new();
        self.search(0, cur, &mut next, domains, types, &mut out)?;
        Ok(out)
    }

    fn search(
        &self,
        k: usize,
        cur: &[Value],
        next: &mut Vec<Option<Value>>,
        domains: &[Arc<Vec<Value>>],
        types: &[crate::ir::GroundType],
        out: &mut Vec<Box<[Value]>>,
    ) -> Result<()> {
        let Some(step) = self.steps.get(k) else {
            out.push(next.iter().map(|v| v.clone().expect("all slots set")).collect());
            return Ok(());
        };
        let try_value = |v: Value, next: &mut Vec<Option<Value>>, out: &mut Vec<Box<[Value]>>| {
            next[step.slot] = Some(v);
            for c in &step.checks {
                if !truth(c, cur, next)? {
                    return Ok(());
                }
            }
            self.search(k + 1, cur, next, domains, types, out)
        };
        match &step.how {
            How::Solve(e) => {
                if let Some(v) = value(e, cur, next)? {
                    if types[step.slot].contains(&v) {
                        try_value(v, next, out)?;
                    }
                }
            }
            How::Enumerate => {
                for v in domains[step.slot].iter() {
                    try_value(v.clone(), next, out)?;
                }
            }
        }
        next[step.slot] = None;
        Ok(())
    }
}

/// Which slots a command chooses afresh.
pub fn free_slots(
    layout: &Layout,
    assigns: &[String],
    inputs: Carry,
    outputs: Carry,
) -> Vec<bool> {
    layout
        .vars
        .iter()
        .map(|v| match v.kind {
            VarKind::Local => assigns.contains(&v.name),
            VarKind::Input => inputs == Carry::Fresh,
            VarKind::Output => outputs == Carry::Fresh,
        })
        .collect()
}

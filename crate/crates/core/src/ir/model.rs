use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use super::expr::{Expr, VarName};
use super::types::GroundType;
use crate::error::{Error, Result};

/// Name of the translator-introduced invariant definition.
pub const INVARIANT: &str = "invariant__";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Local,
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    pub ty: GroundType,
    /// Axiomatic constants: locals that no operation may change.
    pub constant: bool,
}

/// How a command treats the input/output part of the after-state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Carry {
    /// Chosen anew (subject to the guard).
    Fresh,
    /// Copied from the before-state.
    Held,
}

/// `label : guard --> assigns' IN {x : T | TRUE}`. Locals not listed in
/// `assigns` keep their values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardedCommand {
    pub label: String,
    pub guard: Expr,
    pub assigns: Vec<String>,
    pub inputs: Carry,
    pub outputs: Carry,
}

/// A finite guarded-command transition system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    pub name: String,
    /// Named type declarations, in emission order.
    pub types: Vec<(String, GroundType)>,
    pub vars: Vec<VarDecl>,
    pub definitions: Vec<(String, Expr)>,
    pub init: Expr,
    pub commands: Vec<GuardedCommand>,
    /// Catch-all branch framing the listed locals, when present.
    pub else_frame: Option<Vec<String>>,
}

/// Slot layout of a model's state vector: every declared variable except
/// defined ones, in declaration order.
#[derive(Clone, Debug)]
pub struct Layout {
    pub vars: Vec<VarDecl>,
    index: HashMap<String, usize>,
}

impl Layout {
    pub fn slot(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

impl FiniteModel {
    pub fn definition(&self, name: &str) -> Option<&Expr> {
        self.definitions
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
    }

    pub fn invariant(&self) -> Option<&Expr> {
        self.definition(INVARIANT)
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn layout(&self) -> Layout {
        let vars: Vec<VarDecl> = self
            .vars
            .iter()
            .filter(|v| self.definition(&v.name).is_none())
            .cloned()
            .collect();
        let index = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        Layout { vars, index }
    }

    pub fn command(&self, label: &str) -> Option<&GuardedCommand> {
        self.commands.iter().find(|c| c.label == label)
    }

    pub fn names_of(&self, kind: VarKind) -> Vec<String> {
        self.vars
            .iter()
            .filter(|v| v.kind == kind && self.definition(&v.name).is_none())
            .map(|v| v.name.clone())
            .collect()
    }

    /// Checks the structural invariants of the IR.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(format!("model {}: {m}", self.name)));
        let mut seen = BTreeSet::new();
        for v in &self.vars {
            if !seen.insert(v.name.as_str()) {
                return bad(format!("variable {} declared twice", v.name));
            }
        }
        let inv_defs = self
            .definitions
            .iter()
            .filter(|(n, _)| n == INVARIANT)
            .count();
        if inv_defs != 1 {
            return bad(format!("{inv_defs} definitions of {INVARIANT}"));
        }
        match self.var(INVARIANT) {
            Some(VarDecl {
                kind: VarKind::Local,
                ty: GroundType::Bool,
                ..
            }) => {}
            _ => return bad(format!("{INVARIANT} must be a boolean local")),
        }
        let mut labels = BTreeSet::new();
        for c in &self.commands {
            if !labels.insert(c.label.as_str()) {
                return bad(format!("duplicate command label {}", c.label));
            }
            for a in &c.assigns {
                match self.var(a) {
                    Some(v) if v.kind != VarKind::Input => {}
                    _ => return bad(format!("{} assigns unknown local {a}", c.label)),
                }
            }
        }
        let check = |e: &Expr, what: &str, allow_primed: bool| -> Result<()> {
            for v in e.free_vars() {
                if self.var(&v.name).is_none() {
                    return Err(Error::InvalidSpec(format!(
                        "model {}: {what} mentions undeclared {v}",
                        self.name
                    )));
                }
                if v.primed && !allow_primed {
                    return Err(Error::InvalidSpec(format!(
                        "model {}: {what} mentions primed {v}",
                        self.name
                    )));
                }
            }
            Ok(())
        };
        for (n, d) in &self.definitions {
            check(d, n, false)?;
        }
        check(&self.init, "init", true)?;
        for c in &self.commands {
            check(&c.guard, &c.label, true)?;
        }
        Ok(())
    }
}

/// Structured text dump, stable for diffing.
impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {}", self.name)?;
        for (n, t) in &self.types {
            writeln!(f, "  type {n} = {t}")?;
        }
        for v in &self.vars {
            let c = if v.constant { " const" } else { "" };
            writeln!(f, "  {:?}{c} {} : {}", v.kind, v.name, v.ty)?;
        }
        for (n, d) in &self.definitions {
            writeln!(f, "  def {n} = {d}")?;
        }
        writeln!(f, "  init {}", self.init)?;
        for c in &self.commands {
            writeln!(
                f,
                "  cmd {} [{}] in={:?} out={:?}: {}",
                c.label,
                c.assigns.join(", "),
                c.inputs,
                c.outputs,
                c.guard
            )?;
        }
        if let Some(fr) = &self.else_frame {
            writeln!(f, "  else frame [{}]", fr.join(", "))?;
        }
        Ok(())
    }
}

/// Convenience: `Var` of an unprimed name.
pub fn cur(name: &str) -> Expr {
    Expr::Var(VarName::cur(name))
}

/// Convenience: `Var` of a primed name.
pub fn next(name: &str) -> Expr {
    Expr::Var(VarName::next(name))
}

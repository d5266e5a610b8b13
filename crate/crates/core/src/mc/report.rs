//! Refinement checking over the three combined systems.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use super::ctl::{check_ctl, At, Evidence, TraceStep};
use super::explore::{explore, ExploreOptions};
use crate::error::Result;
use crate::ir::Value;
use crate::refine::{CombinedSystem, ConditionKind, RefinementProblem};
use crate::translate::Bounds;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Nothing to check: no concrete initial state, or no state pair
    /// related by the retrieve.
    Vacuous,
}

impl Verdict {
    /// Fail dominates Vacuous, which dominates Pass.
    pub fn combine(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Pass;
        for v in vs {
            match (out, v) {
                (_, Verdict::Fail) => out = Verdict::Fail,
                (Verdict::Pass, Verdict::Vacuous) => out = Verdict::Vacuous,
                _ => {}
            }
        }
        out
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Vacuous => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    /// Index of the violating initial state.
    pub state: u32,
    pub valuation: Vec<(String, String)>,
    pub evidence: Evidence,
    pub trace: Vec<TraceStep>,
    #[serde(skip)]
    pub values: Vec<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionKind,
    pub context: String,
    pub verdict: Verdict,
    pub obligation: String,
    pub states: usize,
    pub transitions: usize,
    pub initial_states: usize,
    pub depth_counts: Vec<usize>,
    /// Initial states at which the obligation was evaluated.
    pub checked: usize,
    pub explore_ms: f64,
    pub check_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    pub schema: u32,
    pub abstract_spec: String,
    pub concrete_spec: String,
    pub verdict: Verdict,
    pub conditions: Vec<ConditionReport>,
    pub bounds: Bounds,
    pub pairing: Vec<(String, String)>,
    pub total_ms: f64,
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub workers: usize,
    pub enum_cap: u128,
    pub max_states: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        let e = ExploreOptions::default();
        CheckOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            enum_cap: e.enum_cap,
            max_states: e.max_states,
        }
    }
}

impl CheckOptions {
    fn explore(&self) -> ExploreOptions {
        ExploreOptions {
            workers: self.workers,
            enum_cap: self.enum_cap,
            max_states: self.max_states,
        }
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Explores one combined system and evaluates its obligation at every
/// initial state.
pub fn check_condition(sys: &CombinedSystem, opts: &CheckOptions) -> Result<ConditionReport> {
    let t = Instant::now();
    let space = explore(&sys.model, &opts.explore())?;
    let explore_ms = ms(t);
    let t = Instant::now();
    let out = check_ctl(&space, &sys.model, &sys.obligation, At::Initial)?;
    let check_ms = ms(t);
    let verdict = if space.initial.is_empty() {
        Verdict::Vacuous
    } else if out.holds {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let counterexample = out.violation.map(|ev| Counterexample {
        state: ev.state,
        valuation: space.show(ev.state),
        trace: ev.trace(),
        values: space.state(ev.state).to_vec(),
        evidence: ev,
    });
    Ok(ConditionReport {
        condition: sys.kind,
        context: sys.kind.context().into(),
        verdict,
        obligation: sys.obligation.to_string(),
        states: space.len(),
        transitions: space.transition_count(),
        initial_states: space.initial.len(),
        depth_counts: space.depth_counts.clone(),
        checked: out.checked,
        explore_ms,
        check_ms,
        counterexample,
    })
}

pub fn check_refinement(p: &RefinementProblem, opts: &CheckOptions) -> Result<RefinementReport> {
    let t = Instant::now();
    let mut conditions = Vec::new();
    for kind in ConditionKind::ALL {
        conditions.push(check_condition(&p.build(kind)?, opts)?);
    }
    Ok(RefinementReport {
        schema: REPORT_SCHEMA,
        abstract_spec: p.abs.name.clone(),
        concrete_spec: p.conc.name.clone(),
        verdict: Verdict::combine(conditions.iter().map(|c| c.verdict)),
        conditions,
        bounds: p.bounds.clone(),
        pairing: p.pairing.clone(),
        total_ms: ms(t),
    })
}

impl RefinementReport {
    pub fn condition(&self, kind: ConditionKind) -> &ConditionReport {
        self.conditions
            .iter()
            .find(|c| c.condition == kind)
            .expect("all conditions are checked")
    }
}

fn write_evidence(f: &mut fmt::Formatter<'_>, ev: &Evidence, depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth + 2);
    if let Some(s) = &ev.step {
        writeln!(f, "{pad}--{}--> state {}", s.label, s.to)?;
    }
    writeln!(
        f,
        "{pad}{} at state {}: {}",
        if ev.holds { "holds" } else { "fails" },
        ev.state,
        ev.formula
    )?;
    for c in &ev.children {
        write_evidence(f, c, depth + 1)?;
    }
    Ok(())
}

impl fmt::Display for RefinementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} refined by {}", self.abstract_spec, self.concrete_spec)?;
        let pairs: Vec<String> = self.pairing.iter().map(|(a, c)| format!("{a}={c}")).collect();
        writeln!(f, "pairing: {}", pairs.join(", "))?;
        let sizes: Vec<String> = self
            .bounds
            .given_sizes
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(
            f,
            "bounds: NAT=0..{}, given sizes {}",
            self.bounds.nat_hi,
            sizes.join(" ")
        )?;
        for c in &self.conditions {
            writeln!(
                f,
                "{:<14} {:<8} {} states, {} transitions, {} initial ({:.1} ms)",
                c.condition.to_string(),
                c.verdict.to_string(),
                c.states,
                c.transitions,
                c.initial_states,
                c.explore_ms + c.check_ms
            )?;
            if let Some(cx) = &c.counterexample {
                writeln!(f, "  violated at state {}:", cx.state)?;
                for (n, v) in &cx.valuation {
                    writeln!(f, "    {n} = {v}")?;
                }
                for s in &cx.trace {
                    let ins: Vec<String> = s.inputs.iter().map(|(n, v)| format!("{n}={v}")).collect();
                    let ch: Vec<String> = s
                        .changes
                        .iter()
                        .map(|(n, a, b)| format!("{n}: {a} -> {b}"))
                        .collect();
                    writeln!(
                        f,
                        "  {} -> {} by {} [{}] {}",
                        s.from,
                        s.to,
                        s.label,
                        ins.join(", "),
                        ch.join("; ")
                    )?;
                }
                writeln!(f, "  explanation:")?;
                write_evidence(f, &cx.evidence, 0)?;
            }
        }
        write!(f, "verdict: {}", self.verdict)
    }
}

//! Explicit-state reachability.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use super::compile::{compile, domains, free_slots, truth, CExpr, Plan};
use crate::error::{Error, Result};
use crate::ir::{Expr, FiniteModel, GroundType, Layout, Valuation, Value, VarKind};

pub const ELSE_LABEL: &str = "ELSE";

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub workers: usize,
    /// Per-type enumeration ceiling.
    pub enum_cap: u128,
    /// Abort once this many states have been found.
    pub max_states: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            workers: 1,
            enum_cap: crate::ir::value::DEFAULT_ENUMERATION_CAP,
            max_states: 20_000_000,
        }
    }
}

struct Entry {
    vals: Vec<Box<[Value]>>,
    ids: OnceLock<Arc<[u32]>>,
}

/// Compiled successor generator for a model.
pub struct Successors {
    pub layout: Layout,
    /// Command labels; the ELSE branch, when present, comes last.
    pub labels: Vec<String>,
    types: Vec<GroundType>,
    domains: Vec<Arc<Vec<Value>>>,
    init: Plan,
    plans: Vec<Plan>,
    has_else: bool,
    cache: Vec<RwLock<HashMap<Box<[Value]>, Arc<Entry>>>>,
    invariant: Option<CExpr>,
}

impl Successors {
    pub fn new(model: &FiniteModel, enum_cap: u128) -> Result<Self> {
        model.validate()?;
        let layout = model.layout();
        let types: Vec<GroundType> = layout.vars.iter().map(|v| v.ty.clone()).collect();
        let domains = domains(&layout, enum_cap)?;
        let inline = |e: &Expr| compile(&Expr::and(vec![e.inline(&model.definitions)]), &layout);
        let all_free = vec![true; layout.len()];
        let init = Plan::new(&inline(&model.init.primed())?, &all_free);
        let mut plans = Vec::new();
        let mut labels = Vec::new();
        for c in &model.commands {
            let free = free_slots(&layout, &c.assigns, c.inputs, c.outputs);
            plans.push(Plan::new(&inline(&c.guard)?, &free));
            labels.push(c.label.clone());
        }
        let has_else = model.else_frame.is_some();
        if let Some(frame) = &model.else_frame {
            // Framed locals and constants are kept; inputs and outputs are free.
            let free: Vec<bool> = layout
                .vars
                .iter()
                .map(|v| match v.kind {
                    VarKind::Local => !v.constant && !frame.contains(&v.name),
                    _ => true,
                })
                .collect();
            plans.push(Plan::new(&Expr::Bool(true), &free));
            labels.push(ELSE_LABEL.into());
        }
        let invariant = match model.invariant() {
            Some(_) => Some(inline(&Expr::Var(crate::ir::VarName::cur(crate::ir::INVARIANT)))?),
            None => None,
        };
        let cache = plans.iter().map(|_| RwLock::new(HashMap::new())).collect();
        Ok(Successors {
            layout,
            labels,
            types,
            domains,
            init,
            plans,
            has_else,
            cache,
            invariant,
        })
    }

    /// Initial valuations, deduplicated, in enumeration order.
    pub fn initial(&self) -> Result<Vec<Box<[Value]>>> {
        if !self.init.enabled_pre(&[])? {
            return Ok(Vec::new());
        }
        let mut out = self.init.successors(&[], &self.domains, &self.types)?;
        let mut seen = std::collections::HashSet::new();
        out.retain(|v| seen.insert(v.clone()));
        Ok(out)
    }

    fn command_successors(&self, k: usize, cur: &[Value]) -> Result<Option<Arc<Entry>>> {
        let plan = &self.plans[k];
        if !plan.enabled_pre(cur)? {
            return Ok(None);
        }
        let key: Box<[Value]> = plan.key.iter().map(|&i| cur[i].clone()).collect();
        if let Some(e) = self.cache[k].read().unwrap().get(&key) {
            return Ok(Some(e.clone()));
        }
        let vals = plan.successors(cur, &self.domains, &self.types)?;
        let entry = Arc::new(Entry {
            vals,
            ids: OnceLock::new(),
        });
        let mut w = self.cache[k].write().unwrap();
        Ok(Some(w.entry(key).or_insert(entry).clone()))
    }

    fn all_successors(&self, cur: &[Value]) -> Result<Vec<(u16, Arc<Entry>)>> {
        let ncmd = self.plans.len() - usize::from(self.has_else);
        let mut out = Vec::new();
        for k in 0..ncmd {
            if let Some(e) = self.command_successors(k, cur)? {
                if !e.vals.is_empty() {
                    out.push((k as u16, e));
                }
            }
        }
        if out.is_empty() && self.has_else {
            if let Some(e) = self.command_successors(ncmd, cur)? {
                out.push((ncmd as u16, e));
            }
        }
        Ok(out)
    }

    /// After-states of a valuation, per command label (uncached lists are
    /// computed on demand).
    pub fn step(&self, cur: &[Value]) -> Result<Vec<(String, Vec<Box<[Value]>>)>> {
        Ok(self
            .all_successors(cur)?
            .into_iter()
            .map(|(k, e)| (self.labels[k as usize].clone(), e.vals.clone()))
            .collect())
    }

    pub fn is_else(&self, label: u16) -> bool {
        self.has_else && label as usize == self.plans.len() - 1
    }

    pub fn invariant_holds(&self, v: &[Value]) -> Result<bool> {
        match &self.invariant {
            Some(inv) => truth(inv, v, &[]),
            None => Ok(true),
        }
    }
}

/// The reachable part of a model's transition graph.
pub struct StateSpace {
    pub layout: Layout,
    pub labels: Vec<String>,
    pub states: Vec<Valuation>,
    pub initial: Vec<u32>,
    succ: Vec<Vec<(u16, Arc<[u32]>)>>,
    /// Newly discovered states per breadth-first level.
    pub depth_counts: Vec<usize>,
    pub gen: Arc<Successors>,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn successors(&self, s: u32) -> &[(u16, Arc<[u32]>)] {
        &self.succ[s as usize]
    }

    pub fn transition_count(&self) -> usize {
        self.succ.iter().flatten().map(|(_, t)| t.len()).sum()
    }

    pub fn state(&self, s: u32) -> &[Value] {
        self.states[s as usize].values()
    }

    /// Named, rendered values of a state.
    pub fn show(&self, s: u32) -> Vec<(String, String)> {
        show_values(&self.layout, self.state(s))
    }

    /// Checks that every state has a successor and that every non-ELSE
    /// transition connects invariant states. Returns the first offender.
    pub fn check_totality_and_soundness(&self) -> Result<Option<(u32, String)>> {
        for s in 0..self.len() as u32 {
            if self.succ[s as usize].is_empty() {
                return Ok(Some((s, "no successor".into())));
            }
            for (k, ts) in &self.succ[s as usize] {
                if self.gen.is_else(*k) {
                    continue;
                }
                if !self.gen.invariant_holds(self.state(s))? {
                    return Ok(Some((s, format!("{} fires outside the invariant", self.labels[*k as usize]))));
                }
                for &t in ts.iter() {
                    if !self.gen.invariant_holds(self.state(t))? {
                        return Ok(Some((
                            s,
                            format!("{} leads to state {t} outside the invariant", self.labels[*k as usize]),
                        )));
                    }
                }
            }
        }
        Ok(None)
    }
}

pub fn show_values(layout: &Layout, vals: &[Value]) -> Vec<(String, String)> {
    layout
        .vars
        .iter()
        .zip(vals)
        .map(|(v, x)| (v.name.clone(), v.ty.show(x)))
        .collect()
}

struct Interner {
    states: Vec<Valuation>,
    index: HashMap<Valuation, u32>,
    max: usize,
}

impl Interner {
    fn intern(&mut self, v: &[Value], fresh: &mut Vec<u32>) -> Result<u32> {
        let key = Valuation(v.into());
        if let Some(&i) = self.index.get(&key) {
            return Ok(i);
        }
        if self.states.len() >= self.max {
            return Err(Error::CapacityExceeded {
                what: "reachable state space".into(),
                size: self.states.len() as u128 + 1,
                cap: self.max as u128,
            });
        }
        let i = self.states.len() as u32;
        self.states.push(key.clone());
        self.index.insert(key, i);
        fresh.push(i);
        Ok(i)
    }
}

/// Breadth-first exploration from all initial states. Successor lists are
/// computed in parallel per level and merged in frontier order, so state
/// numbering does not depend on the worker count.
pub fn explore(model: &FiniteModel, opts: &ExploreOptions) -> Result<StateSpace> {
    let gen = Arc::new(Successors::new(model, opts.enum_cap)?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut it = Interner {
        states: Vec::new(),
        index: HashMap::new(),
        max: opts.max_states,
    };
    let mut frontier = Vec::new();
    for v in gen.initial()? {
        it.intern(&v, &mut frontier)?;
    }
    let initial = frontier.clone();
    let mut depth_counts = vec![frontier.len()];
    let mut succ: Vec<Vec<(u16, Arc<[u32]>)>> = Vec::new();
    while !frontier.is_empty() {
        let lists: Vec<Vec<(u16, Arc<Entry>)>> = if opts.workers <= 1 {
            frontier
                .iter()
                .map(|&s| gen.all_successors(it.states[s as usize].values()))
                .collect::<Result<_>>()?
        } else {
            let states = &it.states;
            pool.install(|| {
                frontier
                    .par_iter()
                    .map(|&s| gen.all_successors(states[s as usize].values()))
                    .collect::<Result<_>>()
            })?
        };
        let mut fresh = Vec::new();
        for (&s, list) in frontier.iter().zip(lists) {
            let mut out = Vec::with_capacity(list.len());
            for (k, e) in list {
                let ids = match e.ids.get() {
                    Some(ids) => ids.clone(),
                    None => {
                        let ids: Arc<[u32]> = e
                            .vals
                            .iter()
                            .map(|v| it.intern(v, &mut fresh))
                            .collect::<Result<Vec<_>>>()?
                            .into();
                        e.ids.get_or_init(|| ids).clone()
                    }
                };
                out.push((k, ids));
            }
            if succ.len() <= s as usize {
                succ.resize(s as usize + 1, Vec::new());
            }
            succ[s as usize] = out;
        }
        if !fresh.is_empty() {
            depth_counts.push(fresh.len());
        }
        frontier = fresh;
    }
    succ.resize(it.states.len(), Vec::new());
    Ok(StateSpace {
        layout: gen.layout.clone(),
        labels: gen.labels.clone(),
        states: it.states,
        initial,
        succ,
        depth_counts,
        gen,
    })
}

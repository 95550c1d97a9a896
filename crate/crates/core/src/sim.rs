//! Cycle-by-cycle symbolic simulation.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use thiserror::Error;

use crate::eval::{Assignment, FuncRegistry, Value};
use crate::rewrite::{replace_list, simplify_with, RewriteError, RuleClass, RuleSet, DEFAULT_MAX_ITERATIONS};
use crate::system::{Diagnostic, Role, SreSystem};
use crate::term::{Sort, Term, TermKind};

pub const DEFAULT_DELTA_CYCLE_LIMIT: usize = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Inputs are symbolic; controls are bound where given.
    #[default]
    Symbolic,
    /// Every input and control must be bound to a constant.
    Numerical,
    /// Bound names use their binding, the rest are symbolic.
    Mixed,
}

/// Named set of control (and optionally input) bindings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub bindings: Vec<(String, Term)>,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub steps: u32,
    pub mode: SimMode,
    pub controls: BTreeMap<String, Term>,
    pub inputs: BTreeMap<String, Term>,
    pub delta_cycle_limit: usize,
    pub max_iterations: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            steps: 1,
            mode: SimMode::Symbolic,
            controls: BTreeMap::new(),
            inputs: BTreeMap::new(),
            delta_cycle_limit: DEFAULT_DELTA_CYCLE_LIMIT,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl SimConfig {
    pub fn steps(steps: u32) -> Self {
        SimConfig { steps, ..Default::default() }
    }

    /// Applies a scenario, routing each binding to controls or inputs by role.
    pub fn with_scenario(&self, sys: &SreSystem, sc: &Scenario) -> SimConfig {
        let mut cfg = self.clone();
        for (k, v) in &sc.bindings {
            if sys.role(k) == Some(Role::Input) {
                cfg.inputs.insert(k.clone(), v.clone());
            } else {
                cfg.controls.insert(k.clone(), v.clone());
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("system is not well-formed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("numerical mode requires a constant binding for {0}")]
    MissingBinding(String),
    #[error("no value for {name} at time {time}")]
    MissingValue { name: String, time: i64 },
    #[error("delta-cycle limit {limit} reached at time {time} in {}", .vars.join(", "))]
    DeltaCycleLimit { time: i64, limit: usize, vars: Vec<String> },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

impl SimError {
    /// True for resource-limit failures rather than malformed input.
    pub fn is_limit(&self) -> bool {
        matches!(self, SimError::DeltaCycleLimit { .. } | SimError::Rewrite(RewriteError::NonTermination { .. }))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TraceMeta {
    pub cycles: u32,
    pub delta_cycles: u64,
    pub delta_cycles_per_cycle: Vec<u64>,
    pub wall_time_ms: f64,
    pub node_count: usize,
    pub peak_memory_bytes: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub time: i64,
    pub values: BTreeMap<String, Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub system: String,
    /// Time of the last initial cycle; simulation produces `t0 + 1 ..= t0 + K`.
    pub t0: i64,
    pub frames: Vec<Frame>,
    pub bindings: BTreeMap<String, Term>,
    pub meta: TraceMeta,
}

impl Trace {
    pub fn frame(&self, time: i64) -> Option<&Frame> {
        let first = self.frames.first()?.time;
        self.frames.get(usize::try_from(time - first).ok()?)
    }

    pub fn value(&self, name: &str, time: i64) -> Option<&Term> {
        self.frame(time)?.values.get(name)
    }

    pub fn last(&self) -> Option<&Frame> {
        self.frames.last()
    }

    pub fn end_time(&self) -> i64 {
        self.frames.last().map_or(self.t0, |f| f.time)
    }
}

/// Symbolic stand-in for an unbound input or control. Words become tuples
/// of element symbols `NAME_0`, `NAME_1`, ...
pub fn symbolic_value(name: &str, sort: &Sort) -> Term {
    match sort {
        Sort::Bool => Term::bsym(name),
        Sort::Num => Term::sym(name),
        Sort::Tuple(elem, n) => Term::tuple((0..*n).map(|i| symbolic_value(&format!("{name}_{i}"), elem)).collect()),
    }
}

/// Name of the element symbol produced by [`symbolic_value`].
pub fn element_symbol(name: &str, index: usize) -> String {
    format!("{name}_{index}")
}

/// Constant input bindings from a witness over the symbols produced by
/// [`symbolic_value`]. Symbols the witness leaves open default to
/// `False` or `0`.
pub fn concretize_inputs(sys: &SreSystem, witness: &Assignment) -> BTreeMap<String, Term> {
    fn build(name: &str, sort: &Sort, w: &Assignment) -> Term {
        match sort {
            Sort::Bool => w.get(name).map_or(Term::ff(), Value::to_term),
            Sort::Num => w.get(name).map_or(Term::int(0), Value::to_term),
            Sort::Tuple(elem, n) => Term::tuple((0..*n).map(|i| build(&element_symbol(name, i), elem, w)).collect()),
        }
    }
    let (sorts, _) = sys.sorts();
    sys.inputs
        .iter()
        .map(|d| {
            let sort = sorts.get(&d.name).cloned().unwrap_or(Sort::Num);
            (d.name.clone(), build(&d.name, &sort, witness))
        })
        .collect()
}

pub fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

pub struct Simulator<'a> {
    sys: &'a SreSystem,
    cfg: SimConfig,
    simp: RuleSet,
    order: Vec<Vec<String>>,
    cyclic: Vec<bool>,
    depth: u64,
    trace: Trace,
}

impl<'a> Simulator<'a> {
    pub fn new(sys: &'a SreSystem, cfg: &SimConfig) -> Result<Self, SimError> {
        let diags = sys.validate();
        if !diags.is_empty() {
            return Err(SimError::Invalid(diags));
        }
        let (sorts, _) = sys.sorts();
        let mut bindings = BTreeMap::new();
        for (decls, given, is_input) in [(&sys.inputs, &cfg.inputs, true), (&sys.controls, &cfg.controls, false)] {
            for d in decls {
                let sort = sorts.get(&d.name).cloned().unwrap_or(Sort::Num);
                let bound = given.get(&d.name).filter(|_| !(is_input && cfg.mode == SimMode::Symbolic));
                let v = match (cfg.mode, bound) {
                    (SimMode::Numerical, Some(v)) if v.is_ground() => v.clone(),
                    (SimMode::Numerical, _) => return Err(SimError::MissingBinding(d.name.clone())),
                    (_, Some(v)) => v.clone(),
                    (_, None) => symbolic_value(&d.name, &sort),
                };
                bindings.insert(d.name.clone(), v);
            }
        }

        let (order, cyclic, depth) = evaluation_order(sys);
        let reg = FuncRegistry::standard();
        let first = -(sys.max_delay() as i64) + 1;
        let mut frames = Vec::new();
        for time in first.min(0)..=0 {
            let mut values = bindings.clone();
            for i in sys.initial.iter().filter(|i| i.time == time) {
                values.insert(i.name.clone(), i.value.clone());
            }
            frames.push(Frame { time, values });
        }
        let trace = Trace { system: sys.name.clone(), t0: 0, frames, bindings, meta: TraceMeta::default() };
        Ok(Simulator { sys, cfg: cfg.clone(), simp: RuleSet::simplifier(&reg), order, cyclic, depth, trace })
    }

    fn trace_rules(&self, time: i64) -> Result<RuleSet, SimError> {
        let mut subst = Vec::new();
        let mut seen = BTreeSet::new();
        for eq in &self.sys.equations {
            for (name, d) in eq.body.var_refs() {
                if !seen.insert((name.clone(), d)) {
                    continue;
                }
                let value = match self.sys.role(&name) {
                    Some(Role::Input | Role::Control) => self.trace.bindings.get(&name).cloned(),
                    _ if d == 0 => continue,
                    _ => {
                        let at = time - d as i64;
                        Some(self.trace.value(&name, at).cloned().ok_or(SimError::MissingValue { name: name.clone(), time: at })?)
                    }
                };
                if let Some(v) = value {
                    subst.push((Term::var(name, d), v));
                }
            }
        }
        Ok(RuleSet::substitutions(RuleClass::Trace, subst))
    }

    fn resolve(&self, body: &Term, current: &BTreeMap<String, Term>) -> Result<Term, SimError> {
        let t = body.transform(&mut |t| match t.kind() {
            TermKind::Var { name, offset: 0 } => current.get(name).cloned(),
            _ => None,
        });
        Ok(simplify_with(&t, &self.simp, self.cfg.max_iterations)?)
    }

    /// Computes the frame for `time` from the earlier frames.
    pub fn step(&mut self, time: i64) -> Result<(), SimError> {
        let rules = self.trace_rules(time)?;
        let bodies: BTreeMap<&str, Term> =
            self.sys.equations.iter().map(|e| (e.target.as_str(), replace_list(&e.body, &rules))).collect();
        let mut current: BTreeMap<String, Term> = BTreeMap::new();
        // A naive sweep needs one pass per level of the same-cycle
        // dependency order, plus the extra passes of any loop.
        let mut deltas = self.depth;
        for (scc, &cyclic) in self.order.iter().zip(&self.cyclic) {
            if !cyclic {
                let v = self.resolve(&bodies[scc[0].as_str()], &current)?;
                current.insert(scc[0].clone(), v);
                continue;
            }
            for v in scc {
                let prev = self.trace.value(v, time - 1).cloned().unwrap_or_else(Term::ff);
                current.insert(v.clone(), prev);
            }
            let mut stable = false;
            for pass in 0..self.cfg.delta_cycle_limit {
                if pass > 0 {
                    deltas += 1;
                }
                let mut changed = false;
                for v in scc {
                    let nv = self.resolve(&bodies[v.as_str()], &current)?;
                    if current.get(v) != Some(&nv) {
                        changed = true;
                        current.insert(v.clone(), nv);
                    }
                }
                if !changed {
                    stable = true;
                    break;
                }
            }
            if !stable {
                return Err(SimError::DeltaCycleLimit { time, limit: self.cfg.delta_cycle_limit, vars: scc.clone() });
            }
        }
        let mut values = self.trace.bindings.clone();
        values.extend(current);
        self.trace.frames.push(Frame { time, values });
        self.trace.meta.delta_cycles += deltas;
        self.trace.meta.delta_cycles_per_cycle.push(deltas);
        self.trace.meta.cycles += 1;
        Ok(())
    }

    pub fn run(mut self) -> Result<Trace, SimError> {
        let start = Instant::now();
        for time in 1..=self.cfg.steps as i64 {
            self.step(time)?;
        }
        let meta = &mut self.trace.meta;
        meta.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        meta.node_count = self.trace.frames.last().map_or(0, |f| {
            self.sys.vars.iter().filter_map(|d| f.values.get(&d.name)).map(Term::node_count).sum()
        });
        meta.peak_memory_bytes = peak_memory_bytes();
        Ok(self.trace)
    }
}

/// Strongly connected components of the same-cycle dependency graph in
/// dependency order, a flag marking components that form a loop, and the
/// number of levels in that order.
fn evaluation_order(sys: &SreSystem) -> (Vec<Vec<String>>, Vec<bool>, u64) {
    let deps = sys.zero_delay_deps();
    let mut g = DiGraph::<String, ()>::new();
    let idx: BTreeMap<&str, _> = deps.keys().map(|k| (k.as_str(), g.add_node(k.clone()))).collect();
    for (target, ds) in &deps {
        for d in ds {
            if let Some(&from) = idx.get(d.as_str()) {
                g.add_edge(from, idx[target.as_str()], ());
            }
        }
    }
    // tarjan_scc yields components in reverse topological order.
    let mut sccs = tarjan_scc(&g);
    sccs.reverse();
    let mut order = Vec::new();
    let mut cyclic = Vec::new();
    let mut level: BTreeMap<String, u64> = BTreeMap::new();
    for scc in sccs {
        let names: Vec<String> = scc.iter().map(|&n| g[n].clone()).collect();
        let looped = names.len() > 1 || deps[&names[0]].contains(&names[0]);
        let lv = 1 + names
            .iter()
            .flat_map(|n| &deps[n])
            .filter(|d| !names.contains(d))
            .filter_map(|d| level.get(d))
            .max()
            .copied()
            .unwrap_or(0);
        for n in &names {
            level.insert(n.clone(), lv);
        }
        order.push(names);
        cyclic.push(looped);
    }
    let depth = level.values().max().copied().unwrap_or(0);
    (order, cyclic, depth)
}

pub fn simulate(sys: &SreSystem, cfg: &SimConfig) -> Result<Trace, SimError> {
    Simulator::new(sys, cfg)?.run()
}

/// One simulation per scenario, in order. Failures are kept per scenario.
pub fn run_multi_control(sys: &SreSystem, base: &SimConfig, scenarios: &[Scenario]) -> Vec<(String, Result<Trace, SimError>)> {
    scenarios.iter().map(|sc| (sc.name.clone(), simulate(sys, &base.with_scenario(sys, sc)))).collect()
}

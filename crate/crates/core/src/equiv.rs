//! Bounded equivalence of a specification and an implementation system.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::eval::Assignment;
use crate::matcher::{equiv_terms, EquivOptions, Verdict};
use crate::report::PhaseTiming;
use crate::rewrite::abst::abstraction_rules;
use crate::rewrite::{replace_repeated, RuleSet, DEFAULT_MAX_ITERATIONS};
use crate::sim::{concretize_inputs, simulate, Scenario, SimConfig, SimError, SimMode, Trace, TraceMeta};
use crate::system::SreSystem;
use crate::term::{Term, TermKind};

/// Location of a model inside a job file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelRef {
    pub path: String,
    pub system: String,
}

/// A job as written in a job file, before its models are loaded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobDecl {
    pub name: String,
    pub spec: ModelRef,
    pub imp: ModelRef,
    pub k_spec: u32,
    pub k_imp: u32,
    /// `(impl signal, spec signal)`.
    pub correspondence: Vec<(String, String)>,
    pub compare: Vec<String>,
    pub scenarios: Vec<String>,
    /// Catalogued bug to inject before checking, and the side it goes on.
    pub bug: Option<(String, Side)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Spec,
    Impl,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Spec => "spec",
            Side::Impl => "impl",
        }
    }
}

impl JobDecl {
    pub fn new(name: impl Into<String>) -> Self {
        JobDecl {
            name: name.into(),
            spec: ModelRef::default(),
            imp: ModelRef::default(),
            k_spec: 1,
            k_imp: 1,
            correspondence: Vec::new(),
            compare: Vec::new(),
            scenarios: Vec::new(),
            bug: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquivJob {
    pub name: String,
    pub spec: SreSystem,
    pub imp: SreSystem,
    pub k_spec: u32,
    pub k_imp: u32,
    /// `(impl signal, spec signal)`.
    pub correspondence: Vec<(String, String)>,
    pub scenarios: Vec<Scenario>,
    /// Spec variables to compare; empty means the spec outputs.
    pub compare: Vec<String>,
    pub sim: SimConfig,
    pub options: EquivOptions,
}

impl EquivJob {
    pub fn new(spec: SreSystem, imp: SreSystem) -> Self {
        EquivJob {
            name: format!("{} vs {}", spec.name, imp.name),
            spec,
            imp,
            k_spec: 1,
            k_imp: 1,
            correspondence: Vec::new(),
            scenarios: vec![Scenario::default()],
            compare: Vec::new(),
            sim: SimConfig::default(),
            options: EquivOptions::default(),
        }
    }

    fn compare_vars(&self) -> Vec<String> {
        if self.compare.is_empty() {
            self.spec.outputs.clone()
        } else {
            self.compare.clone()
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EquivError {
    #[error("k values must be at least 1")]
    ZeroSteps,
    #[error("spec variable {0} has no implementation counterpart after abstraction")]
    CorrespondenceGap(String),
    #[error("{side} simulation failed: {source}")]
    Simulation { side: &'static str, source: SimError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Status {
    Equivalent,
    Unknown,
    NotEquivalent,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VarOutcome {
    pub var: String,
    pub status: Status,
    /// Non-equivalent symbols, `var` or `var[i]` for word elements.
    pub symbols: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip)]
    pub witness_values: Option<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub scenario: String,
    pub status: Status,
    pub vars: Vec<VarOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The error was a delta-cycle or rewrite iteration limit.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub limit_reached: bool,
    pub spec_meta: TraceMeta,
    pub impl_meta: TraceMeta,
    pub timing: PhaseTiming,
}

impl ScenarioOutcome {
    pub fn symbols(&self) -> impl Iterator<Item = &String> {
        self.vars.iter().flat_map(|v| &v.symbols)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivVerdict {
    pub job: String,
    pub overall: Status,
    pub scenarios: Vec<ScenarioOutcome>,
    pub wall_time_ms: f64,
}

impl EquivVerdict {
    /// Scenarios in which at least one compared variable differs.
    pub fn failing_scenarios(&self) -> Vec<String> {
        self.scenarios.iter().filter(|s| s.status == Status::NotEquivalent).map(|s| s.scenario.clone()).collect()
    }

    pub fn limit_reached(&self) -> bool {
        self.scenarios.iter().any(|s| s.limit_reached)
    }

    pub fn non_equivalent_symbols(&self) -> BTreeSet<String> {
        self.scenarios.iter().flat_map(|s| s.symbols().cloned()).collect()
    }
}

fn witness_strings(w: &Assignment) -> BTreeMap<String, String> {
    w.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
}

fn compare_values(var: &str, spec: &Term, imp: &Term, opts: &EquivOptions) -> VarOutcome {
    let mut out =
        VarOutcome { var: var.into(), status: Status::Equivalent, symbols: Vec::new(), witness: None, detail: None, witness_values: None };
    let record = |name: String, v: Verdict, out: &mut VarOutcome| match v {
        Verdict::Equal => {}
        Verdict::NotEqual { witness, lhs, rhs } => {
            out.status = Status::NotEquivalent;
            if out.witness.is_none() {
                out.witness = Some(witness_strings(&witness));
                out.detail = Some(format!("{name}: spec {lhs}, impl {rhs}"));
                out.witness_values = Some(witness);
            }
            out.symbols.push(name);
        }
        Verdict::Unknown(m) => {
            out.status = out.status.max(Status::Unknown);
            out.detail.get_or_insert(format!("{name}: {m}"));
            out.symbols.push(name);
        }
    };
    match (spec.kind(), imp.kind()) {
        (TermKind::Tuple(xs), TermKind::Tuple(ys)) if xs.len() == ys.len() => {
            for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                record(format!("{var}[{i}]"), equiv_terms(x, y, opts), &mut out);
            }
        }
        _ => record(var.to_string(), equiv_terms(spec, imp, opts), &mut out),
    }
    out
}

/// Renames implementation signals to their spec names and removes
/// representation conversions from the values.
pub fn abstract_frame(values: &BTreeMap<String, Term>, abst: &RuleSet, correspondence: &[(String, String)]) -> BTreeMap<String, Term> {
    let rename: BTreeMap<&str, &str> = correspondence.iter().map(|(i, s)| (i.as_str(), s.as_str())).collect();
    values
        .iter()
        .map(|(k, v)| {
            let key = rename.get(k.as_str()).map_or(k.clone(), |s| s.to_string());
            let val = replace_repeated(v, abst, DEFAULT_MAX_ITERATIONS).unwrap_or_else(|_| v.clone());
            (key, val)
        })
        .collect()
}

pub(crate) fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn run_scenario(job: &EquivJob, sc: &Scenario, abst: &RuleSet) -> ScenarioOutcome {
    let mut outcome = ScenarioOutcome {
        scenario: sc.name.clone(),
        status: Status::Error,
        vars: Vec::new(),
        error: None,
        limit_reached: false,
        spec_meta: TraceMeta::default(),
        impl_meta: TraceMeta::default(),
        timing: PhaseTiming::default(),
    };
    let clock = Instant::now();
    let traces = (|| -> Result<(Trace, Trace), EquivError> {
        let mut cs = job.sim.with_scenario(&job.spec, sc);
        cs.steps = job.k_spec;
        let mut ci = job.sim.with_scenario(&job.imp, sc);
        ci.steps = job.k_imp;
        let ts = simulate(&job.spec, &cs).map_err(|source| EquivError::Simulation { side: "spec", source })?;
        let ti = simulate(&job.imp, &ci).map_err(|source| EquivError::Simulation { side: "impl", source })?;
        Ok((ts, ti))
    })();
    let (ts, ti) = match traces {
        Ok(t) => t,
        Err(e) => {
            outcome.limit_reached = matches!(&e, EquivError::Simulation { source, .. } if source.is_limit());
            outcome.error = Some(e.to_string());
            return outcome;
        }
    };
    outcome.spec_meta = ts.meta.clone();
    outcome.impl_meta = ti.meta.clone();
    outcome.timing.simulate_ms = ms_since(clock);
    let clock = Instant::now();
    let spec_frame = &ts.frame(ts.t0 + job.k_spec as i64).expect("spec frame").values;
    let impl_frame = abstract_frame(&ti.frame(ti.t0 + job.k_imp as i64).expect("impl frame").values, abst, &job.correspondence);
    outcome.timing.abstract_ms = ms_since(clock);
    let clock = Instant::now();
    let mut status = Status::Equivalent;
    for var in job.compare_vars() {
        let (Some(s), Some(i)) = (spec_frame.get(&var), impl_frame.get(&var)) else {
            outcome.error = Some(EquivError::CorrespondenceGap(var).to_string());
            outcome.status = Status::Error;
            return outcome;
        };
        let v = compare_values(&var, s, i, &job.options);
        status = status.max(v.status);
        outcome.vars.push(v);
    }
    outcome.timing.match_ms = ms_since(clock);
    outcome.status = status;
    outcome
}

/// Simulates both systems per scenario, abstracts the implementation trace
/// and compares the selected variables at `t0 + k`.
pub fn check_equivalence(job: &EquivJob) -> Result<EquivVerdict, EquivError> {
    if job.k_spec == 0 || job.k_imp == 0 {
        return Err(EquivError::ZeroSteps);
    }
    let start = Instant::now();
    let abst = abstraction_rules(&job.correspondence);
    let scenarios: Vec<ScenarioOutcome> = job.scenarios.par_iter().map(|sc| run_scenario(job, sc, &abst)).collect();
    Ok(verdict(job, scenarios, start))
}

fn verdict(job: &EquivJob, scenarios: Vec<ScenarioOutcome>, start: Instant) -> EquivVerdict {
    let overall = scenarios.iter().map(|s| s.status).max().unwrap_or(Status::Equivalent);
    EquivVerdict { job: job.name.clone(), overall, scenarios, wall_time_ms: start.elapsed().as_secs_f64() * 1e3 }
}

/// Re-runs both systems numerically on the witness of a non-equivalent
/// variable and reports whether the two values still differ.
pub fn replay_mismatch(job: &EquivJob, scenario: &str, var: &VarOutcome) -> Result<bool, EquivError> {
    let Some(witness) = &var.witness_values else {
        return Ok(false);
    };
    let sc = job.scenarios.iter().find(|s| s.name == scenario).cloned().unwrap_or_default();
    let run = |sys: &SreSystem, k: u32, side: &'static str| {
        let mut cfg = job.sim.with_scenario(sys, &sc);
        cfg.steps = k;
        cfg.mode = SimMode::Numerical;
        cfg.inputs = concretize_inputs(sys, witness);
        simulate(sys, &cfg).map_err(|source| EquivError::Simulation { side, source })
    };
    let ts = run(&job.spec, job.k_spec, "spec")?;
    let ti = run(&job.imp, job.k_imp, "impl")?;
    let abst = abstraction_rules(&job.correspondence);
    let spec = ts.value(&var.var, ts.t0 + job.k_spec as i64).cloned();
    let imp = abstract_frame(&ti.frame(ti.t0 + job.k_imp as i64).expect("impl frame").values, &abst, &job.correspondence).remove(&var.var);
    match (spec, imp) {
        (Some(s), Some(i)) => Ok(s != i),
        _ => Err(EquivError::CorrespondenceGap(var.var.clone())),
    }
}

/// Block part of a `block.signal` name.
pub fn block_of(signal: &str) -> &str {
    let base = signal.split('[').next().unwrap_or(signal);
    base.split('.').next().unwrap_or(base)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuspicionGroup {
    pub blocks: Vec<String>,
    pub modes: Vec<String>,
    pub symbols: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnosis {
    /// Groups covering every mismatched symbol, smallest first.
    pub groups: Vec<SuspicionGroup>,
    /// Mismatched blocks with no mismatched block upstream of them.
    pub root_blocks: Vec<String>,
    pub modes: Vec<String>,
    pub low_confidence: bool,
}

/// Block-level upstream relation of `sys`, derived from its equations.
pub fn block_upstream(sys: &SreSystem) -> BTreeMap<String, BTreeSet<String>> {
    let mut direct: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for eq in &sys.equations {
        let b = block_of(&eq.target).to_string();
        let entry = direct.entry(b.clone()).or_default();
        for (n, _) in eq.body.var_refs() {
            let nb = block_of(&n).to_string();
            if nb != b {
                entry.insert(nb);
            }
        }
    }
    let mut closure = direct.clone();
    loop {
        let mut changed = false;
        let keys: Vec<String> = closure.keys().cloned().collect();
        for k in keys {
            let ups: Vec<String> = closure[&k].iter().cloned().collect();
            for u in ups {
                let more: Vec<String> = direct.get(&u).map(|s| s.iter().cloned().collect()).unwrap_or_default();
                let set = closure.get_mut(&k).unwrap();
                for m in more {
                    changed |= set.insert(m);
                }
            }
        }
        if !changed {
            return closure;
        }
    }
}

/// Groups mismatched symbols by block and by the set of scenarios in which
/// they differ.
pub fn localize(verdict: &EquivVerdict, spec: &SreSystem) -> Diagnosis {
    let mut per_block: BTreeMap<String, (BTreeSet<String>, BTreeSet<String>)> = BTreeMap::new();
    let mut compared: BTreeSet<String> = BTreeSet::new();
    for sc in &verdict.scenarios {
        for v in &sc.vars {
            compared.insert(block_of(&v.var).to_string());
            if v.status == Status::Equivalent {
                continue;
            }
            let e = per_block.entry(block_of(&v.var).to_string()).or_default();
            e.0.insert(sc.scenario.clone());
            e.1.extend(v.symbols.iter().cloned());
        }
    }
    let up = block_upstream(spec);
    let root_blocks: Vec<String> = per_block
        .keys()
        .filter(|b| !up.get(*b).is_some_and(|ups| ups.iter().any(|u| per_block.contains_key(u))))
        .cloned()
        .collect();
    let mut by_modes: BTreeMap<Vec<String>, SuspicionGroup> = BTreeMap::new();
    for (block, (modes, syms)) in &per_block {
        let key: Vec<String> = modes.iter().cloned().collect();
        let g = by_modes.entry(key.clone()).or_insert(SuspicionGroup { blocks: Vec::new(), modes: key, symbols: Vec::new() });
        g.blocks.push(block.clone());
        g.symbols.extend(syms.iter().cloned());
    }
    let mut groups: Vec<SuspicionGroup> = by_modes.into_values().collect();
    groups.sort_by_key(|g| (g.blocks.len() * g.modes.len(), g.blocks.clone()));
    let modes: BTreeSet<String> = per_block.values().flat_map(|(m, _)| m.iter().cloned()).collect();
    let low_confidence = !per_block.is_empty() && compared.len() > 1 && per_block.len() == compared.len();
    let root_blocks = if low_confidence { vec!["all".to_string()] } else { root_blocks };
    Diagnosis { groups, root_blocks, modes: modes.into_iter().collect(), low_confidence }
}

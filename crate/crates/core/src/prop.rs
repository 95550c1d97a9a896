//! Bounded-horizon properties over implementation traces.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::equiv::{abstract_frame, ms_since};
use crate::report::PhaseTiming;
use crate::eval::{eval, Assignment, FuncRegistry};
use crate::matcher::{equiv_terms, EquivOptions, Verdict};
use crate::rewrite::abst::abstraction_rules;
use crate::rewrite::{simplify, RewriteError, RuleSet};
use crate::sim::{concretize_inputs, simulate, Scenario, SimConfig, SimError, SimMode, Trace, TraceMeta};
use crate::system::SreSystem;
use crate::term::{Term, TermKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Global,
    Local,
    Control,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Global => "global",
            Category::Local => "local",
            Category::Control => "control",
        })
    }
}

/// `forall var in lo..hi`, both bounds inclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quantifier {
    pub var: String,
    pub lo: Term,
    pub hi: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub guard: Option<Term>,
    pub quantifiers: Vec<Quantifier>,
    pub body: Term,
}

/// A conjunction of clauses checked at cycle `t0 + horizon`. Inside a
/// clause `X(n)` is the value of `X` at that cycle and `X(n-d)` the value
/// `d` cycles earlier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub category: Category,
    pub horizon: u32,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PropError {
    #[error("property {property}: unresolved variable {var}")]
    Unresolved { property: String, var: String },
    #[error("property {property}: bound {bound} of {var} is not an integer")]
    Bound { property: String, var: String, bound: String },
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

impl PropError {
    pub fn is_limit(&self) -> bool {
        match self {
            PropError::Simulation(e) => e.is_limit(),
            PropError::Rewrite(RewriteError::NonTermination { .. }) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PropStatus {
    Holds,
    NotProven,
    Fails,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignalValue {
    /// `signal`, `signal[i]`, optionally suffixed with `@n-d`.
    pub signal: String,
    pub symbolic: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub property: String,
    pub scenario: String,
    pub clause: usize,
    /// Quantifier variable values of the failing instance.
    pub index: BTreeMap<String, i64>,
    /// Input symbol values under which the instance is false.
    pub witness: BTreeMap<String, String>,
    pub signals: Vec<SignalValue>,
    #[serde(skip)]
    pub witness_values: Assignment,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropScenarioResult {
    pub scenario: String,
    pub status: PropStatus,
    pub instances: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub limit_reached: bool,
    pub meta: TraceMeta,
    pub timing: PhaseTiming,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropVerdict {
    pub property: String,
    pub model: String,
    pub holds: bool,
    pub status: PropStatus,
    pub scenarios: Vec<PropScenarioResult>,
    pub wall_time_ms: f64,
    pub peak_memory_bytes: Option<u64>,
}

impl PropVerdict {
    pub fn limit_reached(&self) -> bool {
        self.scenarios.iter().any(|s| s.limit_reached)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        self.scenarios.iter().find_map(|s| s.counterexample.as_ref())
    }
}

#[derive(Clone, Debug)]
pub struct PropJob<'a> {
    pub imp: &'a SreSystem,
    /// `(impl signal, spec signal)`; property names refer to spec signals.
    pub correspondence: Vec<(String, String)>,
    pub scenarios: Vec<Scenario>,
    pub sim: SimConfig,
    /// Overrides the property horizon when set.
    pub k_imp: Option<u32>,
    pub options: EquivOptions,
}

impl<'a> PropJob<'a> {
    pub fn new(imp: &'a SreSystem, scenarios: Vec<Scenario>) -> Self {
        PropJob { imp, correspondence: Vec::new(), scenarios, sim: SimConfig::default(), k_imp: None, options: EquivOptions::default() }
    }
}

/// Abstracted trace values by `(name, time)`.
struct View {
    frames: BTreeMap<i64, BTreeMap<String, Term>>,
    at: i64,
}

impl View {
    fn new(trace: &Trace, abst: &RuleSet, corr: &[(String, String)], at: i64) -> Self {
        let frames = trace.frames.iter().map(|f| (f.time, abstract_frame(&f.values, abst, corr))).collect();
        View { frames, at }
    }

    fn get(&self, name: &str, d: u32) -> Option<&Term> {
        self.frames.get(&(self.at - d as i64))?.get(name)
    }

    fn substitute(&self, t: &Term, property: &str) -> Result<Term, PropError> {
        let mut missing = None;
        let out = t.transform(&mut |x| match x.kind() {
            TermKind::Var { name, offset } => match self.get(name, *offset) {
                Some(v) => Some(v.clone()),
                None => {
                    missing.get_or_insert(name.clone());
                    None
                }
            },
            _ => None,
        });
        match missing {
            Some(var) => Err(PropError::Unresolved { property: property.into(), var }),
            None => Ok(out),
        }
    }
}

fn bind_index(t: &Term, var: &str, v: i64) -> Term {
    t.transform(&mut |x| match x.kind() {
        TermKind::Sym { name, .. } if name == var => Some(Term::int(v)),
        _ => None,
    })
}

/// Index assignment, body and guard of one clause instance.
type Instance = (BTreeMap<String, i64>, Term, Option<Term>);

/// Expands the quantifiers of `clause` into concrete index assignments.
fn expand(
    clause: &Clause,
    view: &View,
    property: &str,
) -> Result<Vec<Instance>, PropError> {
    let mut acc: Vec<Instance> = vec![(BTreeMap::new(), clause.body.clone(), clause.guard.clone())];
    for q in &clause.quantifiers {
        let mut next = Vec::new();
        for (idx, body, guard) in acc {
            let bound = |b: &Term| -> Result<i64, PropError> {
                let mut b = b.clone();
                for (k, v) in &idx {
                    b = bind_index(&b, k, *v);
                }
                let s = simplify(&view.substitute(&b, property)?)?;
                s.as_num()
                    .filter(|r| r.is_integer())
                    .and_then(|r| num_traits::ToPrimitive::to_i64(&r.to_integer()))
                    .ok_or_else(|| PropError::Bound { property: property.into(), var: q.var.clone(), bound: s.to_string() })
            };
            let (lo, hi) = (bound(&q.lo)?, bound(&q.hi)?);
            for i in lo..=hi {
                let mut idx2 = idx.clone();
                idx2.insert(q.var.clone(), i);
                next.push((idx2, bind_index(&body, &q.var, i), guard.as_ref().map(|g| bind_index(g, &q.var, i))));
            }
        }
        acc = next;
    }
    Ok(acc)
}

fn signals_of(body: &Term, view: &View, witness: &Assignment) -> Vec<SignalValue> {
    let reg = FuncRegistry::standard();
    let mut out: Vec<SignalValue> = Vec::new();
    let mut push = |label: String, term: Option<Term>| {
        if out.iter().any(|s| s.signal == label) {
            return;
        }
        let Some(term) = term else { return };
        let value = eval(&term, witness, &reg).ok().map(|v| v.to_string());
        out.push(SignalValue { signal: label, symbolic: term.to_string(), value });
    };
    let label = |name: &str, d: u32| if d == 0 { name.to_string() } else { format!("{name}@n-{d}") };
    fn visit(t: &Term, f: &mut dyn FnMut(&Term) -> bool) {
        if f(t) {
            for c in t.children() {
                visit(c, f);
            }
        }
    }
    visit(body, &mut |t| match t.kind() {
        TermKind::Index(w, i) => {
            if let TermKind::Var { name, offset } = w.kind() {
                if let Some(k) = simplify(i).ok().and_then(|s| s.as_index()) {
                    let term = view.get(name, *offset).map(|v| simplify(&Term::index(v.clone(), k)).unwrap_or_else(|_| Term::index(v.clone(), k)));
                    push(format!("{}[{k}]", label(name, *offset)), term);
                    return false;
                }
            }
            true
        }
        TermKind::Var { name, offset } => {
            push(label(name, *offset), view.get(name, *offset).cloned());
            false
        }
        _ => true,
    });
    out
}

fn check_scenario(job: &PropJob, prop: &Property, sc: &Scenario, abst: &RuleSet) -> PropScenarioResult {
    let mut res = PropScenarioResult {
        scenario: sc.name.clone(),
        status: PropStatus::Error,
        instances: 0,
        counterexample: None,
        residual: None,
        error: None,
        limit_reached: false,
        meta: TraceMeta::default(),
        timing: PhaseTiming::default(),
    };
    let k = job.k_imp.unwrap_or(prop.horizon);
    let mut cfg = job.sim.with_scenario(job.imp, sc);
    cfg.steps = k;
    let total = Instant::now();
    let outcome = (|| -> Result<(), PropError> {
        let clock = Instant::now();
        let trace = simulate(job.imp, &cfg)?;
        res.meta = trace.meta.clone();
        res.timing.simulate_ms = ms_since(clock);
        let clock = Instant::now();
        let view = View::new(&trace, abst, &job.correspondence, trace.t0 + k as i64);
        res.timing.abstract_ms = ms_since(clock);
        let mut status = PropStatus::Holds;
        for (ci, clause) in prop.clauses.iter().enumerate() {
            for (idx, body, guard) in expand(clause, &view, &prop.name)? {
                res.instances += 1;
                let g = match &guard {
                    Some(g) => simplify(&view.substitute(g, &prop.name)?)?,
                    None => Term::tt(),
                };
                if g.as_bool() == Some(false) {
                    continue;
                }
                let b = view.substitute(&body, &prop.name)?;
                let inst = if g.as_bool() == Some(true) { b } else { Term::or(vec![Term::not(g), b]) };
                let inst = simplify(&inst)?;
                let verdict = match inst.as_bool() {
                    Some(true) => Verdict::Equal,
                    _ => equiv_terms(&inst, &Term::tt(), &job.options),
                };
                match verdict {
                    Verdict::Equal => {}
                    Verdict::NotEqual { witness, .. } => {
                        res.counterexample = Some(Counterexample {
                            property: prop.name.clone(),
                            scenario: sc.name.clone(),
                            clause: ci,
                            index: idx,
                            witness: witness.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
                            signals: signals_of(&body, &view, &witness),
                            witness_values: witness,
                        });
                        res.status = PropStatus::Fails;
                        return Ok(());
                    }
                    Verdict::Unknown(_) => {
                        status = PropStatus::NotProven;
                        res.residual.get_or_insert(inst.to_string());
                    }
                }
            }
        }
        res.status = status;
        Ok(())
    })();
    res.timing.match_ms = (ms_since(total) - res.timing.simulate_ms - res.timing.abstract_ms).max(0.0);
    if let Err(e) = outcome {
        res.limit_reached = e.is_limit();
        res.status = PropStatus::Error;
        res.error = Some(e.to_string());
    }
    res
}

/// Checks `prop` on the implementation in every scenario. The first failing
/// instance of each scenario becomes its counterexample.
pub fn check_property(job: &PropJob, prop: &Property) -> PropVerdict {
    let start = Instant::now();
    let abst = abstraction_rules(&job.correspondence);
    let scenarios: Vec<PropScenarioResult> = job.scenarios.iter().map(|sc| check_scenario(job, prop, sc, &abst)).collect();
    let status = scenarios.iter().map(|s| s.status).max().unwrap_or(PropStatus::Holds);
    PropVerdict {
        property: prop.name.clone(),
        model: job.imp.name.clone(),
        holds: status == PropStatus::Holds,
        status,
        scenarios,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        peak_memory_bytes: crate::sim::peak_memory_bytes(),
    }
}

/// Re-runs a counterexample numerically and reports whether the failing
/// clause instance evaluates to false.
pub fn replay(job: &PropJob, prop: &Property, cex: &Counterexample) -> Result<bool, PropError> {
    let sc = job.scenarios.iter().find(|s| s.name == cex.scenario).cloned().unwrap_or_default();
    let k = job.k_imp.unwrap_or(prop.horizon);
    let mut cfg = job.sim.with_scenario(job.imp, &sc);
    cfg.steps = k;
    cfg.mode = SimMode::Numerical;
    cfg.inputs = concretize_inputs(job.imp, &cex.witness_values);
    let trace = simulate(job.imp, &cfg)?;
    let view = View::new(&trace, &abstraction_rules(&job.correspondence), &job.correspondence, trace.t0 + k as i64);
    let clause = &prop.clauses[cex.clause];
    let mut body = clause.body.clone();
    let mut guard = clause.guard.clone();
    for (k, v) in &cex.index {
        body = bind_index(&body, k, *v);
        guard = guard.map(|g| bind_index(&g, k, *v));
    }
    let reg = FuncRegistry::standard();
    let none = Assignment::new();
    let g = match guard {
        Some(g) => eval(&view.substitute(&g, &prop.name)?, &none, &reg).ok().and_then(|v| v.as_bool()).unwrap_or(false),
        None => true,
    };
    let b = eval(&view.substitute(&body, &prop.name)?, &none, &reg).ok().and_then(|v| v.as_bool());
    Ok(g && b == Some(false))
}

#[derive(Clone, Debug)]
pub struct SuiteModel<'a> {
    pub name: String,
    pub system: &'a SreSystem,
    pub correspondence: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteCell {
    pub model: String,
    pub property: String,
    pub scenario_set: String,
    pub result: bool,
    pub verdict: PropVerdict,
}

/// Model × property × scenario-set matrix. Cells run in parallel; the
/// result order is the nested input order.
pub fn property_suite(
    models: &[SuiteModel],
    props: &[Property],
    scenario_sets: &[(String, Vec<Scenario>)],
    sim: &SimConfig,
) -> Vec<SuiteCell> {
    let mut cells = Vec::new();
    for m in models {
        for p in props {
            for s in scenario_sets {
                cells.push((m, p, s));
            }
        }
    }
    cells
        .par_iter()
        .map(|(m, p, (set, scs))| {
            let job = PropJob {
                imp: m.system,
                correspondence: m.correspondence.clone(),
                scenarios: scs.clone(),
                sim: sim.clone(),
                k_imp: None,
                options: EquivOptions::default(),
            };
            let verdict = check_property(&job, p);
            SuiteCell { model: m.name.clone(), property: p.name.clone(), scenario_set: set.clone(), result: verdict.holds, verdict }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_system, parse_unit, Item};

    fn prop(src: &str) -> Property {
        match parse_unit(src).unwrap().module.items.remove(0) {
            Item::Property(p) => p,
            other => panic!("{other:?}"),
        }
    }

    fn sys() -> SreSystem {
        parse_system("system s { inputs D: [bool; 4]; vars X, Y; outputs Y; eq X(n) = [not(D(n)[0]), D(n)[1], D(n)[2], D(n)[3]]; eq Y(n) = X(n); }").unwrap()
    }

    #[test]
    fn trivial_property_holds() {
        let s = sys();
        let v = check_property(&PropJob::new(&s, vec![Scenario::default()]), &prop("property p global { horizon 1; Y(n) = Y(n); }"));
        assert!(v.holds, "{v:?}");
    }

    #[test]
    fn quantified_property_fails_at_first_bad_index() {
        let s = sys();
        let p = prop("property p local { horizon 1; forall i in 0..3: X(n)[i] = D(n)[i]; }");
        let job = PropJob::new(&s, vec![Scenario { name: "m".into(), bindings: vec![] }]);
        let v = check_property(&job, &p);
        assert_eq!(v.status, PropStatus::Fails);
        let cex = v.counterexample().unwrap();
        assert_eq!(cex.index["i"], 0);
        assert_eq!(cex.signals[0].signal, "X[0]");
        assert!(replay(&job, &p, cex).unwrap());
    }

    #[test]
    fn guard_skips_instances() {
        let s = sys();
        let p = prop("property p local { horizon 1; forall i in 0..3: when i > 0: X(n)[i] = D(n)[i]; }");
        assert!(check_property(&PropJob::new(&s, vec![Scenario::default()]), &p).holds);
    }

    #[test]
    fn unresolved_variable_is_an_error() {
        let s = sys();
        let v = check_property(&PropJob::new(&s, vec![Scenario::default()]), &prop("property p global { horizon 1; Z(n) = 1; }"));
        assert_eq!(v.status, PropStatus::Error);
        assert!(v.scenarios[0].error.as_deref().unwrap().contains("unresolved variable Z"));
    }
}

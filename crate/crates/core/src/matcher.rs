//! Pattern checks and equality verdicts over simulation results.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::eval::{eval, Assignment, FuncRegistry, Value};
use crate::pattern::{match_pattern, Bindings};
use crate::rewrite::simplify;
use crate::sim::Trace;
use crate::term::{ScalarSort, Term, TermKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    /// Child-index path from the root.
    pub path: Vec<usize>,
    pub expected: Term,
    pub actual: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchOutcome {
    pub matched: bool,
    pub bindings: Bindings,
    pub mismatches: Vec<Mismatch>,
}

fn same_head(a: &Term, b: &Term) -> bool {
    use TermKind::*;
    match (a.kind(), b.kind()) {
        (Arith(x, xs), Arith(y, ys)) => x == y && xs.len() == ys.len(),
        (Logic(x, xs), Logic(y, ys)) => x == y && xs.len() == ys.len(),
        (Cmp(x, ..), Cmp(y, ..)) => x == y,
        (If(..), If(..)) | (Index(..), Index(..)) => true,
        (App(f, xs), App(g, ys)) => f == g && xs.len() == ys.len(),
        (Tuple(xs), Tuple(ys)) => xs.len() == ys.len(),
        _ => a == b,
    }
}

fn diff(pattern: &Term, expr: &Term, path: &mut Vec<usize>, out: &mut Vec<Mismatch>) {
    if matches!(pattern.kind(), TermKind::Hole(_)) {
        return;
    }
    if !same_head(pattern, expr) || pattern.children().is_empty() {
        if pattern != expr {
            out.push(Mismatch { path: path.clone(), expected: pattern.clone(), actual: expr.clone() });
        }
        return;
    }
    for (i, (p, e)) in pattern.children().into_iter().zip(expr.children()).enumerate() {
        path.push(i);
        diff(p, e, path, out);
        path.pop();
    }
}

/// Matches `expr` against `pattern` after canonicalising both. On failure
/// the deepest structurally differing subterms are reported.
pub fn match_q(expr: &Term, pattern: &Term) -> MatchOutcome {
    let e = expr.canonicalize();
    let p = pattern.canonicalize();
    let mut bindings = Bindings::new();
    if match_pattern(&p, &e, &mut bindings) {
        return MatchOutcome { matched: true, bindings, mismatches: Vec::new() };
    }
    let mut mismatches = Vec::new();
    diff(&p, &e, &mut Vec::new(), &mut mismatches);
    if mismatches.is_empty() {
        mismatches.push(Mismatch { path: Vec::new(), expected: p, actual: e });
    }
    MatchOutcome { matched: false, bindings: Bindings::new(), mismatches }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    /// A witness assignment and both sides' values under it.
    NotEqual { witness: Assignment, lhs: Value, rhs: Value },
    Unknown(String),
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivOptions {
    /// Largest number of boolean symbols decided by full enumeration.
    pub exhaustive_limit: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions { exhaustive_limit: 16, samples: 64, seed: 0x5eed }
    }
}

fn has_uninterpreted(t: &Term, reg: &FuncRegistry) -> Option<String> {
    let mut found = None;
    t.walk(&mut |x| {
        if let TermKind::App(f, _) = x.kind() {
            if !reg.contains(f) && found.is_none() {
                found = Some(f.clone());
            }
        }
    });
    found
}

fn evaluate_pair(a: &Term, b: &Term, env: &Assignment, reg: &FuncRegistry) -> Option<(Value, Value)> {
    let va = eval(a, env, reg).ok()?;
    let vb = eval(b, env, reg).ok()?;
    Some((va, vb))
}

/// Decides `a = b` for all assignments of the free symbols where possible.
pub fn equiv_terms(a: &Term, b: &Term, opts: &EquivOptions) -> Verdict {
    if a == b {
        return Verdict::Equal;
    }
    if let (TermKind::Tuple(xs), TermKind::Tuple(ys)) = (a.kind(), b.kind()) {
        if xs.len() != ys.len() {
            return Verdict::Unknown(format!("tuple lengths differ: {} vs {}", xs.len(), ys.len()));
        }
        let mut unknown = None;
        for (x, y) in xs.iter().zip(ys) {
            match equiv_terms(x, y, opts) {
                Verdict::Equal => {}
                v @ Verdict::NotEqual { .. } => return v,
                Verdict::Unknown(m) => unknown = unknown.or(Some(m)),
            }
        }
        return unknown.map_or(Verdict::Equal, Verdict::Unknown);
    }
    let (sa, sb) = match (simplify(a), simplify(b)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return Verdict::Unknown(e.to_string()),
    };
    if sa == sb {
        return Verdict::Equal;
    }
    if matches!(sa.kind(), TermKind::Tuple(_)) && matches!(sb.kind(), TermKind::Tuple(_)) {
        return equiv_terms(&sa, &sb, opts);
    }
    if sa.has_var_refs() || sb.has_var_refs() || sa.has_holes() || sb.has_holes() {
        return Verdict::Unknown("terms contain variable references or holes".into());
    }
    let reg = FuncRegistry::standard();
    if let Some(f) = has_uninterpreted(&sa, &reg).or_else(|| has_uninterpreted(&sb, &reg)) {
        return Verdict::Unknown(format!("uninterpreted function {f}"));
    }
    let mut syms: BTreeMap<String, ScalarSort> = sa.syms().into_iter().collect();
    syms.extend(sb.syms());
    let all_bool = syms.values().all(|s| *s == ScalarSort::Bool);
    if all_bool && syms.len() <= opts.exhaustive_limit {
        let names: Vec<&String> = syms.keys().collect();
        for bits in 0u64..(1u64 << names.len()) {
            let env: Assignment =
                names.iter().enumerate().map(|(i, n)| ((*n).clone(), Value::Bool(bits >> i & 1 == 1))).collect();
            match evaluate_pair(&sa, &sb, &env, &reg) {
                Some((x, y)) if x != y => return Verdict::NotEqual { witness: env, lhs: x, rhs: y },
                Some(_) => {}
                None => return Verdict::Unknown("evaluation failed".into()),
            }
        }
        return Verdict::Equal;
    }
    let mut rng = StdRng::seed_from_u64(opts.seed);
    for _ in 0..opts.samples {
        let env: Assignment = syms
            .iter()
            .map(|(n, s)| {
                let v = match s {
                    ScalarSort::Bool => Value::Bool(rng.gen()),
                    ScalarSort::Num => Value::int(rng.gen_range(-16..=16)),
                };
                (n.clone(), v)
            })
            .collect();
        if let Some((x, y)) = evaluate_pair(&sa, &sb, &env, &reg) {
            if x != y {
                return Verdict::NotEqual { witness: env, lhs: x, rhs: y };
            }
        }
    }
    Verdict::Unknown(format!("no difference found in {} samples", opts.samples))
}

/// Expected content of one trace cell. Patterns with holes are matched;
/// other terms are compared with [`equiv_terms`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub var: String,
    pub time: i64,
    pub expected: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Matched(Bindings),
    Equal,
    Failed { mismatches: Vec<Mismatch>, witness: Option<Assignment> },
    Unknown(String),
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub var: String,
    pub time: i64,
    pub outcome: CheckOutcome,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, CheckOutcome::Matched(_) | CheckOutcome::Equal)
    }
}

pub fn verify_expected(trace: &Trace, checks: &[Expectation]) -> Vec<CheckResult> {
    checks
        .iter()
        .map(|c| {
            let outcome = match trace.value(&c.var, c.time) {
                None => CheckOutcome::Missing,
                Some(actual) if c.expected.has_holes() => {
                    let m = match_q(actual, &c.expected);
                    if m.matched {
                        CheckOutcome::Matched(m.bindings)
                    } else {
                        CheckOutcome::Failed { mismatches: m.mismatches, witness: None }
                    }
                }
                Some(actual) => match equiv_terms(actual, &c.expected, &EquivOptions::default()) {
                    Verdict::Equal => CheckOutcome::Equal,
                    Verdict::NotEqual { witness, .. } => {
                        let mut mismatches = Vec::new();
                        diff(&c.expected, actual, &mut Vec::new(), &mut mismatches);
                        CheckOutcome::Failed { mismatches, witness: Some(witness) }
                    }
                    Verdict::Unknown(m) => CheckOutcome::Unknown(m),
                },
            };
            CheckResult { var: c.var.clone(), time: c.time, outcome }
        })
        .collect()
}

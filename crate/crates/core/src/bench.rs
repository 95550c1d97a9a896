//! Benchmarks: symbolic cost against the number of control modes, and one
//! mixed symbolic run against exhaustive numerical simulation.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::eval::{eval, Assignment, FuncRegistry, Value};
use crate::sim::{concretize_inputs, element_symbol, run_multi_control, simulate, SimConfig, SimError, SimMode, Trace};
use crate::system::SreSystem;
use crate::term::{Sort, Term};
use crate::wimax::modes::{self, Mode};

pub const DEFAULT_REPEAT: usize = 5;

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Least-squares line through `(x, y)` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len().min(ys.len()) as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - (slope * x + intercept)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit { slope, intercept, r_squared }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub modes: usize,
    pub median_ms: f64,
    pub samples_ms: Vec<f64>,
    pub node_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeScaling {
    pub model: String,
    pub points: Vec<ScalingPoint>,
    pub fit: LinearFit,
}

/// Symbolic simulation of the first `m` modes, one after another, for each
/// `m` in `mode_counts`; each point is the median of `repeat` runs.
pub fn mode_scaling(sys: &SreSystem, mode_counts: &[usize], repeat: usize, sim: &SimConfig) -> Result<ModeScaling, SimError> {
    let mut points = Vec::new();
    for &m in mode_counts {
        let scenarios: Vec<_> = modes::multiple().into_iter().take(m).collect();
        let mut samples = Vec::new();
        let mut node_count = 0;
        for _ in 0..repeat.max(1) {
            let t = Instant::now();
            let runs = run_multi_control(sys, sim, &scenarios);
            samples.push(t.elapsed().as_secs_f64() * 1e3);
            node_count = 0;
            for (_, r) in runs {
                node_count += r?.meta.node_count;
            }
        }
        points.push(ScalingPoint { modes: m, median_ms: median(&samples), samples_ms: samples, node_count });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.modes as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median_ms).collect();
    Ok(ModeScaling { model: sys.name.clone(), fit: linear_fit(&xs, &ys), points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolicVsNumeric {
    pub model: String,
    pub mode: String,
    pub symbolic_bits: usize,
    pub vectors: usize,
    pub symbolic_ms: f64,
    pub substitution_ms: f64,
    pub numeric_ms: f64,
    /// Vectors whose substituted symbolic trace equals the numerical trace.
    pub matching_vectors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mismatch: Option<String>,
}

impl SymbolicVsNumeric {
    pub fn all_match(&self) -> bool {
        self.matching_vectors == self.vectors
    }

    pub fn symbolic_total_ms(&self) -> f64 {
        self.symbolic_ms + self.substitution_ms
    }
}

/// Input symbols left open by [`mixed_inputs`]: the first `bits` elements
/// of the first tuple-of-bool input.
fn open_bits(sys: &SreSystem, bits: usize) -> Option<(String, usize)> {
    let (sorts, _) = sys.sorts();
    sys.inputs.iter().find_map(|d| match sorts.get(&d.name) {
        Some(Sort::Tuple(e, n)) if **e == Sort::Bool => Some((d.name.clone(), bits.min(*n))),
        _ => None,
    })
}

fn mixed_inputs(sys: &SreSystem, name: &str, bits: usize) -> BTreeMap<String, Term> {
    let mut inputs = concretize_inputs(sys, &Assignment::new());
    if let Some(Sort::Tuple(_, n)) = sys.sorts().0.get(name) {
        let elems = (0..*n).map(|i| if i < bits { Term::bsym(element_symbol(name, i)) } else { Term::ff() }).collect();
        inputs.insert(name.to_string(), Term::tuple(elems));
    }
    inputs
}

fn vector(name: &str, bits: usize, k: usize) -> Assignment {
    (0..bits).map(|i| (element_symbol(name, i), Value::Bool(k >> i & 1 == 1))).collect()
}

fn substitute(trace: &Trace, w: &Assignment, reg: &FuncRegistry) -> Vec<BTreeMap<String, Option<Value>>> {
    trace.frames.iter().map(|f| f.values.iter().map(|(k, v)| (k.clone(), eval(v, w, reg).ok())).collect()).collect()
}

fn numeric_values(trace: &Trace) -> Vec<BTreeMap<String, Option<Value>>> {
    trace.frames.iter().map(|f| f.values.iter().map(|(k, v)| (k.clone(), Value::from_term(v))).collect()).collect()
}

/// One mixed-mode run with `bits` open data bits, evaluated at all `2^bits`
/// vectors, against one numerical run per vector. Runs are sequential so
/// that the two wall times are comparable.
pub fn symbolic_vs_numeric(sys: &SreSystem, mode: &Mode, bits: usize, sim: &SimConfig) -> Result<SymbolicVsNumeric, SimError> {
    let Some((name, bits)) = open_bits(sys, bits) else {
        return Err(SimError::MissingBinding("tuple-of-bool input".into()));
    };
    let sc = mode.scenario();
    let reg = FuncRegistry::standard();
    let vectors = 1usize << bits;

    let t = Instant::now();
    let mut cfg = sim.with_scenario(sys, &sc);
    cfg.mode = SimMode::Mixed;
    cfg.inputs = mixed_inputs(sys, &name, bits);
    let sym = simulate(sys, &cfg)?;
    let symbolic_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let substituted: Vec<_> = (0..vectors).map(|k| substitute(&sym, &vector(&name, bits, k), &reg)).collect();
    let substitution_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let mut numeric = Vec::with_capacity(vectors);
    for k in 0..vectors {
        let mut cfg = sim.with_scenario(sys, &sc);
        cfg.mode = SimMode::Numerical;
        cfg.inputs = concretize_inputs(sys, &vector(&name, bits, k));
        numeric.push(simulate(sys, &cfg)?);
    }
    let numeric_ms = t.elapsed().as_secs_f64() * 1e3;

    let mut matching = 0;
    let mut first_mismatch = None;
    for (k, (s, n)) in substituted.iter().zip(&numeric).enumerate() {
        let n = numeric_values(n);
        if *s == n && s.iter().all(|f| f.values().all(Option::is_some)) {
            matching += 1;
        } else if first_mismatch.is_none() {
            let (frame, var) = s
                .iter()
                .zip(&n)
                .enumerate()
                .find_map(|(i, (a, b))| a.iter().find(|(k, v)| b.get(*k) != Some(v)).map(|(k, _)| (i, k.clone())))
                .unwrap_or((0, String::new()));
            first_mismatch = Some(format!("vector {k}: {var} differs in frame {frame}"));
        }
    }
    Ok(SymbolicVsNumeric {
        model: sys.name.clone(),
        mode: mode.name(),
        symbolic_bits: bits,
        vectors,
        symbolic_ms,
        substitution_ms,
        numeric_ms,
        matching_vectors: matching,
        first_mismatch,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchResult {
    pub width: usize,
    pub repeat: usize,
    pub scaling: Vec<ModeScaling>,
    pub symbolic_vs_numeric: Vec<SymbolicVsNumeric>,
}

/// Runs both benchmarks on each model, one model at a time so that
/// measurements do not compete for cores.
pub fn run_bench(models: &[SreSystem], mode_counts: &[usize], repeat: usize, sym_bits: usize, width: usize, sim: &SimConfig) -> Result<BenchResult, SimError> {
    let mut scaling = Vec::new();
    let mut svn = Vec::new();
    for m in models {
        scaling.push(mode_scaling(m, mode_counts, repeat, sim)?);
        svn.push(symbolic_vs_numeric(m, &modes::MODES[0], sym_bits, sim)?);
    }
    Ok(BenchResult { width, repeat, scaling, symbolic_vs_numeric: svn })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }

    #[test]
    fn exact_line_has_unit_r_squared() {
        let f = linear_fit(&[1.0, 3.0, 5.0, 7.0], &[5.0, 11.0, 17.0, 23.0]);
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_points_have_low_r_squared() {
        let f = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[1.0, -1.0, -1.0, 1.0]);
        assert!(f.r_squared < 0.1);
    }
}

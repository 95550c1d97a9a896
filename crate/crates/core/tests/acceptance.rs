//! Acceptance checks. Runs as a plain binary so that each criterion prints
//! exactly one PASS/FAIL line; the process fails if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sresim::bench::{mode_scaling, symbolic_vs_numeric};
use sresim::dsl::{parse_module, print_module, Library, Parser};
use sresim::equiv::{check_equivalence, localize, replay_mismatch, EquivJob, EquivVerdict, Status};
use sresim::eval::{eval, Assignment, FuncRegistry, Value};
use sresim::prop::{property_suite, replay, PropJob, SuiteCell, SuiteModel};
use sresim::rewrite::{replace_list, replace_repeated, RewriteError, RuleSet, DEFAULT_MAX_ITERATIONS};
use sresim::session::resolve_job;
use sresim::sim::{simulate, SimConfig, SimMode};
use sresim::term::{Rational, ScalarSort, Term};
use sresim::wimax::blocks::{conv_encode, rand_ref, transmit};
use sresim::wimax::bundle::bundled_files;
use sresim::wimax::props::properties;
use sresim::wimax::{build_model, correspondence, inject, modes, Bug, Level, MODES};

const SEED: u64 = 0x00AC_CE97;
const WIDTH: usize = 8;

const REWRITE_CORPUS: usize = 1000;
const REWRITE_MAX_DEPTH: usize = 5;
const RATIONAL_POINTS: usize = 20;
const REWRITE_BUDGET: Duration = Duration::from_secs(60);
const EQUIV_JOB_BUDGET: Duration = Duration::from_secs(120);
const SUITE_BUDGET: Duration = Duration::from_secs(600);
const NUMERIC_VECTORS: usize = 100;
const SYMBOLIC_BITS: usize = 8;
const SCALING_MODES: [usize; 4] = [1, 3, 5, 7];
const SCALING_REPEAT: usize = 5;
const MIN_R_SQUARED: f64 = 0.9;
const RANDOM_UNITS: usize = 500;

type Outcome = Result<String, String>;

fn rewrite_rules() -> RuleSet {
    RuleSet::logic().union(&RuleSet::ite()).union(&RuleSet::math(&FuncRegistry::standard()))
}

fn corpus() -> Vec<Term> {
    let mut rng = StdRng::seed_from_u64(SEED);
    (0..REWRITE_CORPUS)
        .map(|i| {
            let sort = if i % 2 == 0 { ScalarSort::Bool } else { ScalarSort::Num };
            let depth = rng.gen_range(1..=REWRITE_MAX_DEPTH);
            common::random_scalar(&mut rng, sort, depth)
        })
        .collect()
}

fn random_point(rng: &mut StdRng) -> Vec<Value> {
    common::NUM_SYMS
        .iter()
        .map(|_| Value::Num(Rational::new(rng.gen_range(-40i64..=40).into(), rng.gen_range(1i64..=9).into())))
        .collect()
}

fn criterion_1(corpus: &[Term], rewritten: &[Result<Term, RewriteError>], rewrite_time: Duration) -> Outcome {
    let start = Instant::now();
    let reg = FuncRegistry::standard();
    let mut rng = StdRng::seed_from_u64(SEED ^ 1);
    let (mut checks, mut violations) = (0usize, Vec::new());
    for (t, r) in corpus.iter().zip(rewritten) {
        let Ok(r) = r else {
            violations.push(format!("{t}: no fixpoint"));
            continue;
        };
        let points: Vec<Vec<Value>> = (0..RATIONAL_POINTS).map(|_| random_point(&mut rng)).collect();
        for bits in 0..1u32 << common::BOOL_SYMS.len() {
            for p in &points {
                let mut env = Assignment::new();
                for (i, b) in common::BOOL_SYMS.iter().enumerate() {
                    env.insert(b.to_string(), Value::Bool(bits >> i & 1 == 1));
                }
                for (x, v) in common::NUM_SYMS.iter().zip(p) {
                    env.insert(x.to_string(), v.clone());
                }
                let Ok(before) = eval(t, &env, &reg) else { continue };
                checks += 1;
                let after = eval(r, &env, &reg);
                if after.as_ref() != Ok(&before) {
                    violations.push(format!("{t} => {r}: {before} vs {after:?}"));
                    break;
                }
            }
        }
    }
    let took = start.elapsed() + rewrite_time;
    if !violations.is_empty() {
        return Err(format!("{} violations, first: {}", violations.len(), violations[0]));
    }
    if took > REWRITE_BUDGET {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{} terms, {checks} evaluations, 0 violations, {took:.1?}", corpus.len()))
}

fn criterion_2(rewritten: &[Result<Term, RewriteError>]) -> Outcome {
    let rules = rewrite_rules();
    let mut bad = 0;
    let mut first = None;
    for r in rewritten {
        match r {
            Ok(t) if replace_list(t, &rules) == *t => {}
            Ok(t) => {
                bad += 1;
                first.get_or_insert(format!("not a fixpoint: {t}"));
            }
            Err(e) => {
                bad += 1;
                first.get_or_insert(e.to_string());
            }
        }
    }
    match first {
        None => Ok(format!("{} results stable under one more pass, no non-termination", rewritten.len())),
        Some(f) => Err(format!("{bad} failures, first: {f}")),
    }
}

fn equiv_jobs() -> Result<Vec<(String, EquivJob, EquivVerdict, Duration)>, String> {
    let lib = Library::load(common::models_dir().join("jobs.sre")).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for name in lib.jobs.keys() {
        let job = resolve_job(&lib, name, &SimConfig::default()).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let v = check_equivalence(&job).map_err(|e| e.to_string())?;
        out.push((name.clone(), job, v, t.elapsed()));
    }
    Ok(out)
}

fn criterion_3(jobs: &Result<Vec<(String, EquivJob, EquivVerdict, Duration)>, String>) -> Outcome {
    let jobs = jobs.as_ref().map_err(Clone::clone)?;
    let expect_bug_modes: BTreeSet<String> = ["mode_0", "mode_1", "mode_2"].iter().map(|s| s.to_string()).collect();
    let mut problems = Vec::new();
    for (name, job, v, took) in jobs {
        let buggy = name.contains("_b1_");
        if *took > EQUIV_JOB_BUDGET {
            problems.push(format!("{name} took {took:?}"));
        }
        if !buggy {
            if v.overall != Status::Equivalent {
                problems.push(format!("{name}: {:?}", v.overall));
            }
            continue;
        }
        if v.overall != Status::NotEquivalent {
            problems.push(format!("{name}: {:?}", v.overall));
            continue;
        }
        let d = localize(v, &job.spec);
        let expected: BTreeSet<String> =
            job.scenarios.iter().map(|s| s.name.clone()).filter(|s| expect_bug_modes.contains(s)).collect();
        let found: BTreeSet<String> = d.modes.iter().cloned().collect();
        if found != expected {
            problems.push(format!("{name}: localized modes {found:?}, expected {expected:?}"));
        }
        if !d.root_blocks.iter().any(|b| b == "punct") {
            problems.push(format!("{name}: root blocks {:?}", d.root_blocks));
        }
    }
    let slowest = jobs.iter().map(|j| j.3).max().unwrap_or_default();
    if problems.is_empty() {
        Ok(format!("{} jobs as expected, B1 localized to punct in modes 0-2, slowest {slowest:.1?}", jobs.len()))
    } else {
        Err(problems.join("; "))
    }
}

struct Suite {
    cells: Vec<(Option<Bug>, SuiteCell)>,
    took: Duration,
}

fn run_suite() -> Suite {
    let start = Instant::now();
    let props = properties(WIDTH);
    let sets = vec![("single".to_string(), modes::single()), ("multiple".to_string(), modes::multiple())];
    let mut cells = Vec::new();
    for bug in [None, Some(Bug::B2), Some(Bug::B3), Some(Bug::B4)] {
        let systems: Vec<_> = Level::ALL
            .iter()
            .map(|&l| {
                let m = build_model(l, WIDTH).expect("model");
                (l, bug.map_or(m.clone(), |b| inject(&m, l, b).expect("bug applies").0))
            })
            .collect();
        let models: Vec<SuiteModel> =
            systems.iter().map(|(l, s)| SuiteModel { name: l.to_string(), system: s, correspondence: correspondence(*l) }).collect();
        cells.extend(property_suite(&models, &props, &sets, &SimConfig::default()).into_iter().map(|c| (bug, c)));
    }
    Suite { cells, took: start.elapsed() }
}

fn target_property(bug: Bug) -> (&'static str, &'static str) {
    match bug {
        Bug::B2 => ("P1", "cc.out"),
        Bug::B3 => ("P2", "rand.out"),
        Bug::B4 => ("P3", "punct.out"),
        Bug::B1 => ("", ""),
    }
}

fn criterion_4(suite: &Suite) -> Outcome {
    let mut problems = Vec::new();
    let mut checked = 0;
    for (bug, c) in &suite.cells {
        let tag = format!("{}/{}/{}/{}", bug.map_or("original".to_string(), |b| b.to_string()), c.model, c.property, c.scenario_set);
        match bug {
            None => {
                checked += 1;
                if !c.result {
                    problems.push(format!("{tag}: {:?}", c.verdict.status));
                }
            }
            Some(b) => {
                let (prop, signal) = target_property(*b);
                if c.property != prop {
                    continue;
                }
                checked += 1;
                match c.verdict.counterexample() {
                    None => problems.push(format!("{tag}: no counterexample ({:?})", c.verdict.status)),
                    Some(cex) => {
                        if cex.property != prop || !cex.signals.iter().any(|s| s.signal.starts_with(signal)) {
                            problems.push(format!("{tag}: counterexample names {} / {:?}", cex.property, cex.signals));
                        }
                    }
                }
            }
        }
    }
    if suite.took > SUITE_BUDGET {
        problems.push(format!("matrix took {:?}", suite.took));
    }
    if problems.is_empty() {
        Ok(format!("{checked} cells as expected, {} cells run in {:.1?}", suite.cells.len(), suite.took))
    } else {
        Err(problems.join("; "))
    }
}

fn criterion_5() -> Outcome {
    // Impulse response of the (7, 5) code: 11 10 11 then silence.
    let mut impulse = vec![false; 8];
    impulse[0] = true;
    let expected: Vec<bool> = [1, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0].iter().map(|b| *b == 1).collect();
    if conv_encode(&impulse) != expected {
        return Err("coder oracle does not produce the (7, 5) impulse response".into());
    }
    let systems: Vec<_> = Level::ALL.iter().map(|&l| build_model(l, WIDTH).expect("model")).collect();
    let reference = rand_ref(WIDTH);
    let mut rng = StdRng::seed_from_u64(SEED ^ 5);
    for k in 0..NUMERIC_VECTORS {
        let data: Vec<bool> = (0..WIDTH).map(|_| rng.gen()).collect();
        let mode = MODES[rng.gen_range(0..MODES.len())];
        let oracle = transmit(&data, &reference, mode.code_rate, mode.modulation, mode.repetition);
        for sys in &systems {
            let mut cfg = SimConfig::default().with_scenario(sys, &mode.scenario());
            cfg.mode = SimMode::Numerical;
            cfg.inputs.insert("DATA".into(), Term::tuple(data.iter().map(|b| Term::bool(*b)).collect()));
            let trace = simulate(sys, &cfg).map_err(|e| format!("{}: {e}", sys.name))?;
            let out = trace.last().and_then(|f| f.values.get("output.out")).and_then(Value::from_term);
            let expected = Value::Tuple(oracle.iter().map(|v| Value::int(*v)).collect());
            if out.as_ref() != Some(&expected) {
                return Err(format!("vector {k} ({}) on {}: {out:?} vs oracle {expected}", mode.name(), sys.name));
            }
        }
    }
    Ok(format!("{NUMERIC_VECTORS} vectors x random modes agree on FL, PTL8, PTL4 and the oracle"))
}

fn criterion_6() -> Outcome {
    let fl = build_model(Level::Fl, WIDTH).expect("model");
    let mut rng = StdRng::seed_from_u64(SEED ^ 6);
    let mode = MODES[rng.gen_range(0..MODES.len())];
    let r = symbolic_vs_numeric(&fl, &mode, SYMBOLIC_BITS, &SimConfig::default()).map_err(|e| e.to_string())?;
    if r.vectors != 1 << SYMBOLIC_BITS || !r.all_match() {
        return Err(format!("{} of {} traces reproduced: {:?}", r.matching_vectors, r.vectors, r.first_mismatch));
    }
    if r.symbolic_total_ms() >= r.numeric_ms {
        return Err(format!("symbolic {:.1} ms >= numeric {:.1} ms", r.symbolic_total_ms(), r.numeric_ms));
    }
    Ok(format!(
        "{} traces reproduced in {}; symbolic+substitution {:.1} ms < numeric {:.1} ms",
        r.vectors,
        r.mode,
        r.symbolic_total_ms(),
        r.numeric_ms
    ))
}

fn criterion_7() -> Outcome {
    let mut fits = Vec::new();
    let mut worst = f64::INFINITY;
    for l in Level::ALL {
        let sys = build_model(l, WIDTH).expect("model");
        let s = mode_scaling(&sys, &SCALING_MODES, SCALING_REPEAT, &SimConfig::default()).map_err(|e| e.to_string())?;
        worst = worst.min(s.fit.r_squared);
        fits.push(format!("{l} R2={:.3}", s.fit.r_squared));
    }
    if worst >= MIN_R_SQUARED {
        Ok(fits.join(", "))
    } else {
        Err(format!("{} (need >= {MIN_R_SQUARED})", fits.join(", ")))
    }
}

fn criterion_8(suite: &Suite, jobs: &Result<Vec<(String, EquivJob, EquivVerdict, Duration)>, String>) -> Outcome {
    let props = properties(WIDTH);
    let (mut total, mut reproduced, mut first_miss) = (0, 0, None);
    for (bug, c) in &suite.cells {
        let (Some(b), Some(cex)) = (bug, c.verdict.counterexample()) else { continue };
        let level: Level = c.model.parse().map_err(|e: sresim::wimax::ModelError| e.to_string())?;
        let sys = inject(&build_model(level, WIDTH).expect("model"), level, *b).expect("bug applies").0;
        let scenarios = if c.scenario_set == "single" { modes::single() } else { modes::multiple() };
        let mut job = PropJob::new(&sys, scenarios);
        job.correspondence = correspondence(level);
        let prop = props.iter().find(|p| p.name == c.property).expect("property");
        total += 1;
        match replay(&job, prop, cex) {
            Ok(true) => reproduced += 1,
            other => {
                first_miss.get_or_insert(format!("{b}/{}/{}: {other:?}", c.model, c.property));
            }
        }
    }
    let jobs = jobs.as_ref().map_err(Clone::clone)?;
    for (name, job, v, _) in jobs.iter().filter(|j| j.0.contains("_b1_")) {
        for s in &v.scenarios {
            for var in s.vars.iter().filter(|x| x.status == Status::NotEquivalent) {
                total += 1;
                match replay_mismatch(job, &s.scenario, var) {
                    Ok(true) => reproduced += 1,
                    other => {
                        first_miss.get_or_insert(format!("{name}/{}/{}: {other:?}", s.scenario, var.var));
                    }
                }
            }
        }
    }
    match first_miss {
        None if total > 0 => Ok(format!("{reproduced}/{total} counterexamples reproduced numerically")),
        None => Err("no counterexamples to replay".into()),
        Some(m) => Err(format!("{reproduced}/{total} reproduced, first miss: {m}")),
    }
}

fn criterion_9() -> Outcome {
    let dir = common::models_dir();
    let files = bundled_files(WIDTH).map_err(|e| e.to_string())?;
    for (name, _) in &files {
        let path = dir.join(name);
        let lib = Library::load(&path).map_err(|e| e.to_string())?;
        let src = std::fs::read_to_string(&path).map_err(|e| format!("{name}: {e}"))?;
        let parse = |text: &str| Parser::new(text, lib.consts.clone()).and_then(|mut p| p.unit()).map(|u| u.module);
        let unit = parse(&src).map_err(|e| format!("{name}: {e}"))?;
        let again = parse(&print_module(&unit)).map_err(|e| format!("{name} reprinted: {e}"))?;
        if again != unit {
            return Err(format!("{name} changes under print and parse"));
        }
    }
    let mut rng = StdRng::seed_from_u64(SEED ^ 9);
    for k in 0..RANDOM_UNITS {
        let m = common::random_module(&mut rng);
        let text = print_module(&m);
        match parse_module(&text) {
            Ok(back) if back == m => {}
            Ok(_) => return Err(format!("random unit {k} changes under print and parse:\n{text}")),
            Err(e) => return Err(format!("random unit {k} does not reparse: {e}\n{text}")),
        }
    }
    Ok(format!("{} bundled files and {RANDOM_UNITS} random units round-trip", files.len()))
}

fn report(n: usize, name: &str, outcome: Outcome, failures: &mut usize) {
    match outcome {
        Ok(detail) => println!("criterion {n} [{name}]: PASS ({detail})"),
        Err(why) => {
            *failures += 1;
            println!("criterion {n} [{name}]: FAIL ({why})");
        }
    }
}

fn main() {
    let mut failures = 0;
    let corpus = corpus();
    let rules = rewrite_rules();
    let start = Instant::now();
    let rewritten: Vec<_> = corpus.iter().map(|t| replace_repeated(t, &rules, DEFAULT_MAX_ITERATIONS)).collect();
    let rewrite_time = start.elapsed();
    report(1, "rewrite soundness", criterion_1(&corpus, &rewritten, rewrite_time), &mut failures);
    report(2, "fixpoint", criterion_2(&rewritten), &mut failures);
    let jobs = equiv_jobs();
    report(3, "equivalence verdicts", criterion_3(&jobs), &mut failures);
    let suite = run_suite();
    report(4, "property verdicts", criterion_4(&suite), &mut failures);
    report(5, "numeric cross-check", criterion_5(), &mut failures);
    report(6, "symbolic vs exhaustive", criterion_6(), &mut failures);
    report(7, "linear scaling", criterion_7(), &mut failures);
    report(8, "replay", criterion_8(&suite, &jobs), &mut failures);
    report(9, "DSL round-trip", criterion_9(), &mut failures);
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

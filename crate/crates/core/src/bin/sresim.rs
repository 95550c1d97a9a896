use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sresim::bench::{run_bench, DEFAULT_REPEAT};
use sresim::dsl::{parse_term_with, Library};
use sresim::equiv::{check_equivalence, localize, Status};
use sresim::prop::{check_property, replay, PropJob, PropStatus};
use sresim::report::{Outcome, RunReport};
use sresim::session::{self, SessionError};
use sresim::sim::{simulate, SimConfig, SimMode};
use sresim::wimax::{build_model, bundle, Level};

#[derive(Parser)]
#[command(name = "sresim", version, about = "Symbolic simulation and verification of recurrence-equation models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent scenarios and jobs (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse files and check every system for well-formedness.
    Validate {
        paths: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate one system.
    Simulate {
        path: PathBuf,
        #[arg(long)]
        system: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Symbolic)]
        mode: ModeArg,
        /// Scenario name from the file or the built-in mode table.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value_t = 1)]
        steps: u32,
        /// Binds an input or control, e.g. `--set DATA=[True,False]`.
        #[arg(long = "set", value_name = "NAME=TERM")]
        set: Vec<String>,
        #[arg(long)]
        bug: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the equivalence jobs of a job file.
    Equiv {
        jobfile: PathBuf,
        /// Only these jobs (default: all, in name order).
        #[arg(long = "job")]
        job: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check properties on a model.
    Check {
        model: PathBuf,
        props: PathBuf,
        #[arg(long)]
        system: Option<String>,
        /// Only these properties (default: all, in name order).
        #[arg(long = "property")]
        property: Vec<String>,
        /// `single`, `multiple` or a comma-separated list of scenario names.
        #[arg(long, default_value = "multiple")]
        scenarios: String,
        #[arg(long)]
        bug: Option<String>,
        /// Signal correspondence `IMPL=SPEC`; defaults to the transmitter mapping.
        #[arg(long = "map", value_name = "IMPL=SPEC")]
        map: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Mode-count scaling and symbolic-versus-numeric timing on the transmitter models.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "fl,ptl8,ptl4")]
        models: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1,3,5,7")]
        modes: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_REPEAT)]
        repeat: usize,
        #[arg(long, default_value_t = 8)]
        width: usize,
        /// Open data bits in the symbolic-versus-numeric run.
        #[arg(long, default_value_t = 8)]
        bits: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Write the bundled transmitter model files to a directory.
    Export {
        dir: PathBuf,
        #[arg(long, default_value_t = 8)]
        width: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Symbolic,
    Numerical,
    Mixed,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Symbolic => SimMode::Symbolic,
            ModeArg::Numerical => SimMode::Numerical,
            ModeArg::Mixed => SimMode::Mixed,
        }
    }
}

/// Failure that ends a command early.
struct Abort(Outcome, String);

impl From<SessionError> for Abort {
    fn from(e: SessionError) -> Self {
        Abort(Outcome::Error, e.to_string())
    }
}

fn abort(e: impl ToString) -> Abort {
    Abort(Outcome::Error, e.to_string())
}

fn load(path: &Path, report: &mut RunReport) -> Result<Library, Abort> {
    let t = Instant::now();
    let lib = Library::load(path).map_err(abort)?;
    report.timing.parse_ms += t.elapsed().as_secs_f64() * 1e3;
    Ok(lib)
}

fn split_pair(s: &str) -> Result<(&str, &str), Abort> {
    s.split_once('=').map(|(a, b)| (a.trim(), b.trim())).ok_or_else(|| abort(format!("expected NAME=VALUE, found `{s}`")))
}

fn validate(paths: &[PathBuf], report: &mut RunReport) -> Result<(), Abort> {
    report.input("paths", paths);
    for p in paths {
        let lib = load(p, report)?;
        for sys in lib.systems.values() {
            let diags: Vec<String> = sys.validate().iter().map(|d| d.to_string()).collect();
            for d in &diags {
                report.fail(Outcome::Error, format!("{}: system {}: {d}", p.display(), sys.name));
            }
            report.push_verdict(serde_json::json!({ "kind": "validation", "file": p, "system": sys.name, "diagnostics": diags }));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    path: &Path,
    system: Option<&str>,
    mode: ModeArg,
    scenario: Option<&str>,
    steps: u32,
    set: &[String],
    bug: Option<&str>,
    report: &mut RunReport,
) -> Result<(), Abort> {
    report.input("path", path);
    report.input("system", system);
    report.input("scenario", scenario);
    report.input("steps", steps);
    report.input("set", set);
    report.input("bug", bug);
    let lib = load(path, report)?;
    let mut sys = session::pick_system(&lib, &path.display().to_string(), system)?;
    if let Some(b) = bug {
        sys = session::inject_bug(&sys, b)?;
    }
    let mut cfg = session::sim_config_from_env()?;
    cfg.steps = steps;
    cfg.mode = mode.into();
    if let Some(sc) = scenario {
        for s in session::resolve_scenarios(&lib, sc)? {
            cfg = cfg.with_scenario(&sys, &s);
        }
    }
    for kv in set {
        let (name, src) = split_pair(kv)?;
        let term = parse_term_with(src, &lib.consts).map_err(|e| abort(format!("--set {name}: {e}")))?;
        let single = sresim::sim::Scenario { name: String::new(), bindings: vec![(name.to_string(), term)] };
        cfg = cfg.with_scenario(&sys, &single);
    }
    let trace = simulate(&sys, &cfg).map_err(|e| Abort(if e.is_limit() { Outcome::Limit } else { Outcome::Error }, e.to_string()))?;
    report.add_trace(&trace);
    Ok(())
}

fn equiv_cmd(jobfile: &Path, only: &[String], report: &mut RunReport) -> Result<(), Abort> {
    report.input("jobfile", jobfile);
    report.input("jobs", only);
    let lib = load(jobfile, report)?;
    let names: Vec<String> = if only.is_empty() { lib.jobs.keys().cloned().collect() } else { only.to_vec() };
    if names.is_empty() {
        return Err(abort(format!("{} declares no jobs", jobfile.display())));
    }
    let sim = session::sim_config_from_env()?;
    for name in names {
        let t = Instant::now();
        let job = session::resolve_job(&lib, &name, &sim)?;
        report.timing.parse_ms += t.elapsed().as_secs_f64() * 1e3;
        let verdict = check_equivalence(&job).map_err(abort)?;
        let diagnosis = (verdict.overall == Status::NotEquivalent).then(|| localize(&verdict, &job.spec));
        match verdict.overall {
            Status::Equivalent => {}
            Status::NotEquivalent | Status::Unknown => report.escalate(Outcome::Negative),
            Status::Error => {
                let o = if verdict.limit_reached() { Outcome::Limit } else { Outcome::Error };
                for s in verdict.scenarios.iter().filter_map(|s| s.error.as_ref()) {
                    report.fail(o, format!("job {name}: {s}"));
                }
            }
        }
        report.add_equiv(&verdict, diagnosis.as_ref());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_cmd(
    model: &Path,
    props: &Path,
    system: Option<&str>,
    only: &[String],
    scenarios: &str,
    bug: Option<&str>,
    map: &[String],
    report: &mut RunReport,
) -> Result<(), Abort> {
    report.input("model", model);
    report.input("props", props);
    report.input("system", system);
    report.input("properties", only);
    report.input("scenarios", scenarios);
    report.input("bug", bug);
    report.input("map", map);
    let mlib = load(model, report)?;
    let plib = load(props, report)?;
    let mut sys = session::pick_system(&mlib, &model.display().to_string(), system)?;
    if let Some(b) = bug {
        sys = session::inject_bug(&sys, b)?;
    }
    let correspondence = if map.is_empty() {
        session::default_correspondence(&sys)
    } else {
        map.iter().map(|m| split_pair(m).map(|(a, b)| (a.to_string(), b.to_string()))).collect::<Result<_, _>>()?
    };
    let names: Vec<String> = if only.is_empty() { plib.properties.keys().cloned().collect() } else { only.to_vec() };
    if names.is_empty() {
        return Err(abort(format!("{} declares no properties", props.display())));
    }
    let mut job = PropJob::new(&sys, session::resolve_scenarios(&plib, scenarios)?);
    job.correspondence = correspondence;
    job.sim = session::sim_config_from_env()?;
    for name in names {
        let prop = plib.property(&name).map_err(abort)?;
        let verdict = check_property(&job, prop);
        let replayed = match verdict.counterexample() {
            Some(cex) => Some(replay(&job, prop, cex).map_err(abort)?),
            None => None,
        };
        match verdict.status {
            PropStatus::Holds => {}
            PropStatus::Fails | PropStatus::NotProven => report.escalate(Outcome::Negative),
            PropStatus::Error => {
                let o = if verdict.limit_reached() { Outcome::Limit } else { Outcome::Error };
                for s in verdict.scenarios.iter().filter_map(|s| s.error.as_ref()) {
                    report.fail(o, format!("property {name}: {s}"));
                }
            }
        }
        report.add_property(&verdict, replayed);
    }
    Ok(())
}

fn bench_cmd(models: &[String], modes: &[usize], repeat: usize, width: usize, bits: usize, report: &mut RunReport) -> Result<(), Abort> {
    report.input("models", models);
    report.input("modes", modes);
    report.input("repeat", repeat);
    report.input("width", width);
    report.input("bits", bits);
    if let Some(m) = modes.iter().find(|m| !(1..=7).contains(*m)) {
        return Err(abort(format!("mode count {m} is outside 1..7")));
    }
    let mut systems = Vec::new();
    for m in models {
        let level: Level = m.parse().map_err(abort)?;
        systems.push(build_model(level, width).map_err(abort)?);
    }
    let sim: SimConfig = session::sim_config_from_env()?;
    let result = run_bench(&systems, modes, repeat, bits, width, &sim).map_err(|e| Abort(if e.is_limit() { Outcome::Limit } else { Outcome::Error }, e.to_string()))?;
    for s in &result.symbolic_vs_numeric {
        report.timing.simulate_ms += s.symbolic_ms + s.numeric_ms;
        if !s.all_match() {
            report.fail(Outcome::Negative, format!("{}: {} of {} vectors differ", s.model, s.vectors - s.matching_vectors, s.vectors));
        }
    }
    for s in &result.scaling {
        report.memory.node_count = report.memory.node_count.max(s.points.iter().map(|p| p.node_count).max().unwrap_or(0));
    }
    report.push_verdict(serde_json::json!({ "kind": "bench", "result": result }));
    Ok(())
}

fn export_cmd(dir: &Path, width: usize, report: &mut RunReport) -> Result<(), Abort> {
    report.input("dir", dir);
    report.input("width", width);
    std::fs::create_dir_all(dir).map_err(|e| abort(format!("{}: {e}", dir.display())))?;
    for (name, text) in bundle::bundled_files(width).map_err(abort)? {
        let path = dir.join(&name);
        std::fs::write(&path, text).map_err(|e| abort(format!("{}: {e}", path.display())))?;
        report.push_verdict(serde_json::json!({ "kind": "file", "path": path }));
    }
    Ok(())
}

fn emit(report: &RunReport, out: Option<&Path>) -> ExitCode {
    for e in &report.errors {
        eprintln!("sresim: {e}");
    }
    let text = report.to_json();
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text + "\n") {
                eprintln!("sresim: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("sresim: {e}");
                    return ExitCode::from(2);
                }
            }
        }
    }
    ExitCode::from(report.outcome.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let mut report = RunReport::new("usage");
            report.fail(Outcome::Error, e.render().to_string().trim_end());
            return emit(&report, None);
        }
    };
    let start = Instant::now();
    let (name, common) = match &cli.command {
        Command::Validate { common, .. } => ("validate", common),
        Command::Simulate { common, .. } => ("simulate", common),
        Command::Equiv { common, .. } => ("equiv", common),
        Command::Check { common, .. } => ("check", common),
        Command::Bench { common, .. } => ("bench", common),
        Command::Export { common, .. } => ("export", common),
    };
    let mut report = RunReport::new(name);
    if let Some(n) = common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            report.fail(Outcome::Error, format!("--jobs {n}: {e}"));
        }
        report.input("worker_threads", n);
    }
    let result = match &cli.command {
        Command::Validate { paths, .. } => validate(paths, &mut report),
        Command::Simulate { path, system, mode, scenario, steps, set, bug, .. } => {
            simulate_cmd(path, system.as_deref(), *mode, scenario.as_deref(), *steps, set, bug.as_deref(), &mut report)
        }
        Command::Equiv { jobfile, job, .. } => equiv_cmd(jobfile, job, &mut report),
        Command::Check { model, props, system, property, scenarios, bug, map, .. } => {
            check_cmd(model, props, system.as_deref(), property, scenarios, bug.as_deref(), map, &mut report)
        }
        Command::Bench { models, modes, repeat, width, bits, .. } => bench_cmd(models, modes, *repeat, *width, *bits, &mut report),
        Command::Export { dir, width, .. } => export_cmd(dir, *width, &mut report),
    };
    if let Err(Abort(o, msg)) = result {
        report.fail(o, msg);
    }
    report.timing.total_ms = start.elapsed().as_secs_f64() * 1e3;
    report.memory.peak_bytes = sresim::sim::peak_memory_bytes();
    emit(&report, common.out.as_deref())
}

//! Resolves file-level references (models, scenarios, jobs, bugs) into
//! checkable objects.

use std::path::Path;

use thiserror::Error;

use crate::dsl::{DslError, Library};
use crate::equiv::{EquivJob, Side};
use crate::sim::{Scenario, SimConfig};
use crate::system::SreSystem;
use crate::wimax::{correspondence, inject, modes, Bug, BugError, Level};

/// Caps `max_iterations` of every rewrite fixpoint.
pub const ENV_MAX_ITERATIONS: &str = "SRESIM_MAX_ITERATIONS";
/// Caps the delta-cycle limit of every simulation.
pub const ENV_DELTA_CYCLE_LIMIT: &str = "SRESIM_DELTA_CYCLE_LIMIT";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Bug(#[from] BugError),
    #[error("{0} defines no system")]
    NoSystem(String),
    #[error("{path} defines several systems ({names}); pick one with --system")]
    AmbiguousSystem { path: String, names: String },
    #[error("system {0} is not a transmitter model; bugs can only be injected into FL, PTL8 or PTL4 models")]
    NotTransmitter(String),
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error("invalid value {value:?} for {var}")]
    BadEnv { var: &'static str, value: String },
}

/// Simulation defaults lowered by the limit environment variables.
pub fn sim_config_from_env() -> Result<SimConfig, SessionError> {
    let mut cfg = SimConfig::default();
    let read = |var: &'static str| -> Result<Option<usize>, SessionError> {
        match std::env::var(var) {
            Ok(v) => v.trim().parse::<usize>().ok().filter(|n| *n > 0).map(Some).ok_or(SessionError::BadEnv { var, value: v }),
            Err(_) => Ok(None),
        }
    };
    if let Some(n) = read(ENV_MAX_ITERATIONS)? {
        cfg.max_iterations = cfg.max_iterations.min(n);
    }
    if let Some(n) = read(ENV_DELTA_CYCLE_LIMIT)? {
        cfg.delta_cycle_limit = cfg.delta_cycle_limit.min(n);
    }
    Ok(cfg)
}

/// Picks `name` from the library, or its only system when `name` is `None`.
pub fn pick_system(lib: &Library, path: &str, name: Option<&str>) -> Result<SreSystem, SessionError> {
    match name {
        Some(n) => Ok(lib.system(n)?.clone()),
        None => {
            let mut it = lib.systems.values();
            match (it.next(), it.next()) {
                (Some(s), None) => Ok(s.clone()),
                (None, _) => Err(SessionError::NoSystem(path.to_string())),
                _ => Err(SessionError::AmbiguousSystem {
                    path: path.to_string(),
                    names: lib.systems.keys().cloned().collect::<Vec<_>>().join(", "),
                }),
            }
        }
    }
}

pub fn load_system(path: &Path, name: Option<&str>) -> Result<SreSystem, SessionError> {
    let lib = Library::load(path)?;
    pick_system(&lib, &path.display().to_string(), name)
}

/// Injects a catalogued bug into a transmitter model.
pub fn inject_bug(sys: &SreSystem, bug: &str) -> Result<SreSystem, SessionError> {
    let bug: Bug = bug.parse()?;
    let level = Level::detect(sys).ok_or_else(|| SessionError::NotTransmitter(sys.name.clone()))?;
    Ok(inject(sys, level, bug)?.0)
}

/// Default signal correspondence of a transmitter model; empty otherwise.
pub fn default_correspondence(sys: &SreSystem) -> Vec<(String, String)> {
    Level::detect(sys).map(correspondence).unwrap_or_default()
}

/// Resolves a comma-separated scenario list. `single` and `multiple` stand
/// for `mode_0` and all seven modes; other names are looked up in the
/// library first and the built-in mode table second.
pub fn resolve_scenarios(lib: &Library, spec: &str) -> Result<Vec<Scenario>, SessionError> {
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "single" => out.extend(modes::single()),
            "multiple" => out.extend(modes::multiple()),
            "none" => out.push(Scenario::default()),
            _ => match lib.scenarios.get(name) {
                Some(s) => out.push(s.clone()),
                None => out.push(modes::mode_by_name(name).ok_or_else(|| SessionError::UnknownScenario(name.into()))?.scenario()),
            },
        }
    }
    Ok(out)
}

/// Loads the models of a job declared in `lib` and applies its bug.
pub fn resolve_job(lib: &Library, name: &str, sim: &SimConfig) -> Result<EquivJob, SessionError> {
    let decl = lib.job(name)?;
    let dir = lib.job_dirs.get(name).cloned().unwrap_or_default();
    let mut spec = load_system(&dir.join(&decl.spec.path), Some(&decl.spec.system))?;
    let mut imp = load_system(&dir.join(&decl.imp.path), Some(&decl.imp.system))?;
    if let Some((bug, side)) = &decl.bug {
        match side {
            Side::Spec => spec = inject_bug(&spec, bug)?,
            Side::Impl => imp = inject_bug(&imp, bug)?,
        }
    }
    let mut job = EquivJob::new(spec, imp);
    job.name = decl.name.clone();
    job.k_spec = decl.k_spec;
    job.k_imp = decl.k_imp;
    job.correspondence = decl.correspondence.clone();
    job.compare = decl.compare.clone();
    job.sim = sim.clone();
    if !decl.scenarios.is_empty() {
        job.scenarios = resolve_scenarios(lib, &decl.scenarios.join(","))?;
    }
    Ok(job)
}

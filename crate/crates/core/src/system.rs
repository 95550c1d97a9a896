//! Systems of recurrence equations and their well-formedness checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::sort::{sort_of, NoVars, SortContext};
use crate::term::{Sort, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub sort: Option<Sort>,
}

impl Decl {
    pub fn new(name: impl Into<String>, sort: Option<Sort>) -> Self {
        Decl { name: name.into(), sort }
    }
}

/// `target(n) = body`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub target: String,
    pub body: Term,
}

/// `name(time) = value` for `time <= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Initial {
    pub name: String,
    pub time: i64,
    pub value: Term,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Input,
    Control,
    Var,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SreSystem {
    pub name: String,
    pub inputs: Vec<Decl>,
    pub controls: Vec<Decl>,
    pub vars: Vec<Decl>,
    pub outputs: Vec<String>,
    pub initial: Vec<Initial>,
    pub equations: Vec<Equation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Equation target, declaration or initial condition the problem belongs to.
    pub location: String,
    /// Child-index path inside the equation body, when applicable.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}: {}", self.location, self.message)
        } else {
            write!(f, "{} at {:?}: {}", self.location, self.path, self.message)
        }
    }
}

fn diag(location: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic { location: location.into(), path: Vec::new(), message: message.into() }
}

impl SreSystem {
    pub fn new(name: impl Into<String>) -> Self {
        SreSystem { name: name.into(), ..Default::default() }
    }

    pub fn role(&self, name: &str) -> Option<Role> {
        if self.inputs.iter().any(|d| d.name == name) {
            Some(Role::Input)
        } else if self.controls.iter().any(|d| d.name == name) {
            Some(Role::Control)
        } else if self.vars.iter().any(|d| d.name == name) {
            Some(Role::Var)
        } else {
            None
        }
    }

    pub fn equation(&self, target: &str) -> Option<&Equation> {
        self.equations.iter().find(|e| e.target == target)
    }

    pub fn equation_mut(&mut self, target: &str) -> Option<&mut Equation> {
        self.equations.iter_mut().find(|e| e.target == target)
    }

    pub fn initial_value(&self, name: &str, time: i64) -> Option<&Term> {
        self.initial.iter().find(|i| i.name == name && i.time == time).map(|i| &i.value)
    }

    /// Largest delay over all equations.
    pub fn max_delay(&self) -> u32 {
        self.equations
            .iter()
            .flat_map(|e| e.body.var_refs())
            .map(|(_, d)| d)
            .max()
            .unwrap_or(0)
    }

    /// Same-cycle dependencies: target -> variables it reads with delay 0.
    pub fn zero_delay_deps(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.equations
            .iter()
            .map(|e| {
                let deps = e
                    .body
                    .var_refs()
                    .into_iter()
                    .filter(|(n, d)| *d == 0 && self.role(n) == Some(Role::Var))
                    .map(|(n, _)| n)
                    .collect();
                (e.target.clone(), deps)
            })
            .collect()
    }

    /// Infers the sort of every declared name. Inputs and controls without a
    /// declared sort are numeric.
    pub fn sorts(&self) -> (BTreeMap<String, Sort>, Vec<Diagnostic>) {
        let mut known: BTreeMap<String, Sort> = BTreeMap::new();
        let mut diags = Vec::new();
        for d in self.inputs.iter().chain(&self.controls) {
            known.insert(d.name.clone(), d.sort.clone().unwrap_or(Sort::Num));
        }
        let mut pending: Vec<&Decl> = Vec::new();
        for d in &self.vars {
            if let Some(s) = &d.sort {
                known.insert(d.name.clone(), s.clone());
            } else if let Some(init) = self.initial.iter().find(|i| i.name == d.name) {
                match sort_of(&init.value, &NoVars) {
                    Ok(s) => {
                        known.insert(d.name.clone(), s);
                    }
                    Err(e) => diags.push(Diagnostic {
                        location: format!("init {}({})", init.name, init.time),
                        path: e.path,
                        message: e.message,
                    }),
                }
            } else {
                pending.push(d);
            }
        }
        loop {
            let mut progress = false;
            pending.retain(|d| {
                let Some(eq) = self.equation(&d.name) else { return true };
                let refs = eq.body.var_refs();
                if refs.iter().all(|(n, _)| known.contains_key(n)) {
                    if let Ok(s) = sort_of(&eq.body, &known) {
                        known.insert(d.name.clone(), s);
                        progress = true;
                        return false;
                    }
                }
                true
            });
            if !progress {
                break;
            }
        }
        for d in pending {
            diags.push(diag(&d.name, format!("cannot infer sort of {}", d.name)));
        }
        (known, diags)
    }

    /// All violations of the well-formedness rules; empty means well-formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for d in self.inputs.iter().chain(&self.controls).chain(&self.vars) {
            if !seen.insert(d.name.as_str()) {
                out.push(diag(&d.name, format!("{} declared more than once", d.name)));
            }
        }
        for o in &self.outputs {
            if self.role(o) != Some(Role::Var) {
                out.push(diag(o, format!("output {o} is not a declared variable")));
            }
        }
        let mut defined = BTreeSet::new();
        for eq in &self.equations {
            let loc = format!("eq {}", eq.target);
            match self.role(&eq.target) {
                None => out.push(diag(&loc, format!("equation for undeclared variable {}", eq.target))),
                Some(Role::Input) | Some(Role::Control) => {
                    out.push(diag(&loc, format!("equation defines input or control {}", eq.target)))
                }
                Some(Role::Var) => {}
            }
            if !defined.insert(eq.target.as_str()) {
                out.push(diag(&loc, format!("duplicate equation for {}", eq.target)));
            }
            if eq.body.has_holes() {
                out.push(diag(&loc, "pattern hole in equation body"));
            }
            let refs = eq.body.var_refs();
            if refs.is_empty() {
                out.push(diag(&loc, "delay set empty: body references no variable"));
            }
            for (name, delay) in &refs {
                match self.role(name) {
                    None => out.push(diag(&loc, format!("unresolved reference {name}"))),
                    Some(Role::Var) => {
                        for t in (1 - *delay as i64)..=0 {
                            if self.initial_value(name, t).is_none() {
                                out.push(diag(&loc, format!("missing initial condition {name}({t})")));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        for d in &self.vars {
            if !defined.contains(d.name.as_str()) {
                out.push(diag(&d.name, format!("missing equation for {}", d.name)));
            }
        }
        for init in &self.initial {
            let loc = format!("init {}({})", init.name, init.time);
            if self.role(&init.name) != Some(Role::Var) {
                out.push(diag(&loc, format!("initial condition for non-variable {}", init.name)));
            }
            if init.time > 0 {
                out.push(diag(&loc, "initial condition at positive time"));
            }
            if init.value.has_var_refs() || init.value.has_holes() {
                out.push(diag(&loc, "initial value must be a constant or symbolic input"));
            }
        }
        // Sorts are only meaningful once references resolve.
        if out.is_empty() {
            let (sorts, mut sort_diags) = self.sorts();
            out.append(&mut sort_diags);
            for eq in &self.equations {
                match sort_of(&eq.body, &sorts) {
                    Ok(s) => {
                        if let Some(expected) = sorts.get(&eq.target) {
                            if &s != expected {
                                out.push(diag(
                                    format!("eq {}", eq.target),
                                    format!("body has sort {s}, variable has sort {expected}"),
                                ));
                            }
                        }
                    }
                    Err(e) => out.push(Diagnostic {
                        location: format!("eq {}", eq.target),
                        path: e.path,
                        message: e.message,
                    }),
                }
            }
            for init in &self.initial {
                if let (Ok(s), Some(expected)) = (sort_of(&init.value, &NoVars), sorts.get(&init.name)) {
                    if &s != expected {
                        out.push(diag(
                            format!("init {}({})", init.name, init.time),
                            format!("initial value has sort {s}, variable has sort {expected}"),
                        ));
                    }
                }
            }
        }
        out
    }
}

impl SortContext for SreSystem {
    fn var_sort(&self, name: &str) -> Option<Sort> {
        self.sorts().0.get(name).cloned()
    }
}

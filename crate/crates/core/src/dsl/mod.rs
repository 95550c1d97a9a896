//! Text format for systems, rule sets, properties, scenarios and jobs.

pub mod lexer;
pub mod parser;
pub mod printer;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use lexer::Pos;
pub use parser::{parse_sort, parse_term, parse_term_with, ParseError, Parser};
pub use printer::{print_module, print_property, print_system, write_term};

use crate::equiv::JobDecl;
use crate::prop::Property;
use crate::rewrite::{RewriteRule, RuleClass, RuleSet};
use crate::sim::Scenario;
use crate::system::SreSystem;
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecl {
    pub lhs: Term,
    pub rhs: Term,
    pub guard: Option<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSetDecl {
    pub name: String,
    pub rules: Vec<RuleDecl>,
}

impl RuleSetDecl {
    pub fn to_ruleset(&self) -> RuleSet {
        let rules = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let name = format!("{}#{i}", self.name);
                match &r.guard {
                    Some(g) => RewriteRule::guarded(name, r.lhs.clone(), r.rhs.clone(), g.clone()),
                    None => RewriteRule::pattern(name, r.lhs.clone(), r.rhs.clone()),
                }
            })
            .collect();
        RuleSet::new(RuleClass::User(self.name.clone()), rules)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Include(String),
    Const(String, Term),
    System(SreSystem),
    RuleSet(RuleSetDecl),
    Property(Property),
    Scenario(Scenario),
    Job(JobDecl),
}

/// The structural content of a source file. Positions live in [`SourceUnit`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Module {
    pub items: Vec<Item>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

#[derive(Clone, Debug, Default)]
pub struct SourceUnit {
    pub module: Module,
    pub spans: Vec<Span>,
    /// `(system, target)` to the position of its `eq` line.
    pub eq_spans: BTreeMap<(String, String), Pos>,
}

impl SourceUnit {
    pub fn systems(&self) -> impl Iterator<Item = &SreSystem> {
        self.module.items.iter().filter_map(|i| match i {
            Item::System(s) => Some(s),
            _ => None,
        })
    }
}

/// Parses a single file's text without resolving includes.
pub fn parse_unit(src: &str) -> Result<SourceUnit, ParseError> {
    Parser::new(src, BTreeMap::new())?.unit()
}

pub fn parse_module(src: &str) -> Result<Module, ParseError> {
    parse_unit(src).map(|u| u.module)
}

pub fn parse_system(src: &str) -> Result<SreSystem, ParseError> {
    let unit = parse_unit(src)?;
    let found = unit.systems().next().cloned();
    found.ok_or(ParseError { pos: Pos::default(), message: "no system in input".into() })
}

#[derive(Debug, Error)]
pub enum DslError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("include cycle through {0}")]
    IncludeCycle(String),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

/// Everything defined by a file and the files it includes.
#[derive(Clone, Debug, Default)]
pub struct Library {
    pub consts: BTreeMap<String, Term>,
    pub systems: BTreeMap<String, SreSystem>,
    pub rulesets: BTreeMap<String, RuleSetDecl>,
    pub properties: BTreeMap<String, Property>,
    pub scenarios: BTreeMap<String, Scenario>,
    pub jobs: BTreeMap<String, JobDecl>,
    /// Directory of the file that defined each job; its model paths are relative to it.
    pub job_dirs: BTreeMap<String, PathBuf>,
    pub files: Vec<PathBuf>,
}

impl Library {
    pub fn load(path: impl AsRef<Path>) -> Result<Library, DslError> {
        let mut lib = Library::default();
        lib.include(path.as_ref(), &mut Vec::new())?;
        Ok(lib)
    }

    /// Loads source text; includes are resolved relative to `base`.
    pub fn load_str(src: &str, base: &Path) -> Result<Library, DslError> {
        let mut lib = Library::default();
        lib.absorb(src, "<input>", base, &mut Vec::new())?;
        Ok(lib)
    }

    fn include(&mut self, path: &Path, stack: &mut Vec<PathBuf>) -> Result<(), DslError> {
        let shown = path.display().to_string();
        let canon = path.canonicalize().map_err(|source| DslError::Io { path: shown.clone(), source })?;
        if stack.contains(&canon) {
            return Err(DslError::IncludeCycle(shown));
        }
        if self.files.contains(&canon) {
            return Ok(());
        }
        let src = std::fs::read_to_string(&canon).map_err(|source| DslError::Io { path: shown.clone(), source })?;
        stack.push(canon.clone());
        let base = canon.parent().map(Path::to_path_buf).unwrap_or_default();
        self.absorb(&src, &shown, &base, stack)?;
        stack.pop();
        self.files.push(canon);
        Ok(())
    }

    fn absorb(&mut self, src: &str, shown: &str, base: &Path, stack: &mut Vec<PathBuf>) -> Result<(), DslError> {
        let perr = |source| DslError::Parse { path: shown.to_string(), source };
        let mut p = Parser::new(src, self.consts.clone()).map_err(perr)?;
        let mut eq_spans = BTreeMap::new();
        while !p.at_end() {
            let (item, _) = p.item(&mut eq_spans).map_err(perr)?;
            match item {
                Item::Include(rel) => {
                    self.include(&base.join(rel), stack)?;
                    p.define_consts(&self.consts);
                }
                Item::Const(n, v) => {
                    self.consts.insert(n, v);
                }
                Item::System(s) => insert(&mut self.systems, "system", s.name.clone(), s)?,
                Item::RuleSet(r) => insert(&mut self.rulesets, "ruleset", r.name.clone(), r)?,
                Item::Property(pr) => insert(&mut self.properties, "property", pr.name.clone(), pr)?,
                Item::Scenario(s) => insert(&mut self.scenarios, "scenario", s.name.clone(), s)?,
                Item::Job(j) => {
                    self.job_dirs.insert(j.name.clone(), base.to_path_buf());
                    insert(&mut self.jobs, "job", j.name.clone(), j)?
                }
            }
        }
        Ok(())
    }

    pub fn system(&self, name: &str) -> Result<&SreSystem, DslError> {
        self.systems.get(name).ok_or_else(|| DslError::Unknown { kind: "system", name: name.into() })
    }

    pub fn scenario(&self, name: &str) -> Result<&Scenario, DslError> {
        self.scenarios.get(name).ok_or_else(|| DslError::Unknown { kind: "scenario", name: name.into() })
    }

    pub fn property(&self, name: &str) -> Result<&Property, DslError> {
        self.properties.get(name).ok_or_else(|| DslError::Unknown { kind: "property", name: name.into() })
    }

    pub fn job(&self, name: &str) -> Result<&JobDecl, DslError> {
        self.jobs.get(name).ok_or_else(|| DslError::Unknown { kind: "job", name: name.into() })
    }
}

fn insert<T>(map: &mut BTreeMap<String, T>, kind: &'static str, name: String, v: T) -> Result<(), DslError> {
    if map.contains_key(&name) {
        return Err(DslError::Duplicate { kind, name });
    }
    map.insert(name, v);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::TermKind;

    #[test]
    fn empty_file_is_empty_unit() {
        assert!(parse_unit("").unwrap().module.items.is_empty());
        assert!(parse_unit("  # only a comment\n").unwrap().module.items.is_empty());
    }

    #[test]
    fn if_arity_is_reported() {
        let e = parse_unit("system S { vars X; eq X(n) = IF(a, b); }").unwrap_err();
        assert!(e.message.starts_with("IF expects 3 arguments"), "{e}");
        assert_eq!((e.pos.line, e.pos.col), (1, 30));
        let e = parse_unit("system S { inputs A; vars X; eq X(n) = IF(A(n) = 1, [A(n), 2]); }").unwrap_err();
        assert_eq!(e.message, "IF expects 3 arguments, found 2");
    }

    #[test]
    fn randomizer_listing_parses_to_nested_if() {
        let src = "\
const MODE_0 = 0; const MODE_1 = 1; const MODE_2 = 2;
const INVALID_DATA = $INVALID_DATA;
system RAND {
  inputs RAND_IN; controls RAND_CTRL; vars RAND_OUT; outputs RAND_OUT;
  eq RAND_OUT(n) = IF(RAND_CTRL(n)=MODE_0, RAND_IN(n), IF(RAND_CTRL(n)=MODE_1, randFunc_01(RAND_IN(n)), IF(RAND_CTRL(n)=MODE_2, randFunc_02(RAND_IN(n)), INVALID_DATA)));
}";
        let sys = parse_system(src).unwrap();
        let body = &sys.equations[0].body;
        let TermKind::If(_, a, rest) = body.kind() else { panic!("{body}") };
        assert_eq!(a, &Term::var("RAND_IN", 0));
        let TermKind::If(_, b, rest) = rest.kind() else { panic!("{rest}") };
        assert!(matches!(b.kind(), TermKind::App(f, _) if f == "randFunc_01"));
        let TermKind::If(_, _, last) = rest.kind() else { panic!("{rest}") };
        assert_eq!(last, &Term::sym("INVALID_DATA"));
        assert!(sys.validate().is_empty(), "{:?}", sys.validate());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_unit("system S {\n  vars X;\n  eq X(n) = X(n-1) +;\n}").unwrap_err();
        assert_eq!(e.pos.line, 3);
        assert!(parse_unit("system").is_err());
        assert!(parse_unit("\u{0}\u{ff}").is_err());
        let e = parse_unit("system S { vars X; eq X(n) = Y; }").unwrap_err();
        assert!(e.message.contains("unknown identifier"), "{e}");
    }

    #[test]
    fn single_equation_round_trip() {
        let src = "system S {\n  inputs A: num;\n  vars X: num;\n  outputs X;\n  init X(0) = 0;\n  eq X(n) = X(n - 1) + A(n);\n}\n";
        let m = parse_module(src).unwrap();
        let printed = print_module(&m);
        assert_eq!(parse_module(&printed).unwrap(), m);
        assert_eq!(print_module(&parse_module(&printed).unwrap()), printed);
    }

    #[test]
    fn tuple_literal_formatting() {
        let t = parse_term("[True, False]").unwrap();
        assert_eq!(t.to_string(), "[True, False]");
        let u = parse_term("[ True ,False ]").unwrap();
        assert_eq!(u, t);
    }

    #[test]
    fn consts_are_resolved_and_may_be_symbolic() {
        let m = parse_module("const K = 2 * 3; const BAD = $BAD; system S { vars X; eq X(n) = IF(X(n-1) = K, BAD, K); }").unwrap();
        let Item::System(s) = &m.items[2] else { panic!() };
        assert_eq!(s.equations[0].body.to_string(), "IF(X(n-1) = 6, $BAD, 6)");
        assert!(parse_unit("system S { vars X; } const C = X(n);").is_err());
    }

    #[test]
    fn library_resolves_includes_relative_to_file() {
        let dir = std::env::temp_dir().join(format!("sresim-lib-{}", std::process::id()));
        std::fs::create_dir_all(dir.join("sub")).unwrap();
        std::fs::write(dir.join("sub/consts.sre"), "const W = 4;\nscenario fast { C = W; }\n").unwrap();
        std::fs::write(dir.join("main.sre"), "include \"sub/consts.sre\";\nsystem S { controls C; vars X; outputs X; eq X(n) = C(n) + W; }\n").unwrap();
        std::fs::write(dir.join("loop.sre"), "include \"loop.sre\";\n").unwrap();
        let lib = Library::load(dir.join("main.sre")).unwrap();
        assert_eq!(lib.consts["W"], Term::int(4));
        assert_eq!(lib.scenario("fast").unwrap().bindings[0].1, Term::int(4));
        assert_eq!(lib.system("S").unwrap().equations[0].body.to_string(), "C(n) + 4");
        assert!(matches!(Library::load(dir.join("loop.sre")), Err(DslError::IncludeCycle(_))));
        assert!(matches!(Library::load(dir.join("missing.sre")), Err(DslError::Io { .. })));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn duplicates_are_rejected() {
        let e = Library::load_str("system S { vars X; }\nsystem S { vars Y; }", Path::new(".")).unwrap_err();
        assert!(matches!(e, DslError::Duplicate { kind: "system", .. }));
    }
}

//! Substitution, rule lists and repetitive substitution to a fixpoint.
//!
//! Traversal is outermost-first, left-to-right: a rule that fires at a node
//! replaces it and the replacement is not revisited in the same pass.
//! `replace_list` runs every rule of a set once, in listed order, and
//! `replace_repeated` iterates that until nothing changes.

pub mod abst;
mod ite;
mod logic;
mod math;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::eval::FuncRegistry;
use crate::pattern::{instantiate, match_pattern, Bindings};
use crate::term::{Term, TermKind};

pub use abst::{abstraction_rules, CONVERSION_FUNCS};
pub use math::{normalize_polynomial, Poly};

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

pub type NativeFn = Arc<dyn Fn(&Term) -> Option<Term> + Send + Sync>;

#[derive(Clone)]
pub enum RuleKind {
    /// `lhs => rhs`, optionally guarded by a boolean condition over the holes.
    Pattern { lhs: Term, rhs: Term, guard: Option<Term> },
    /// Procedural rule applied at a single node; returns `None` when it does
    /// not apply.
    Native(NativeFn),
}

#[derive(Clone)]
pub struct RewriteRule {
    pub name: String,
    pub kind: RuleKind,
}

impl fmt::Debug for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RuleKind::Pattern { lhs, rhs, guard: None } => write!(f, "{}: {lhs} => {rhs}", self.name),
            RuleKind::Pattern { lhs, rhs, guard: Some(g) } => {
                write!(f, "{}: {lhs} => {rhs} if {g}", self.name)
            }
            RuleKind::Native(_) => write!(f, "{}: <native>", self.name),
        }
    }
}

impl RewriteRule {
    pub fn pattern(name: impl Into<String>, lhs: Term, rhs: Term) -> Self {
        RewriteRule { name: name.into(), kind: RuleKind::Pattern { lhs, rhs, guard: None } }
    }

    pub fn guarded(name: impl Into<String>, lhs: Term, rhs: Term, guard: Term) -> Self {
        RewriteRule { name: name.into(), kind: RuleKind::Pattern { lhs, rhs, guard: Some(guard) } }
    }

    pub fn native(name: impl Into<String>, f: impl Fn(&Term) -> Option<Term> + Send + Sync + 'static) -> Self {
        RewriteRule { name: name.into(), kind: RuleKind::Native(Arc::new(f)) }
    }

    /// Substitution rule `x -> t`.
    pub fn subst(x: Term, t: Term) -> Self {
        RewriteRule::pattern(format!("{x} -> {t}"), x, t)
    }

    /// Tries the rule at the root of `t` only.
    pub fn apply_at(&self, t: &Term) -> Option<Term> {
        let out = match &self.kind {
            RuleKind::Pattern { lhs, rhs, guard } => {
                let mut b = Bindings::new();
                if !match_pattern(lhs, t, &mut b) {
                    return None;
                }
                if let Some(g) = guard {
                    if !guard_holds(&instantiate(g, &b)) {
                        return None;
                    }
                }
                instantiate(rhs, &b)
            }
            RuleKind::Native(f) => f(t)?,
        };
        if out == *t {
            None
        } else {
            Some(out)
        }
    }

    /// Pattern variables used on the right-hand side but bound nowhere.
    pub fn unbound_holes(&self) -> Vec<String> {
        let RuleKind::Pattern { lhs, rhs, guard } = &self.kind else { return Vec::new() };
        let mut bound = std::collections::BTreeSet::new();
        lhs.walk(&mut |t| {
            if let TermKind::Hole(h) = t.kind() {
                if let Some(n) = &h.name {
                    bound.insert(n.clone());
                }
            }
        });
        let mut out = Vec::new();
        let mut check = |t: &Term| {
            if let TermKind::Hole(h) = t.kind() {
                if let Some(n) = &h.name {
                    if !bound.contains(n) && !out.contains(n) {
                        out.push(n.clone());
                    }
                }
            }
        };
        rhs.walk(&mut check);
        if let Some(g) = guard {
            g.walk(&mut check);
        }
        out
    }
}

/// Evaluates an instantiated guard. Supports `is_const`, `is_ground`,
/// logical connectives and comparisons that fold to constants.
pub fn guard_holds(g: &Term) -> bool {
    fn go(g: &Term) -> Option<bool> {
        match g.kind() {
            TermKind::App(name, args) if args.len() == 1 => match name.as_str() {
                "is_const" => Some(args[0].is_const()),
                "is_ground" => Some(args[0].is_ground()),
                "is_num" => Some(args[0].as_num().is_some()),
                _ => None,
            },
            TermKind::Logic(op, args) => {
                let vals = args.iter().map(go).collect::<Option<Vec<_>>>()?;
                crate::eval::logic(*op, &vals).ok()
            }
            _ => {
                let folded = simplify_with(g, &RuleSet::simplifier(&FuncRegistry::standard()), 100).ok()?;
                folded.as_bool()
            }
        }
    }
    go(g).unwrap_or(false)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleClass {
    Math,
    Logic,
    If,
    Abst,
    Trace,
    User(String),
}

impl fmt::Display for RuleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleClass::Math => f.write_str("R_Math"),
            RuleClass::Logic => f.write_str("R_Logic"),
            RuleClass::If => f.write_str("R_IF"),
            RuleClass::Abst => f.write_str("R_Abst"),
            RuleClass::Trace => f.write_str("TraceRules"),
            RuleClass::User(n) => f.write_str(n),
        }
    }
}

/// Ordered list of rules. Application order is the listed order.
#[derive(Clone, Debug)]
pub struct RuleSet {
    pub name: RuleClass,
    pub rules: Vec<RewriteRule>,
    /// Variable-reference substitutions applied in a single lookup pass.
    /// Only used when no replacement contains a variable reference, in which
    /// case sequential and simultaneous application coincide.
    literal: Option<HashMap<Term, Term>>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("no fixpoint after {iterations} iterations; last terms: {} / {}", brief(previous), brief(last))]
    NonTermination { iterations: usize, previous: Term, last: Term },
    #[error("unknown rule set {0}")]
    UnknownRuleSet(String),
}

/// Display form cut to a readable length.
fn brief(t: &Term) -> String {
    const MAX: usize = 160;
    let s = t.to_string();
    match s.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s,
    }
}

impl RuleSet {
    pub fn new(name: RuleClass, rules: Vec<RewriteRule>) -> Self {
        RuleSet { name, rules, literal: None }
    }

    pub fn empty(name: RuleClass) -> Self {
        RuleSet::new(name, Vec::new())
    }

    /// Substitution rules `var(n-γ) -> value`, as used for trace rules.
    pub fn substitutions(name: RuleClass, subst: Vec<(Term, Term)>) -> Self {
        let fast = subst.iter().all(|(l, r)| matches!(l.kind(), TermKind::Var { .. }) && !r.has_var_refs());
        let literal = fast.then(|| subst.iter().cloned().collect::<HashMap<_, _>>());
        let rules = subst.into_iter().map(|(l, r)| RewriteRule::subst(l, r)).collect();
        RuleSet { name, rules, literal }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Concatenation; the result is a user set unless both share a class.
    pub fn union(&self, other: &RuleSet) -> RuleSet {
        let name = if self.name == other.name {
            self.name.clone()
        } else {
            RuleClass::User(format!("{} ∪ {}", self.name, other.name))
        };
        let mut rules = self.rules.clone();
        rules.extend(other.rules.iter().cloned());
        RuleSet::new(name, rules)
    }

    pub fn push(&mut self, rule: RewriteRule) {
        self.literal = None;
        self.rules.push(rule);
    }

    pub fn math(reg: &FuncRegistry) -> RuleSet {
        RuleSet::new(RuleClass::Math, math::rules(reg))
    }

    pub fn logic() -> RuleSet {
        RuleSet::new(RuleClass::Logic, logic::rules())
    }

    pub fn ite() -> RuleSet {
        RuleSet::new(RuleClass::If, ite::rules())
    }

    /// R_IF, then R_Logic, then R_Math: the simplification used for traces.
    pub fn simplifier(reg: &FuncRegistry) -> RuleSet {
        let mut rules = ite::rules();
        rules.extend(logic::rules());
        rules.extend(math::rules(reg));
        RuleSet::new(RuleClass::User("R_IF ∪ R_Logic ∪ R_Math".into()), rules)
    }
}

/// Looks up a built-in rule class by name (`R_Math`, `R_Logic`, `R_IF`,
/// `R_Abst`). `R_Abst` without a correspondence table only eliminates
/// integer conversions.
pub fn builtin_ruleset(name: &str) -> Result<RuleSet, RewriteError> {
    let reg = FuncRegistry::standard();
    match name {
        "R_Math" => Ok(RuleSet::math(&reg)),
        "R_Logic" => Ok(RuleSet::logic()),
        "R_IF" => Ok(RuleSet::ite()),
        "R_Abst" => Ok(abstraction_rules(&[])),
        "simplify" => Ok(RuleSet::simplifier(&reg)),
        other => Err(RewriteError::UnknownRuleSet(other.to_string())),
    }
}

/// Replaces every outermost occurrence matched by `rule`.
pub fn replace(expr: &Term, rule: &RewriteRule) -> Term {
    if let Some(r) = rule.apply_at(expr) {
        return r;
    }
    expr.map_children(|c| replace(c, rule))
}

/// Applies each rule of the set once over the whole term, in order.
pub fn replace_list(expr: &Term, rules: &RuleSet) -> Term {
    if let Some(map) = &rules.literal {
        return replace_literal(expr, map);
    }
    rules.rules.iter().fold(expr.clone(), |acc, r| replace(&acc, r))
}

fn replace_literal(expr: &Term, map: &HashMap<Term, Term>) -> Term {
    if let TermKind::Var { .. } = expr.kind() {
        return map.get(expr).cloned().unwrap_or_else(|| expr.clone());
    }
    if !expr.has_var_refs() {
        return expr.clone();
    }
    expr.map_children(|c| replace_literal(c, map))
}

/// Repeats `replace_list` until a fixpoint is reached.
pub fn replace_repeated(expr: &Term, rules: &RuleSet, max_iterations: usize) -> Result<Term, RewriteError> {
    let mut cur = expr.clone();
    for _ in 0..max_iterations.max(1) {
        let next = replace_list(&cur, rules);
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
    let last = replace_list(&cur, rules);
    if last == cur {
        return Ok(cur);
    }
    Err(RewriteError::NonTermination { iterations: max_iterations, previous: cur, last })
}

pub fn simplify_with(expr: &Term, rules: &RuleSet, max_iterations: usize) -> Result<Term, RewriteError> {
    replace_repeated(expr, rules, max_iterations)
}

/// Normalizes with R_IF ∪ R_Logic ∪ R_Math and the standard registry.
pub fn simplify(expr: &Term) -> Result<Term, RewriteError> {
    thread_local! {
        static SIMP: RuleSet = RuleSet::simplifier(&FuncRegistry::standard());
    }
    SIMP.with(|s| replace_repeated(expr, s, DEFAULT_MAX_ITERATIONS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Hole;

    fn x() -> Term {
        Term::sym("x")
    }

    #[test]
    fn replace_single_occurrence() {
        let a = Term::sym("a");
        let e = Term::add(vec![a.clone(), x()]);
        let r = RewriteRule::subst(x(), Term::sym("t"));
        assert_eq!(replace(&e, &r), Term::add(vec![a, Term::sym("t")]));
    }

    #[test]
    fn replace_without_occurrence_is_identity() {
        let r = RewriteRule::subst(Term::sym("y"), Term::sym("t"));
        assert_eq!(replace(&x(), &r), x());
    }

    #[test]
    fn replace_all_occurrences() {
        let e = Term::app("f", vec![x(), Term::app("g", vec![x()])]);
        let r = RewriteRule::subst(x(), Term::int(1));
        assert_eq!(replace(&e, &r), Term::app("f", vec![Term::int(1), Term::app("g", vec![Term::int(1)])]));
    }

    #[test]
    fn logic_removes_double_negation_and_duplicates() {
        let a = Term::bsym("a");
        let rl = RuleSet::logic();
        assert_eq!(replace_list(&Term::not(Term::not(a.clone())), &rl), a);
        assert_eq!(replace_list(&Term::and(vec![a.clone(), a.clone()]), &rl), a);
        assert_eq!(replace_list(&Term::int(1), &rl), Term::int(1));
    }

    #[test]
    fn if_rules() {
        let (a, b) = (Term::sym("a"), Term::sym("b"));
        let rif = RuleSet::ite();
        let r = replace_repeated(&Term::ite(Term::tt(), a.clone(), b.clone()), &rif, 100).unwrap();
        assert_eq!(r, a);
        let c = Term::bsym("x");
        let y = Term::sym("y");
        let r = replace_repeated(&Term::ite(c.clone(), y.clone(), y.clone()), &rif, 100).unwrap();
        assert_eq!(r, y);
        let z = Term::sym("z");
        let e = Term::app("f", vec![a.clone(), Term::ite(c.clone(), y.clone(), z.clone())]);
        let r = replace_repeated(&e, &rif, 100).unwrap();
        assert_eq!(
            r,
            Term::ite(c, Term::app("f", vec![a.clone(), y]), Term::app("f", vec![a, z]))
        );
    }

    #[test]
    fn math_combines_like_terms() {
        let e = Term::add(vec![Term::add(vec![x(), x()]), Term::int(1)]);
        let r = replace_repeated(&e, &RuleSet::math(&FuncRegistry::standard()), 100).unwrap();
        assert_eq!(r, Term::add(vec![Term::int(1), Term::mul(vec![Term::int(2), x()])]));
    }

    #[test]
    fn xor_self_is_false() {
        let a = Term::bsym("a");
        let r = replace_repeated(&Term::xor(vec![a.clone(), a]), &RuleSet::logic(), 100).unwrap();
        assert_eq!(r, Term::ff());
    }

    #[test]
    fn growing_rule_set_reports_non_termination() {
        let h = Term::hole(Hole::named("a"));
        let grow = RewriteRule::pattern("grow", Term::app("f", vec![h.clone()]), Term::app("f", vec![Term::app("f", vec![h])]));
        let rs = RuleSet::new(RuleClass::User("grow".into()), vec![grow]);
        let err = replace_repeated(&Term::app("f", vec![x()]), &rs, 5).unwrap_err();
        match err {
            RewriteError::NonTermination { previous, last, .. } => assert_ne!(previous, last),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn guards_restrict_rules() {
        let h = Term::hole(Hole::named("a"));
        let rule = RewriteRule::guarded(
            "fold-const",
            Term::app("g", vec![h.clone()]),
            h.clone(),
            Term::app("is_const", vec![h]),
        );
        assert_eq!(replace(&Term::app("g", vec![Term::int(3)]), &rule), Term::int(3));
        let sym = Term::app("g", vec![x()]);
        assert_eq!(replace(&sym, &rule), sym);
    }

    #[test]
    fn unknown_builtin_name() {
        assert!(matches!(builtin_ruleset("R_Nope"), Err(RewriteError::UnknownRuleSet(_))));
        assert!(builtin_ruleset("R_IF").unwrap().rules.iter().any(|r| r.name == "if-distribute"));
        assert!(builtin_ruleset("R_IF").unwrap().rules.iter().any(|r| r.name == "if-same"));
    }

    #[test]
    fn unbound_rhs_holes_detected() {
        let rule = RewriteRule::pattern("bad", Term::hole(Hole::named("a")), Term::hole(Hole::named("b")));
        assert_eq!(rule.unbound_holes(), vec!["b".to_string()]);
    }
}

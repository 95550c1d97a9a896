//! R_Abst: renames implementation signals to their specification
//! counterparts and removes integer-conversion calls.

use std::collections::HashMap;

use crate::term::{Hole, Term, TermKind};

use super::{RewriteRule, RuleClass, RuleSet};

/// Representation conversions that are dropped before comparison.
pub const CONVERSION_FUNCS: &[&str] = &["to_int"];

/// Builds R_Abst from `(impl name, spec name)` pairs.
pub fn abstraction_rules(correspondence: &[(String, String)]) -> RuleSet {
    let x = Term::hole(Hole::named("x"));
    let mut rules: Vec<RewriteRule> = CONVERSION_FUNCS
        .iter()
        .map(|f| RewriteRule::pattern(format!("drop-{f}"), Term::app(*f, vec![x.clone()]), x.clone()))
        .collect();
    if !correspondence.is_empty() {
        let table: HashMap<String, String> = correspondence.iter().cloned().collect();
        rules.push(RewriteRule::native("rename-signals", move |t| match t.kind() {
            TermKind::Var { name, offset } => table.get(name).map(|s| Term::var(s.clone(), *offset)),
            _ => None,
        }));
    }
    RuleSet::new(RuleClass::Abst, rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::replace_repeated;

    #[test]
    fn conversion_and_rename() {
        let rs = abstraction_rules(&[("impl_out".into(), "spec_out".into())]);
        let t = Term::app("to_int", vec![Term::var("impl_out", 0)]);
        assert_eq!(replace_repeated(&t, &rs, 10).unwrap(), Term::var("spec_out", 0));
    }
}

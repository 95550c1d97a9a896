//! R_IF: reduction and distribution of IF-formulae, plus word selection.

use crate::term::{CmpOp, Hole, LogicOp, Term, TermKind};

use super::RewriteRule;

fn h(name: &str) -> Term {
    Term::hole(Hole::named(name))
}

pub(crate) fn rules() -> Vec<RewriteRule> {
    let (c, x, y) = (h("c"), h("x"), h("y"));
    vec![
        // Distribution runs first; it may grow the term, reductions below shrink it.
        RewriteRule::native("if-distribute", distribute),
        RewriteRule::pattern("if-true", Term::ite(Term::tt(), x.clone(), y.clone()), x.clone()),
        RewriteRule::pattern("if-false", Term::ite(Term::ff(), x.clone(), y.clone()), y.clone()),
        RewriteRule::pattern("if-same", Term::ite(c.clone(), y.clone(), y.clone()), y.clone()),
        RewriteRule::pattern(
            "if-not",
            Term::ite(Term::not(c.clone()), x.clone(), y.clone()),
            Term::ite(c.clone(), y.clone(), x.clone()),
        ),
        RewriteRule::pattern("if-bool", Term::ite(c.clone(), Term::tt(), Term::ff()), c.clone()),
        RewriteRule::pattern("if-bool-neg", Term::ite(c.clone(), Term::ff(), Term::tt()), Term::not(c)),
        RewriteRule::native("if-nested-cond", nested_same_condition),
        RewriteRule::native("word-select", word_select),
        RewriteRule::native("word-compare", word_compare),
    ]
}

/// `f(.., IF(c, y, z), ..) -> IF(c, f(..y..), f(..z..))` for the first IF
/// operand. Applied to word selection and function application always, and
/// to comparisons, arithmetic and logic only when every sibling is ground.
fn distribute(t: &Term) -> Option<Term> {
    let always = match t.kind() {
        TermKind::Index(w, _) => {
            return match w.kind() {
                TermKind::If(c, a, b) => {
                    let TermKind::Index(_, i) = t.kind() else { unreachable!() };
                    Some(Term::ite(
                        c.clone(),
                        Term::index_by(a.clone(), i.clone()),
                        Term::index_by(b.clone(), i.clone()),
                    ))
                }
                _ => None,
            }
        }
        TermKind::App(..) => true,
        TermKind::Arith(..) | TermKind::Logic(..) | TermKind::Cmp(..) => false,
        _ => return None,
    };
    let kids = t.children();
    let pos = kids.iter().position(|k| matches!(k.kind(), TermKind::If(..)))?;
    if !always && !kids.iter().enumerate().all(|(i, k)| i == pos || k.is_ground()) {
        return None;
    }
    let TermKind::If(c, a, b) = kids[pos].kind() else { unreachable!() };
    let with = |v: &Term| {
        let mut nk: Vec<Term> = kids.iter().map(|k| (*k).clone()).collect();
        nk[pos] = v.clone();
        t.with_children(nk)
    };
    Some(Term::ite(c.clone(), with(a), with(b)))
}

/// `IF(c, IF(c, a, b), d) -> IF(c, a, d)` and the mirrored else case.
fn nested_same_condition(t: &Term) -> Option<Term> {
    let TermKind::If(c, th, el) = t.kind() else { return None };
    if let TermKind::If(c2, a, _) = th.kind() {
        if c2 == c {
            return Some(Term::ite(c.clone(), a.clone(), el.clone()));
        }
    }
    if let TermKind::If(c2, _, b) = el.kind() {
        if c2 == c {
            return Some(Term::ite(c.clone(), th.clone(), b.clone()));
        }
    }
    None
}

/// `[a0, .., ak, ..][k] -> ak`
fn word_select(t: &Term) -> Option<Term> {
    let TermKind::Index(w, i) = t.kind() else { return None };
    let TermKind::Tuple(elems) = w.kind() else { return None };
    elems.get(i.as_index()?).cloned()
}

/// Word (in)equality becomes a conjunction (disjunction) over positions.
fn word_compare(t: &Term) -> Option<Term> {
    let TermKind::Cmp(op @ (CmpOp::Eq | CmpOp::Ne), a, b) = t.kind() else { return None };
    let (TermKind::Tuple(xs), TermKind::Tuple(ys)) = (a.kind(), b.kind()) else { return None };
    if xs.len() != ys.len() {
        return None;
    }
    let parts: Vec<Term> = xs.iter().zip(ys).map(|(x, y)| Term::cmp(*op, x.clone(), y.clone())).collect();
    Some(match (op, parts.len()) {
        (CmpOp::Eq, 0) => Term::tt(),
        (_, 0) => Term::ff(),
        (_, 1) => parts.into_iter().next().unwrap(),
        (CmpOp::Eq, _) => Term::logic(LogicOp::And, parts),
        _ => Term::logic(LogicOp::Or, parts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_requires_ground_siblings_for_arith() {
        let c = Term::bsym("c");
        let ground = Term::eq(Term::ite(c.clone(), Term::int(1), Term::int(2)), Term::int(1));
        assert!(distribute(&ground).is_some());
        let open = Term::add(vec![Term::ite(c, Term::int(1), Term::int(2)), Term::sym("x")]);
        assert!(distribute(&open).is_none());
    }

    #[test]
    fn select_from_literal_word() {
        let w = Term::tuple(vec![Term::bsym("a"), Term::bsym("b")]);
        assert_eq!(word_select(&Term::index(w, 1)), Some(Term::bsym("b")));
    }
}

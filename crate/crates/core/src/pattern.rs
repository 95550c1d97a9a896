//! Low-level pattern matching with holes, used by rewrite rules and MatchQ.

use std::collections::BTreeMap;

use crate::sort::{sort_of, NoVars};
use crate::term::{CmpOp, Term, TermKind};

pub type Bindings = BTreeMap<String, Term>;

/// Matches `expr` against `pattern`, extending `bindings` on success. On
/// failure `bindings` is left as it was.
pub fn match_pattern(pattern: &Term, expr: &Term, bindings: &mut Bindings) -> bool {
    let snapshot = bindings.clone();
    if m(pattern, expr, bindings) {
        true
    } else {
        *bindings = snapshot;
        false
    }
}

fn m(p: &Term, e: &Term, b: &mut Bindings) -> bool {
    if p.ptr_eq(e) && !p.has_holes() {
        return true;
    }
    match (p.kind(), e.kind()) {
        (TermKind::Hole(h), _) => {
            if let Some(want) = &h.sort {
                match sort_of(e, &NoVars) {
                    Ok(s) if &s == want => {}
                    _ => return false,
                }
            }
            match &h.name {
                None => true,
                Some(name) => match b.get(name) {
                    Some(bound) => bound == e,
                    None => {
                        b.insert(name.clone(), e.clone());
                        true
                    }
                },
            }
        }
        (TermKind::Const(_), _) | (TermKind::Var { .. }, _) | (TermKind::Sym { .. }, _) => p == e,
        (TermKind::Arith(po, pa), TermKind::Arith(eo, ea)) if po == eo => {
            if po.is_commutative() {
                match_comm(pa, ea, b)
            } else {
                match_list(pa, ea, b)
            }
        }
        (TermKind::Logic(po, pa), TermKind::Logic(eo, ea)) if po == eo => {
            if po.is_commutative() {
                match_comm(pa, ea, b)
            } else {
                match_list(pa, ea, b)
            }
        }
        (TermKind::Cmp(po, pa, pb), TermKind::Cmp(eo, ea, eb)) if po == eo => {
            let ps = [pa.clone(), pb.clone()];
            let es = [ea.clone(), eb.clone()];
            if matches!(po, CmpOp::Eq | CmpOp::Ne) {
                match_comm(&ps, &es, b)
            } else {
                match_list(&ps, &es, b)
            }
        }
        (TermKind::If(pc, pt, pe), TermKind::If(ec, et, ee)) => {
            m(pc, ec, b) && m(pt, et, b) && m(pe, ee, b)
        }
        (TermKind::App(pn, pa), TermKind::App(en, ea)) if pn == en => match_list(pa, ea, b),
        (TermKind::Tuple(pa), TermKind::Tuple(ea)) => match_list(pa, ea, b),
        (TermKind::Index(pw, pi), TermKind::Index(ew, ei)) => m(pw, ew, b) && m(pi, ei, b),
        _ => false,
    }
}

fn is_seq(t: &Term) -> bool {
    matches!(t.kind(), TermKind::Hole(h) if h.seq)
}

fn match_list(ps: &[Term], es: &[Term], b: &mut Bindings) -> bool {
    match ps.split_first() {
        None => es.is_empty(),
        Some((first, rest)) if is_seq(first) => {
            for k in 0..=es.len() {
                let snap = b.clone();
                if match_list(rest, &es[k..], b) {
                    return true;
                }
                *b = snap;
            }
            false
        }
        Some((first, rest)) => {
            let Some((e0, erest)) = es.split_first() else { return false };
            let snap = b.clone();
            if m(first, e0, b) && match_list(rest, erest, b) {
                return true;
            }
            *b = snap;
            false
        }
    }
}

/// Order-insensitive operand matching; sequence holes absorb leftovers.
fn match_comm(ps: &[Term], es: &[Term], b: &mut Bindings) -> bool {
    let has_seq = ps.iter().any(is_seq);
    let mut fixed: Vec<&Term> = ps.iter().filter(|p| !is_seq(p)).collect();
    if fixed.len() > es.len() || (!has_seq && fixed.len() != es.len()) {
        return false;
    }
    // Most constrained first: concrete sub-patterns before bare holes.
    fixed.sort_by_key(|p| matches!(p.kind(), TermKind::Hole(_)));
    let mut used = vec![false; es.len()];
    assign(&fixed, es, &mut used, b)
}

fn assign(fixed: &[&Term], es: &[Term], used: &mut [bool], b: &mut Bindings) -> bool {
    let Some((p, rest)) = fixed.split_first() else { return true };
    for i in 0..es.len() {
        if used[i] {
            continue;
        }
        let snap = b.clone();
        if m(p, &es[i], b) {
            used[i] = true;
            if assign(rest, es, used, b) {
                return true;
            }
            used[i] = false;
        }
        *b = snap;
    }
    false
}

/// Replaces named holes by their bindings. Unbound holes stay in place.
pub fn instantiate(t: &Term, b: &Bindings) -> Term {
    if !t.has_holes() {
        return t.clone();
    }
    t.transform(&mut |n| match n.kind() {
        TermKind::Hole(h) => h.name.as_ref().and_then(|name| b.get(name).cloned()),
        _ => None,
    })
}

/// True when `op` is one of the operators whose operands are order-insensitive.
pub fn is_commutative_node(t: &Term) -> bool {
    match t.kind() {
        TermKind::Arith(op, _) => op.is_commutative(),
        TermKind::Logic(op, _) => op.is_commutative(),
        TermKind::Cmp(op, ..) => matches!(op, CmpOp::Eq | CmpOp::Ne),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Hole;

    fn h(n: &str) -> Term {
        Term::hole(Hole::named(n))
    }

    #[test]
    fn repeated_hole_requires_equal_terms() {
        let p = Term::and(vec![h("a"), h("a")]);
        let mut b = Bindings::new();
        assert!(match_pattern(&p, &Term::and(vec![Term::bsym("x"), Term::bsym("x")]), &mut b));
        let mut b = Bindings::new();
        assert!(!match_pattern(&p, &Term::and(vec![Term::bsym("x"), Term::bsym("y")]), &mut b));
        assert!(b.is_empty());
    }

    #[test]
    fn commutative_operands_match_in_any_order() {
        let x = Term::sym("x");
        let p = Term::add(vec![Term::mul(vec![h("a"), x.clone()]), h("b")]);
        let e = Term::add(vec![Term::int(1), Term::mul(vec![Term::int(2), x])]);
        let mut b = Bindings::new();
        assert!(match_pattern(&p, &e, &mut b));
        assert_eq!(b["a"], Term::int(2));
        assert_eq!(b["b"], Term::int(1));
    }

    #[test]
    fn sequence_hole_absorbs_operands() {
        let p = Term::and(vec![h("a"), Term::not(h("a")), Term::hole(Hole::sequence())]);
        let a = Term::bsym("a");
        let e = Term::and(vec![Term::bsym("q"), Term::not(a.clone()), a, Term::bsym("z")]);
        assert!(match_pattern(&p, &e, &mut Bindings::new()));
    }

    #[test]
    fn instantiate_roundtrip() {
        let p = Term::app("f", vec![h("x"), Term::int(1)]);
        let mut b = Bindings::new();
        b.insert("x".into(), Term::sym("q"));
        assert_eq!(instantiate(&p, &b), Term::app("f", vec![Term::sym("q"), Term::int(1)]));
    }
}

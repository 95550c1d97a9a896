//! R_Logic: boolean simplification.
//!
//! Normal form: `nor`/`nand` expanded, `and`/`or`/`xor` flattened with
//! canonically ordered operands, constants folded, idempotence and
//! complement applied, negations pulled out of `xor` (`xor(True, ..)` keeps
//! an odd number of them). No CNF conversion.

use crate::sort::{sort_of, NoVars};
use crate::term::{CmpOp, Hole, LogicOp, Sort, Term, TermKind};

use super::RewriteRule;

fn h(name: &str) -> Term {
    Term::hole(Hole::named(name))
}

pub(crate) fn rules() -> Vec<RewriteRule> {
    let a = h("a");
    vec![
        RewriteRule::pattern("not-not", Term::not(Term::not(a.clone())), a.clone()),
        RewriteRule::pattern("and-idem", Term::and(vec![a.clone(), a.clone()]), a.clone()),
        RewriteRule::pattern("or-idem", Term::or(vec![a.clone(), a.clone()]), a.clone()),
        RewriteRule::pattern("xor-self", Term::xor(vec![a.clone(), a]), Term::ff()),
        RewriteRule::native("logic-normalize", normalize),
        RewriteRule::native("bool-equality", bool_equality),
    ]
}

fn normalize(t: &Term) -> Option<Term> {
    let TermKind::Logic(op, args) = t.kind() else { return None };
    match op {
        LogicOp::Nor => Some(Term::not(Term::or(args.clone()))),
        LogicOp::Nand => Some(Term::not(Term::and(args.clone()))),
        LogicOp::Not => {
            let [inner] = args.as_slice() else { return None };
            match inner.kind() {
                TermKind::Const(_) => inner.as_bool().map(|b| Term::bool(!b)),
                TermKind::Logic(LogicOp::Not, xs) if xs.len() == 1 => Some(xs[0].clone()),
                TermKind::Logic(LogicOp::Xor, xs) => {
                    let mut v = vec![Term::tt()];
                    v.extend(xs.iter().cloned());
                    Some(normalize_xor(&v))
                }
                TermKind::Cmp(op, a, b) => Some(Term::cmp(op.negate(), a.clone(), b.clone())),
                _ => None,
            }
        }
        LogicOp::And | LogicOp::Or => Some(normalize_and_or(*op, args)),
        LogicOp::Xor => Some(normalize_xor(args)),
    }
}

fn normalize_and_or(op: LogicOp, args: &[Term]) -> Term {
    let (unit, absorbing) = if op == LogicOp::And { (true, false) } else { (false, true) };
    let mut flat = Vec::with_capacity(args.len());
    let mut stack: Vec<&Term> = args.iter().rev().collect();
    while let Some(a) = stack.pop() {
        match a.kind() {
            TermKind::Logic(o, inner) if *o == op => stack.extend(inner.iter().rev()),
            _ => match a.as_bool() {
                Some(b) if b == unit => {}
                Some(_) => return Term::bool(absorbing),
                None => flat.push(a.clone()),
            },
        }
    }
    flat.sort();
    flat.dedup();
    for x in &flat {
        if let TermKind::Logic(LogicOp::Not, inner) = x.kind() {
            if inner.len() == 1 && flat.binary_search(&inner[0]).is_ok() {
                return Term::bool(absorbing);
            }
        }
    }
    match flat.len() {
        0 => Term::bool(unit),
        1 => flat.pop().unwrap(),
        _ => Term::logic(op, flat),
    }
}

fn normalize_xor(args: &[Term]) -> Term {
    let mut parity = false;
    let mut flat: Vec<Term> = Vec::with_capacity(args.len());
    let mut stack: Vec<&Term> = args.iter().rev().collect();
    while let Some(a) = stack.pop() {
        match a.kind() {
            TermKind::Logic(LogicOp::Xor, inner) => stack.extend(inner.iter().rev()),
            TermKind::Logic(LogicOp::Not, inner) if inner.len() == 1 => {
                parity = !parity;
                stack.push(&inner[0]);
            }
            _ => match a.as_bool() {
                Some(b) => parity ^= b,
                None => flat.push(a.clone()),
            },
        }
    }
    flat.sort();
    // Pairs cancel.
    let mut kept: Vec<Term> = Vec::with_capacity(flat.len());
    for x in flat {
        if kept.last() == Some(&x) {
            kept.pop();
        } else {
            kept.push(x);
        }
    }
    match (kept.len(), parity) {
        (0, p) => Term::bool(p),
        (1, false) => kept.pop().unwrap(),
        (1, true) => Term::not(kept.pop().unwrap()),
        (_, false) => Term::logic(LogicOp::Xor, kept),
        (_, true) => {
            let mut v = vec![Term::tt()];
            v.extend(kept);
            Term::logic(LogicOp::Xor, v)
        }
    }
}

/// Equality of booleans is `not xor`; inequality is `xor`.
fn bool_equality(t: &Term) -> Option<Term> {
    let TermKind::Cmp(op @ (CmpOp::Eq | CmpOp::Ne), a, b) = t.kind() else { return None };
    let boolish = |x: &Term| match x.kind() {
        TermKind::Const(_) => x.as_bool().is_some(),
        TermKind::Logic(..) | TermKind::Cmp(..) => true,
        TermKind::Sym { sort, .. } => *sort == crate::term::ScalarSort::Bool,
        _ => sort_of(x, &NoVars).ok() == Some(Sort::Bool),
    };
    if !(boolish(a) || boolish(b)) || sort_of(t, &NoVars).is_err() {
        return None;
    }
    let mut v = vec![a.clone(), b.clone()];
    if *op == CmpOp::Eq {
        v.insert(0, Term::tt());
    }
    Some(normalize_xor(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_folds() {
        let a = Term::bsym("a");
        assert_eq!(normalize(&Term::and(vec![a.clone(), Term::not(a.clone())])), Some(Term::ff()));
        assert_eq!(normalize(&Term::or(vec![Term::not(a.clone()), a])), Some(Term::tt()));
    }

    #[test]
    fn xor_pulls_out_negations() {
        let (a, b) = (Term::bsym("a"), Term::bsym("b"));
        let t = Term::xor(vec![Term::not(a.clone()), b.clone()]);
        assert_eq!(normalize(&t), Some(Term::xor(vec![Term::tt(), a.clone(), b.clone()])));
        let t = Term::xor(vec![Term::not(a.clone()), a.clone(), b.clone()]);
        assert_eq!(normalize(&t), Some(Term::not(b)));
    }

    #[test]
    fn boolean_equality_is_xnor() {
        let (a, b) = (Term::bsym("a"), Term::bsym("b"));
        assert_eq!(bool_equality(&Term::eq(a.clone(), a.clone())), Some(Term::tt()));
        assert_eq!(
            bool_equality(&Term::cmp(CmpOp::Ne, a.clone(), b.clone())),
            Some(Term::xor(vec![a, b]))
        );
    }
}

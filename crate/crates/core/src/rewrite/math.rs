//! R_Math: polynomial normal form over exact rationals.
//!
//! A numeric expression is expanded into a sum of monomials with combined
//! like terms and reduced rational coefficients. Anything that is not
//! arithmetic (IF nodes, function applications, word selections, division by
//! a non-constant) is treated as an opaque atom.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::eval::{compare, eval, Assignment, FuncRegistry, Value};
use crate::term::{ArithOp, CmpOp, Rational, Term, TermKind};

use super::RewriteRule;

/// Atoms with their powers, sorted by atom.
pub type Monomial = Vec<(Term, u32)>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly(BTreeMap<Monomial, Rational>);

impl Poly {
    pub fn constant(c: Rational) -> Poly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Vec::new(), c);
        }
        Poly(m)
    }

    pub fn atom(t: Term) -> Poly {
        Poly(BTreeMap::from([(vec![(t, 1)], Rational::one())]))
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => self.0.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn add(mut self, other: &Poly) -> Poly {
        for (m, c) in &other.0 {
            let e = self.0.entry(m.clone()).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                self.0.remove(m);
            }
        }
        self
    }

    pub fn scale(mut self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::default();
        }
        for c in self.0.values_mut() {
            *c *= k;
        }
        self
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let term = Poly(BTreeMap::from([(mul_mono(m1, m2), c1 * c2)]));
                out = out.add(&term);
            }
        }
        out
    }

    pub fn from_term(t: &Term) -> Poly {
        match t.kind() {
            TermKind::Const(_) if t.as_num().is_some() => Poly::constant(t.as_num().unwrap().clone()),
            TermKind::Arith(op, args) if !args.is_empty() => match op {
                ArithOp::Add => args.iter().fold(Poly::default(), |acc, a| acc.add(&Poly::from_term(a))),
                ArithOp::Sub => {
                    let first = Poly::from_term(&args[0]);
                    if args.len() == 1 {
                        first.scale(&-Rational::one())
                    } else {
                        args[1..]
                            .iter()
                            .fold(first, |acc, a| acc.add(&Poly::from_term(a).scale(&-Rational::one())))
                    }
                }
                ArithOp::Mul => {
                    args.iter().fold(Poly::constant(Rational::one()), |acc, a| acc.mul(&Poly::from_term(a)))
                }
                ArithOp::Div => {
                    let first = Poly::from_term(&args[0]);
                    let divisors: Vec<Poly> = args[1..].iter().map(Poly::from_term).collect();
                    let consts: Option<Vec<Rational>> = divisors
                        .iter()
                        .map(|d| d.as_constant().filter(|c| !c.is_zero()))
                        .collect();
                    match consts {
                        Some(cs) => cs.iter().fold(first, |acc, c| acc.scale(&c.recip())),
                        None => {
                            let mut parts = vec![first.to_term()];
                            parts.extend(divisors.iter().map(Poly::to_term));
                            Poly::atom(Term::div(parts))
                        }
                    }
                }
            },
            _ => Poly::atom(t.clone()),
        }
    }

    pub fn to_term(&self) -> Term {
        let mut monos: Vec<Term> = self.0.iter().map(|(m, c)| mono_term(m, c)).collect();
        match monos.len() {
            0 => Term::int(0),
            1 => monos.pop().unwrap(),
            _ => Term::add(monos),
        }
    }
}

fn mul_mono(a: &Monomial, b: &Monomial) -> Monomial {
    let mut map: BTreeMap<Term, u32> = BTreeMap::new();
    for (t, p) in a.iter().chain(b) {
        *map.entry(t.clone()).or_insert(0) += p;
    }
    map.into_iter().collect()
}

fn mono_term(m: &Monomial, c: &Rational) -> Term {
    let mut factors: Vec<Term> = Vec::new();
    if !c.is_one() || m.is_empty() {
        factors.push(Term::rational(c.clone()));
    }
    for (t, p) in m {
        for _ in 0..*p {
            factors.push(t.clone());
        }
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Term::mul(factors)
    }
}

/// Normal form of an arithmetic term.
pub fn normalize_polynomial(t: &Term) -> Term {
    Poly::from_term(t).to_term()
}

pub(crate) fn rules(reg: &FuncRegistry) -> Vec<RewriteRule> {
    let reg = reg.clone();
    vec![
        RewriteRule::native("poly-normalize", |t| match t.kind() {
            TermKind::Arith(_, args) if !args.is_empty() => Some(normalize_polynomial(t)),
            _ => None,
        }),
        RewriteRule::native("compare-fold", compare_fold),
        RewriteRule::native("function-fold", move |t| function_fold(t, &reg)),
    ]
}

fn compare_fold(t: &Term) -> Option<Term> {
    let TermKind::Cmp(op, a, b) = t.kind() else { return None };
    if let (Some(va), Some(vb)) = (Value::from_term(a), Value::from_term(b)) {
        return compare(*op, &va, &vb).ok().map(Term::bool);
    }
    if a == b {
        return Some(Term::bool(matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge)));
    }
    let numeric = |x: &Term| x.as_num().is_some() || matches!(x.kind(), TermKind::Arith(..));
    if numeric(a) || numeric(b) {
        let diff = Poly::from_term(a).add(&Poly::from_term(b).scale(&-Rational::one()));
        if let Some(d) = diff.as_constant() {
            let ord = if d.is_zero() {
                std::cmp::Ordering::Equal
            } else if d.is_positive() {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Less
            };
            return Some(Term::bool(op.holds(ord)));
        }
    }
    if matches!(op, CmpOp::Eq | CmpOp::Ne) && b < a {
        return Some(Term::cmp(*op, b.clone(), a.clone()));
    }
    None
}

/// Evaluates registered functions on constant arguments; `len` of a literal
/// word is its length even when the elements are symbolic.
fn function_fold(t: &Term, reg: &FuncRegistry) -> Option<Term> {
    let TermKind::App(name, args) = t.kind() else { return None };
    if name == "len" {
        if let [w] = args.as_slice() {
            if let TermKind::Tuple(elems) = w.kind() {
                return Some(Term::int(elems.len() as i64));
            }
        }
    }
    if !reg.contains(name) || !args.iter().all(|a| Value::from_term(a).is_some()) {
        return None;
    }
    eval(t, &Assignment::new(), reg).ok().map(|v| v.to_term())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_form_is_idempotent() {
        let x = Term::sym("x");
        let y = Term::sym("y");
        let t = Term::mul(vec![
            Term::add(vec![x.clone(), Term::int(1)]),
            Term::sub(vec![y.clone(), Term::div(vec![x.clone(), Term::int(2)])]),
        ]);
        let n = normalize_polynomial(&t);
        assert_eq!(normalize_polynomial(&n), n);
    }

    #[test]
    fn cancellation_to_zero() {
        let x = Term::sym("x");
        let t = Term::sub(vec![x.clone(), x]);
        assert_eq!(normalize_polynomial(&t), Term::int(0));
    }

    #[test]
    fn non_constant_divisor_is_an_atom() {
        let x = Term::sym("x");
        let t = Term::div(vec![Term::add(vec![x.clone(), x.clone()]), x.clone()]);
        let n = normalize_polynomial(&t);
        assert_eq!(n, Term::div(vec![Term::mul(vec![Term::int(2), x.clone()]), x]));
        assert_eq!(normalize_polynomial(&n), n);
    }

    #[test]
    fn compare_with_constant_difference_folds() {
        let x = Term::sym("x");
        let t = Term::cmp(CmpOp::Lt, x.clone(), Term::add(vec![x, Term::int(1)]));
        assert_eq!(compare_fold(&t), Some(Term::tt()));
    }
}

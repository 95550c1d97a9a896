//! The generalized If-formula term language.
//!
//! Terms are immutable, reference-counted trees. Cloning a term is cheap and
//! identical sub-terms may be shared between several parents (and between
//! several cycles of a trace).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

/// Exact constant values. Reals are represented by rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    Bool(bool),
    Num(Rational),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScalarSort {
    Bool,
    Num,
}

/// Sort of a term: boolean, numeric, or a fixed-length word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Num,
    Tuple(Box<Sort>, usize),
}

impl Sort {
    pub fn bits(len: usize) -> Sort {
        Sort::Tuple(Box::new(Sort::Bool), len)
    }

    pub fn scalar(&self) -> Option<ScalarSort> {
        match self {
            Sort::Bool => Some(ScalarSort::Bool),
            Sort::Num => Some(ScalarSort::Num),
            Sort::Tuple(..) => None,
        }
    }
}

impl From<ScalarSort> for Sort {
    fn from(s: ScalarSort) -> Self {
        match s {
            ScalarSort::Bool => Sort::Bool,
            ScalarSort::Num => Sort::Num,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("bool"),
            Sort::Num => f.write_str("num"),
            Sort::Tuple(elem, len) => write!(f, "[{elem}; {len}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicOp {
    Not,
    And,
    Or,
    Xor,
    Nor,
    Nand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl ArithOp {
    pub fn is_commutative(self) -> bool {
        matches!(self, ArithOp::Add | ArithOp::Mul)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    pub fn fn_name(self) -> &'static str {
        match self {
            ArithOp::Add => "add",
            ArithOp::Sub => "sub",
            ArithOp::Mul => "mul",
            ArithOp::Div => "div",
        }
    }
}

impl LogicOp {
    pub fn is_commutative(self) -> bool {
        matches!(self, LogicOp::And | LogicOp::Or | LogicOp::Xor)
    }

    pub fn name(self) -> &'static str {
        match self {
            LogicOp::Not => "not",
            LogicOp::And => "and",
            LogicOp::Or => "or",
            LogicOp::Xor => "xor",
            LogicOp::Nor => "nor",
            LogicOp::Nand => "nand",
        }
    }

    pub fn from_name(name: &str) -> Option<LogicOp> {
        Some(match name {
            "not" => LogicOp::Not,
            "and" => LogicOp::And,
            "or" => LogicOp::Or,
            "xor" => LogicOp::Xor,
            "nor" => LogicOp::Nor,
            "nand" => LogicOp::Nand,
            _ => return None,
        })
    }
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator obtained by swapping the operands.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

/// Pattern variable. Only meaningful inside patterns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hole {
    pub name: Option<String>,
    pub sort: Option<Sort>,
    pub seq: bool,
}

impl Hole {
    pub fn wildcard() -> Hole {
        Hole { name: None, sort: None, seq: false }
    }

    pub fn named(name: impl Into<String>) -> Hole {
        Hole { name: Some(name.into()), sort: None, seq: false }
    }

    pub fn sorted(name: impl Into<String>, sort: Sort) -> Hole {
        Hole { name: Some(name.into()), sort: Some(sort), seq: false }
    }

    pub fn sequence() -> Hole {
        Hole { name: None, sort: None, seq: true }
    }
}

/// Variant order doubles as the canonical operand order: constants first,
/// then variable references by name, then compound terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Const(Const),
    /// `name(n - offset)`
    Var { name: String, offset: u32 },
    /// A free symbolic value.
    Sym { name: String, sort: ScalarSort },
    Arith(ArithOp, Vec<Term>),
    Logic(LogicOp, Vec<Term>),
    Cmp(CmpOp, Term, Term),
    If(Term, Term, Term),
    App(String, Vec<Term>),
    Tuple(Vec<Term>),
    Index(Term, Term),
    Hole(Hole),
}

#[derive(Clone, Eq, PartialOrd, Ord)]
pub struct Term(Arc<TermKind>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<TermKind> for Term {
    fn from(kind: TermKind) -> Self {
        Term(Arc::new(kind))
    }
}

impl Term {
    pub fn new(kind: TermKind) -> Term {
        Term(Arc::new(kind))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn constant(c: Const) -> Term {
        Term::new(TermKind::Const(c))
    }

    pub fn bool(b: bool) -> Term {
        Term::constant(Const::Bool(b))
    }

    pub fn tt() -> Term {
        Term::bool(true)
    }

    pub fn ff() -> Term {
        Term::bool(false)
    }

    pub fn int(v: i64) -> Term {
        Term::constant(Const::Num(Rational::from_integer(BigInt::from(v))))
    }

    pub fn rational(v: Rational) -> Term {
        Term::constant(Const::Num(v))
    }

    pub fn frac(num: i64, den: i64) -> Term {
        Term::rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn var(name: impl Into<String>, offset: u32) -> Term {
        Term::new(TermKind::Var { name: name.into(), offset })
    }

    pub fn sym(name: impl Into<String>) -> Term {
        Term::new(TermKind::Sym { name: name.into(), sort: ScalarSort::Num })
    }

    pub fn bsym(name: impl Into<String>) -> Term {
        Term::new(TermKind::Sym { name: name.into(), sort: ScalarSort::Bool })
    }

    pub fn arith(op: ArithOp, args: Vec<Term>) -> Term {
        Term::new(TermKind::Arith(op, args))
    }

    pub fn add(args: Vec<Term>) -> Term {
        Term::arith(ArithOp::Add, args)
    }

    pub fn sub(args: Vec<Term>) -> Term {
        Term::arith(ArithOp::Sub, args)
    }

    pub fn mul(args: Vec<Term>) -> Term {
        Term::arith(ArithOp::Mul, args)
    }

    pub fn div(args: Vec<Term>) -> Term {
        Term::arith(ArithOp::Div, args)
    }

    pub fn logic(op: LogicOp, args: Vec<Term>) -> Term {
        Term::new(TermKind::Logic(op, args))
    }

    pub fn not(a: Term) -> Term {
        Term::logic(LogicOp::Not, vec![a])
    }

    pub fn and(args: Vec<Term>) -> Term {
        Term::logic(LogicOp::And, args)
    }

    pub fn or(args: Vec<Term>) -> Term {
        Term::logic(LogicOp::Or, args)
    }

    pub fn xor(args: Vec<Term>) -> Term {
        Term::logic(LogicOp::Xor, args)
    }

    pub fn cmp(op: CmpOp, lhs: Term, rhs: Term) -> Term {
        Term::new(TermKind::Cmp(op, lhs, rhs))
    }

    pub fn eq(lhs: Term, rhs: Term) -> Term {
        Term::cmp(CmpOp::Eq, lhs, rhs)
    }

    pub fn ite(cond: Term, then: Term, els: Term) -> Term {
        Term::new(TermKind::If(cond, then, els))
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::new(TermKind::App(name.into(), args))
    }

    pub fn tuple(elems: Vec<Term>) -> Term {
        Term::new(TermKind::Tuple(elems))
    }

    pub fn index(word: Term, idx: usize) -> Term {
        Term::new(TermKind::Index(word, Term::int(idx as i64)))
    }

    pub fn index_by(word: Term, idx: Term) -> Term {
        Term::new(TermKind::Index(word, idx))
    }

    pub fn hole(h: Hole) -> Term {
        Term::new(TermKind::Hole(h))
    }

    pub fn as_const(&self) -> Option<&Const> {
        match self.kind() {
            TermKind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.kind() {
            TermKind::Const(Const::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self.kind() {
            TermKind::Const(Const::Num(r)) => Some(r),
            _ => None,
        }
    }

    /// A constant natural number usable as a tuple index.
    pub fn as_index(&self) -> Option<usize> {
        let r = self.as_num()?;
        if r.is_integer() && !r.is_negative() {
            r.to_integer().to_usize()
        } else {
            None
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self.kind(), TermKind::Const(_))
    }

    pub fn children(&self) -> Vec<&Term> {
        match self.kind() {
            TermKind::Const(_) | TermKind::Var { .. } | TermKind::Sym { .. } | TermKind::Hole(_) => {
                Vec::new()
            }
            TermKind::Arith(_, args)
            | TermKind::Logic(_, args)
            | TermKind::App(_, args)
            | TermKind::Tuple(args) => args.iter().collect(),
            TermKind::Cmp(_, a, b) | TermKind::Index(a, b) => vec![a, b],
            TermKind::If(c, t, e) => vec![c, t, e],
        }
    }

    /// Rebuilds this node with new children (same count as `children()`).
    pub fn with_children(&self, mut kids: Vec<Term>) -> Term {
        let kind = match self.kind() {
            TermKind::Const(_) | TermKind::Var { .. } | TermKind::Sym { .. } | TermKind::Hole(_) => {
                return self.clone()
            }
            TermKind::Arith(op, _) => TermKind::Arith(*op, kids),
            TermKind::Logic(op, _) => TermKind::Logic(*op, kids),
            TermKind::App(name, _) => TermKind::App(name.clone(), kids),
            TermKind::Tuple(_) => TermKind::Tuple(kids),
            TermKind::Cmp(op, _, _) => {
                let b = kids.pop().expect("cmp rhs");
                let a = kids.pop().expect("cmp lhs");
                TermKind::Cmp(*op, a, b)
            }
            TermKind::Index(_, _) => {
                let b = kids.pop().expect("index");
                let a = kids.pop().expect("word");
                TermKind::Index(a, b)
            }
            TermKind::If(..) => {
                let e = kids.pop().expect("else");
                let t = kids.pop().expect("then");
                let c = kids.pop().expect("cond");
                TermKind::If(c, t, e)
            }
        };
        Term::new(kind)
    }

    /// Applies `f` to every child, reusing this node when nothing changed.
    pub fn map_children(&self, mut f: impl FnMut(&Term) -> Term) -> Term {
        let kids = self.children();
        if kids.is_empty() {
            return self.clone();
        }
        let mut changed = false;
        let new: Vec<Term> = kids
            .into_iter()
            .map(|k| {
                let n = f(k);
                if !n.ptr_eq(k) && n != *k {
                    changed = true;
                }
                n
            })
            .collect();
        if changed {
            self.with_children(new)
        } else {
            self.clone()
        }
    }

    /// Bottom-up rewrite of every node.
    pub fn transform(&self, f: &mut impl FnMut(&Term) -> Option<Term>) -> Term {
        let rebuilt = self.map_children(|c| c.transform(f));
        f(&rebuilt).unwrap_or(rebuilt)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn any(&self, pred: &impl Fn(&Term) -> bool) -> bool {
        pred(self) || self.children().iter().any(|c| c.any(pred))
    }

    /// Every variable reference `(name, offset)` and symbolic input `(name, 0)`.
    pub fn free_symbols(&self) -> BTreeSet<(String, u32)> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<(String, u32)>) {
        match self.kind() {
            TermKind::Var { name, offset } => {
                out.insert((name.clone(), *offset));
            }
            TermKind::Sym { name, .. } => {
                out.insert((name.clone(), 0));
            }
            _ => self.children().iter().for_each(|c| c.collect_free(out)),
        }
    }

    pub fn var_refs(&self) -> BTreeSet<(String, u32)> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let TermKind::Var { name, offset } = t.kind() {
                out.insert((name.clone(), *offset));
            }
        });
        out
    }

    /// Symbolic inputs with their sorts.
    pub fn syms(&self) -> BTreeSet<(String, ScalarSort)> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let TermKind::Sym { name, sort } = t.kind() {
                out.insert((name.clone(), *sort));
            }
        });
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// No variable references, symbols or holes.
    pub fn is_ground(&self) -> bool {
        !self.any(&|t| {
            matches!(t.kind(), TermKind::Var { .. } | TermKind::Sym { .. } | TermKind::Hole(_))
        })
    }

    pub fn has_var_refs(&self) -> bool {
        self.any(&|t| matches!(t.kind(), TermKind::Var { .. }))
    }

    pub fn has_holes(&self) -> bool {
        self.any(&|t| matches!(t.kind(), TermKind::Hole(_)))
    }

    /// Sorts the operands of commutative operators into canonical order,
    /// flattening nested applications of the same associative operator.
    pub fn canonicalize(&self) -> Term {
        self.transform(&mut |t| match t.kind() {
            TermKind::Arith(op, args) if op.is_commutative() => {
                Some(Term::arith(*op, flatten_sorted(args, |k| matches!(k, TermKind::Arith(o, _) if o == op))))
            }
            TermKind::Logic(op, args) if op.is_commutative() => {
                Some(Term::logic(*op, flatten_sorted(args, |k| matches!(k, TermKind::Logic(o, _) if o == op))))
            }
            TermKind::Cmp(op @ (CmpOp::Eq | CmpOp::Ne), a, b) if b < a => {
                Some(Term::cmp(*op, b.clone(), a.clone()))
            }
            _ => None,
        })
    }
}

fn flatten_sorted(args: &[Term], same: impl Fn(&TermKind) -> bool) -> Vec<Term> {
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        if same(a.kind()) {
            out.extend(a.children().into_iter().cloned());
        } else {
            out.push(a.clone());
        }
    }
    out.sort();
    out
}

pub fn rational_from_i64(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}

pub fn is_one(r: &Rational) -> bool {
    r.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_symbols_of_sum() {
        let t = Term::add(vec![Term::var("X", 1), Term::var("Y", 2)]);
        let fs = t.free_symbols();
        assert_eq!(fs.len(), 2);
        assert!(fs.contains(&("X".to_string(), 1)));
        assert!(fs.contains(&("Y".to_string(), 2)));
        assert!(Term::int(5).free_symbols().is_empty());
        assert!(Term::int(5).is_ground());
    }

    #[test]
    fn canonical_order_constants_first() {
        let t = Term::add(vec![Term::app("f", vec![]), Term::var("b", 0), Term::int(3), Term::var("a", 0)]);
        let c = t.canonicalize();
        match c.kind() {
            TermKind::Arith(ArithOp::Add, args) => {
                assert_eq!(args[0], Term::int(3));
                assert_eq!(args[1], Term::var("a", 0));
                assert_eq!(args[2], Term::var("b", 0));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn canonicalize_flattens() {
        let a = Term::bsym("a");
        let b = Term::bsym("b");
        let c = Term::bsym("c");
        let l = Term::and(vec![a.clone(), Term::and(vec![c.clone(), b.clone()])]).canonicalize();
        let r = Term::and(vec![Term::and(vec![b, a]), c]).canonicalize();
        assert_eq!(l, r);
    }
}

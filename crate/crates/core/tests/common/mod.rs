#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use sresim::dsl::{Item, Module, RuleDecl, RuleSetDecl};
use sresim::equiv::{JobDecl, ModelRef, Side};
use sresim::prop::{Category, Clause, Property, Quantifier};
use sresim::sim::Scenario;
use sresim::system::{Decl, Equation, Initial, SreSystem};
use sresim::term::{ArithOp, CmpOp, Hole, LogicOp, ScalarSort, Sort, Term, TermKind};

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models")
}

pub const BOOL_SYMS: [&str; 4] = ["b0", "b1", "b2", "b3"];
pub const NUM_SYMS: [&str; 3] = ["x0", "x1", "x2"];

const CMP_OPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

fn small_rational(rng: &mut StdRng) -> Term {
    if rng.gen_bool(0.7) {
        Term::int(rng.gen_range(-3..=3))
    } else {
        Term::frac(rng.gen_range(-5..=5), rng.gen_range(1..=4))
    }
}

/// Random well-sorted scalar term over [`BOOL_SYMS`] and [`NUM_SYMS`].
pub fn random_scalar(rng: &mut StdRng, sort: ScalarSort, depth: usize) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    match sort {
        ScalarSort::Bool if leaf => {
            if rng.gen_bool(0.8) {
                Term::bsym(*BOOL_SYMS.choose(rng).unwrap())
            } else {
                Term::bool(rng.gen())
            }
        }
        ScalarSort::Num if leaf => {
            if rng.gen_bool(0.6) {
                Term::sym(*NUM_SYMS.choose(rng).unwrap())
            } else {
                small_rational(rng)
            }
        }
        ScalarSort::Bool => {
            let d = depth - 1;
            match rng.gen_range(0..6) {
                0 => Term::not(random_scalar(rng, ScalarSort::Bool, d)),
                1..=3 => {
                    let op = *[LogicOp::And, LogicOp::Or, LogicOp::Xor].choose(rng).unwrap();
                    let n = rng.gen_range(2..=3);
                    Term::logic(op, (0..n).map(|_| random_scalar(rng, ScalarSort::Bool, d)).collect())
                }
                4 => Term::cmp(*CMP_OPS.choose(rng).unwrap(), random_scalar(rng, ScalarSort::Num, d), random_scalar(rng, ScalarSort::Num, d)),
                _ => Term::ite(random_scalar(rng, ScalarSort::Bool, d), random_scalar(rng, ScalarSort::Bool, d), random_scalar(rng, ScalarSort::Bool, d)),
            }
        }
        ScalarSort::Num => {
            let d = depth - 1;
            match rng.gen_range(0..6) {
                0 => Term::sub(vec![random_scalar(rng, ScalarSort::Num, d)]),
                1 | 2 => {
                    let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul].choose(rng).unwrap();
                    let n = rng.gen_range(2..=3);
                    Term::arith(op, (0..n).map(|_| random_scalar(rng, ScalarSort::Num, d)).collect())
                }
                3 => Term::div(vec![random_scalar(rng, ScalarSort::Num, d), random_scalar(rng, ScalarSort::Num, d)]),
                _ => Term::ite(random_scalar(rng, ScalarSort::Bool, d), random_scalar(rng, ScalarSort::Num, d), random_scalar(rng, ScalarSort::Num, d)),
            }
        }
    }
}

// ---- random source units ----

const KEYWORDS: [&str; 21] = [
    "True", "False", "IF", "rat", "and", "or", "xor", "not", "add", "sub", "mul", "div", "n", "bool", "num", "forall", "when", "horizon",
    "in", "if", "system",
];

fn ident(rng: &mut StdRng) -> String {
    loop {
        let len = rng.gen_range(1..=6);
        let mut s = String::new();
        s.push(*b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz".choose(rng).unwrap() as char);
        for _ in 1..len {
            s.push(*b"abcdefghijklmnopqrstuvwxyz0123456789_".choose(rng).unwrap() as char);
        }
        if rng.gen_bool(0.2) {
            s.push('.');
            s.push_str(&ident(rng));
        }
        if !KEYWORDS.contains(&s.as_str()) {
            return s;
        }
    }
}

fn random_sort(rng: &mut StdRng, depth: usize) -> Sort {
    match rng.gen_range(0..if depth == 0 { 2 } else { 3 }) {
        0 => Sort::Bool,
        1 => Sort::Num,
        _ => Sort::Tuple(Box::new(random_sort(rng, depth - 1)), rng.gen_range(0..=8)),
    }
}

fn literal(rng: &mut StdRng) -> Term {
    match rng.gen_range(0..4) {
        0 => Term::bool(rng.gen()),
        1 => Term::int(rng.gen_range(-1000..=1000)),
        2 => Term::frac(rng.gen_range(-50..=50), rng.gen_range(2..=9)),
        _ => Term::tuple((0..rng.gen_range(0..=4)).map(|_| Term::bool(rng.gen())).collect()),
    }
}

/// Random term in the surface syntax: everything the parser can produce
/// except names of constants, which are resolved while parsing.
/// `holes` allows pattern holes; `bound` names quantifier variables.
pub fn random_surface_term(rng: &mut StdRng, depth: usize, holes: bool, bound: &[String]) -> Term {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..if holes { 7 } else { 5 }) {
            0 => literal(rng),
            1 => Term::var(ident(rng), rng.gen_range(0..=3)),
            2 => {
                let name = ident(rng);
                let sort = if rng.gen() && !bound.contains(&name) { ScalarSort::Bool } else { ScalarSort::Num };
                Term::new(TermKind::Sym { name, sort })
            }
            3 if !bound.is_empty() => Term::sym(bound.choose(rng).unwrap().clone()),
            3 | 4 => Term::var(ident(rng), 0),
            5 => Term::hole(match rng.gen_range(0..3) {
                0 => Hole::wildcard(),
                1 => Hole::named(ident(rng)),
                _ => Hole::sorted(ident(rng), random_sort(rng, 1)),
            }),
            _ => Term::hole(Hole::sequence()),
        };
    }
    let d = depth - 1;
    let sub = |rng: &mut StdRng| random_surface_term(rng, d, holes, bound);
    match rng.gen_range(0..9) {
        0 => {
            let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div].choose(rng).unwrap();
            let n = rng.gen_range(0..=4);
            Term::arith(op, (0..n).map(|_| sub(rng)).collect())
        }
        1 => {
            let op = *[LogicOp::And, LogicOp::Or, LogicOp::Xor, LogicOp::Not].choose(rng).unwrap();
            let n = if op == LogicOp::Not { 1 } else { rng.gen_range(0..=3) };
            Term::logic(op, (0..n).map(|_| sub(rng)).collect())
        }
        2 => Term::cmp(*CMP_OPS.choose(rng).unwrap(), sub(rng), sub(rng)),
        3 => Term::ite(sub(rng), sub(rng), sub(rng)),
        4 => {
            let n = rng.gen_range(1..=3);
            Term::app(ident(rng), (0..n).map(|_| sub(rng)).collect())
        }
        5 => Term::tuple((0..rng.gen_range(0..=3)).map(|_| sub(rng)).collect()),
        6 => Term::index_by(sub(rng), sub(rng)),
        7 => Term::index(sub(rng), rng.gen_range(0..8)),
        _ => Term::int(-rng.gen_range(1..100)),
    }
}

fn decls(rng: &mut StdRng) -> Vec<Decl> {
    (0..rng.gen_range(0..=3)).map(|_| Decl::new(ident(rng), rng.gen_bool(0.7).then(|| random_sort(rng, 2)))).collect()
}

fn random_system(rng: &mut StdRng) -> SreSystem {
    let mut s = SreSystem::new(ident(rng));
    s.inputs = decls(rng);
    s.controls = decls(rng);
    s.vars = decls(rng);
    s.outputs = (0..rng.gen_range(0..=2)).map(|_| ident(rng)).collect();
    for _ in 0..rng.gen_range(0..=2) {
        s.initial.push(Initial { name: ident(rng), time: rng.gen_range(-3..=0), value: random_surface_term(rng, 2, false, &[]) });
    }
    for _ in 0..rng.gen_range(0..=4) {
        s.equations.push(Equation { target: ident(rng), body: random_surface_term(rng, 4, false, &[]) });
    }
    s
}

fn random_property(rng: &mut StdRng) -> Property {
    let category = *[Category::Global, Category::Local, Category::Control].choose(rng).unwrap();
    let clauses = (0..rng.gen_range(0..=3))
        .map(|_| {
            let mut bound: Vec<String> = Vec::new();
            let mut quantifiers = Vec::new();
            for _ in 0..rng.gen_range(0..=2) {
                let var = loop {
                    let v = ident(rng);
                    if !bound.contains(&v) {
                        break v;
                    }
                };
                let lo = random_surface_term(rng, 1, false, &bound);
                let hi = random_surface_term(rng, 2, false, &bound);
                bound.push(var.clone());
                quantifiers.push(Quantifier { var, lo, hi });
            }
            let guard = rng.gen_bool(0.4).then(|| random_surface_term(rng, 2, false, &bound));
            Clause { guard, quantifiers, body: random_surface_term(rng, 3, false, &bound) }
        })
        .collect();
    Property { name: ident(rng), category, horizon: rng.gen_range(0..20), clauses }
}

fn random_job(rng: &mut StdRng) -> JobDecl {
    let mut j = JobDecl::new(ident(rng));
    j.spec = ModelRef { path: format!("{}.sre", ident(rng)), system: ident(rng) };
    j.imp = ModelRef { path: format!("dir/{}.sre", ident(rng)), system: ident(rng) };
    j.k_spec = rng.gen_range(0..10);
    j.k_imp = rng.gen_range(0..10);
    j.correspondence = (0..rng.gen_range(0..=3)).map(|_| (ident(rng), ident(rng))).collect();
    j.compare = (0..rng.gen_range(0..=3)).map(|_| ident(rng)).collect();
    j.scenarios = (0..rng.gen_range(0..=3)).map(|_| ident(rng)).collect();
    j.bug = rng.gen_bool(0.5).then(|| (ident(rng), if rng.gen() { Side::Spec } else { Side::Impl }));
    j
}

/// Random module whose items are all in the form the parser produces.
pub fn random_module(rng: &mut StdRng) -> Module {
    let items = (0..rng.gen_range(0..=6))
        .map(|_| match rng.gen_range(0..7) {
            0 => Item::Include(format!("{}/{}.sre", ident(rng), ident(rng))),
            1 => Item::Const(ident(rng), literal(rng)),
            2 => Item::System(random_system(rng)),
            3 => Item::RuleSet(RuleSetDecl {
                name: ident(rng),
                rules: (0..rng.gen_range(0..=3))
                    .map(|_| RuleDecl {
                        lhs: random_surface_term(rng, 3, true, &[]),
                        rhs: random_surface_term(rng, 3, true, &[]),
                        guard: rng.gen_bool(0.3).then(|| random_surface_term(rng, 2, true, &[])),
                    })
                    .collect(),
            }),
            4 => Item::Property(random_property(rng)),
            5 => Item::Scenario(Scenario {
                name: ident(rng),
                bindings: (0..rng.gen_range(0..=3)).map(|_| (ident(rng), random_surface_term(rng, 2, false, &[]))).collect(),
            }),
            _ => Item::Job(random_job(rng)),
        })
        .collect();
    Module { items }
}

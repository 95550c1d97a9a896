//! Canonical text form. `parse(print(x))` reproduces `x` structurally.

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use num_traits::Signed;

use super::{Item, Module, RuleSetDecl};
use crate::equiv::JobDecl;
use crate::prop::Property;
use crate::sim::Scenario;
use crate::system::{Decl, SreSystem};
use crate::term::{ArithOp, Const, Hole, ScalarSort, Term, TermKind};

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Bool(true) => f.write_str("True"),
            Const::Bool(false) => f.write_str("False"),
            Const::Num(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Const::Num(r) => write!(f, "rat({}, {})", r.numer(), r.denom()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self, &BTreeSet::new());
        f.write_str(&s)
    }
}

fn needs_parens(t: &Term) -> bool {
    matches!(t.kind(), TermKind::Arith(..) | TermKind::Cmp(..))
}

fn is_negative_const(t: &Term) -> bool {
    t.as_num().is_some_and(|r| r.is_negative())
}

fn write_operand(out: &mut String, t: &Term, bound: &BTreeSet<String>) {
    if needs_parens(t) {
        out.push('(');
        write_term(out, t, bound);
        out.push(')');
    } else {
        write_term(out, t, bound);
    }
}

fn write_list(out: &mut String, items: &[Term], bound: &BTreeSet<String>) {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_term(out, a, bound);
    }
}

/// Writes `t`; symbols named in `bound` print bare, as quantifier variables.
pub fn write_term(out: &mut String, t: &Term, bound: &BTreeSet<String>) {
    match t.kind() {
        TermKind::Const(c) => {
            let _ = write!(out, "{c}");
        }
        TermKind::Var { name, offset: 0 } => {
            let _ = write!(out, "{name}(n)");
        }
        TermKind::Var { name, offset } => {
            let _ = write!(out, "{name}(n-{offset})");
        }
        TermKind::Sym { name, .. } if bound.contains(name) => out.push_str(name),
        TermKind::Sym { name, sort: ScalarSort::Num } => {
            let _ = write!(out, "${name}");
        }
        TermKind::Sym { name, sort: ScalarSort::Bool } => {
            let _ = write!(out, "${name}:bool");
        }
        TermKind::Arith(ArithOp::Sub, args) if args.len() == 1 => {
            out.push_str("-(");
            write_term(out, &args[0], bound);
            out.push(')');
        }
        TermKind::Arith(op, args) if args.len() >= 2 => {
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    let _ = write!(out, " {} ", op.symbol());
                }
                write_operand(out, a, bound);
            }
        }
        TermKind::Arith(op, args) => {
            out.push_str(op.fn_name());
            out.push('(');
            write_list(out, args, bound);
            out.push(')');
        }
        TermKind::Logic(op, args) => {
            out.push_str(op.name());
            out.push('(');
            write_list(out, args, bound);
            out.push(')');
        }
        TermKind::Cmp(op, l, r) => {
            write_operand(out, l, bound);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, r, bound);
        }
        TermKind::If(c, a, b) => {
            out.push_str("IF(");
            write_list(out, &[c.clone(), a.clone(), b.clone()], bound);
            out.push(')');
        }
        TermKind::App(name, args) => {
            out.push_str(name);
            out.push('(');
            write_list(out, args, bound);
            out.push(')');
        }
        TermKind::Tuple(elems) => {
            out.push('[');
            write_list(out, elems, bound);
            out.push(']');
        }
        TermKind::Index(w, i) => {
            if needs_parens(w) || is_negative_const(w) {
                out.push('(');
                write_term(out, w, bound);
                out.push(')');
            } else {
                write_term(out, w, bound);
            }
            out.push('[');
            write_term(out, i, bound);
            out.push(']');
        }
        TermKind::Hole(h) => write_hole(out, h),
    }
}

fn write_hole(out: &mut String, h: &Hole) {
    if h.seq {
        out.push_str("...");
        return;
    }
    match (&h.name, &h.sort) {
        (None, _) => out.push('_'),
        (Some(n), None) => {
            let _ = write!(out, "?{n}");
        }
        (Some(n), Some(s)) => {
            let _ = write!(out, "?{n}:{s}");
        }
    }
}

fn term_str(t: &Term, bound: &BTreeSet<String>) -> String {
    let mut s = String::new();
    write_term(&mut s, t, bound);
    s
}

fn decls(ds: &[Decl]) -> String {
    ds.iter()
        .map(|d| match &d.sort {
            Some(s) => format!("{}: {s}", d.name),
            None => d.name.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn print_system(out: &mut String, s: &SreSystem) {
    let none = BTreeSet::new();
    let _ = writeln!(out, "system {} {{", s.name);
    for (kw, ds) in [("inputs", &s.inputs), ("controls", &s.controls), ("vars", &s.vars)] {
        if !ds.is_empty() {
            let _ = writeln!(out, "  {kw} {};", decls(ds));
        }
    }
    if !s.outputs.is_empty() {
        let _ = writeln!(out, "  outputs {};", s.outputs.join(", "));
    }
    for i in &s.initial {
        let _ = writeln!(out, "  init {}({}) = {};", i.name, i.time, term_str(&i.value, &none));
    }
    for e in &s.equations {
        let _ = writeln!(out, "  eq {}(n) = {};", e.target, term_str(&e.body, &none));
    }
    out.push_str("}\n");
}

fn print_ruleset(out: &mut String, r: &RuleSetDecl) {
    let none = BTreeSet::new();
    let _ = writeln!(out, "ruleset {} {{", r.name);
    for rule in &r.rules {
        let _ = write!(out, "  {} => {}", term_str(&rule.lhs, &none), term_str(&rule.rhs, &none));
        if let Some(g) = &rule.guard {
            let _ = write!(out, " if {}", term_str(g, &none));
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
}

pub fn print_property(out: &mut String, p: &Property) {
    let _ = writeln!(out, "property {} {} {{", p.name, p.category);
    let _ = writeln!(out, "  horizon {};", p.horizon);
    for c in &p.clauses {
        let mut bound = BTreeSet::new();
        out.push(' ');
        for q in &c.quantifiers {
            let _ = write!(out, " forall {} in {}..{}:", q.var, term_str(&q.lo, &bound), term_str(&q.hi, &bound));
            bound.insert(q.var.clone());
        }
        if let Some(g) = &c.guard {
            let _ = write!(out, " when {}:", term_str(g, &bound));
        }
        let _ = writeln!(out, " {};", term_str(&c.body, &bound));
    }
    out.push_str("}\n");
}

fn print_scenario(out: &mut String, s: &Scenario) {
    let none = BTreeSet::new();
    let _ = writeln!(out, "scenario {} {{", s.name);
    for (k, v) in &s.bindings {
        let _ = writeln!(out, "  {k} = {};", term_str(v, &none));
    }
    out.push_str("}\n");
}

fn print_job(out: &mut String, j: &JobDecl) {
    let _ = writeln!(out, "job {} {{", j.name);
    let _ = writeln!(out, "  spec \"{}\" system {};", j.spec.path, j.spec.system);
    let _ = writeln!(out, "  impl \"{}\" system {};", j.imp.path, j.imp.system);
    let _ = writeln!(out, "  k_spec {};", j.k_spec);
    let _ = writeln!(out, "  k_imp {};", j.k_imp);
    for (i, s) in &j.correspondence {
        let _ = writeln!(out, "  map {i} -> {s};");
    }
    if !j.compare.is_empty() {
        let _ = writeln!(out, "  compare {};", j.compare.join(", "));
    }
    if !j.scenarios.is_empty() {
        let _ = writeln!(out, "  scenarios {};", j.scenarios.join(", "));
    }
    if let Some((b, side)) = &j.bug {
        let _ = writeln!(out, "  bug {b} in {};", side.name());
    }
    out.push_str("}\n");
}

pub fn print_item(out: &mut String, item: &Item) {
    match item {
        Item::Include(p) => {
            let _ = writeln!(out, "include \"{p}\";");
        }
        Item::Const(n, v) => {
            let _ = writeln!(out, "const {n} = {v};");
        }
        Item::System(s) => print_system(out, s),
        Item::RuleSet(r) => print_ruleset(out, r),
        Item::Property(p) => print_property(out, p),
        Item::Scenario(s) => print_scenario(out, s),
        Item::Job(j) => print_job(out, j),
    }
}

pub fn print_module(m: &Module) -> String {
    let mut out = String::new();
    for (i, item) in m.items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_item(&mut out, item);
    }
    out
}

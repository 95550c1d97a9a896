use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::lexer::{lex, Pos, Tok};
use super::{Item, RuleDecl, RuleSetDecl, SourceUnit, Span};
use crate::equiv::{JobDecl, ModelRef, Side};
use crate::prop::{Category, Clause, Property, Quantifier};
use crate::sim::Scenario;
use crate::system::{Decl, Equation, Initial, SreSystem};
use crate::term::{ArithOp, CmpOp, Hole, LogicOp, Rational, ScalarSort, Sort, Term, TermKind};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

type PResult<T> = Result<T, ParseError>;

pub struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    consts: BTreeMap<String, Term>,
    bound: Vec<String>,
}

const ARITH_FNS: [(&str, ArithOp); 4] =
    [("add", ArithOp::Add), ("sub", ArithOp::Sub), ("mul", ArithOp::Mul), ("div", ArithOp::Div)];

impl Parser {
    /// Number of top-level arguments of the parenthesized list starting at
    /// the current token, if the list is closed.
    fn count_args(&self) -> Option<usize> {
        let rest = self.toks.get(self.at..)?;
        if rest.first().map(|t| &t.0) != Some(&Tok::LParen) {
            return None;
        }
        if rest.get(1).map(|t| &t.0) == Some(&Tok::RParen) {
            return Some(0);
        }
        let (mut depth, mut commas) = (0usize, 0);
        for (tok, _) in rest {
            match tok {
                Tok::LParen | Tok::LBracket => depth += 1,
                Tok::RParen | Tok::RBracket => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(commas + 1);
                    }
                }
                Tok::Comma if depth == 1 => commas += 1,
                Tok::Eof => return None,
                _ => {}
            }
        }
        None
    }

    pub fn new(src: &str, consts: BTreeMap<String, Term>) -> PResult<Self> {
        let toks = lex(src).map_err(|e| ParseError { pos: e.pos, message: e.message })?;
        Ok(Parser { toks, at: 0, consts, bound: Vec::new() })
    }

    pub fn consts(&self) -> &BTreeMap<String, Term> {
        &self.consts
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { pos: self.pos(), message: message.into() })
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        self.err(format!("expected {expected}, found {}", self.peek()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.to_string())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            _ => self.unexpected("string literal"),
        }
    }

    fn integer(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Num(r) if r.is_integer() => {
                self.next();
                let v = r.to_integer().to_i64().ok_or_else(|| ParseError { pos: self.pos(), message: "integer out of range".into() })?;
                Ok(if neg { -v } else { v })
            }
            _ => self.unexpected("integer"),
        }
    }

    fn natural(&mut self) -> PResult<u32> {
        let pos = self.pos();
        let v = self.integer()?;
        u32::try_from(v).map_err(|_| ParseError { pos, message: format!("expected a non-negative integer, found {v}") })
    }

    // ---- sorts ----

    pub fn sort(&mut self) -> PResult<Sort> {
        if self.eat(&Tok::LBracket) {
            let elem = self.sort()?;
            self.expect(Tok::Semi)?;
            let n = self.natural()?;
            self.expect(Tok::RBracket)?;
            return Ok(Sort::Tuple(Box::new(elem), n as usize));
        }
        if self.eat_kw("bool") {
            Ok(Sort::Bool)
        } else if self.eat_kw("num") {
            Ok(Sort::Num)
        } else {
            self.unexpected("sort")
        }
    }

    // ---- terms ----

    pub fn term(&mut self) -> PResult<Term> {
        self.or_expr()
    }

    fn chain(&mut self, ops: &[(&str, LogicOp)], next: fn(&mut Self) -> PResult<Term>) -> PResult<Term> {
        let mut lhs = next(self)?;
        loop {
            let Some(op) = ops.iter().find(|(kw, _)| self.is_kw(kw)).map(|x| x.1) else {
                return Ok(lhs);
            };
            self.next();
            let mut args = vec![lhs, next(self)?];
            while self.is_kw(op.name()) {
                self.next();
                args.push(next(self)?);
            }
            lhs = Term::logic(op, args);
        }
    }

    fn or_expr(&mut self) -> PResult<Term> {
        self.chain(&[("or", LogicOp::Or), ("xor", LogicOp::Xor)], Self::and_expr)
    }

    fn and_expr(&mut self) -> PResult<Term> {
        self.chain(&[("and", LogicOp::And)], Self::cmp_expr)
    }

    fn cmp_expr(&mut self) -> PResult<Term> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Assign | Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.add_expr()?;
        Ok(Term::cmp(op, lhs, rhs))
    }

    fn arith_chain(&mut self, ops: &[(Tok, ArithOp)], next: fn(&mut Self) -> PResult<Term>) -> PResult<Term> {
        let mut lhs = next(self)?;
        loop {
            let Some(op) = ops.iter().find(|(t, _)| self.peek() == t).map(|x| x.1) else {
                return Ok(lhs);
            };
            self.next();
            let mut args = vec![lhs, next(self)?];
            while self.peek() == &ops.iter().find(|x| x.1 == op).unwrap().0 {
                self.next();
                args.push(next(self)?);
            }
            lhs = Term::arith(op, args);
        }
    }

    fn add_expr(&mut self) -> PResult<Term> {
        self.arith_chain(&[(Tok::Plus, ArithOp::Add), (Tok::Minus, ArithOp::Sub)], Self::mul_expr)
    }

    fn mul_expr(&mut self) -> PResult<Term> {
        self.arith_chain(&[(Tok::Star, ArithOp::Mul), (Tok::Slash, ArithOp::Div)], Self::unary)
    }

    fn unary(&mut self) -> PResult<Term> {
        if self.eat(&Tok::Minus) {
            if let Tok::Num(r) = self.peek().clone() {
                self.next();
                return Ok(Term::rational(-r));
            }
            let x = self.unary()?;
            return Ok(Term::sub(vec![x]));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Term> {
        let mut t = self.primary()?;
        while self.eat(&Tok::LBracket) {
            let i = self.term()?;
            self.expect(Tok::RBracket)?;
            t = Term::index_by(t, i);
        }
        Ok(t)
    }

    fn args(&mut self) -> PResult<Vec<Term>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                args.push(self.term()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(args)
    }

    /// `:bool` or `:num` after a symbol; any other colon is left alone.
    fn scalar_annotation(&mut self) -> ScalarSort {
        if self.peek() == &Tok::Colon {
            match self.peek_at(1) {
                Tok::Ident(s) if s == "bool" => {
                    self.at += 2;
                    return ScalarSort::Bool;
                }
                Tok::Ident(s) if s == "num" => {
                    self.at += 2;
                    return ScalarSort::Num;
                }
                _ => {}
            }
        }
        ScalarSort::Num
    }

    fn time_ref(&mut self) -> PResult<Option<u32>> {
        // Recognises `(n)` and `(n-k)` after a name.
        if self.peek() != &Tok::LParen || !matches!(self.peek_at(1), Tok::Ident(s) if s == "n") {
            return Ok(None);
        }
        match self.peek_at(2) {
            Tok::RParen => {
                self.at += 3;
                Ok(Some(0))
            }
            Tok::Minus => {
                self.at += 3;
                let pos = self.pos();
                let k = self.natural()?;
                self.expect(Tok::RParen)?;
                if k == 0 {
                    return Err(ParseError { pos, message: "delay must be written as (n)".into() });
                }
                Ok(Some(k))
            }
            Tok::Plus => self.err("reference to a future time step; only n and n-k are allowed"),
            _ => Ok(None),
        }
    }

    fn primary(&mut self) -> PResult<Term> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(r) => {
                self.next();
                Ok(Term::rational(r))
            }
            Tok::Dollar => {
                self.next();
                let name = self.ident()?;
                let sort = self.scalar_annotation();
                Ok(Term::new(TermKind::Sym { name, sort }))
            }
            Tok::Underscore => {
                self.next();
                Ok(Term::hole(Hole::wildcard()))
            }
            Tok::Ellipsis => {
                self.next();
                Ok(Term::hole(Hole::sequence()))
            }
            Tok::Question => {
                self.next();
                let name = self.ident()?;
                if self.eat(&Tok::Colon) {
                    let sort = self.sort()?;
                    Ok(Term::hole(Hole::sorted(name, sort)))
                } else {
                    Ok(Term::hole(Hole::named(name)))
                }
            }
            Tok::LParen => {
                self.next();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBracket => {
                self.next();
                let mut elems = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        elems.push(self.term()?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                Ok(Term::tuple(elems))
            }
            Tok::Ident(name) => {
                self.next();
                self.named(name, pos)
            }
            _ => self.unexpected("term"),
        }
    }

    fn named(&mut self, name: String, pos: Pos) -> PResult<Term> {
        match name.as_str() {
            "True" => return Ok(Term::tt()),
            "False" => return Ok(Term::ff()),
            _ => {}
        }
        if self.peek() != &Tok::LParen {
            if self.bound.iter().any(|b| b == &name) {
                return Ok(Term::sym(name));
            }
            if let Some(v) = self.consts.get(&name) {
                return Ok(v.clone());
            }
            return Err(ParseError { pos, message: format!("unknown identifier `{name}`") });
        }
        if let Some(offset) = self.time_ref()? {
            return Ok(Term::var(name, offset));
        }
        if name == "rat" {
            self.expect(Tok::LParen)?;
            let num = self.integer()?;
            self.expect(Tok::Comma)?;
            let den = self.integer()?;
            self.expect(Tok::RParen)?;
            if den == 0 {
                return Err(ParseError { pos, message: "zero denominator".into() });
            }
            return Ok(Term::rational(Rational::new(num.into(), den.into())));
        }
        if name == "IF" {
            if let Some(n) = self.count_args() {
                if n != 3 {
                    return Err(ParseError { pos, message: format!("IF expects 3 arguments, found {n}") });
                }
            }
        }
        let args = self.args()?;
        if name == "IF" {
            if args.len() != 3 {
                return Err(ParseError { pos, message: format!("IF expects 3 arguments, found {}", args.len()) });
            }
            let mut it = args.into_iter();
            return Ok(Term::ite(it.next().unwrap(), it.next().unwrap(), it.next().unwrap()));
        }
        if let Some(op) = LogicOp::from_name(&name) {
            if op == LogicOp::Not && args.len() != 1 {
                return Err(ParseError { pos, message: format!("not expects 1 argument, found {}", args.len()) });
            }
            return Ok(Term::logic(op, args));
        }
        if let Some((_, op)) = ARITH_FNS.iter().find(|(n, _)| *n == name) {
            return Ok(Term::arith(*op, args));
        }
        Ok(Term::app(name, args))
    }

    // ---- items ----

    fn decl_list(&mut self) -> PResult<Vec<Decl>> {
        let mut out = Vec::new();
        if self.peek() == &Tok::Semi {
            return Ok(out);
        }
        loop {
            let name = self.ident()?;
            let sort = if self.eat(&Tok::Colon) { Some(self.sort()?) } else { None };
            out.push(Decl::new(name, sort));
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        if self.peek() == &Tok::Semi {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn system(&mut self, eq_spans: &mut BTreeMap<(String, String), Pos>) -> PResult<SreSystem> {
        let mut s = SreSystem::new(self.ident()?);
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            let kw = self.ident()?;
            match kw.as_str() {
                "inputs" => s.inputs.extend(self.decl_list()?),
                "controls" => s.controls.extend(self.decl_list()?),
                "vars" => s.vars.extend(self.decl_list()?),
                "outputs" => s.outputs.extend(self.ident_list()?),
                "init" => {
                    let name = self.ident()?;
                    self.expect(Tok::LParen)?;
                    let time = self.integer()?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Assign)?;
                    let value = self.term()?;
                    s.initial.push(Initial { name, time, value });
                }
                "eq" => {
                    let target = self.ident()?;
                    match self.time_ref()? {
                        Some(0) => {}
                        Some(_) => return self.err("equation target must be written as X(n)"),
                        None => return self.unexpected("`(n)`"),
                    }
                    self.expect(Tok::Assign)?;
                    let body = self.term()?;
                    eq_spans.insert((s.name.clone(), target.clone()), pos);
                    s.equations.push(Equation { target, body });
                }
                _ => {
                    return Err(ParseError {
                        pos,
                        message: format!("expected one of inputs, controls, vars, outputs, init, eq; found `{kw}`"),
                    })
                }
            }
            self.expect(Tok::Semi)?;
        }
        Ok(s)
    }

    fn ruleset(&mut self) -> PResult<RuleSetDecl> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut rules = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let lhs = self.term()?;
            self.expect(Tok::FatArrow)?;
            let rhs = self.term()?;
            let guard = if self.eat_kw("if") { Some(self.term()?) } else { None };
            self.expect(Tok::Semi)?;
            rules.push(RuleDecl { lhs, rhs, guard });
        }
        Ok(RuleSetDecl { name, rules })
    }

    fn property(&mut self) -> PResult<Property> {
        let name = self.ident()?;
        let category = match self.ident()?.as_str() {
            "global" => Category::Global,
            "local" => Category::Local,
            "control" => Category::Control,
            other => return self.err(format!("unknown property category `{other}`; expected global, local or control")),
        };
        self.expect(Tok::LBrace)?;
        let mut horizon = None;
        let mut clauses = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("horizon") {
                horizon = Some(self.natural()?);
                self.expect(Tok::Semi)?;
                continue;
            }
            let mark = self.bound.len();
            let mut quantifiers = Vec::new();
            let parsed = (|| {
                while self.eat_kw("forall") {
                    let var = self.ident()?;
                    self.expect_kw("in")?;
                    let lo = self.term()?;
                    self.expect(Tok::DotDot)?;
                    let hi = self.term()?;
                    self.expect(Tok::Colon)?;
                    self.bound.push(var.clone());
                    quantifiers.push(Quantifier { var, lo, hi });
                }
                let guard = if self.eat_kw("when") {
                    let g = self.term()?;
                    self.expect(Tok::Colon)?;
                    Some(g)
                } else {
                    None
                };
                Ok((guard, self.term()?))
            })();
            self.bound.truncate(mark);
            let (guard, body) = parsed?;
            self.expect(Tok::Semi)?;
            clauses.push(Clause { guard, quantifiers, body });
        }
        let Some(horizon) = horizon else {
            return self.err(format!("property `{name}` has no horizon"));
        };
        Ok(Property { name, category, horizon, clauses })
    }

    fn scenario(&mut self) -> PResult<Scenario> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut bindings = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let k = self.ident()?;
            self.expect(Tok::Assign)?;
            let v = self.term()?;
            self.expect(Tok::Semi)?;
            bindings.push((k, v));
        }
        Ok(Scenario { name, bindings })
    }

    fn model_ref(&mut self) -> PResult<ModelRef> {
        let path = self.string()?;
        self.expect_kw("system")?;
        let system = self.ident()?;
        Ok(ModelRef { path, system })
    }

    fn job(&mut self) -> PResult<JobDecl> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let (mut spec, mut imp) = (None, None);
        let mut job = JobDecl::new(name);
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            match self.ident()?.as_str() {
                "spec" => spec = Some(self.model_ref()?),
                "impl" => imp = Some(self.model_ref()?),
                "k_spec" => job.k_spec = self.natural()?,
                "k_imp" => job.k_imp = self.natural()?,
                "map" => {
                    let i = self.ident()?;
                    self.expect(Tok::Arrow)?;
                    let s = self.ident()?;
                    job.correspondence.push((i, s));
                }
                "compare" => job.compare.extend(self.ident_list()?),
                "scenarios" => job.scenarios.extend(self.ident_list()?),
                "bug" => {
                    let b = self.ident()?;
                    let side = if self.eat_kw("in") {
                        match self.ident()?.as_str() {
                            "spec" => Side::Spec,
                            "impl" => Side::Impl,
                            other => return Err(ParseError { pos, message: format!("expected spec or impl, found `{other}`") }),
                        }
                    } else {
                        Side::Impl
                    };
                    job.bug = Some((b, side));
                }
                other => return Err(ParseError { pos, message: format!("unknown job field `{other}`") }),
            }
            self.expect(Tok::Semi)?;
        }
        job.spec = spec.ok_or_else(|| ParseError { pos: self.pos(), message: format!("job `{}` has no spec", job.name) })?;
        job.imp = imp.ok_or_else(|| ParseError { pos: self.pos(), message: format!("job `{}` has no impl", job.name) })?;
        Ok(job)
    }

    pub fn define_consts(&mut self, consts: &BTreeMap<String, Term>) {
        for (k, v) in consts {
            self.consts.insert(k.clone(), v.clone());
        }
    }

    pub fn at_end(&self) -> bool {
        self.peek() == &Tok::Eof
    }

    /// Parses one top-level item.
    pub fn item(&mut self, eq_spans: &mut BTreeMap<(String, String), Pos>) -> PResult<(Item, Span)> {
        let pos = self.pos();
        let kw = self.ident()?;
        let item = match kw.as_str() {
            "include" => {
                let p = self.string()?;
                self.expect(Tok::Semi)?;
                Item::Include(p)
            }
            "const" => {
                let name = self.ident()?;
                self.expect(Tok::Assign)?;
                let v = self.term()?;
                self.expect(Tok::Semi)?;
                if v.has_var_refs() || v.has_holes() {
                    return Err(ParseError { pos, message: format!("constant `{name}` must not refer to signals or holes") });
                }
                let v = crate::rewrite::simplify(&v).map_err(|e| ParseError { pos, message: e.to_string() })?;
                self.consts.insert(name.clone(), v.clone());
                Item::Const(name, v)
            }
            "system" => Item::System(self.system(eq_spans)?),
            "ruleset" => Item::RuleSet(self.ruleset()?),
            "property" => Item::Property(self.property()?),
            "scenario" => Item::Scenario(self.scenario()?),
            "job" => Item::Job(self.job()?),
            other => {
                return Err(ParseError {
                    pos,
                    message: format!(
                        "expected one of include, const, system, ruleset, property, scenario, job; found `{other}`"
                    ),
                })
            }
        };
        Ok((item, Span { start: pos, end: self.toks[self.at.saturating_sub(1)].1 }))
    }

    pub fn unit(&mut self) -> PResult<SourceUnit> {
        let mut unit = SourceUnit::default();
        while !self.at_end() {
            let (item, span) = self.item(&mut unit.eq_spans)?;
            unit.module.items.push(item);
            unit.spans.push(span);
        }
        Ok(unit)
    }
}

pub fn parse_term(src: &str) -> PResult<Term> {
    parse_term_with(src, &BTreeMap::new())
}

pub fn parse_term_with(src: &str, consts: &BTreeMap<String, Term>) -> PResult<Term> {
    let mut p = Parser::new(src, consts.clone())?;
    let t = p.term()?;
    if p.peek() != &Tok::Eof {
        return p.unexpected("end of input");
    }
    Ok(t)
}

pub fn parse_sort(src: &str) -> PResult<Sort> {
    let mut p = Parser::new(src, BTreeMap::new())?;
    p.sort()
}

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::blocks::{cc_body, intl_body, mod_body, punct_body, rand_body, rand_ref, rep_body};
use crate::system::{Decl, Equation, Initial, SreSystem};
use crate::term::{CmpOp, Sort, Term};

pub const BLOCKS: [&str; 8] = ["input", "rand", "cc", "punct", "intl", "rep", "mod", "output"];
pub const FIFO_DEPTH: usize = 4;
pub const SUPPORTED_WIDTHS: [usize; 3] = [8, 16, 32];

/// Processing units of the four-unit model and the blocks each runs, in
/// scheduler order.
pub const UNITS: [[&str; 2]; 4] = [["input", "rand"], ["cc", "punct"], ["intl", "rep"], ["mod", "output"]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Fl,
    Ptl8,
    Ptl4,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Fl, Level::Ptl8, Level::Ptl4];

    pub fn name(self) -> &'static str {
        match self {
            Level::Fl => "FL",
            Level::Ptl8 => "PTL8",
            Level::Ptl4 => "PTL4",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "FL" => Ok(Level::Fl),
            "PTL8" => Ok(Level::Ptl8),
            "PTL4" => Ok(Level::Ptl4),
            _ => Err(ModelError::UnknownLevel(s.into())),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unsupported data width {0}; expected 8, 16 or 32")]
    UnsupportedWidth(usize),
    #[error("unknown model level {0}")]
    UnknownLevel(String),
}

pub fn block_id(block: &str) -> i64 {
    BLOCKS.iter().position(|b| *b == block).expect("known block") as i64
}

/// Sort of a block's output word at data width `w`.
pub fn block_sort(block: &str, w: usize) -> Sort {
    match block {
        "input" | "rand" => Sort::bits(w),
        "cc" | "punct" | "intl" => Sort::bits(2 * w),
        "rep" => Sort::bits(4 * w),
        _ => Sort::Tuple(Box::new(Sort::Num), 8 * w),
    }
}

fn zero_word(sort: &Sort) -> Term {
    match sort {
        Sort::Bool => Term::ff(),
        Sort::Num => Term::int(0),
        Sort::Tuple(e, n) => Term::tuple(vec![zero_word(e); *n]),
    }
}

fn block_body(block: &str, input: Term, w: usize) -> Term {
    match block {
        "input" | "output" => input,
        "rand" => rand_body(&input, &rand_ref(w)),
        "cc" => cc_body(&input, w),
        "punct" => punct_body(&input, 2 * w),
        "intl" => intl_body(&input, 2 * w),
        "rep" => rep_body(&input, 2 * w),
        "mod" => mod_body(&input, 4 * w),
        other => unreachable!("unknown block {other}"),
    }
}

/// Name of the variable holding `block`'s output in a model of `level`.
pub fn block_var(level: Level, block: &str) -> String {
    match level {
        Level::Fl | Level::Ptl8 => format!("{block}.out"),
        Level::Ptl4 => {
            let u = UNITS.iter().position(|u| u.contains(&block)).expect("known block");
            format!("u{u}.{block}")
        }
    }
}

/// `(impl signal, spec signal)` pairs mapping a model's block outputs to
/// the functional-level names.
pub fn correspondence(level: Level) -> Vec<(String, String)> {
    match level {
        Level::Fl | Level::Ptl8 => Vec::new(),
        Level::Ptl4 => BLOCKS
            .iter()
            .filter(|b| **b != "output")
            .map(|b| (block_var(level, b), format!("{b}.out")))
            .collect(),
    }
}

fn interface(name: &str, w: usize) -> SreSystem {
    let mut s = SreSystem::new(name);
    s.inputs.push(Decl::new("DATA", Some(Sort::bits(w))));
    for c in ["CODE_RATE", "MODULATION", "REPETITION"] {
        s.controls.push(Decl::new(c, Some(Sort::Num)));
    }
    s.outputs.push("output.out".into());
    s
}

fn eq(s: &mut SreSystem, target: &str, sort: Option<Sort>, body: Term) {
    s.vars.push(Decl::new(target, sort));
    s.equations.push(Equation { target: target.into(), body });
}

fn init(s: &mut SreSystem, name: &str, value: Term) {
    s.initial.push(Initial { name: name.into(), time: 0, value });
}

/// Adds a bounded FIFO named `name` to `s` and returns its output signal.
///
/// The queue holds up to `depth` words in `slot0..`, head first. When empty
/// and both enqueue and dequeue are requested the word passes straight
/// through in the same cycle. `stall` is raised by a dequeue from an empty
/// queue without a concurrent enqueue, or an enqueue into a full one.
pub fn add_fifo(s: &mut SreSystem, name: &str, input: Term, enq: Term, deq: Term, sort: &Sort, depth: usize) -> Term {
    let v = |field: &str, d: u32| Term::var(format!("{name}.{field}"), d);
    let count = v("count", 1);
    let empty = Term::cmp(CmpOp::Eq, count.clone(), Term::int(0));
    let full = Term::cmp(CmpOp::Eq, count.clone(), Term::int(depth as i64));
    let do_enq = Term::and(vec![enq.clone(), Term::not(full.clone())]);
    let do_deq = Term::and(vec![deq.clone(), Term::not(empty.clone())]);
    let bypass = Term::and(vec![empty.clone(), do_enq.clone(), deq.clone()]);
    let flag = |c: Term| Term::ite(c, Term::int(1), Term::int(0));

    eq(s, &format!("{name}.out"), Some(sort.clone()), Term::ite(empty.clone(), input.clone(), v("slot0", 1)));
    eq(s, &format!("{name}.valid"), Some(Sort::Bool), Term::or(vec![Term::not(empty.clone()), do_enq.clone()]));
    eq(
        s,
        &format!("{name}.stall"),
        Some(Sort::Bool),
        Term::or(vec![Term::and(vec![deq.clone(), empty.clone(), Term::not(enq.clone())]), Term::and(vec![enq, full])]),
    );
    let leaves = Term::and(vec![deq, Term::or(vec![Term::not(empty), do_enq.clone()])]);
    eq(s, &format!("{name}.count"), Some(Sort::Num), Term::sub(vec![Term::add(vec![count.clone(), flag(do_enq.clone())]), flag(leaves)]));
    init(s, &format!("{name}.count"), Term::int(0));
    let write_pos = Term::sub(vec![count, flag(do_deq.clone())]);
    for k in 0..depth {
        let slot = format!("slot{k}");
        let shifted = if k + 1 < depth { v(&format!("slot{}", k + 1), 1) } else { v(&slot, 1) };
        let write = Term::and(vec![do_enq.clone(), Term::not(bypass.clone()), Term::cmp(CmpOp::Eq, write_pos.clone(), Term::int(k as i64))]);
        let body = Term::ite(write, input.clone(), Term::ite(do_deq.clone(), shifted, v(&slot, 1)));
        eq(s, &format!("{name}.{slot}"), Some(sort.clone()), body);
        init(s, &format!("{name}.{slot}"), zero_word(sort));
    }
    Term::var(format!("{name}.out"), 0)
}

fn fl(w: usize) -> SreSystem {
    let mut s = interface("FL", w);
    let mut prev = Term::var("DATA", 0);
    for b in BLOCKS {
        let target = format!("{b}.out");
        eq(&mut s, &target, Some(block_sort(b, w)), block_body(b, prev, w));
        prev = Term::var(target, 0);
    }
    s
}

fn ptl8(w: usize) -> SreSystem {
    let mut s = interface("PTL8", w);
    let mut prev = Term::var("DATA", 0);
    for (i, b) in BLOCKS.iter().enumerate() {
        let target = format!("{b}.out");
        eq(&mut s, &target, Some(block_sort(b, w)), block_body(b, prev, w));
        prev = Term::var(&target, 0);
        if let Some(next) = BLOCKS.get(i + 1) {
            let q = format!("q_{b}_{next}");
            prev = add_fifo(&mut s, &q, prev, Term::tt(), Term::tt(), &block_sort(b, w), FIFO_DEPTH);
        }
    }
    s
}

fn ptl4(w: usize) -> SreSystem {
    let mut s = interface("PTL4", w);
    // Scheduler: fixed visit order per unit, round counter, and per-block
    // execution counters.
    for (u, blocks) in UNITS.iter().enumerate() {
        for (j, b) in blocks.iter().enumerate() {
            let reg = format!("sched.u{u}_{j}");
            eq(&mut s, &reg, Some(Sort::Num), Term::var(&reg, 1));
            init(&mut s, &reg, Term::int(block_id(b)));
        }
    }
    eq(&mut s, "sched.round", Some(Sort::Num), Term::add(vec![Term::var("sched.round", 1), Term::int(1)]));
    init(&mut s, "sched.round", Term::int(0));
    let visits = |u: usize, b: &str| {
        Term::or(
            (0..2).map(|j| Term::cmp(CmpOp::Eq, Term::var(format!("sched.u{u}_{j}"), 0), Term::int(block_id(b)))).collect(),
        )
    };
    for (u, blocks) in UNITS.iter().enumerate() {
        for b in blocks {
            let c = format!("sched.runs_{b}");
            eq(&mut s, &c, Some(Sort::Num), Term::add(vec![Term::var(&c, 1), Term::ite(visits(u, b), Term::int(1), Term::int(0))]));
            init(&mut s, &c, Term::int(0));
        }
    }
    let mut prev = Term::var("DATA", 0);
    for (u, blocks) in UNITS.iter().enumerate() {
        for (j, b) in blocks.iter().enumerate() {
            let target = block_var(Level::Ptl4, b);
            let sort = block_sort(b, w);
            let guard = Term::cmp(CmpOp::Eq, Term::var(format!("sched.u{u}_{j}"), 0), Term::int(block_id(b)));
            let body = Term::ite(guard, block_body(b, prev, w), Term::var(&target, 1));
            eq(&mut s, &target, Some(sort.clone()), body);
            init(&mut s, &target, zero_word(&sort));
            prev = Term::var(&target, 0);
        }
        if u + 1 < UNITS.len() {
            let q = format!("q_u{u}_u{}", u + 1);
            let sort = block_sort(blocks[1], w);
            prev = add_fifo(&mut s, &q, prev, Term::tt(), Term::tt(), &sort, FIFO_DEPTH);
        }
    }
    eq(&mut s, "output.out", Some(block_sort("output", w)), Term::app("to_int", vec![prev]));
    s
}

pub fn build_model(level: Level, width: usize) -> Result<SreSystem, ModelError> {
    if !SUPPORTED_WIDTHS.contains(&width) {
        return Err(ModelError::UnsupportedWidth(width));
    }
    Ok(match level {
        Level::Fl => fl(width),
        Level::Ptl8 => ptl8(width),
        Level::Ptl4 => ptl4(width),
    })
}

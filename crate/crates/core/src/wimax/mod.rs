//! Demo transmitter: block library, three model levels, modes of operation,
//! bug catalogue and properties.

pub mod blocks;
pub mod bundle;
pub mod bugs;
pub mod models;
pub mod modes;
pub mod props;

use std::collections::BTreeMap;
use std::fmt::Write;

pub use bugs::{inject, Bug, BugError, MutationSite};
pub use models::{build_model, correspondence, Level, ModelError};
pub use modes::{Mode, MODES};

use crate::term::Term;

/// Constants and scenarios shared by the bundled model files.
pub fn prelude_source(width: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Transmitter constants and the seven modes of operation.");
    let _ = writeln!(s, "const W = {width};");
    for (n, v) in [("RATE_1_2", blocks::RATE_1_2), ("RATE_2_3", blocks::RATE_2_3), ("RATE_3_4", blocks::RATE_3_4)] {
        let _ = writeln!(s, "const {n} = {v};");
    }
    for (n, v) in [("BPSK", blocks::BPSK), ("QPSK", blocks::QPSK), ("QAM16", blocks::QAM16), ("QAM64", blocks::QAM64)] {
        let _ = writeln!(s, "const {n} = {v};");
    }
    for b in models::BLOCKS {
        let _ = writeln!(s, "const BLK_{} = {};", b.to_ascii_uppercase(), models::block_id(b));
    }
    let bits: Vec<&str> = blocks::rand_ref(width).iter().map(|b| if *b { "True" } else { "False" }).collect();
    let _ = writeln!(s, "const REF = [{}];", bits.join(", "));
    let modname = |m: i64| match m {
        blocks::BPSK => "BPSK",
        blocks::QPSK => "QPSK",
        blocks::QAM16 => "QAM16",
        _ => "QAM64",
    };
    let ratename = |r: i64| match r {
        blocks::RATE_1_2 => "RATE_1_2",
        blocks::RATE_2_3 => "RATE_2_3",
        _ => "RATE_3_4",
    };
    for m in MODES {
        let _ = writeln!(
            s,
            "\nscenario {} {{\n  CODE_RATE = {};\n  MODULATION = {};\n  REPETITION = {};\n}}",
            m.name(),
            ratename(m.code_rate),
            modname(m.modulation),
            m.repetition
        );
    }
    s
}

/// The prelude constants as terms.
pub fn prelude_consts(width: usize) -> BTreeMap<String, Term> {
    let mut p = crate::dsl::Parser::new(&prelude_source(width), BTreeMap::new()).expect("prelude lexes");
    p.unit().expect("prelude parses");
    p.consts().clone()
}

impl Level {
    /// Guesses the level of a transmitter model from its signal names.
    pub fn detect(sys: &crate::system::SreSystem) -> Option<Level> {
        let has = |n: &str| sys.role(n).is_some();
        if has("u1.punct") {
            Some(Level::Ptl4)
        } else if has("q_cc_punct.out") {
            Some(Level::Ptl8)
        } else if has("punct.out") {
            Some(Level::Fl)
        } else {
            None
        }
    }
}

//! Text of the model files shipped in `models/`.

use std::fmt::Write;

use super::models::{build_model, correspondence, Level, BLOCKS};
use super::{prelude_source, props::properties_source, ModelError};
use crate::dsl::printer::print_system;

pub const JOBS_FILE: &str = "jobs.sre";

pub fn model_file(level: Level) -> String {
    format!("{}.sre", level.name().to_ascii_lowercase())
}

fn job(out: &mut String, name: &str, spec: Level, imp: Level, scenarios: &[String], bug: Option<&str>) {
    let _ = writeln!(out, "\njob {name} {{");
    let _ = writeln!(out, "  spec \"{}\" system {};", model_file(spec), spec.name());
    let _ = writeln!(out, "  impl \"{}\" system {};", model_file(imp), imp.name());
    let _ = writeln!(out, "  k_spec 1;\n  k_imp 1;");
    if imp == Level::Ptl4 {
        for (i, s) in correspondence(Level::Ptl4) {
            let _ = writeln!(out, "  map {i} -> {s};");
        }
    }
    let compare: Vec<String> = BLOCKS.iter().map(|b| format!("{b}.out")).collect();
    let _ = writeln!(out, "  compare {};", compare.join(", "));
    let _ = writeln!(out, "  scenarios {};", scenarios.join(", "));
    if let Some(b) = bug {
        let _ = writeln!(out, "  bug {b} in impl;");
    }
    out.push_str("}\n");
}

pub fn jobs_source() -> String {
    let single = vec!["mode_0".to_string()];
    let multiple: Vec<String> = (0..7).map(|i| format!("mode_{i}")).collect();
    let mut s = String::from("# Equivalence jobs between adjacent abstraction levels.\ninclude \"prelude.sre\";\n");
    for (spec, imp) in [(Level::Fl, Level::Ptl8), (Level::Ptl8, Level::Ptl4)] {
        let stem = format!("{}_vs_{}", spec.name().to_ascii_lowercase(), imp.name().to_ascii_lowercase());
        job(&mut s, &format!("{stem}_single"), spec, imp, &single, None);
        job(&mut s, &format!("{stem}_multiple"), spec, imp, &multiple, None);
        job(&mut s, &format!("{stem}_b1_single"), spec, imp, &single, Some("B1"));
        job(&mut s, &format!("{stem}_b1_multiple"), spec, imp, &multiple, Some("B1"));
    }
    s
}

/// `(file name, contents)` for every bundled file at data width `width`.
pub fn bundled_files(width: usize) -> Result<Vec<(String, String)>, ModelError> {
    let mut files = vec![("prelude.sre".to_string(), prelude_source(width))];
    for level in Level::ALL {
        let mut text = format!("# {} transmitter model, data width {width}. Generated by `sresim export`.\n", level.name());
        print_system(&mut text, &build_model(level, width)?);
        files.push((model_file(level), text));
    }
    files.push(("props.sre".to_string(), format!("include \"prelude.sre\";\n\n{}", properties_source(width))));
    files.push((JOBS_FILE.to_string(), jobs_source()));
    Ok(files)
}

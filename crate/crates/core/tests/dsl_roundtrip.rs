mod common;

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::SeedableRng;

use sresim::dsl::{parse_module, print_module, Library, Parser};
use sresim::wimax::bundle::bundled_files;

#[test]
fn random_units_round_trip() {
    let mut rng = StdRng::seed_from_u64(0x5EED);
    for case in 0..2000 {
        let m = common::random_module(&mut rng);
        let text = print_module(&m);
        let back = parse_module(&text).unwrap_or_else(|e| panic!("case {case}: {e}\n{text}"));
        assert_eq!(back, m, "case {case}:\n{text}");
        assert_eq!(print_module(&back), text, "case {case}: printing is not deterministic");
    }
}

#[test]
fn bundled_files_round_trip() {
    let dir = common::models_dir();
    for (name, _) in bundled_files(8).unwrap() {
        let path = dir.join(&name);
        let lib = Library::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        let src = std::fs::read_to_string(&path).unwrap();
        let parse = |text: &str| Parser::new(text, lib.consts.clone()).and_then(|mut p| p.unit()).map(|u| u.module);
        let unit = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse(&print_module(&unit)).unwrap_or_else(|e| panic!("{name} reprinted: {e}"));
        assert_eq!(again, unit, "{name}");
    }
}

#[test]
fn bundled_files_match_generator() {
    let dir = common::models_dir();
    for (name, text) in bundled_files(8).unwrap() {
        let on_disk = std::fs::read_to_string(dir.join(&name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(on_disk == text, "models/{name} is stale; regenerate with `sresim export models`");
    }
}

#[test]
fn parse_never_panics_on_arbitrary_bytes() {
    use rand::Rng;
    let mut rng = StdRng::seed_from_u64(7);
    let alphabet: Vec<char> = "system eq IF ( ) [ ] { } ; : , = => -> .. ... $ ? _ # \" n - 1 2.5 X True and\n\u{e9}\u{0}".chars().collect();
    for _ in 0..5000 {
        let len = rng.gen_range(0..60);
        let s: String = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
        let _ = parse_module(&s);
        let _ = Parser::new(&s, BTreeMap::new()).and_then(|mut p| p.unit());
    }
}

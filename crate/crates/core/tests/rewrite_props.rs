mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use sresim::eval::{eval, Assignment, FuncRegistry, Value};
use sresim::rewrite::{replace_list, replace_repeated, simplify, RuleSet, DEFAULT_MAX_ITERATIONS};
use sresim::term::{Rational, ScalarSort, Term};

fn term(seed: u64, depth: usize, boolean: bool) -> Term {
    let sort = if boolean { ScalarSort::Bool } else { ScalarSort::Num };
    common::random_scalar(&mut StdRng::seed_from_u64(seed), sort, depth)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn replace_repeated_reaches_a_fixpoint(seed: u64, depth in 1usize..=5, boolean: bool) {
        let rules = RuleSet::logic().union(&RuleSet::ite()).union(&RuleSet::math(&FuncRegistry::standard()));
        let t = term(seed, depth, boolean);
        let r = replace_repeated(&t, &rules, DEFAULT_MAX_ITERATIONS).unwrap();
        prop_assert_eq!(replace_list(&r, &rules), r);
    }

    #[test]
    fn simplify_is_idempotent(seed: u64, depth in 1usize..=5, boolean: bool) {
        let once = simplify(&term(seed, depth, boolean)).unwrap();
        prop_assert_eq!(simplify(&once).unwrap(), once);
    }

    #[test]
    fn simplify_preserves_value(
        seed: u64,
        depth in 1usize..=5,
        boolean: bool,
        bits in prop::array::uniform4(any::<bool>()),
        nums in prop::array::uniform3((-20i64..=20, 1i64..=7)),
    ) {
        let reg = FuncRegistry::standard();
        let mut env = Assignment::new();
        for (b, v) in common::BOOL_SYMS.iter().zip(bits) {
            env.insert(b.to_string(), Value::Bool(v));
        }
        for (x, (n, d)) in common::NUM_SYMS.iter().zip(nums) {
            env.insert(x.to_string(), Value::Num(Rational::new(n.into(), d.into())));
        }
        let t = term(seed, depth, boolean);
        if let Ok(before) = eval(&t, &env, &reg) {
            prop_assert_eq!(eval(&simplify(&t).unwrap(), &env, &reg), Ok(before));
        }
    }
}

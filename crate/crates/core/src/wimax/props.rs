//! P1: every data bit reaches the coder output. With generators 7 and 5,
//! `X_k xor Y_k = u_{k-1}`, and the last bit is `Y_{W-1} xor X_{W-2} xor Y_{W-2}`.
//! P2: the randomizer flips exactly the reference positions.
//! P3: puncturing keeps the rate's positions in order.

use std::collections::BTreeMap;

use super::prelude_consts;
use crate::dsl::Item;
use crate::prop::Property;

pub fn properties_source(width: usize) -> String {
    let w = width;
    let n = 2 * w;
    format!(
        "\
property P1 global {{
  horizon 1;
  forall j in 1..len(DATA(n)) - 1: xor(cc.out(n)[2 * j], cc.out(n)[2 * j + 1]) = xor(DATA(n)[j - 1], REF[j - 1]);
  xor(cc.out(n)[{a}], cc.out(n)[{b}], cc.out(n)[{c}]) = xor(DATA(n)[{last}], REF[{last}]);
}}

property P2 local {{
  horizon 1;
  forall i in 0..len(DATA(n)) - 1: rand.out(n)[i] = xor(DATA(n)[i], REF[i]);
}}

property P3 control {{
  horizon 1;
  forall i in 0..len(cc.out(n)) - 1: when CODE_RATE(n) = RATE_1_2: punct.out(n)[i] = cc.out(n)[i];
  forall i in 0..floor(len(cc.out(n)) / 4) - 1: when CODE_RATE(n) = RATE_2_3:
    and(punct.out(n)[3 * i] = cc.out(n)[4 * i], punct.out(n)[3 * i + 1] = cc.out(n)[4 * i + 1], punct.out(n)[3 * i + 2] = cc.out(n)[4 * i + 3]);
  forall i in 0..floor(len(cc.out(n)) / 6) - 1: when CODE_RATE(n) = RATE_3_4:
    and(punct.out(n)[4 * i] = cc.out(n)[6 * i], punct.out(n)[4 * i + 1] = cc.out(n)[6 * i + 1], punct.out(n)[4 * i + 2] = cc.out(n)[6 * i + 3], punct.out(n)[4 * i + 3] = cc.out(n)[6 * i + 4]);
}}
",
        a = n - 1,
        b = n - 4,
        c = n - 3,
        last = w - 1,
    )
}

/// P1, P2 and P3 for data width `width`.
pub fn properties(width: usize) -> Vec<Property> {
    let consts: BTreeMap<_, _> = prelude_consts(width);
    let mut p = crate::dsl::Parser::new(&properties_source(width), consts).expect("property source lexes");
    let unit = p.unit().expect("property source parses");
    unit.module
        .items
        .into_iter()
        .filter_map(|i| match i {
            Item::Property(p) => Some(p),
            _ => None,
        })
        .collect()
}

//! Transmitter block functions.
//!
//! Each block has two independent definitions: a numeric function over bit
//! vectors (registered for evaluation and used as the reference oracle) and
//! a term builder producing the bit-level equation body used in the models.
//!
//! * Randomizer: XOR with the leading bits of [`RAND_REF_WORD`].
//! * Convolutional coder: constraint length 3, generators 7 (111) and 5
//!   (101), zero start state per word, output `X0 Y0 X1 Y1 ...`.
//! * Puncturing: cyclic keep masks; rate 1/2 keeps all, rate 2/3 keeps
//!   positions {0,1,3} of every 4, rate 3/4 keeps {0,1,3,4} of every 6.
//!   The result is padded with zeros to the coded length.
//! * Interleaver: bit `k` of an `N`-bit block moves to `(N/4)(k mod 4) + k/4`.
//! * Repetition: the block followed by itself (factor 2) or by zeros.
//! * Modulator: Gray-coded amplitude levels per axis; a `k`-bit group maps to
//!   `2 * gray_to_binary(bits) - (2^k - 1)`. BPSK uses the I axis only.
//!   Output is `I0 Q0 I1 Q1 ...`, zero-padded to twice the repeated length.

use num_traits::ToPrimitive;

use crate::eval::{EvalError, FuncRegistry, Value};
use crate::term::{CmpOp, Term};

/// Randomizer reference constant; a width-`w` model uses its `w` leading bits.
pub const RAND_REF_WORD: u32 = 0x9A3C_5E71;

pub const RATE_1_2: i64 = 1;
pub const RATE_2_3: i64 = 2;
pub const RATE_3_4: i64 = 3;

pub const BPSK: i64 = 1;
pub const QPSK: i64 = 2;
pub const QAM16: i64 = 4;
pub const QAM64: i64 = 6;

pub fn rand_ref(width: usize) -> Vec<bool> {
    (0..width).map(|i| RAND_REF_WORD >> (31 - (i % 32)) & 1 == 1).collect()
}

/// Keep pattern `(period, kept offsets)` for a code rate.
pub fn keep_mask(rate: i64) -> Option<(usize, &'static [usize])> {
    match rate {
        RATE_1_2 => Some((1, &[0])),
        RATE_2_3 => Some((4, &[0, 1, 3])),
        RATE_3_4 => Some((6, &[0, 1, 3, 4])),
        _ => None,
    }
}

/// Positions of a `len`-bit coded word that survive puncturing, in order.
pub fn kept_positions(rate: i64, len: usize) -> Vec<usize> {
    let Some((period, keep)) = keep_mask(rate) else { return Vec::new() };
    (0..len).filter(|k| keep.contains(&(k % period))).collect()
}

pub fn interleave_position(k: usize, n: usize) -> usize {
    (n / 4) * (k % 4) + k / 4
}

// ---- numeric reference ----

pub fn randomize(data: &[bool], reference: &[bool]) -> Vec<bool> {
    data.iter().zip(reference).map(|(d, r)| d ^ r).collect()
}

pub fn conv_encode(u: &[bool]) -> Vec<bool> {
    let mut state = [false; 2];
    let mut out = Vec::with_capacity(2 * u.len());
    for &b in u {
        out.push(b ^ state[0] ^ state[1]);
        out.push(b ^ state[1]);
        state = [b, state[0]];
    }
    out
}

pub fn puncture(coded: &[bool], rate: i64) -> Vec<bool> {
    let mut out: Vec<bool> = match keep_mask(rate) {
        Some((period, keep)) => coded.iter().enumerate().filter(|(k, _)| keep.contains(&(k % period))).map(|(_, b)| *b).collect(),
        None => Vec::new(),
    };
    out.resize(coded.len(), false);
    out
}

pub fn interleave(bits: &[bool]) -> Vec<bool> {
    let n = bits.len();
    let mut out = vec![false; n];
    for (k, &b) in bits.iter().enumerate() {
        out[interleave_position(k, n)] = b;
    }
    out
}

pub fn repeat(bits: &[bool], factor: i64) -> Vec<bool> {
    let mut out = bits.to_vec();
    if factor == 2 {
        out.extend_from_slice(bits);
    } else {
        out.resize(2 * bits.len(), false);
    }
    out
}

fn gray_level(bits: &[bool]) -> i64 {
    let mut acc = false;
    let mut idx = 0i64;
    for &b in bits {
        acc ^= b;
        idx = 2 * idx + acc as i64;
    }
    2 * idx - ((1 << bits.len()) - 1)
}

pub fn modulate(bits: &[bool], modulation: i64) -> Vec<i64> {
    let mut out = vec![0i64; 2 * bits.len()];
    let k = modulation as usize;
    if ![BPSK, QPSK, QAM16, QAM64].contains(&modulation) {
        return out;
    }
    for (s, group) in bits.chunks_exact(k).enumerate() {
        if k == 1 {
            out[2 * s] = gray_level(group);
        } else {
            out[2 * s] = gray_level(&group[..k / 2]);
            out[2 * s + 1] = gray_level(&group[k / 2..]);
        }
    }
    out
}

/// Full chain from a data word to modulator output.
pub fn transmit(data: &[bool], reference: &[bool], rate: i64, modulation: i64, repetition: i64) -> Vec<i64> {
    let r = randomize(data, reference);
    let c = conv_encode(&r);
    let p = puncture(&c, rate);
    let i = interleave(&p);
    let rep = repeat(&i, repetition);
    modulate(&rep, modulation)
}

// ---- registry ----

fn bits_arg(v: &Value) -> Result<Vec<bool>, EvalError> {
    v.as_tuple()
        .ok_or_else(|| EvalError::Sort("expected a bit word".into()))?
        .iter()
        .map(|b| b.as_bool().ok_or_else(|| EvalError::Sort("expected a bit word".into())))
        .collect()
}

fn int_arg(v: &Value) -> Result<i64, EvalError> {
    v.as_num()
        .filter(|r| r.is_integer())
        .and_then(|r| r.to_integer().to_i64())
        .ok_or_else(|| EvalError::Sort("expected an integer".into()))
}

fn ints(v: Vec<i64>) -> Value {
    Value::Tuple(v.into_iter().map(Value::int).collect())
}

pub fn register(r: &mut FuncRegistry) {
    r.register("wimax_rand", |a| match a {
        [w] => {
            let b = bits_arg(w)?;
            Ok(Value::bits(&randomize(&b, &rand_ref(b.len()))))
        }
        _ => Err(EvalError::Sort("wimax_rand arity".into())),
    });
    r.register("wimax_cc", |a| match a {
        [w] => Ok(Value::bits(&conv_encode(&bits_arg(w)?))),
        _ => Err(EvalError::Sort("wimax_cc arity".into())),
    });
    r.register("wimax_punct", |a| match a {
        [w, rate] => Ok(Value::bits(&puncture(&bits_arg(w)?, int_arg(rate)?))),
        _ => Err(EvalError::Sort("wimax_punct arity".into())),
    });
    r.register("wimax_intl", |a| match a {
        [w] => Ok(Value::bits(&interleave(&bits_arg(w)?))),
        _ => Err(EvalError::Sort("wimax_intl arity".into())),
    });
    r.register("wimax_rep", |a| match a {
        [w, f] => Ok(Value::bits(&repeat(&bits_arg(w)?, int_arg(f)?))),
        _ => Err(EvalError::Sort("wimax_rep arity".into())),
    });
    r.register("wimax_mod", |a| match a {
        [w, m] => Ok(ints(modulate(&bits_arg(w)?, int_arg(m)?))),
        _ => Err(EvalError::Sort("wimax_mod arity".into())),
    });
    r.register("wimax_chain", |a| match a {
        [w, rate, m, rep] => {
            let b = bits_arg(w)?;
            Ok(ints(transmit(&b, &rand_ref(b.len()), int_arg(rate)?, int_arg(m)?, int_arg(rep)?)))
        }
        _ => Err(EvalError::Sort("wimax_chain arity".into())),
    });
}

// ---- term builders ----

fn bit(word: &Term, i: usize) -> Term {
    Term::index(word.clone(), i)
}

fn zeros(n: usize) -> Vec<Term> {
    vec![Term::ff(); n]
}

fn control_is(control: &str, value: i64) -> Term {
    Term::cmp(CmpOp::Eq, Term::var(control, 0), Term::int(value))
}

pub fn rand_body(input: &Term, reference: &[bool]) -> Term {
    Term::tuple(reference.iter().enumerate().map(|(i, r)| Term::xor(vec![bit(input, i), Term::bool(*r)])).collect())
}

/// `X_k = u_k + u_{k-1} + u_{k-2}`, `Y_k = u_k + u_{k-2}` over GF(2).
pub fn cc_body(input: &Term, width: usize) -> Term {
    let u = |k: isize| (k >= 0).then(|| bit(input, k as usize));
    let mut out = Vec::with_capacity(2 * width);
    for k in 0..width as isize {
        let x: Vec<Term> = [u(k), u(k - 1), u(k - 2)].into_iter().flatten().collect();
        let y: Vec<Term> = [u(k), u(k - 2)].into_iter().flatten().collect();
        out.push(if x.len() == 1 { x[0].clone() } else { Term::xor(x) });
        out.push(if y.len() == 1 { y[0].clone() } else { Term::xor(y) });
    }
    Term::tuple(out)
}

fn punct_branch(input: &Term, rate: i64, len: usize) -> Term {
    let mut elems: Vec<Term> = kept_positions(rate, len).into_iter().map(|k| bit(input, k)).collect();
    elems.resize(len, Term::ff());
    Term::tuple(elems)
}

pub fn punct_body(input: &Term, coded_len: usize) -> Term {
    Term::ite(
        control_is("CODE_RATE", RATE_1_2),
        punct_branch(input, RATE_1_2, coded_len),
        Term::ite(
            control_is("CODE_RATE", RATE_2_3),
            punct_branch(input, RATE_2_3, coded_len),
            Term::ite(
                control_is("CODE_RATE", RATE_3_4),
                punct_branch(input, RATE_3_4, coded_len),
                Term::tuple(zeros(coded_len)),
            ),
        ),
    )
}

pub fn intl_body(input: &Term, n: usize) -> Term {
    let mut src = vec![0; n];
    for k in 0..n {
        src[interleave_position(k, n)] = k;
    }
    Term::tuple(src.into_iter().map(|k| bit(input, k)).collect())
}

pub fn rep_body(input: &Term, n: usize) -> Term {
    let first: Vec<Term> = (0..n).map(|k| bit(input, k)).collect();
    let mut twice = first.clone();
    twice.extend(first.iter().cloned());
    let mut padded = first;
    padded.extend(zeros(n));
    Term::ite(control_is("REPETITION", 2), Term::tuple(twice), Term::tuple(padded))
}

/// Nested IF over the bits of a Gray group, with the amplitude at each leaf.
fn level_tree(bits: &[Term], prefix: &mut Vec<bool>) -> Term {
    if prefix.len() == bits.len() {
        return Term::int(gray_level(prefix));
    }
    let b = bits[prefix.len()].clone();
    prefix.push(true);
    let hi = level_tree(bits, prefix);
    prefix.pop();
    prefix.push(false);
    let lo = level_tree(bits, prefix);
    prefix.pop();
    Term::ite(b, hi, lo)
}

fn mod_elements(input: &Term, n: usize, k: usize) -> Vec<Term> {
    let mut out = vec![Term::int(0); 2 * n];
    for s in 0..n / k {
        let group: Vec<Term> = (0..k).map(|j| bit(input, s * k + j)).collect();
        if k == 1 {
            out[2 * s] = level_tree(&group, &mut Vec::new());
        } else {
            out[2 * s] = level_tree(&group[..k / 2], &mut Vec::new());
            out[2 * s + 1] = level_tree(&group[k / 2..], &mut Vec::new());
        }
    }
    out
}

/// Element-wise dispatch on MODULATION; output length `2n`.
pub fn mod_body(input: &Term, n: usize) -> Term {
    let per_mode: Vec<(i64, Vec<Term>)> = [BPSK, QPSK, QAM16, QAM64].iter().map(|&m| (m, mod_elements(input, n, m as usize))).collect();
    let elems = (0..2 * n)
        .map(|j| {
            per_mode.iter().rev().fold(Term::int(0), |acc, (m, els)| Term::ite(control_is("MODULATION", *m), els[j].clone(), acc))
        })
        .collect();
    Term::tuple(elems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coder_known_sequence() {
        // Input 1,0,1,1 from the zero state with generators 7 and 5.
        let out = conv_encode(&[true, false, true, true]);
        let expect = [1, 1, 1, 0, 0, 0, 0, 1].map(|b| b == 1);
        assert_eq!(out, expect);
    }

    #[test]
    fn rate_two_thirds_keeps_first_second_and_fourth() {
        let coded: Vec<bool> = (0..8).map(|k| k % 4 == 2).collect();
        let p = puncture(&coded, RATE_2_3);
        assert_eq!(p.len(), 8);
        assert!(p.iter().all(|b| !b));
        assert_eq!(kept_positions(RATE_2_3, 8), vec![0, 1, 3, 4, 5, 7]);
        assert_eq!(kept_positions(RATE_3_4, 16), vec![0, 1, 3, 4, 6, 7, 9, 10, 12, 13, 15]);
    }

    #[test]
    fn interleaver_is_a_permutation() {
        let n = 16;
        let mut seen: Vec<usize> = (0..n).map(|k| interleave_position(k, n)).collect();
        seen.sort();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn gray_levels() {
        let lv = |s: &str| gray_level(&s.chars().map(|c| c == '1').collect::<Vec<_>>());
        assert_eq!([lv("0"), lv("1")], [-1, 1]);
        assert_eq!([lv("00"), lv("01"), lv("11"), lv("10")], [-3, -1, 1, 3]);
        assert_eq!(
            ["000", "001", "011", "010", "110", "111", "101", "100"].map(lv),
            [-7, -5, -3, -1, 1, 3, 5, 7]
        );
    }

    #[test]
    fn reference_prefix() {
        assert_eq!(rand_ref(8), [true, false, false, true, true, false, true, false]);
    }
}

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::blocks::{RATE_1_2, RATE_2_3};
use super::models::{block_var, Level};
use crate::system::SreSystem;
use crate::term::{rational_from_i64, CmpOp, LogicOp, Term, TermKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bug {
    /// Puncturing: output bits 1 and 2 swapped in the rate-1/2 branch.
    B1,
    /// Coder: data line 3 from the randomizer cut (held at zero).
    B2,
    /// Randomizer: bit 0 of the reference array flipped.
    B3,
    /// Puncturing: the rate-1/2 condition tests for rate 2/3.
    B4,
}

impl Bug {
    pub const ALL: [Bug; 4] = [Bug::B1, Bug::B2, Bug::B3, Bug::B4];

    pub fn description(self) -> &'static str {
        match self {
            Bug::B1 => "puncturing block swaps output bits 1 and 2 at code rate 1/2",
            Bug::B2 => "data line 3 between randomizer and coder is cut",
            Bug::B3 => "randomizer reference bit 0 is flipped",
            Bug::B4 => "puncturing block checks the wrong code rate for its rate-1/2 branch",
        }
    }

    fn block(self) -> &'static str {
        match self {
            Bug::B1 | Bug::B4 => "punct",
            Bug::B2 => "cc",
            Bug::B3 => "rand",
        }
    }
}

impl fmt::Display for Bug {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Bug {
    type Err = BugError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "B1" => Ok(Bug::B1),
            "B2" => Ok(Bug::B2),
            "B3" => Ok(Bug::B3),
            "B4" => Ok(Bug::B4),
            _ => Err(BugError::Unknown(s.into())),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BugError {
    #[error("unknown bug {0}")]
    Unknown(String),
    #[error("bug {bug} does not apply to system {system}: {reason}")]
    Inapplicable { bug: Bug, system: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationSite {
    pub bug: Bug,
    /// Equation that was changed.
    pub target: String,
    pub before: Term,
    pub after: Term,
}

fn is_rate_test(t: &Term, rate: i64) -> bool {
    match t.kind() {
        TermKind::Cmp(CmpOp::Eq, l, r) => {
            matches!(l.kind(), TermKind::Var { name, .. } if name == "CODE_RATE") && r.as_num() == Some(&rational_from_i64(rate))
        }
        _ => false,
    }
}

/// Applies `f` at the first (pre-order) node where it returns a
/// replacement.
fn rewrite_first(t: &Term, f: &dyn Fn(&Term) -> Option<Term>) -> Option<Term> {
    if let Some(r) = f(t) {
        return Some(r);
    }
    let kids: Vec<Term> = t.children().into_iter().cloned().collect();
    for (i, k) in kids.iter().enumerate() {
        if let Some(r) = rewrite_first(k, f) {
            let mut nk = kids.clone();
            nk[i] = r;
            return Some(t.with_children(nk));
        }
    }
    None
}

fn mutate(bug: Bug, body: &Term) -> Option<Term> {
    match bug {
        Bug::B1 => rewrite_first(body, &|t| match t.kind() {
            TermKind::If(c, then, e) if is_rate_test(c, RATE_1_2) => match then.kind() {
                TermKind::Tuple(xs) if xs.len() >= 3 => {
                    let mut xs = xs.clone();
                    xs.swap(1, 2);
                    Some(Term::ite(c.clone(), Term::tuple(xs), e.clone()))
                }
                _ => None,
            },
            _ => None,
        }),
        Bug::B2 => {
            let cut = body.transform(&mut |t| match t.kind() {
                TermKind::Index(w, i) if matches!(w.kind(), TermKind::Var { offset: 0, .. }) && i.as_index() == Some(3) => {
                    Some(Term::ff())
                }
                _ => None,
            });
            (cut != *body).then_some(cut)
        }
        Bug::B3 => rewrite_first(body, &|t| match t.kind() {
            TermKind::Logic(LogicOp::Xor, args) if args.len() == 2 => {
                let TermKind::Index(_, i) = args[0].kind() else { return None };
                let r = args[1].as_bool()?;
                (i.as_index() == Some(0)).then(|| Term::xor(vec![args[0].clone(), Term::bool(!r)]))
            }
            _ => None,
        }),
        Bug::B4 => rewrite_first(body, &|t| {
            is_rate_test(t, RATE_1_2).then(|| Term::cmp(CmpOp::Eq, Term::var("CODE_RATE", 0), Term::int(RATE_2_3)))
        }),
    }
}

/// Returns a mutated copy of a transmitter model. `level` selects the
/// block naming used by the model.
pub fn inject(model: &SreSystem, level: Level, bug: Bug) -> Result<(SreSystem, MutationSite), BugError> {
    let target = block_var(level, bug.block());
    let inapplicable = |reason: &str| BugError::Inapplicable { bug, system: model.name.clone(), reason: reason.into() };
    let eq = model.equation(&target).ok_or_else(|| inapplicable(&format!("no equation for {target}")))?;
    let after = mutate(bug, &eq.body).ok_or_else(|| inapplicable("mutation site not found"))?;
    let site = MutationSite { bug, target: target.clone(), before: eq.body.clone(), after: after.clone() };
    let mut out = model.clone();
    out.name = format!("{}_{bug}", model.name);
    out.equation_mut(&target).expect("equation exists").body = after;
    Ok((out, site))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wimax::models::build_model;

    #[test]
    fn injection_leaves_original_untouched() {
        let fl = build_model(Level::Fl, 8).unwrap();
        for bug in Bug::ALL {
            let (m, site) = inject(&fl, Level::Fl, bug).unwrap();
            assert_ne!(site.before, site.after);
            assert_ne!(m, fl);
            assert_eq!(fl, build_model(Level::Fl, 8).unwrap());
            assert!(m.validate().is_empty(), "{bug}: {:?}", m.validate());
        }
    }

    #[test]
    fn applies_to_every_level() {
        for level in Level::ALL {
            let m = build_model(level, 8).unwrap();
            for bug in Bug::ALL {
                assert!(inject(&m, level, bug).is_ok(), "{level} {bug}");
            }
        }
    }

    #[test]
    fn inapplicable_bug_is_reported() {
        let mut s = SreSystem::new("tiny");
        s.vars.push(crate::system::Decl::new("punct.out", None));
        s.equations.push(crate::system::Equation { target: "punct.out".into(), body: Term::int(0) });
        assert!(matches!(inject(&s, Level::Fl, Bug::B1), Err(BugError::Inapplicable { .. })));
    }
}

//! Sort inference for terms.

use std::collections::HashMap;
use std::fmt;

use crate::term::{CmpOp, Const, Sort, Term, TermKind};

/// Supplies the sorts of named variables, inputs and controls.
pub trait SortContext {
    fn var_sort(&self, name: &str) -> Option<Sort>;
}

impl SortContext for HashMap<String, Sort> {
    fn var_sort(&self, name: &str) -> Option<Sort> {
        self.get(name).cloned()
    }
}

impl SortContext for std::collections::BTreeMap<String, Sort> {
    fn var_sort(&self, name: &str) -> Option<Sort> {
        self.get(name).cloned()
    }
}

/// Context that knows no variables; fine for ground and symbolic terms.
pub struct NoVars;

impl SortContext for NoVars {
    fn var_sort(&self, _: &str) -> Option<Sort> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortError {
    /// Child indices from the root to the offending sub-term.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for SortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sort error at {:?}: {}", self.path, self.message)
    }
}

impl std::error::Error for SortError {}

fn err<T>(path: &[usize], message: impl Into<String>) -> Result<T, SortError> {
    Err(SortError { path: path.to_vec(), message: message.into() })
}

pub fn sort_of(term: &Term, ctx: &dyn SortContext) -> Result<Sort, SortError> {
    let mut path = Vec::new();
    infer(term, ctx, &mut path)
}

fn child(
    term: &Term,
    idx: usize,
    ctx: &dyn SortContext,
    path: &mut Vec<usize>,
) -> Result<Sort, SortError> {
    path.push(idx);
    let s = infer(term, ctx, path)?;
    path.pop();
    Ok(s)
}

fn expect(
    term: &Term,
    idx: usize,
    want: &Sort,
    ctx: &dyn SortContext,
    path: &mut Vec<usize>,
) -> Result<(), SortError> {
    let got = child(term, idx, ctx, path)?;
    if &got != want {
        path.push(idx);
        let e = err(path, format!("expected {want}, found {got}"));
        path.pop();
        return e;
    }
    Ok(())
}

fn infer(term: &Term, ctx: &dyn SortContext, path: &mut Vec<usize>) -> Result<Sort, SortError> {
    match term.kind() {
        TermKind::Const(Const::Bool(_)) => Ok(Sort::Bool),
        TermKind::Const(Const::Num(_)) => Ok(Sort::Num),
        TermKind::Var { name, .. } => match ctx.var_sort(name) {
            Some(s) => Ok(s),
            None => err(path, format!("unresolved reference {name}")),
        },
        TermKind::Sym { sort, .. } => Ok((*sort).into()),
        TermKind::Arith(_, args) => {
            if args.is_empty() {
                return err(path, "arithmetic with no operands");
            }
            for (i, a) in args.iter().enumerate() {
                expect(a, i, &Sort::Num, ctx, path)?;
            }
            Ok(Sort::Num)
        }
        TermKind::Logic(op, args) => {
            let arity_ok = match op {
                crate::term::LogicOp::Not => args.len() == 1,
                _ => !args.is_empty(),
            };
            if !arity_ok {
                return err(path, format!("{} has wrong arity {}", op.name(), args.len()));
            }
            for (i, a) in args.iter().enumerate() {
                expect(a, i, &Sort::Bool, ctx, path)?;
            }
            Ok(Sort::Bool)
        }
        TermKind::Cmp(op, a, b) => {
            let sa = child(a, 0, ctx, path)?;
            match op {
                CmpOp::Eq | CmpOp::Ne => expect(b, 1, &sa, ctx, path)?,
                _ => {
                    if sa != Sort::Num {
                        path.push(0);
                        let e = err(path, format!("ordered comparison on {sa}"));
                        path.pop();
                        return e;
                    }
                    expect(b, 1, &Sort::Num, ctx, path)?;
                }
            }
            Ok(Sort::Bool)
        }
        TermKind::If(c, t, e) => {
            expect(c, 0, &Sort::Bool, ctx, path)?;
            let st = child(t, 1, ctx, path)?;
            expect(e, 2, &st, ctx, path)?;
            Ok(st)
        }
        TermKind::App(name, args) => {
            let sorts = args
                .iter()
                .enumerate()
                .map(|(i, a)| child(a, i, ctx, path))
                .collect::<Result<Vec<_>, _>>()?;
            match name.as_str() {
                "to_int" if sorts.len() == 1 => Ok(sorts[0].clone()),
                "len" => match sorts.as_slice() {
                    [Sort::Tuple(..)] => Ok(Sort::Num),
                    _ => err(path, "len expects one word argument"),
                },
                "floor" => match sorts.as_slice() {
                    [Sort::Num] => Ok(Sort::Num),
                    _ => err(path, "floor expects one numeric argument"),
                },
                "is_const" | "is_ground" => Ok(Sort::Bool),
                // Uninterpreted and library functions yield numbers unless they
                // map words to words of the same shape.
                _ => match sorts.as_slice() {
                    [s @ Sort::Tuple(..)] => Ok(s.clone()),
                    _ => Ok(Sort::Num),
                },
            }
        }
        TermKind::Tuple(elems) => {
            let Some(first) = elems.first() else {
                return Ok(Sort::Tuple(Box::new(Sort::Bool), 0));
            };
            let s0 = child(first, 0, ctx, path)?;
            for (i, e) in elems.iter().enumerate().skip(1) {
                expect(e, i, &s0, ctx, path)?;
            }
            Ok(Sort::Tuple(Box::new(s0), elems.len()))
        }
        TermKind::Index(w, i) => {
            let sw = child(w, 0, ctx, path)?;
            expect(i, 1, &Sort::Num, ctx, path)?;
            match sw {
                Sort::Tuple(elem, len) => {
                    if let Some(k) = i.as_index() {
                        if k >= len {
                            path.push(1);
                            let e = err(path, format!("index {k} out of range for word of length {len}"));
                            path.pop();
                            return e;
                        }
                    }
                    Ok(*elem)
                }
                other => {
                    path.push(0);
                    let e = err(path, format!("indexing a non-word of sort {other}"));
                    path.pop();
                    e
                }
            }
        }
        TermKind::Hole(h) => match &h.sort {
            Some(s) => Ok(s.clone()),
            None => err(path, "unsorted pattern hole"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::LogicOp;

    fn ctx() -> HashMap<String, Sort> {
        HashMap::from([("X".to_string(), Sort::Num)])
    }

    #[test]
    fn comparison_is_boolean() {
        let t = Term::eq(Term::var("X", 1), Term::int(5));
        assert_eq!(sort_of(&t, &ctx()), Ok(Sort::Bool));
    }

    #[test]
    fn if_is_numeric() {
        let t = Term::ite(Term::tt(), Term::int(1), Term::int(2));
        assert_eq!(sort_of(&t, &ctx()), Ok(Sort::Num));
    }

    #[test]
    fn and_of_number_fails_at_operand_zero() {
        let t = Term::logic(LogicOp::And, vec![Term::int(1), Term::bsym("a")]);
        let e = sort_of(&t, &ctx()).unwrap_err();
        assert_eq!(e.path, vec![0]);
    }

    #[test]
    fn branches_must_agree() {
        let t = Term::ite(Term::tt(), Term::int(1), Term::ff());
        assert_eq!(sort_of(&t, &ctx()).unwrap_err().path, vec![2]);
    }

    #[test]
    fn word_indexing() {
        let w = Term::tuple(vec![Term::tt(), Term::ff()]);
        assert_eq!(sort_of(&Term::index(w.clone(), 1), &NoVars), Ok(Sort::Bool));
        assert!(sort_of(&Term::index(w, 2), &NoVars).is_err());
    }
}

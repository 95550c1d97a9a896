//! Numerical evaluation of terms and the function registry.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::term::{ArithOp, CmpOp, Const, LogicOp, Rational, ScalarSort, Term, TermKind};

/// Concrete value of a term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Num(Rational),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Num(crate::term::rational_from_i64(v))
    }

    pub fn bits(bits: &[bool]) -> Value {
        Value::Tuple(bits.iter().map(|b| Value::Bool(*b)).collect())
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Value::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Value::Bool(b) => Term::bool(*b),
            Value::Num(r) => Term::rational(r.clone()),
            Value::Tuple(v) => Term::tuple(v.iter().map(Value::to_term).collect()),
        }
    }

    /// Converts a ground constant term (constants and tuples only).
    pub fn from_term(t: &Term) -> Option<Value> {
        match t.kind() {
            TermKind::Const(Const::Bool(b)) => Some(Value::Bool(*b)),
            TermKind::Const(Const::Num(r)) => Some(Value::Num(r.clone())),
            TermKind::Tuple(elems) => elems.iter().map(Value::from_term).collect::<Option<Vec<_>>>().map(Value::Tuple),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}(n-{1})")]
    UnboundVar(String, u32),
    #[error("unbound symbol {0}")]
    UnboundSym(String),
    #[error("division by zero")]
    DivByZero,
    #[error("sort mismatch: {0}")]
    Sort(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("index {0} out of range")]
    Index(String),
    #[error("cannot evaluate a pattern hole")]
    Hole,
}

/// Lookup of variable references and symbolic inputs during evaluation.
pub trait Env {
    fn var(&self, name: &str, offset: u32) -> Option<Value>;
    fn sym(&self, name: &str) -> Option<Value>;
}

/// Environment binding only symbolic inputs.
pub type Assignment = BTreeMap<String, Value>;

impl Env for Assignment {
    fn var(&self, _: &str, _: u32) -> Option<Value> {
        None
    }

    fn sym(&self, name: &str) -> Option<Value> {
        self.get(name).cloned()
    }
}

pub type NativeFn = Arc<dyn Fn(&[Value]) -> Result<Value, EvalError> + Send + Sync>;

/// Maps function names to concrete definitions. Functions without an entry
/// are uninterpreted: they stay symbolic and cannot be evaluated.
#[derive(Clone, Default)]
pub struct FuncRegistry {
    funcs: HashMap<String, NativeFn>,
}

impl fmt::Debug for FuncRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.funcs.keys().collect();
        names.sort();
        f.debug_struct("FuncRegistry").field("funcs", &names).finish()
    }
}

impl FuncRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Built-in conversions plus the bundled transmitter block functions.
    pub fn standard() -> Self {
        let mut r = Self::default();
        r.register("to_int", |args| match args {
            [v] => Ok(to_int(v)),
            _ => Err(EvalError::Sort("to_int arity".into())),
        });
        r.register("floor", |args| match args {
            [Value::Num(x)] => Ok(Value::Num(x.floor())),
            _ => Err(EvalError::Sort("floor expects a number".into())),
        });
        r.register("len", |args| match args {
            [Value::Tuple(v)] => Ok(Value::int(v.len() as i64)),
            _ => Err(EvalError::Sort("len expects a word".into())),
        });
        crate::wimax::blocks::register(&mut r);
        r
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        f: impl Fn(&[Value]) -> Result<Value, EvalError> + Send + Sync + 'static,
    ) {
        self.funcs.insert(name.into(), Arc::new(f));
    }

    pub fn get(&self, name: &str) -> Option<&NativeFn> {
        self.funcs.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.funcs.contains_key(name)
    }
}

fn to_int(v: &Value) -> Value {
    match v {
        Value::Num(x) => Value::Num(x.floor()),
        Value::Tuple(vs) => Value::Tuple(vs.iter().map(to_int).collect()),
        other => other.clone(),
    }
}

pub fn eval(term: &Term, env: &dyn Env, reg: &FuncRegistry) -> Result<Value, EvalError> {
    match term.kind() {
        TermKind::Const(Const::Bool(b)) => Ok(Value::Bool(*b)),
        TermKind::Const(Const::Num(r)) => Ok(Value::Num(r.clone())),
        TermKind::Var { name, offset } => {
            env.var(name, *offset).ok_or_else(|| EvalError::UnboundVar(name.clone(), *offset))
        }
        TermKind::Sym { name, sort } => {
            let v = env.sym(name).ok_or_else(|| EvalError::UnboundSym(name.clone()))?;
            match (sort, &v) {
                (ScalarSort::Bool, Value::Bool(_)) | (ScalarSort::Num, Value::Num(_)) => Ok(v),
                _ => Err(EvalError::Sort(format!("symbol {name} bound to {v}"))),
            }
        }
        TermKind::Arith(op, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(num(eval(a, env, reg)?)?);
            }
            arith(*op, vals)
        }
        TermKind::Logic(op, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(boolean(eval(a, env, reg)?)?);
            }
            Ok(Value::Bool(logic(*op, &vals)?))
        }
        TermKind::Cmp(op, a, b) => {
            let va = eval(a, env, reg)?;
            let vb = eval(b, env, reg)?;
            compare(*op, &va, &vb).map(Value::Bool)
        }
        TermKind::If(c, t, e) => {
            if boolean(eval(c, env, reg)?)? {
                eval(t, env, reg)
            } else {
                eval(e, env, reg)
            }
        }
        TermKind::App(name, args) => {
            let f = reg.get(name).ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
            let vals = args.iter().map(|a| eval(a, env, reg)).collect::<Result<Vec<_>, _>>()?;
            f(&vals)
        }
        TermKind::Tuple(elems) => {
            elems.iter().map(|e| eval(e, env, reg)).collect::<Result<Vec<_>, _>>().map(Value::Tuple)
        }
        TermKind::Index(w, i) => {
            let vw = eval(w, env, reg)?;
            let vi = num(eval(i, env, reg)?)?;
            let Value::Tuple(elems) = vw else {
                return Err(EvalError::Sort("indexing a non-word".into()));
            };
            let idx = Term::rational(vi.clone()).as_index().ok_or_else(|| EvalError::Index(vi.to_string()))?;
            elems.get(idx).cloned().ok_or_else(|| EvalError::Index(idx.to_string()))
        }
        TermKind::Hole(_) => Err(EvalError::Hole),
    }
}

fn num(v: Value) -> Result<Rational, EvalError> {
    match v {
        Value::Num(r) => Ok(r),
        other => Err(EvalError::Sort(format!("expected number, found {other}"))),
    }
}

fn boolean(v: Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(EvalError::Sort(format!("expected boolean, found {other}"))),
    }
}

pub(crate) fn arith(op: ArithOp, vals: Vec<Rational>) -> Result<Value, EvalError> {
    let mut it = vals.into_iter();
    let Some(first) = it.next() else {
        return Err(EvalError::Sort("arithmetic with no operands".into()));
    };
    let rest: Vec<Rational> = it.collect();
    let r = match op {
        ArithOp::Add => rest.into_iter().fold(first, |a, b| a + b),
        ArithOp::Mul => rest.into_iter().fold(first, |a, b| a * b),
        ArithOp::Sub => {
            if rest.is_empty() {
                -first
            } else {
                rest.into_iter().fold(first, |a, b| a - b)
            }
        }
        ArithOp::Div => {
            let mut acc = first;
            for d in rest {
                if d.is_zero() {
                    return Err(EvalError::DivByZero);
                }
                acc /= d;
            }
            acc
        }
    };
    Ok(Value::Num(r))
}

pub(crate) fn logic(op: LogicOp, vals: &[bool]) -> Result<bool, EvalError> {
    Ok(match op {
        LogicOp::Not => match vals {
            [v] => !v,
            _ => return Err(EvalError::Sort("not arity".into())),
        },
        LogicOp::And => vals.iter().all(|v| *v),
        LogicOp::Or => vals.iter().any(|v| *v),
        LogicOp::Xor => vals.iter().fold(false, |a, b| a ^ b),
        LogicOp::Nor => !vals.iter().any(|v| *v),
        LogicOp::Nand => !vals.iter().all(|v| *v),
    })
}

pub(crate) fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<bool, EvalError> {
    match (op, a, b) {
        (CmpOp::Eq, _, _) => same_shape(a, b).map(|_| a == b),
        (CmpOp::Ne, _, _) => same_shape(a, b).map(|_| a != b),
        (_, Value::Num(x), Value::Num(y)) => Ok(op.holds(x.cmp(y))),
        _ => Err(EvalError::Sort(format!("ordered comparison of {a} and {b}"))),
    }
}

fn same_shape(a: &Value, b: &Value) -> Result<(), EvalError> {
    match (a, b) {
        (Value::Bool(_), Value::Bool(_)) | (Value::Num(_), Value::Num(_)) => Ok(()),
        (Value::Tuple(x), Value::Tuple(y)) if x.len() == y.len() => {
            x.iter().zip(y).try_for_each(|(p, q)| same_shape(p, q))
        }
        _ => Err(EvalError::Sort(format!("comparing {a} with {b}"))),
    }
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

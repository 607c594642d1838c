//! Ground evaluator for function-free, quantifier-free obligations, used to
//! confirm solver counterexamples independently of the solver.

use std::collections::BTreeMap;

use super::result::{CexValue, Counterexample};
use crate::model::{BinOp, Expr, Sort, UnOp};
use crate::pogen::{Goal, ProofObligation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i128),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("cannot evaluate `{0}`: quantifiers and function applications are not ground")]
    NotGround(String),
    #[error("no value for `{0}`")]
    Unbound(String),
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("arithmetic overflow in `{0}`")]
    Overflow(String),
    #[error("ill-sorted operand in `{0}`")]
    Sort(String),
}

/// Values keyed by display name (`x`, `x'`).
pub type Valuation = BTreeMap<String, Value>;

fn int(e: &Expr, env: &Valuation) -> Result<i128, EvalError> {
    match eval(e, env)? {
        Value::Int(v) => Ok(v),
        Value::Bool(_) => Err(EvalError::Sort(e.to_string())),
    }
}

fn boolean(e: &Expr, env: &Valuation) -> Result<bool, EvalError> {
    match eval(e, env)? {
        Value::Bool(b) => Ok(b),
        Value::Int(_) => Err(EvalError::Sort(e.to_string())),
    }
}

/// Evaluates `e` with integer division and remainder rounded the Euclidean
/// way, as in SMT-LIB.
pub fn eval(e: &Expr, env: &Valuation) -> Result<Value, EvalError> {
    let overflow = || EvalError::Overflow(e.to_string());
    Ok(match e {
        Expr::Int(v) => Value::Int(*v as i128),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Sym(s) => *env.get(&s.display_name()).ok_or_else(|| EvalError::Unbound(s.display_name()))?,
        Expr::Apply { .. } | Expr::Quant { .. } => return Err(EvalError::NotGround(e.to_string())),
        Expr::Unary(UnOp::Neg, a) => Value::Int(int(a, env)?.checked_neg().ok_or_else(overflow)?),
        Expr::Unary(UnOp::Not, a) => Value::Bool(!boolean(a, env)?),
        Expr::And(items) => {
            for i in items {
                if !boolean(i, env)? {
                    return Ok(Value::Bool(false));
                }
            }
            Value::Bool(true)
        }
        Expr::Or(items) => {
            for i in items {
                if boolean(i, env)? {
                    return Ok(Value::Bool(true));
                }
            }
            Value::Bool(false)
        }
        Expr::Binary(op, l, r) => match op {
            BinOp::Implies => Value::Bool(!boolean(l, env)? || boolean(r, env)?),
            BinOp::Iff => Value::Bool(boolean(l, env)? == boolean(r, env)?),
            BinOp::Eq | BinOp::Neq => {
                let same = eval(l, env)? == eval(r, env)?;
                Value::Bool(same == (*op == BinOp::Eq))
            }
            _ => {
                let (a, b) = (int(l, env)?, int(r, env)?);
                match op {
                    BinOp::Add => Value::Int(a.checked_add(b).ok_or_else(overflow)?),
                    BinOp::Sub => Value::Int(a.checked_sub(b).ok_or_else(overflow)?),
                    BinOp::Mul => Value::Int(a.checked_mul(b).ok_or_else(overflow)?),
                    BinOp::Div | BinOp::Mod if b == 0 => return Err(EvalError::DivisionByZero(e.to_string())),
                    BinOp::Div => Value::Int(a.div_euclid(b)),
                    BinOp::Mod => Value::Int(a.rem_euclid(b)),
                    BinOp::Lt => Value::Bool(a < b),
                    BinOp::Le => Value::Bool(a <= b),
                    BinOp::Gt => Value::Bool(a > b),
                    BinOp::Ge => Value::Bool(a >= b),
                    _ => unreachable!("logical operators handled above"),
                }
            }
        },
    })
}

/// True if the obligation can be checked by [`eval`]: a plain goal and no
/// quantifiers or function applications anywhere.
pub fn is_ground(po: &ProofObligation) -> bool {
    let Goal::Plain(goal) = &po.goal else { return false };
    po.hypotheses.iter().map(|h| &h.expr).chain([goal]).all(|e| !e.has_quantifier() && !e.has_application())
}

/// Checks that `cex` makes every hypothesis true and the goal false. Symbols
/// the solver left out of its model are irrelevant to it and default to 0 or
/// `false`.
pub fn confirm_counterexample(po: &ProofObligation, cex: &Counterexample) -> Result<bool, EvalError> {
    let Goal::Plain(goal) = &po.goal else {
        return Err(EvalError::NotGround(format!("existential goal of {}", po.id)));
    };
    if !is_ground(po) {
        return Err(EvalError::NotGround(po.id.clone()));
    }
    let mut env = Valuation::new();
    for s in &po.symbols {
        let name = s.display_name();
        let v = match (cex.get(&name), s.sort) {
            (Some(CexValue::Int(v)), Sort::Int) => Value::Int(*v as i128),
            (Some(CexValue::Bool(b)), Sort::Bool) => Value::Bool(*b),
            (None, Sort::Int) => Value::Int(0),
            (None, Sort::Bool) => Value::Bool(false),
            _ => return Err(EvalError::Sort(name)),
        };
        env.insert(name, v);
    }
    for h in &po.hypotheses {
        if !boolean(&h.expr, &env)? {
            return Ok(false);
        }
    }
    Ok(!boolean(goal, &env)?)
}

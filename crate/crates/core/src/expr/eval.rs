use super::{Expr, Func, Params, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of non-positive value {0}")]
    LogDomain(f64),
    #[error("power with non-integer exponent {exponent} of non-positive base {base}")]
    PowDomain { base: f64, exponent: f64 },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("non-finite result")]
    NonFinite,
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// Integer-valued exponents use repeated multiplication so that negative bases
/// are allowed; everything else needs a positive base.
pub(crate) fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        return finite(base.powi(exponent as i32));
    }
    if base > 0.0 {
        finite(base.powf(exponent))
    } else if base == 0.0 && exponent > 0.0 {
        Ok(0.0)
    } else {
        Err(EvalError::PowDomain { base, exponent })
    }
}

pub(crate) fn apply(func: Func, x: f64) -> Result<f64, EvalError> {
    match func {
        Func::Exp => finite(x.exp()),
        Func::Ln => {
            if x > 0.0 {
                Ok(x.ln())
            } else {
                Err(EvalError::LogDomain(x))
            }
        }
        Func::Sin => Ok(x.sin()),
        Func::Cos => Ok(x.cos()),
        Func::Abs => Ok(x.abs()),
    }
}

pub(crate) fn eval(e: &Expr, p: &Point, params: &Params) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var(a) => Ok(p[a.index()]),
        Expr::Param(name) => params
            .get(&**name)
            .copied()
            .ok_or_else(|| EvalError::UnboundParameter(name.to_string())),
        Expr::Neg(a) => Ok(-eval(a, p, params)?),
        Expr::Add(a, b) => finite(eval(a, p, params)? + eval(b, p, params)?),
        Expr::Sub(a, b) => finite(eval(a, p, params)? - eval(b, p, params)?),
        Expr::Mul(a, b) => finite(eval(a, p, params)? * eval(b, p, params)?),
        Expr::Div(a, b) => {
            let num = eval(a, p, params)?;
            let den = eval(b, p, params)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            finite(num / den)
        }
        Expr::Pow(a, b) => power(eval(a, p, params)?, eval(b, p, params)?),
        Expr::Func(f, a) => apply(*f, eval(a, p, params)?),
    }
}

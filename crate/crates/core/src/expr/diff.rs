use std::sync::Arc;

use super::{Axis, Expr, Func};

// Light constructors that drop the zeros and ones the chain rule produces, so
// the tree handed to the simplifier stays small.

fn add(a: Expr, b: Expr) -> Expr {
    if a.is_zero_const() {
        return b;
    }
    if b.is_zero_const() {
        return a;
    }
    a + b
}

fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_zero_const() {
        return a;
    }
    if a.is_zero_const() {
        return neg(b);
    }
    a - b
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::constant(-c),
        a => -a,
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_zero_const() || b.is_zero_const() {
        return Expr::zero();
    }
    if a.as_const() == Some(1.0) {
        return b;
    }
    if b.as_const() == Some(1.0) {
        return a;
    }
    a * b
}

fn div(a: Expr, b: Expr) -> Expr {
    if a.is_zero_const() {
        return Expr::zero();
    }
    if b.as_const() == Some(1.0) {
        return a;
    }
    a / b
}

fn arc(e: &Arc<Expr>) -> Expr {
    (**e).clone()
}

/// Partial derivative by the usual rules. `|f|` differentiates to
/// `f' * |f| / f`, which is a domain error exactly where `f = 0`.
pub(crate) fn derivative(e: &Expr, axis: Axis) -> Expr {
    if !e.depends_on(axis) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) | Expr::Param(_) => Expr::zero(),
        Expr::Var(a) => {
            if *a == axis {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(a) => neg(derivative(a, axis)),
        Expr::Add(a, b) => add(derivative(a, axis), derivative(b, axis)),
        Expr::Sub(a, b) => sub(derivative(a, axis), derivative(b, axis)),
        Expr::Mul(a, b) => add(
            mul(derivative(a, axis), arc(b)),
            mul(arc(a), derivative(b, axis)),
        ),
        Expr::Div(a, b) => {
            let da = derivative(a, axis);
            let db = derivative(b, axis);
            if db.is_zero_const() {
                return div(da, arc(b));
            }
            div(
                sub(mul(da, arc(b)), mul(arc(a), db)),
                arc(b).powf(2.0),
            )
        }
        Expr::Pow(base, exponent) => {
            let dbase = derivative(base, axis);
            if !exponent.depends_on(axis) {
                // g * f^(g-1) * f'
                let lowered = match exponent.as_const() {
                    Some(c) => Expr::constant(c - 1.0),
                    None => arc(exponent) - Expr::one(),
                };
                return mul(mul(arc(exponent), arc(base).pow(lowered)), dbase);
            }
            // f^g * (g' ln f + g f'/f)
            let dexp = derivative(exponent, axis);
            let inner = add(
                mul(dexp, arc(base).ln()),
                mul(arc(exponent), div(dbase, arc(base))),
            );
            mul(e.clone(), inner)
        }
        Expr::Func(func, a) => {
            let da = derivative(a, axis);
            let outer = match func {
                Func::Exp => e.clone(),
                Func::Ln => return div(da, arc(a)),
                Func::Sin => arc(a).cos(),
                Func::Cos => neg(arc(a).sin()),
                Func::Abs => arc(a).abs() / arc(a),
            };
            mul(outer, da)
        }
    }
}

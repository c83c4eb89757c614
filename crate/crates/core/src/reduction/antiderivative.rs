use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Axis, Expr, Func, Point};

/// Relative tolerance of the adaptive Simpson rule.
pub const QUAD_TOL: f64 = 1e-10;
const QUAD_DEPTH: u32 = 20;
const GRID_CELLS: usize = 64;
const SIGN_POINTS: usize = 257;
const INVERSE_TOL: f64 = 1e-12;

/// `F(x) = integral of f from anchor to x` on an open interval where `f`
/// keeps one sign, so `F` is strictly monotone.
#[derive(Debug)]
pub struct Antiderivative {
    integrand: Expr,
    axis: Axis,
    lo: f64,
    hi: f64,
    anchor: f64,
    sign: f64,
    closed: Option<Expr>,
    grid: OnceLock<Vec<(f64, f64)>>,
}

impl Clone for Antiderivative {
    fn clone(&self) -> Self {
        Antiderivative {
            integrand: self.integrand.clone(),
            axis: self.axis,
            lo: self.lo,
            hi: self.hi,
            anchor: self.anchor,
            sign: self.sign,
            closed: self.closed.clone(),
            grid: OnceLock::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AntiderivativeInfo {
    pub axis: Axis,
    pub integrand: String,
    pub anchor: f64,
    pub interval: (f64, f64),
    pub closed_form: Option<String>,
}

impl Antiderivative {
    /// `f` must already have its parameters bound and depend on `axis` only.
    pub fn new(f: &Expr, axis: Axis, interval: (f64, f64), anchor: f64) -> Result<Antiderivative> {
        let (lo, hi) = interval;
        if !(lo < anchor && anchor < hi) {
            return Err(Error::Invalid(format!(
                "anchor {anchor} is not inside ({lo}, {hi})"
            )));
        }
        let integrand = f.simplify();
        for other in Axis::ALL.into_iter().filter(|a| *a != axis) {
            if integrand.depends_on(other) {
                return Err(Error::ForbiddenDependence { what: "integrand".into(), axis: other });
            }
        }
        let at = |x: f64| {
            let mut p = [0.0; 3];
            p[axis.index()] = x;
            p
        };
        let mut sign = 0.0;
        for k in 0..SIGN_POINTS {
            let x = lo + (hi - lo) * (k as f64 + 0.5) / SIGN_POINTS as f64;
            let v = integrand.eval_at(&at(x))?;
            if v == 0.0 || (sign != 0.0 && v.signum() != sign) {
                return Err(Error::Vanishing { what: "integrand".into(), point: at(x) });
            }
            sign = v.signum();
        }
        let closed = closed_form(&integrand, axis, lo, hi).and_then(|g| {
            let offset = g.eval_at(&at(anchor)).ok()?;
            Some((g - Expr::constant(offset)).simplify())
        });
        Ok(Antiderivative {
            integrand,
            axis,
            lo,
            hi,
            anchor,
            sign,
            closed,
            grid: OnceLock::new(),
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn integrand(&self) -> &Expr {
        &self.integrand
    }

    /// Sign of the integrand: +1 for increasing `F`, -1 for decreasing.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn closed_form(&self) -> Option<&Expr> {
        self.closed.as_ref()
    }

    pub fn info(&self) -> AntiderivativeInfo {
        AntiderivativeInfo {
            axis: self.axis,
            integrand: self.integrand.to_string(),
            anchor: self.anchor,
            interval: (self.lo, self.hi),
            closed_form: self.closed.as_ref().map(Expr::to_string),
        }
    }

    fn point(&self, x: f64) -> Point {
        let mut p = [0.0; 3];
        p[self.axis.index()] = x;
        p
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(self.integrand.eval_at(&self.point(x))?)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(self.lo < x && x < self.hi) {
            return Err(Error::OutsideDomain(self.point(x)));
        }
        if let Some(c) = &self.closed {
            return Ok(c.eval_at(&self.point(x))?);
        }
        let grid = self.grid()?;
        // start from the nearest tabulated node
        let idx = grid.partition_point(|(node, _)| *node <= x);
        let (node, value) = match (idx.checked_sub(1).map(|i| grid[i]), grid.get(idx).copied()) {
            (Some(a), Some(b)) => {
                if (x - a.0) <= (b.0 - x) {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => (self.anchor, 0.0),
        };
        Ok(value + self.integrate(node, x)?)
    }

    fn grid(&self) -> Result<&Vec<(f64, f64)>> {
        if let Some(g) = self.grid.get() {
            return Ok(g);
        }
        let mut nodes: Vec<f64> = (1..GRID_CELLS)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / GRID_CELLS as f64)
            .filter(|x| (x - self.anchor).abs() > 1e-12 * (self.hi - self.lo))
            .collect();
        nodes.push(self.anchor);
        nodes.sort_by(f64::total_cmp);
        let start = nodes.iter().position(|x| *x == self.anchor).unwrap();
        let mut values = vec![0.0; nodes.len()];
        for i in start + 1..nodes.len() {
            values[i] = values[i - 1] + self.integrate(nodes[i - 1], nodes[i])?;
        }
        for i in (0..start).rev() {
            values[i] = values[i + 1] - self.integrate(nodes[i], nodes[i + 1])?;
        }
        let table = nodes.into_iter().zip(values).collect();
        Ok(self.grid.get_or_init(|| table))
    }

    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let f = |x: f64| self.derivative(x);
        let (fa, fb) = (f(a)?, f(b)?);
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        simpson(&f, a, b, fa, fm, fb, whole, QUAD_DEPTH)
    }

    /// The value range over the interval shrunk by a relative `1e-9`.
    pub fn image(&self) -> Result<(f64, f64)> {
        let eps = 1e-9 * (self.hi - self.lo);
        let (a, b) = (self.eval(self.lo + eps)?, self.eval(self.hi - eps)?);
        Ok((a.min(b), a.max(b)))
    }

    /// Solve `F(x) = target` by a bracketed Newton iteration.
    pub fn inverse(&self, target: f64) -> Result<f64> {
        let fail = || Error::InverseFailed { axis: self.axis, target };
        if target == 0.0 {
            return Ok(self.anchor);
        }
        // F(x) - target is increasing in the sign-adjusted sense
        let g = |x: f64| -> Result<f64> { Ok(self.sign * (self.eval(x)? - target)) };
        let toward_hi = g(self.anchor)? < 0.0;
        let edge = if toward_hi { self.hi } else { self.lo };
        let (mut a, mut b) = (self.anchor, self.anchor);
        let mut found = false;
        for k in 1..=60 {
            let x = self.anchor + (edge - self.anchor) * (1.0 - 0.5f64.powi(k));
            if x == edge {
                break;
            }
            let gx = g(x)?;
            if (gx >= 0.0) == toward_hi {
                b = x;
                found = true;
                break;
            }
            a = x;
        }
        if !found {
            return Err(fail());
        }
        let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let gx = g(x)?;
            if gx == 0.0 {
                return Ok(x);
            }
            if gx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = self.sign * self.derivative(x)?;
            let newton = x - gx / slope;
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - x).abs() <= INVERSE_TOL * (1.0 + x.abs()) || hi - lo <= INVERSE_TOL * (1.0 + x.abs()) {
                return Ok(next);
            }
            x = next;
        }
        Err(fail())
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * QUAD_TOL * (left + right).abs() {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson(f, a, m, fa, flm, fm, left, depth - 1)?
        + simpson(f, m, b, fm, frm, fb, right, depth - 1)?)
}

/// `coef * x^power * exp(rate * x + shift)` in the variable `axis`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Term {
    coef: f64,
    power: f64,
    rate: f64,
    shift: f64,
}

impl Term {
    fn constant(c: f64) -> Term {
        Term { coef: c, power: 0.0, rate: 0.0, shift: 0.0 }
    }

    fn times(self, o: Term) -> Term {
        Term {
            coef: self.coef * o.coef,
            power: self.power + o.power,
            rate: self.rate + o.rate,
            shift: self.shift + o.shift,
        }
    }

    fn over(self, o: Term) -> Option<Term> {
        (o.coef != 0.0).then(|| Term {
            coef: self.coef / o.coef,
            power: self.power - o.power,
            rate: self.rate - o.rate,
            shift: self.shift - o.shift,
        })
    }
}

/// Linear `a*x + b` as `(a, b)`.
fn linear(e: &Expr, axis: Axis) -> Option<(f64, f64)> {
    let mut acc = (0.0, 0.0);
    for s in crate::expr::summands_signed(e) {
        let (sign, s) = s;
        let t = term(s, axis)?;
        if t.rate != 0.0 {
            return None;
        }
        let c = sign * t.coef * t.shift.exp();
        match t.power {
            p if p == 0.0 => acc.1 += c,
            p if p == 1.0 => acc.0 += c,
            _ => return None,
        }
    }
    Some(acc)
}

fn term(e: &Expr, axis: Axis) -> Option<Term> {
    match e {
        Expr::Const(c) => Some(Term::constant(*c)),
        Expr::Var(a) if *a == axis => Some(Term { coef: 1.0, power: 1.0, rate: 0.0, shift: 0.0 }),
        Expr::Neg(a) => {
            let t = term(a, axis)?;
            Some(Term { coef: -t.coef, ..t })
        }
        Expr::Mul(a, b) => Some(term(a, axis)?.times(term(b, axis)?)),
        Expr::Div(a, b) => term(a, axis)?.over(term(b, axis)?),
        Expr::Pow(base, exponent) => {
            let k = exponent.as_const()?;
            let t = term(base, axis)?;
            if t.coef <= 0.0 && k.fract() != 0.0 {
                return None;
            }
            // exp(...)^k = exp(k * ...)
            Some(Term {
                coef: crate::expr::power_value(t.coef, k)?,
                power: t.power * k,
                rate: t.rate * k,
                shift: t.shift * k,
            })
        }
        Expr::Func(Func::Exp, arg) => {
            let (a, b) = linear(arg, axis)?;
            Some(Term { coef: 1.0, power: 0.0, rate: a, shift: b })
        }
        _ => None,
    }
}

/// A symbolic antiderivative when every summand is a power of `x` or an
/// exponential of a linear function of `x`.
fn closed_form(f: &Expr, axis: Axis, lo: f64, hi: f64) -> Option<Expr> {
    let x = Expr::var(axis);
    let mut out = Expr::zero();
    for (sign, s) in crate::expr::summands_signed(f) {
        let t = term(s, axis)?;
        let c = sign * t.coef;
        let piece = if t.rate != 0.0 {
            if t.power != 0.0 {
                return None;
            }
            let arg = Expr::constant(t.rate) * x.clone() + Expr::constant(t.shift);
            Expr::constant(c / t.rate) * arg.exp()
        } else {
            let c = c * t.shift.exp();
            if t.power == -1.0 {
                let inside = if lo >= 0.0 {
                    x.clone()
                } else if hi <= 0.0 {
                    -x.clone()
                } else {
                    return None;
                };
                Expr::constant(c) * inside.ln()
            } else {
                let p = t.power + 1.0;
                Expr::constant(c / p) * x.clone().powf(p)
            }
        };
        out = out + piece;
    }
    Some(out)
}

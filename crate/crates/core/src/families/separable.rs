use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Axis, Domain, Expr, Params, Point};
use crate::DEFAULT_SEED;

pub const SEPARABILITY_QUADRUPLES: usize = 64;

fn third_axis(a: Axis, b: Axis) -> Axis {
    Axis::ALL.into_iter().find(|x| *x != a && *x != b).unwrap()
}

fn at(f: &Expr, axes: (Axis, Axis), base: &Point, xa: f64, xb: f64) -> Result<f64> {
    let mut p = *base;
    p[axes.0.index()] = xa;
    p[axes.1.index()] = xb;
    Ok(f.eval_at(&p)?)
}

/// `|f(a1,b1) f(a2,b2) - f(a1,b2) f(a2,b1)|` and the larger of the two
/// products, with the remaining axis fixed at `base`.
pub fn cross_ratio_defect(
    f: &Expr,
    axes: (Axis, Axis),
    base: &Point,
    (a1, b1): (f64, f64),
    (a2, b2): (f64, f64),
) -> Result<(f64, f64)> {
    let direct = at(f, axes, base, a1, b1)? * at(f, axes, base, a2, b2)?;
    let crossed = at(f, axes, base, a1, b2)? * at(f, axes, base, a2, b1)?;
    Ok(((direct - crossed).abs(), direct.abs().max(crossed.abs())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separability {
    pub separable: bool,
    pub max_rel_defect: f64,
    /// `(a1, b1, a2, b2)` of the worst quadruple.
    pub witness: Option<[f64; 4]>,
    pub quadruples: usize,
    pub failed: usize,
}

pub fn separability(
    f: &Expr,
    axes: (Axis, Axis),
    domain: &Domain,
    params: &Params,
    tol: f64,
) -> Result<Separability> {
    let f = f.bind(params).simplify();
    let base = domain.center();
    let points = domain.quasi_random(2 * SEPARABILITY_QUADRUPLES, DEFAULT_SEED);
    let (ia, ib) = (axes.0.index(), axes.1.index());
    let mut worst = 0.0;
    let mut witness = None;
    let mut failed = 0;
    for pair in points.chunks(2) {
        let (p, q) = (pair[0], pair[1]);
        match cross_ratio_defect(&f, axes, &base, (p[ia], p[ib]), (q[ia], q[ib])) {
            Ok((defect, scale)) => {
                let rel = defect / scale.max(f64::MIN_POSITIVE);
                if witness.is_none() || rel > worst {
                    worst = rel;
                    witness = Some([p[ia], p[ib], q[ia], q[ib]]);
                }
            }
            Err(_) => failed += 1,
        }
    }
    if 2 * failed > SEPARABILITY_QUADRUPLES {
        return Err(Error::NotEvaluable { what: "shape function".into() });
    }
    Ok(Separability {
        separable: worst <= tol,
        max_rel_defect: worst,
        witness,
        quadruples: SEPARABILITY_QUADRUPLES,
        failed,
    })
}

/// Cross-ratio test for `f(xa, xb) = f1(xa) / f2(xb)`.
pub fn is_separable(
    f: &Expr,
    axes: (Axis, Axis),
    domain: &Domain,
    params: &Params,
    tol: f64,
) -> Result<bool> {
    Ok(separability(f, axes, domain, params, tol)?.separable)
}

/// `f = first(xa) / second(xb)`, anchored at `reference = (a, c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub first: Expr,
    pub second: Expr,
    pub reference: (f64, f64),
}

impl Separation {
    /// Largest relative gap between `first/second` and `f` over samples.
    pub fn recombination_error(
        &self,
        f: &Expr,
        domain: &Domain,
        params: &Params,
        samples: usize,
    ) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in domain.quasi_random(samples, DEFAULT_SEED + 1) {
            let exact = f.eval(&p, params)?;
            let parts = self.first.eval_at(&p)? / self.second.eval_at(&p)?;
            worst = worst.max((parts - exact).abs() / exact.abs().max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    }
}

/// `first(xa) = f(xa, c)` and `second(xb) = f(a, c) / f(a, xb)`; the
/// reference defaults to the box centre.
pub fn separate(
    f: &Expr,
    axes: (Axis, Axis),
    domain: &Domain,
    params: &Params,
    reference: Option<(f64, f64)>,
) -> Result<Separation> {
    let center = domain.center();
    let (a, c) = reference.unwrap_or((center[axes.0.index()], center[axes.1.index()]));
    let third = third_axis(axes.0, axes.1);
    let f = f
        .bind(params)
        .substitute(third, &Expr::constant(center[third.index()]));
    let anchor = at(&f, axes, &center, a, c)?;
    if anchor == 0.0 {
        let mut p = center;
        p[axes.0.index()] = a;
        p[axes.1.index()] = c;
        return Err(Error::Vanishing { what: "shape function".into(), point: p });
    }
    let first = f.substitute(axes.1, &Expr::constant(c)).simplify();
    let second =
        (Expr::constant(anchor) / f.substitute(axes.0, &Expr::constant(a))).simplify();
    Ok(Separation { first, second, reference: (a, c) })
}

#[cfg(test)]
mod tests {
    use super::*;

    const XY: (Axis, Axis) = (Axis::X1, Axis::X2);

    #[test]
    fn witness_for_a_sum() {
        let f: Expr = "x1 + x2".parse().unwrap();
        let (defect, _) = cross_ratio_defect(&f, XY, &[0.0; 3], (1.0, 1.0), (2.0, 2.0)).unwrap();
        assert_eq!(defect, 1.0); // 2*4 against 3*3
        let d = Domain::cube(0.5, 2.0).unwrap();
        assert!(!is_separable(&f, XY, &d, &Params::new(), 1e-9).unwrap());
    }

    #[test]
    fn power_ratio_is_separable() {
        let f: Expr = "(x2/x1)^alpha".parse().unwrap();
        let params: Params = [("alpha".into(), 3.0)].into();
        let d = Domain::cube(0.5, 2.0).unwrap();
        assert!(is_separable(&f, XY, &d, &params, 1e-9).unwrap());
        let s = separate(&f, XY, &d, &params, Some((1.0, 1.0))).unwrap();
        for x in [0.6, 1.3, 1.9] {
            let p = [x, x, 0.0];
            assert!((s.first.eval_at(&p).unwrap() - x.powi(-3)).abs() < 1e-12);
            assert!((s.second.eval_at(&p).unwrap() - x.powi(-3)).abs() < 1e-12);
        }
        assert!(s.recombination_error(&f, &d, &params, 256).unwrap() <= 1e-10);
    }

    #[test]
    fn constant_shape() {
        let f: Expr = "4".parse().unwrap();
        let d = Domain::cube(0.5, 2.0).unwrap();
        assert!(is_separable(&f, XY, &d, &Params::new(), 1e-9).unwrap());
        let s = separate(&f, XY, &d, &Params::new(), None).unwrap();
        assert_eq!(s.first, Expr::constant(4.0));
        assert_eq!(s.second, Expr::one());
    }

    #[test]
    fn exponential_anchor() {
        let f: Expr = "x1*exp(x2)".parse().unwrap();
        let d = Domain::new([0.5, -1.0, 0.0], [2.0, 1.0, 1.0]).unwrap();
        let s = separate(&f, XY, &d, &Params::new(), Some((1.0, 0.0))).unwrap();
        let p = [1.7, 0.4, 0.5];
        assert!((s.first.eval_at(&p).unwrap() - 1.7).abs() < 1e-14);
        assert!((s.second.eval_at(&p).unwrap() - (-0.4f64).exp()).abs() < 1e-14);
        assert!(s.recombination_error(&f, &d, &Params::new(), 256).unwrap() <= 1e-10);
    }

    #[test]
    fn other_axis_pairs() {
        let f: Expr = "x3/x1".parse().unwrap();
        let d = Domain::cube(0.5, 2.0).unwrap();
        let axes = (Axis::X1, Axis::X3);
        assert!(is_separable(&f, axes, &d, &Params::new(), 1e-9).unwrap());
        let s = separate(&f, axes, &d, &Params::new(), None).unwrap();
        assert!(!s.first.depends_on(Axis::X3));
        assert!(!s.second.depends_on(Axis::X1));
        assert!(s.recombination_error(&f, &d, &Params::new(), 256).unwrap() <= 1e-10);
    }
}

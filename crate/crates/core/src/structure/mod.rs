//! Skew-symmetric 3x3 structure matrices written through `u = J12`,
//! `v = J31`, `w = J23`.

mod transform;

pub use transform::{
    transform, Compose, CoordinateMap, ExprMap, Permutation, StructureField, Transformed,
};

pub(crate) use transform::det;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{is_identically_zero, Axis, Domain, Expr, Params, Point, ZeroVerdict};
use crate::DEFAULT_SEED;

pub type Mat3 = [[f64; 3]; 3];

/// Samples used to certify that a factor keeps one sign.
pub const SIGN_SAMPLES: usize = 256;
pub const DEFAULT_JACOBI_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 1000;

pub(crate) fn skew(u: f64, v: f64, w: f64) -> Mat3 {
    [[0.0, u, -v], [-u, 0.0, w], [v, -w, 0.0]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureMatrix {
    pub u: Expr,
    pub v: Expr,
    pub w: Expr,
    #[serde(default)]
    pub params: Params,
    pub domain: Domain,
}

/// The six products of the compact Jacobi expression, paired with the
/// derivative trees so repeated evaluation does not re-differentiate.
#[derive(Clone, Debug)]
pub struct JacobiTerms {
    uvw: [Expr; 3],
    // d[f][axis] with f in (u, v, w)
    d: [[Expr; 3]; 3],
}

impl JacobiTerms {
    pub fn new(j: &StructureMatrix) -> JacobiTerms {
        let uvw = j.bound_entries();
        let d = [0, 1, 2].map(|f| Axis::ALL.map(|a| uvw[f].diff(a)));
        JacobiTerms { uvw, d }
    }

    /// The six signed terms at `p`.
    pub fn terms(&self, p: &Point) -> Result<[f64; 6]> {
        let [u, v, w] = [0, 1, 2].map(|i| self.uvw[i].eval_at(p));
        let (u, v, w) = (u?, v?, w?);
        let du = |a: usize| self.d[0][a].eval_at(p);
        let dv = |a: usize| self.d[1][a].eval_at(p);
        let dw = |a: usize| self.d[2][a].eval_at(p);
        Ok([
            u * dv(0)?,
            -v * du(0)?,
            w * du(1)?,
            -u * dw(1)?,
            v * dw(2)?,
            -w * dv(2)?,
        ])
    }

    /// `(residual, max |term|)` at `p`.
    pub fn residual(&self, p: &Point) -> Result<(f64, f64)> {
        let t = self.terms(p)?;
        let sum = t.iter().sum();
        let scale = t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Ok((sum, scale))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiReport {
    pub max_residual: f64,
    pub max_rel_residual: f64,
    pub argmax_point: Option<Point>,
    pub sample_count: usize,
    pub failed_samples: usize,
    pub reliable: bool,
    pub tol: f64,
    pub verdict: Verdict,
}

impl StructureMatrix {
    pub fn new(u: Expr, v: Expr, w: Expr, domain: Domain) -> StructureMatrix {
        StructureMatrix {
            u,
            v,
            w,
            params: Params::new(),
            domain,
        }
    }

    pub fn parse(u: &str, v: &str, w: &str, domain: Domain) -> Result<StructureMatrix> {
        Ok(StructureMatrix::new(u.parse()?, v.parse()?, w.parse()?, domain))
    }

    pub fn with_params(mut self, params: Params) -> StructureMatrix {
        self.params = params;
        self
    }

    pub fn entries(&self) -> [&Expr; 3] {
        [&self.u, &self.v, &self.w]
    }

    /// Entries with every bound parameter substituted and simplified.
    pub fn bound_entries(&self) -> [Expr; 3] {
        self.entries().map(|e| e.bind(&self.params).simplify())
    }

    pub fn values_at(&self, p: &Point) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (o, e) in out.iter_mut().zip(self.entries()) {
            *o = e.eval(p, &self.params)?;
        }
        Ok(out)
    }

    pub fn matrix_at(&self, p: &Point) -> Result<Mat3> {
        let [u, v, w] = self.values_at(p)?;
        Ok(skew(u, v, w))
    }

    pub fn jacobi_residual(&self, p: &Point) -> Result<f64> {
        Ok(JacobiTerms::new(self).residual(p)?.0)
    }

    pub fn check_jacobi(&self, n_samples: usize, tol: f64) -> JacobiReport {
        self.check_jacobi_seeded(n_samples, tol, DEFAULT_SEED)
    }

    pub fn check_jacobi_seeded(&self, n_samples: usize, tol: f64, seed: u64) -> JacobiReport {
        let terms = JacobiTerms::new(self);
        let mut max_residual: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        let mut argmax = None;
        let mut failed = 0;
        for p in self.domain.quasi_random(n_samples, seed) {
            match terms.residual(&p) {
                Ok((r, scale)) => {
                    let rel = r.abs() / (1.0 + scale);
                    max_residual = max_residual.max(r.abs());
                    if argmax.is_none() || rel > max_rel {
                        max_rel = rel;
                        argmax = Some(p);
                    }
                }
                Err(_) => failed += 1,
            }
        }
        let evaluated = n_samples - failed;
        JacobiReport {
            max_residual,
            max_rel_residual: max_rel,
            argmax_point: argmax,
            sample_count: n_samples,
            failed_samples: failed,
            reliable: 2 * failed <= n_samples,
            tol,
            verdict: Verdict::from_bool(evaluated > 0 && max_rel <= tol),
        }
    }

    /// Multiply every entry by `mu`, which must keep one sign on the domain.
    pub fn scale(&self, mu: &Expr) -> Result<StructureMatrix> {
        sign_on(mu, &self.domain, &self.params, "scaling factor")?;
        let mut out = self.clone();
        for e in [&mut out.u, &mut out.v, &mut out.w] {
            *e = (mu.clone() * e.clone()).simplify();
        }
        Ok(out)
    }

    /// 0 for the zero matrix at `p`, 2 otherwise.
    pub fn rank_at(&self, p: &Point) -> Result<u8> {
        let vals = self.values_at(p)?;
        let scale = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Ok(if scale <= 1e-12 * (1.0 + scale) { 0 } else { 2 })
    }
}

/// Sign (+1 or -1) of `e` over the domain. Rejects symbolic zeros, sign
/// changes, exact zeros at samples and expressions that mostly fail to
/// evaluate.
pub fn sign_on(e: &Expr, domain: &Domain, params: &Params, what: &str) -> Result<f64> {
    let bound = e.bind(params).simplify();
    match is_identically_zero(&bound, domain, &Params::new()) {
        ZeroVerdict::Zero => {
            return Err(Error::IdenticallyZero { what: what.into() });
        }
        ZeroVerdict::Undetermined => return Err(Error::NotEvaluable { what: what.into() }),
        ZeroVerdict::NonZero => {}
    }
    let mut sign = 0.0;
    let mut failed = 0;
    let mut points = vec![domain.center()];
    points.extend(domain.quasi_random(SIGN_SAMPLES, DEFAULT_SEED));
    for p in points {
        let Ok(x) = bound.eval_at(&p) else {
            failed += 1;
            continue;
        };
        if x == 0.0 || (sign != 0.0 && x.signum() != sign) {
            return Err(Error::Vanishing { what: what.into(), point: p });
        }
        sign = x.signum();
    }
    if 2 * failed > SIGN_SAMPLES || sign == 0.0 {
        return Err(Error::NotEvaluable { what: what.into() });
    }
    Ok(sign)
}

use serde::{Deserialize, Serialize};

use super::antiderivative::Antiderivative;
use crate::error::{Error, Result};
use crate::expr::{Axis, Domain, Expr, Point};
use crate::families::{separability, separate, DeltaSpec, Entry, FamilySpec, GammaPairSpec, GammaSingletonSpec};
use crate::structure::{StructureMatrix, Verdict};
use crate::DEFAULT_SEED;

pub const CASIMIR_TOL: f64 = 1e-9;
const SEPARABILITY_TOL: f64 = 1e-9;

/// Sum of univariate antiderivatives, one per participating axis.
#[derive(Clone, Debug)]
pub struct CasimirFn {
    terms: Vec<Antiderivative>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasimirReport {
    /// max of `|J grad C| / (1 + |grad C|)` in the max norm
    pub max_rel_defect: f64,
    pub sample_count: usize,
    pub failed_samples: usize,
    pub tol: f64,
    pub verdict: Verdict,
}

fn antiderivative_on(f: Expr, axis: Axis, domain: &Domain) -> Result<Antiderivative> {
    let interval = domain.interval(axis);
    Antiderivative::new(&f, axis, interval, domain.center()[axis.index()])
}

impl CasimirFn {
    pub fn terms(&self) -> &[Antiderivative] {
        &self.terms
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.terms.iter().map(|t| t.eval(x[t.axis().index()])).sum()
    }

    pub fn gradient(&self, x: &Point) -> Result<[f64; 3]> {
        let mut g = [0.0; 3];
        for t in &self.terms {
            g[t.axis().index()] += t.derivative(x[t.axis().index()])?;
        }
        Ok(g)
    }

    /// Symbolic form when every term integrates in closed form.
    pub fn closed_form(&self) -> Option<Expr> {
        let mut out = Expr::zero();
        for t in &self.terms {
            out = out + t.closed_form()?.clone();
        }
        Some(out.simplify())
    }

    pub fn check(&self, j: &StructureMatrix, samples: usize) -> CasimirReport {
        self.check_seeded(j, samples, DEFAULT_SEED)
    }

    pub fn check_seeded(&self, j: &StructureMatrix, samples: usize, seed: u64) -> CasimirReport {
        let mut worst: f64 = 0.0;
        let mut failed = 0;
        for p in j.domain.quasi_random(samples, seed) {
            let row = || -> Result<f64> {
                let m = j.matrix_at(&p)?;
                let g = self.gradient(&p)?;
                let jg = m.map(|r| r[0] * g[0] + r[1] * g[1] + r[2] * g[2]);
                let num = jg.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let den = 1.0 + g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                Ok(num / den)
            };
            match row() {
                Ok(r) => worst = worst.max(r),
                Err(_) => failed += 1,
            }
        }
        CasimirReport {
            max_rel_defect: worst,
            sample_count: samples,
            failed_samples: failed,
            tol: CASIMIR_TOL,
            verdict: Verdict::from_bool(failed < samples && worst <= CASIMIR_TOL),
        }
    }
}

/// Sum of the integrals of `phi_i / psi_i`.
pub fn casimir_delta(s: &DeltaSpec) -> Result<CasimirFn> {
    s.validate()?;
    let terms = delta_parts(s)?;
    Ok(CasimirFn {
        terms: terms.to_vec(),
        provenance: "delta: sum of integrals of phi_i/psi_i".into(),
    })
}

pub(crate) fn delta_parts(s: &DeltaSpec) -> Result<[Antiderivative; 3]> {
    let part = |i: usize| {
        let f = (s.phi[i].clone() / s.psi[i].clone()).bind(&s.params);
        antiderivative_on(f, Axis::ALL[i], &s.domain)
    };
    Ok([part(0)?, part(1)?, part(2)?])
}

/// The two univariate integrands of a separable pair, with their axes.
pub(crate) fn pair_integrands(s: &GammaPairSpec) -> Result<[(Axis, Expr); 2]> {
    s.validate()?;
    let axes = s.zero.shape_axes();
    let [p1, p2] = match &s.shape_parts {
        Some([a, b]) => [a.bind(&s.params), b.bind(&s.params)],
        None => {
            let report = separability(&s.shape, axes, &s.domain, &s.params, SEPARABILITY_TOL)?;
            if !report.separable {
                return Err(Error::NotSeparable {
                    what: "shape function".into(),
                    witness: report.witness.unwrap_or([f64::NAN; 4]),
                });
            }
            let parts = separate(&s.shape, axes, &s.domain, &s.params, None)?;
            [parts.first, parts.second]
        }
    };
    Ok(match s.zero {
        Entry::U | Entry::W => [(axes.0, p1), (axes.1, p2)],
        // u = eta * zeta1/zeta2 in slot (1,2): the gradient is (1/zeta1, 0, 1/zeta2)
        Entry::V => [(axes.0, Expr::one() / p1), (axes.1, Expr::one() / p2)],
    })
}

pub(crate) fn pair_parts(s: &GammaPairSpec) -> Result<[Antiderivative; 2]> {
    let [(a, fa), (b, fb)] = pair_integrands(s)?;
    Ok([antiderivative_on(fa, a, &s.domain)?, antiderivative_on(fb, b, &s.domain)?])
}

/// Casimir of a pair with a separable shape function.
pub fn casimir_gamma_pair(s: &GammaPairSpec) -> Result<CasimirFn> {
    let terms = pair_parts(s)?;
    Ok(CasimirFn {
        terms: terms.to_vec(),
        provenance: format!("gamma pair ({} = 0): sum of integrals of the shape parts", s.zero),
    })
}

/// The coordinate left out of the only nonzero slot.
pub fn casimir_gamma_singleton(s: &GammaSingletonSpec) -> Result<CasimirFn> {
    s.validate()?;
    let axis = match s.nonzero {
        Entry::U => Axis::X3,
        Entry::V => Axis::X2,
        Entry::W => Axis::X1,
    };
    Ok(CasimirFn {
        terms: vec![antiderivative_on(Expr::one(), axis, &s.domain)?],
        provenance: format!("gamma singleton ({} nonzero): the free coordinate", s.nonzero),
    })
}

pub fn casimir(spec: &FamilySpec) -> Result<CasimirFn> {
    match spec {
        FamilySpec::Delta(s) => casimir_delta(s),
        FamilySpec::GammaPair(s) => casimir_gamma_pair(s),
        FamilySpec::GammaSingleton(s) => casimir_gamma_singleton(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Entry;

    fn cube() -> Domain {
        Domain::cube(0.5, 2.0).unwrap()
    }

    #[test]
    fn euler_top() {
        let s = DeltaSpec::parse("1", ["1"; 3], ["x1", "x2", "x3"], cube()).unwrap();
        let c = casimir_delta(&s).unwrap();
        let p = [0.7, 1.3, 1.9];
        let anchor = 3.0 * 1.25f64.powi(2) / 2.0;
        let exact = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / 2.0 - anchor;
        assert!((c.eval(&p).unwrap() - exact).abs() < 1e-13);
        assert!(c.check(&s.build().unwrap(), 1000).verdict.passed());
    }

    #[test]
    fn lotka_volterra_logs() {
        let s = DeltaSpec::parse("1", ["x1", "x2", "x3"], ["-1", "-b*c", "c"], cube())
            .unwrap()
            .with_params([("b".into(), 0.5), ("c".into(), 2.0)].into());
        let c = casimir_delta(&s).unwrap();
        assert!(c.closed_form().is_some());
        let (p, q) = ([0.6, 1.1, 1.7], [1.9, 0.8, 0.55]);
        let exact = |x: &Point| -x[0].ln() - x[1].ln() + 2.0 * x[2].ln();
        let diff = c.eval(&p).unwrap() - c.eval(&q).unwrap();
        assert!((diff - (exact(&p) - exact(&q))).abs() < 1e-13);
        assert!(c.check(&s.build().unwrap(), 1000).verdict.passed());
    }

    #[test]
    fn may_leonard_pair() {
        let s = GammaPairSpec::parse(Entry::U, "(alpha-1)^(-1)*x2^(-alpha)", "(x2/x1)^alpha", cube())
            .unwrap()
            .with_params([("alpha".into(), 3.0)].into());
        let c = casimir_gamma_pair(&s).unwrap();
        let (p, q) = ([0.6, 1.1, 1.7], [1.9, 0.8, 0.55]);
        // anchored parts may differ by constant factors, so compare gradients
        let g = c.gradient(&p).unwrap();
        assert!((g[0] / g[1] - (p[1] / p[0]).powi(3)).abs() < 1e-12);
        assert_eq!(g[2], 0.0);
        assert!(c.eval(&p).unwrap() != c.eval(&q).unwrap());
        assert!(c.check(&s.build().unwrap(), 1000).verdict.passed());
    }

    #[test]
    fn lorenz_reciprocal_parts() {
        let s = GammaPairSpec::parse(Entry::V, "-x1/2", "-(2*x1)^(-1)", cube()).unwrap();
        let c = casimir_gamma_pair(&s).unwrap();
        // C = -x1^2 + x3 up to scale and offset
        let g = c.gradient(&[1.5, 1.0, 0.7]).unwrap();
        assert!((g[0] / g[2] - (-3.0)).abs() < 1e-12);
        assert!(c.check(&s.build().unwrap(), 1000).verdict.passed());
        // the logarithmic candidate is not a Casimir
        let j = s.build().unwrap();
        let p = [1.5, 1.0, 0.7];
        let m = j.matrix_at(&p).unwrap();
        let grad_log = [-0.5 / p[0], 0.0, 1.0];
        let row2 = m[1][0] * grad_log[0] + m[1][2] * grad_log[2];
        assert!(row2.abs() > 0.1);
    }

    #[test]
    fn constant_shape_and_w_case() {
        let s = GammaPairSpec::parse(Entry::U, "1", "k", cube())
            .unwrap()
            .with_params([("k".into(), 2.0)].into());
        let c = casimir_gamma_pair(&s).unwrap();
        let g = c.gradient(&[1.0; 3]).unwrap();
        assert_eq!(g, [2.0, 1.0, 0.0]);
        let w = GammaPairSpec::parse(Entry::W, "mu*x3", "x2/x3", cube())
            .unwrap()
            .with_params([("mu".into(), 1.5)].into());
        assert!(casimir_gamma_pair(&w).unwrap().check(&w.build().unwrap(), 1000).verdict.passed());
    }

    #[test]
    fn not_separable() {
        let s = GammaPairSpec::parse(Entry::U, "1", "x1 + x2", cube()).unwrap();
        assert!(matches!(casimir_gamma_pair(&s), Err(Error::NotSeparable { .. })));
    }

    #[test]
    fn singleton() {
        for e in Entry::ALL {
            let s = GammaSingletonSpec::parse(e, "exp(x1 - x2 + x3)", cube()).unwrap();
            let c = casimir_gamma_singleton(&s).unwrap();
            assert!(c.check(&s.build().unwrap(), 200).verdict.passed());
        }
    }
}

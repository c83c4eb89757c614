use super::classify::{classify, FamilyTag};
use crate::error::{Error, Result};
use crate::expr::{Expr, Params};
use crate::structure::{sign_on, StructureMatrix};

fn merged_params(a: &Params, b: &Params) -> Result<Params> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get(k) {
            Some(old) if old != v => {
                return Err(Error::Invalid(format!(
                    "parameter `{k}` is bound to {old} and {v}"
                )))
            }
            _ => {
                out.insert(k.clone(), *v);
            }
        }
    }
    Ok(out)
}

fn nonzero_pattern(j: &StructureMatrix) -> Result<FamilyTag> {
    let tag = classify(j).tag;
    if tag == FamilyTag::Unclassified {
        return Err(Error::FamilyMismatch("operand could not be classified".into()));
    }
    Ok(tag)
}

/// Componentwise product of two structures from the same family.
pub fn oplus(a: &StructureMatrix, b: &StructureMatrix) -> Result<StructureMatrix> {
    if a.domain != b.domain {
        return Err(Error::DomainMismatch);
    }
    let (ta, tb) = (nonzero_pattern(a)?, nonzero_pattern(b)?);
    if !ta.same_family(tb) {
        return Err(Error::FamilyMismatch(format!("cannot combine {ta} with {tb}")));
    }
    let params = merged_params(&a.params, &b.params)?;
    let [u, v, w] = [0, 1, 2].map(|i| {
        let (x, y) = (a.entries()[i], b.entries()[i]);
        (x.clone() * y.clone()).simplify()
    });
    Ok(StructureMatrix::new(u, v, w, a.domain.clone()).with_params(params))
}

/// Componentwise real power of a structure with positive nonzero entries.
pub fn otimes(scalar: f64, a: &StructureMatrix) -> Result<StructureMatrix> {
    nonzero_pattern(a)?;
    let zero = classify(a).evidence;
    let mut out = a.clone();
    for (i, e) in [&mut out.u, &mut out.v, &mut out.w].into_iter().enumerate() {
        if zero[i] == crate::expr::ZeroVerdict::Zero {
            *e = Expr::zero();
            continue;
        }
        let what = ["u", "v", "w"][i];
        match sign_on(e, &a.domain, &a.params, what) {
            Ok(s) if s > 0.0 => {}
            Ok(_) => {
                return Err(Error::NonPositive { what: what.into(), point: a.domain.center() })
            }
            Err(Error::Vanishing { point, .. }) => {
                return Err(Error::NonPositive { what: what.into(), point })
            }
            Err(other) => return Err(other),
        }
        *e = e.clone().powf(scalar).simplify();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Domain;

    fn s(u: &str, v: &str, w: &str) -> StructureMatrix {
        StructureMatrix::parse(u, v, w, Domain::cube(0.5, 2.0).unwrap()).unwrap()
    }

    fn close(a: &StructureMatrix, b: &StructureMatrix) -> bool {
        a.domain.quasi_random(50, 9).iter().all(|p| {
            let (x, y) = (a.values_at(p).unwrap(), b.values_at(p).unwrap());
            (0..3).all(|i| (x[i] - y[i]).abs() <= 1e-10 * (1.0 + x[i].abs()))
        })
    }

    #[test]
    fn euler_squared() {
        let e = s("x3", "x2", "x1");
        let sum = oplus(&e, &e).unwrap();
        assert_eq!(sum.u.to_string(), "x3^2");
        assert!(sum.check_jacobi(500, 1e-9).verdict.passed());
        assert!(close(&sum, &otimes(2.0, &e).unwrap()));
    }

    #[test]
    fn identities() {
        let e = s("x3", "x2", "x1");
        let one = s("1", "1", "1");
        assert!(close(&oplus(&e, &one).unwrap(), &e));
        assert!(close(&otimes(1.0, &e).unwrap(), &e));
        assert!(close(&otimes(0.0, &e).unwrap(), &one));
        let inverse = otimes(-1.0, &e).unwrap();
        assert!(close(&oplus(&e, &inverse).unwrap(), &one));
    }

    #[test]
    fn gamma_pairs_keep_zero() {
        let a = s("0", "x1", "x1*x2");
        let b = s("0", "exp(x3)", "exp(x3)*x2/x1");
        let sum = oplus(&a, &b).unwrap();
        assert!(sum.u.is_zero_const());
        assert!(sum.check_jacobi(500, 1e-9).verdict.passed());
        let scaled = otimes(0.5, &a).unwrap();
        assert!(scaled.u.is_zero_const());
        assert!(scaled.check_jacobi(500, 1e-9).verdict.passed());
    }

    #[test]
    fn mismatches() {
        let e = s("x3", "x2", "x1");
        let pair = s("0", "x1", "x1*x2");
        assert!(matches!(oplus(&e, &pair), Err(Error::FamilyMismatch(_))));
        let other = StructureMatrix::parse("x3", "x2", "x1", Domain::cube(1.0, 2.0).unwrap()).unwrap();
        assert!(matches!(oplus(&e, &other), Err(Error::DomainMismatch)));
        let negative = s("-x3", "x2", "x1");
        assert!(matches!(otimes(2.0, &negative), Err(Error::NonPositive { .. })));
    }
}

//! Named structures from the literature, each stored as a family spec with
//! default parameters and a box on which its factors do not vanish.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dynamics::PoissonSystem;
use crate::error::{Error, Result};
use crate::expr::{Domain, Expr, Params};
use crate::families::{FamilySpec, FamilyTag};
use crate::structure::StructureMatrix;

const DATA: &str = include_str!("../data/catalog.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub expr: Expr,
    /// `external` when the function is a reference choice rather than part
    /// of the structure's source.
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub name: String,
    pub citation: String,
    pub spec: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Hamiltonian>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub entries: Vec<CatalogEntry>,
}

fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| serde_json::from_str(DATA).expect("embedded catalog is valid"))
}

pub fn version() -> u32 {
    catalog().version
}

pub fn list() -> &'static [CatalogEntry] {
    &catalog().entries
}

pub fn get(id: &str) -> Result<&'static CatalogEntry> {
    list()
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

/// The embedded data file, verbatim.
pub fn export() -> &'static str {
    DATA
}

impl CatalogEntry {
    pub fn tag(&self) -> FamilyTag {
        self.spec.expected_tag()
    }

    pub fn default_params(&self) -> &Params {
        self.spec.params()
    }

    pub fn default_domain(&self) -> &Domain {
        self.spec.domain()
    }

    /// The spec with `overrides` applied. Only parameters the entry declares
    /// may be overridden; the result is validated on its domain.
    pub fn spec_with(&self, overrides: &Params, domain: Option<&Domain>) -> Result<FamilySpec> {
        let mut params = self.default_params().clone();
        for (k, v) in overrides {
            match params.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    let known: Vec<&str> = params.keys().map(String::as_str).collect();
                    return Err(Error::Invalid(format!(
                        "`{}` has no parameter `{k}` (known: {})",
                        self.id,
                        if known.is_empty() { "none".into() } else { known.join(", ") }
                    )));
                }
            }
        }
        let mut spec = self.spec.clone();
        spec.set_params(params);
        if let Some(d) = domain {
            spec.set_domain(d.clone());
        }
        spec.build()?;
        Ok(spec)
    }

    /// Structure plus reference Hamiltonian, when the entry has one.
    pub fn system(&self, overrides: &Params, domain: Option<&Domain>) -> Result<PoissonSystem> {
        let h = self
            .hamiltonian
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("`{}` has no reference Hamiltonian", self.id)))?;
        let j = self.spec_with(overrides, domain)?.build()?;
        Ok(PoissonSystem::new(j, h.expr.clone()))
    }
}

pub fn instantiate(id: &str, overrides: &Params) -> Result<StructureMatrix> {
    get(id)?.spec_with(overrides, None)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Point;
    use crate::families::{classify, Entry};

    #[test]
    fn loads_and_ids_are_unique() {
        let ids: std::collections::BTreeSet<&str> = list().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids.len(), list().len());
        assert!(list().len() >= 25);
        assert_eq!(version(), 1);
    }

    #[test]
    fn named_rows() {
        let e = get("euler-top").unwrap();
        let FamilySpec::Delta(s) = &e.spec else { panic!() };
        assert!(s.psi.iter().all(|p| p.to_string() == "1"));
        assert_eq!(s.phi.clone().map(|p| p.to_string()), ["x1", "x2", "x3"]);
        let FamilySpec::GammaPair(m) = &get("may-leonard-g2").unwrap().spec else { panic!() };
        assert_eq!(m.zero, Entry::U);
        let FamilySpec::GammaPair(t) = &get("two-level").unwrap().spec else { panic!() };
        let p: Point = [0.7, 1.2, 1.9];
        assert!((t.shape.eval_at(&p).unwrap() - p[0] / p[2]).abs() < 1e-15);
        assert!((t.eta.eval_at(&p).unwrap() - p[2] / (2.0 * p[0])).abs() < 1e-15);
    }

    #[test]
    fn lotka_volterra_instance() {
        let j = instantiate("lotka-volterra-t1", &[("b".into(), 1.0), ("c".into(), 2.0)].into()).unwrap();
        let p = [0.6, 1.3, 1.7];
        let [u, v, w] = j.values_at(&p).unwrap();
        assert!((u - 2.0 * p[0] * p[1]).abs() < 1e-14);
        assert!((v + 2.0 * p[0] * p[2]).abs() < 1e-14);
        assert!((w + p[1] * p[2]).abs() < 1e-14);
    }

    #[test]
    fn kermack_mckendrick_instance() {
        let j = instantiate("kermack-mckendrick-t3", &[("r".into(), 1.0), ("a".into(), 2.0)].into()).unwrap();
        let p = [0.6, 1.3, 1.7];
        let [u, v, w] = j.values_at(&p).unwrap();
        assert!((u + p[0] * p[1]).abs() < 1e-14);
        assert_eq!(v, 0.0);
        assert!((w + 2.0 * p[1]).abs() < 1e-14);
    }

    #[test]
    fn overrides_are_checked() {
        assert!(matches!(get("nope"), Err(Error::UnknownEntry(_))));
        assert!(matches!(
            instantiate("euler-top", &[("zeta".into(), 1.0)].into()),
            Err(Error::Invalid(_))
        ));
        // mu = -1 makes nu + mu*x3 change sign on the box
        assert!(matches!(
            instantiate("maxwell-bloch-t1", &[("mu".into(), -1.0)].into()),
            Err(Error::Vanishing { .. })
        ));
    }

    #[test]
    fn every_entry_is_poisson_and_tagged() {
        for e in list() {
            let j = e.spec.build().unwrap_or_else(|err| panic!("{}: {err}", e.id));
            assert!(j.check_jacobi(300, 1e-9).verdict.passed(), "{}", e.id);
            let c = classify(&j);
            assert_eq!(c.tag, e.tag(), "{}", e.id);
        }
    }

    #[test]
    fn euler_top_system() {
        let sys = get("euler-top").unwrap().system(&Params::new(), None).unwrap();
        let f = sys.vector_field(&[1.0; 3]).unwrap();
        assert!((f[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!(get("two-level").unwrap().system(&Params::new(), None).is_err());
    }
}

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::InputArgs;
use crate::catalog;
use crate::error::{Error, Result};
use crate::expr::{Domain, Expr, Params};
use crate::families::{classify, Entry, FamilySpec, FamilyTag, GammaPairSpec, GammaSingletonSpec};
use crate::structure::StructureMatrix;

/// Box used for inline entries when `--domain` is absent.
pub const INLINE_DOMAIN: (f64, f64) = (0.5, 2.0);

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Inline { u: String, v: String, w: String },
    Spec { path: String },
    Catalog { id: String },
}

/// A resolved input with overrides applied.
#[derive(Clone, Debug)]
pub struct Input {
    pub source: Source,
    pub structure: StructureMatrix,
    pub spec: Option<FamilySpec>,
    pub hamiltonian: Option<Expr>,
}

fn merged(base: &Params, overrides: &Params) -> Params {
    let mut p = base.clone();
    p.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
    p
}

fn read_spec(path: &Path, params: &Params, domain: Option<&Domain>) -> Result<(StructureMatrix, Option<FamilySpec>)> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)?;
    if value.get("family").is_some() {
        let mut spec: FamilySpec = serde_json::from_value(value)?;
        spec.set_params(merged(spec.params(), params));
        if let Some(d) = domain {
            spec.set_domain(d.clone());
        }
        Ok((spec.build()?, Some(spec)))
    } else if value.get("u").is_some() {
        let mut j: StructureMatrix = serde_json::from_value(value)?;
        j.params = merged(&j.params, params);
        if let Some(d) = domain {
            j.domain = d.clone();
        }
        Ok((j, None))
    } else {
        Err(Error::Invalid(format!(
            "{} is neither a family spec (`family` key) nor a structure (`u`, `v`, `w`)",
            path.display()
        )))
    }
}

impl Input {
    pub fn resolve(args: &InputArgs, params: &Params, domain: Option<&Domain>) -> Result<Input> {
        let inline = args.u.is_some() || args.v.is_some() || args.w.is_some();
        let count = inline as usize + args.spec.is_some() as usize + args.catalog.is_some() as usize;
        if count != 1 {
            return Err(Error::Invalid(
                "give exactly one input: -u/-v/-w, --spec FILE or --catalog ID".into(),
            ));
        }
        if let Some(id) = &args.catalog {
            let entry = catalog::get(id)?;
            let spec = entry.spec_with(params, domain)?;
            return Ok(Input {
                source: Source::Catalog { id: id.clone() },
                structure: spec.build()?,
                spec: Some(spec),
                hamiltonian: entry.hamiltonian.as_ref().map(|h| h.expr.clone()),
            });
        }
        if let Some(path) = &args.spec {
            let (structure, spec) = read_spec(path, params, domain)?;
            return Ok(Input {
                source: Source::Spec { path: path.display().to_string() },
                structure,
                spec,
                hamiltonian: None,
            });
        }
        let (Some(u), Some(v), Some(w)) = (&args.u, &args.v, &args.w) else {
            return Err(Error::Invalid("inline input needs all of -u, -v and -w".into()));
        };
        let domain = match domain {
            Some(d) => d.clone(),
            None => Domain::cube(INLINE_DOMAIN.0, INLINE_DOMAIN.1)?,
        };
        let structure = StructureMatrix::parse(u, v, w, domain)?.with_params(params.clone());
        Ok(Input {
            source: Source::Inline { u: u.clone(), v: v.clone(), w: w.clone() },
            structure,
            spec: None,
            hamiltonian: None,
        })
    }

    /// The family spec, recovered from the zero pattern for inline input.
    pub fn family_spec(&self) -> Result<FamilySpec> {
        match &self.spec {
            Some(s) => Ok(s.clone()),
            None => spec_from_structure(&self.structure),
        }
    }
}

/// Rebuild a Gamma spec from explicit entries. The factorized family cannot
/// be recovered this way and needs a spec file.
pub fn spec_from_structure(j: &StructureMatrix) -> Result<FamilySpec> {
    let entries = j.entries().map(Expr::clone);
    match classify(j).tag {
        FamilyTag::GammaPair(zero) => {
            let (plain, shaped) = match zero {
                Entry::U => (Entry::V, Entry::W),
                Entry::V => (Entry::W, Entry::U),
                Entry::W => (Entry::U, Entry::V),
            };
            let eta = entries[plain.index()].clone();
            let shape = (entries[shaped.index()].clone() / eta.clone()).simplify();
            Ok(FamilySpec::GammaPair(GammaPairSpec {
                zero,
                eta,
                shape,
                shape_parts: None,
                params: j.params.clone(),
                domain: j.domain.clone(),
            }))
        }
        FamilyTag::GammaSingleton(nonzero) => Ok(FamilySpec::GammaSingleton(GammaSingletonSpec {
            nonzero,
            eta: entries[nonzero.index()].clone(),
            params: j.params.clone(),
            domain: j.domain.clone(),
        })),
        tag if tag.is_delta() => Err(Error::Invalid(
            "no entry vanishes; give the factors eta, psi, phi in a spec file".into(),
        )),
        tag => Err(Error::FamilyMismatch(format!("structure is {tag}; nothing to reduce"))),
    }
}

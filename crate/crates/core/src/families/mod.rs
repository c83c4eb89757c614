//! The three solution families and their superposition algebra.

mod classify;
mod separable;
mod superpose;

pub use classify::{classify, ratio_conditions_hold, Classification, FamilyTag};
pub use separable::{
    cross_ratio_defect, is_separable, separability, separate, Separability, Separation,
    SEPARABILITY_QUADRUPLES,
};
pub use superpose::{oplus, otimes};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{is_identically_zero, Axis, Domain, Expr, Params, ZeroVerdict};
use crate::structure::{sign_on, StructureMatrix};

/// One of the three structure functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entry {
    U,
    V,
    W,
}

impl Entry {
    pub const ALL: [Entry; 3] = [Entry::U, Entry::V, Entry::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["u", "v", "w"][self.index()]
    }

    /// Axes `(i, j)` with the entry equal to `J_ij`.
    pub fn slot(self) -> (Axis, Axis) {
        match self {
            Entry::U => (Axis::X1, Axis::X2),
            Entry::V => (Axis::X3, Axis::X1),
            Entry::W => (Axis::X2, Axis::X3),
        }
    }

    /// The two axes the shape function of a pair with this entry zero may
    /// depend on, in the order `numerator / denominator` for separation.
    pub fn shape_axes(self) -> (Axis, Axis) {
        match self {
            Entry::U => (Axis::X1, Axis::X2),
            Entry::V => (Axis::X1, Axis::X3),
            Entry::W => (Axis::X2, Axis::X3),
        }
    }

    /// The axis the shape function must not depend on.
    pub fn excluded_axis(self) -> Axis {
        match self {
            Entry::U => Axis::X3,
            Entry::V => Axis::X2,
            Entry::W => Axis::X1,
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Entry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Entry> {
        match s {
            "u" => Ok(Entry::U),
            "v" => Ok(Entry::V),
            "w" => Ok(Entry::W),
            other => Err(Error::Invalid(format!("expected u, v or w, got `{other}`"))),
        }
    }
}

fn require_nonvanishing(e: &Expr, domain: &Domain, params: &Params, what: &str) -> Result<f64> {
    sign_on(e, domain, params, what)
}

fn require_independent(
    e: &Expr,
    axis: Axis,
    domain: &Domain,
    params: &Params,
    what: &str,
) -> Result<()> {
    let bound = e.bind(params).simplify();
    if !bound.depends_on(axis) {
        return Ok(());
    }
    match is_identically_zero(&bound.diff(axis), domain, &Params::new()) {
        ZeroVerdict::Zero => Ok(()),
        _ => Err(Error::ForbiddenDependence { what: what.into(), axis }),
    }
}

/// `u = eta psi1 psi2 phi3`, `v = eta psi1 phi2 psi3`, `w = eta phi1 psi2 psi3`
/// with `psi_i`, `phi_i` functions of `x_i` alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSpec {
    pub eta: Expr,
    pub psi: [Expr; 3],
    pub phi: [Expr; 3],
    #[serde(default)]
    pub params: Params,
    pub domain: Domain,
}

impl DeltaSpec {
    pub fn parse(eta: &str, psi: [&str; 3], phi: [&str; 3], domain: Domain) -> Result<DeltaSpec> {
        let p = |t: [&str; 3]| -> Result<[Expr; 3]> {
            Ok([t[0].parse()?, t[1].parse()?, t[2].parse()?])
        };
        Ok(DeltaSpec {
            eta: eta.parse()?,
            psi: p(psi)?,
            phi: p(phi)?,
            params: Params::new(),
            domain,
        })
    }

    pub fn with_params(mut self, params: Params) -> DeltaSpec {
        self.params = params;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, own) in Axis::ALL.into_iter().enumerate() {
            for (name, e) in [("psi", &self.psi[i]), ("phi", &self.phi[i])] {
                let what = format!("{name}{}", i + 1);
                for other in Axis::ALL.into_iter().filter(|a| *a != own) {
                    require_independent(e, other, &self.domain, &self.params, &what)?;
                }
                require_nonvanishing(e, &self.domain, &self.params, &what)?;
            }
        }
        require_nonvanishing(&self.eta, &self.domain, &self.params, "eta")?;
        Ok(())
    }

    /// The entries without validation.
    pub fn entries(&self) -> [Expr; 3] {
        let [p1, p2, p3] = self.psi.clone();
        let [f1, f2, f3] = self.phi.clone();
        let eta = || self.eta.clone();
        [
            Expr::product([eta(), p1.clone(), p2.clone(), f3]),
            Expr::product([eta(), p1, f2, p3.clone()]),
            Expr::product([eta(), f1, p2, p3]),
        ]
        .map(|e| e.simplify())
    }

    pub fn build(&self) -> Result<StructureMatrix> {
        self.validate()?;
        let [u, v, w] = self.entries();
        Ok(StructureMatrix::new(u, v, w, self.domain.clone()).with_params(self.params.clone()))
    }
}

/// One entry identically zero; the other two are `eta` and `eta * shape`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPairSpec {
    pub zero: Entry,
    pub eta: Expr,
    pub shape: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_parts: Option<[Expr; 2]>,
    #[serde(default)]
    pub params: Params,
    pub domain: Domain,
}

impl GammaPairSpec {
    pub fn parse(zero: Entry, eta: &str, shape: &str, domain: Domain) -> Result<GammaPairSpec> {
        Ok(GammaPairSpec {
            zero,
            eta: eta.parse()?,
            shape: shape.parse()?,
            shape_parts: None,
            params: Params::new(),
            domain,
        })
    }

    pub fn with_params(mut self, params: Params) -> GammaPairSpec {
        self.params = params;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let excluded = self.zero.excluded_axis();
        require_independent(&self.shape, excluded, &self.domain, &self.params, "shape")?;
        require_nonvanishing(&self.shape, &self.domain, &self.params, "shape")?;
        require_nonvanishing(&self.eta, &self.domain, &self.params, "eta")?;
        if let Some([p1, p2]) = &self.shape_parts {
            let (a, b) = self.zero.shape_axes();
            for ax in Axis::ALL.into_iter().filter(|x| *x != a) {
                require_independent(p1, ax, &self.domain, &self.params, "first shape part")?;
            }
            for ax in Axis::ALL.into_iter().filter(|x| *x != b) {
                require_independent(p2, ax, &self.domain, &self.params, "second shape part")?;
            }
            let mismatch = p1.clone() / p2.clone() - self.shape.clone();
            if is_identically_zero(&mismatch, &self.domain, &self.params) != ZeroVerdict::Zero {
                return Err(Error::Invalid(
                    "shape parts do not divide to the shape function".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> [Expr; 3] {
        let eta = self.eta.clone();
        let scaled = (self.eta.clone() * self.shape.clone()).simplify();
        let mut out = [Expr::zero(), Expr::zero(), Expr::zero()];
        // the entry after the zero one (cyclically) carries the shape
        let (plain, shaped) = match self.zero {
            Entry::U => (Entry::V, Entry::W),
            Entry::V => (Entry::W, Entry::U),
            Entry::W => (Entry::U, Entry::V),
        };
        out[plain.index()] = eta.simplify();
        out[shaped.index()] = scaled;
        out
    }

    pub fn build(&self) -> Result<StructureMatrix> {
        self.validate()?;
        let [u, v, w] = self.entries();
        Ok(StructureMatrix::new(u, v, w, self.domain.clone()).with_params(self.params.clone()))
    }
}

/// Two entries identically zero; the remaining one is `eta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSingletonSpec {
    pub nonzero: Entry,
    pub eta: Expr,
    #[serde(default)]
    pub params: Params,
    pub domain: Domain,
}

impl GammaSingletonSpec {
    pub fn parse(nonzero: Entry, eta: &str, domain: Domain) -> Result<GammaSingletonSpec> {
        Ok(GammaSingletonSpec {
            nonzero,
            eta: eta.parse()?,
            params: Params::new(),
            domain,
        })
    }

    pub fn with_params(mut self, params: Params) -> GammaSingletonSpec {
        self.params = params;
        self
    }

    pub fn validate(&self) -> Result<()> {
        require_nonvanishing(&self.eta, &self.domain, &self.params, "eta")?;
        Ok(())
    }

    pub fn entries(&self) -> [Expr; 3] {
        let mut out = [Expr::zero(), Expr::zero(), Expr::zero()];
        out[self.nonzero.index()] = self.eta.simplify();
        out
    }

    pub fn build(&self) -> Result<StructureMatrix> {
        self.validate()?;
        let [u, v, w] = self.entries();
        Ok(StructureMatrix::new(u, v, w, self.domain.clone()).with_params(self.params.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Delta(DeltaSpec),
    GammaPair(GammaPairSpec),
    GammaSingleton(GammaSingletonSpec),
}

impl FamilySpec {
    pub fn build(&self) -> Result<StructureMatrix> {
        match self {
            FamilySpec::Delta(s) => s.build(),
            FamilySpec::GammaPair(s) => s.build(),
            FamilySpec::GammaSingleton(s) => s.build(),
        }
    }

    pub fn domain(&self) -> &Domain {
        match self {
            FamilySpec::Delta(s) => &s.domain,
            FamilySpec::GammaPair(s) => &s.domain,
            FamilySpec::GammaSingleton(s) => &s.domain,
        }
    }

    pub fn params(&self) -> &Params {
        match self {
            FamilySpec::Delta(s) => &s.params,
            FamilySpec::GammaPair(s) => &s.params,
            FamilySpec::GammaSingleton(s) => &s.params,
        }
    }

    pub fn set_params(&mut self, params: Params) {
        match self {
            FamilySpec::Delta(s) => s.params = params,
            FamilySpec::GammaPair(s) => s.params = params,
            FamilySpec::GammaSingleton(s) => s.params = params,
        }
    }

    pub fn set_domain(&mut self, domain: Domain) {
        match self {
            FamilySpec::Delta(s) => s.domain = domain,
            FamilySpec::GammaPair(s) => s.domain = domain,
            FamilySpec::GammaSingleton(s) => s.domain = domain,
        }
    }

    /// Tag that `classify` is expected to return for the built structure.
    pub fn expected_tag(&self) -> FamilyTag {
        match self {
            FamilySpec::Delta(_) => FamilyTag::DeltaVerified,
            FamilySpec::GammaPair(s) => FamilyTag::GammaPair(s.zero),
            FamilySpec::GammaSingleton(s) => FamilyTag::GammaSingleton(s.nonzero),
        }
    }
}

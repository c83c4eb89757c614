use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Entry;
use crate::error::Error;
use crate::expr::{is_identically_zero, Axis, Expr, Point, ZeroVerdict};
use crate::structure::StructureMatrix;
use crate::DEFAULT_SEED;

const RATIO_SAMPLES: usize = 64;
const RATIO_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    /// No entry vanishes; factorization not confirmed.
    DeltaCandidate,
    /// No entry vanishes and the three ratio conditions hold on samples.
    DeltaVerified,
    GammaPair(Entry),
    GammaSingleton(Entry),
    ZeroMatrix,
    Unclassified,
}

impl FamilyTag {
    /// Whether two tags put structures in the same family.
    pub fn same_family(self, other: FamilyTag) -> bool {
        use FamilyTag::*;
        match (self, other) {
            (DeltaCandidate | DeltaVerified, DeltaCandidate | DeltaVerified) => true,
            (Unclassified, _) | (_, Unclassified) => false,
            (a, b) => a == b,
        }
    }

    pub fn is_delta(self) -> bool {
        matches!(self, FamilyTag::DeltaCandidate | FamilyTag::DeltaVerified)
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::DeltaCandidate => f.write_str("delta-candidate"),
            FamilyTag::DeltaVerified => f.write_str("delta(verified)"),
            FamilyTag::GammaPair(e) => write!(f, "gamma-pair({e})"),
            FamilyTag::GammaSingleton(e) => write!(f, "gamma-singleton({e})"),
            FamilyTag::ZeroMatrix => f.write_str("zero-matrix"),
            FamilyTag::Unclassified => f.write_str("unclassified"),
        }
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<FamilyTag, Error> {
        let inner = |prefix: &str| -> Option<Result<Entry, Error>> {
            s.strip_prefix(prefix)?.strip_suffix(')').map(str::parse)
        };
        Ok(match s {
            "delta-candidate" => FamilyTag::DeltaCandidate,
            "delta(verified)" => FamilyTag::DeltaVerified,
            "zero-matrix" => FamilyTag::ZeroMatrix,
            "unclassified" => FamilyTag::Unclassified,
            _ => {
                if let Some(e) = inner("gamma-pair(") {
                    FamilyTag::GammaPair(e?)
                } else if let Some(e) = inner("gamma-singleton(") {
                    FamilyTag::GammaSingleton(e?)
                } else {
                    return Err(Error::Invalid(format!("unknown family tag `{s}`")));
                }
            }
        })
    }
}

impl Serialize for FamilyTag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FamilyTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<FamilyTag, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: FamilyTag,
    /// Zero verdicts for u, v, w.
    pub evidence: [ZeroVerdict; 3],
    pub notes: Vec<String>,
}

/// `a/b` evaluated at `p` and at `p` with `axis` moved to `q`'s coordinate
/// must agree for every sample pair.
fn ratio_independent(a: &Expr, b: &Expr, axis: Axis, points: &[Point]) -> bool {
    let ratio = |p: &Point| -> Option<f64> {
        let (x, y) = (a.eval_at(p).ok()?, b.eval_at(p).ok()?);
        (y != 0.0).then(|| x / y)
    };
    let mut checked = 0;
    for pair in points.windows(2) {
        let p = pair[0];
        let mut moved = p;
        moved[axis.index()] = pair[1][axis.index()];
        let (Some(r0), Some(r1)) = (ratio(&p), ratio(&moved)) else {
            continue;
        };
        checked += 1;
        if (r0 - r1).abs() > RATIO_TOL * (r0.abs() + r1.abs()) {
            return false;
        }
    }
    checked > 0
}

/// `v/u` free of `x1`, `u/w` free of `x2`, `w/v` free of `x3`.
pub fn ratio_conditions_hold(j: &StructureMatrix) -> bool {
    let [u, v, w] = j.bound_entries();
    let points = j.domain.quasi_random(RATIO_SAMPLES + 1, DEFAULT_SEED);
    ratio_independent(&v, &u, Axis::X1, &points)
        && ratio_independent(&u, &w, Axis::X2, &points)
        && ratio_independent(&w, &v, Axis::X3, &points)
}

pub fn classify(j: &StructureMatrix) -> Classification {
    let evidence = j
        .entries()
        .map(|e| is_identically_zero(e, &j.domain, &j.params));
    let mut notes = Vec::new();
    if evidence.contains(&ZeroVerdict::Undetermined) {
        for (e, v) in Entry::ALL.iter().zip(&evidence) {
            if *v == ZeroVerdict::Undetermined {
                notes.push(format!("{e} could not be evaluated on most of the domain"));
            }
        }
        return Classification { tag: FamilyTag::Unclassified, evidence, notes };
    }
    let zeros: Vec<Entry> = Entry::ALL
        .into_iter()
        .filter(|e| evidence[e.index()] == ZeroVerdict::Zero)
        .collect();
    let tag = match zeros.len() {
        0 => {
            if ratio_conditions_hold(j) {
                FamilyTag::DeltaVerified
            } else {
                notes.push("ratio conditions fail; membership in the factorized family is not decided".into());
                FamilyTag::DeltaCandidate
            }
        }
        1 => FamilyTag::GammaPair(zeros[0]),
        2 => {
            let nonzero = Entry::ALL.into_iter().find(|e| !zeros.contains(e)).unwrap();
            FamilyTag::GammaSingleton(nonzero)
        }
        _ => FamilyTag::ZeroMatrix,
    };
    Classification { tag, evidence, notes }
}

use serde::{Deserialize, Serialize};

use super::{Domain, Expr, Params};
use crate::DEFAULT_SEED;

/// Interior samples drawn when symbolic simplification is inconclusive.
pub const ZERO_SAMPLES: usize = 256;
/// Relative threshold against the magnitude of the top-level summands.
pub const ZERO_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroVerdict {
    Zero,
    NonZero,
    Undetermined,
}

pub(crate) fn summands(e: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    let mut stack = vec![e];
    while let Some(node) = stack.pop() {
        match node {
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                stack.push(b);
                stack.push(a);
            }
            other => out.push(other),
        }
    }
    out
}

/// Decide whether `e` vanishes on the whole box.
///
/// A symbolic zero after simplification is conclusive. Otherwise every sample
/// must satisfy `|e| <= 1e-12 * (1 + max |summand|)`; evaluation failures are
/// skipped, and more than half failing gives `Undetermined`.
pub fn is_identically_zero(e: &Expr, domain: &Domain, params: &Params) -> ZeroVerdict {
    is_identically_zero_seeded(e, domain, params, DEFAULT_SEED)
}

pub fn is_identically_zero_seeded(
    e: &Expr,
    domain: &Domain,
    params: &Params,
    seed: u64,
) -> ZeroVerdict {
    let s = e.bind(params).simplify();
    if s.is_zero_const() {
        return ZeroVerdict::Zero;
    }
    if let Some(c) = s.as_const() {
        return if c == 0.0 { ZeroVerdict::Zero } else { ZeroVerdict::NonZero };
    }
    let terms = summands(&s);
    let mut failures = 0usize;
    for p in domain.quasi_random(ZERO_SAMPLES, seed) {
        let Ok(value) = s.eval_at(&p) else {
            failures += 1;
            continue;
        };
        let mut scale: f64 = 0.0;
        for t in &terms {
            match t.eval_at(&p) {
                Ok(v) => scale = scale.max(v.abs()),
                Err(_) => scale = f64::INFINITY,
            }
        }
        if !scale.is_finite() {
            scale = value.abs();
        }
        if value.abs() > ZERO_REL_TOL * (1.0 + scale) {
            return ZeroVerdict::NonZero;
        }
    }
    if 2 * failures > ZERO_SAMPLES {
        ZeroVerdict::Undetermined
    } else {
        ZeroVerdict::Zero
    }
}

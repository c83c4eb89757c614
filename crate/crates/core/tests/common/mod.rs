//! Random structures and expressions shared by the integration tests. Every
//! generator is driven by a seeded ChaCha stream so failures reproduce.
#![allow(dead_code)]

use poisson3::expr::{Axis, Domain, Expr};
use poisson3::families::{DeltaSpec, Entry, FamilySpec, GammaPairSpec, GammaSingletonSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_box() -> Domain {
    Domain::cube(1.0, 2.0).unwrap()
}

fn num(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> String {
    format!("{:.3}", r.random_range(lo..hi))
}

/// A function of one coordinate that stays positive for `x` in `[0.5, 2]`.
/// Several templates have no closed-form antiderivative on purpose.
pub fn positive_univariate(r: &mut ChaCha8Rng, axis: Axis) -> String {
    let x = axis.to_string();
    let c = num(r, 0.5, 2.0);
    match r.random_range(0..8) {
        0 => format!("{c}*{x}^({})", r.random_range(-3..=3)),
        1 => format!("{c}*exp({}*{x})", num(r, -1.0, 1.0)),
        2 => format!("{c} + {x}^{}", r.random_range(1..=3)),
        3 => format!("{c}*({x} + {})^({})", num(r, 0.0, 1.0), num(r, -2.5, 2.5)),
        4 => format!("{c}/({} + {x})", num(r, 0.0, 1.0)),
        5 => format!("{c}*(2 + sin({}*{x}))", num(r, 0.5, 3.0)),
        6 => format!("{c}*{x}*exp({}*{x})", num(r, -1.0, 1.0)),
        _ => format!("{} + ln({x})", num(r, 0.8, 2.0)),
    }
}

/// Nonvanishing univariate with a random sign.
pub fn signed_univariate(r: &mut ChaCha8Rng, axis: Axis) -> String {
    let f = positive_univariate(r, axis);
    if r.random_bool(0.5) {
        f
    } else {
        format!("-({f})")
    }
}

/// A positive function of all three coordinates that does not factor.
pub fn positive_trivariate(r: &mut ChaCha8Rng) -> String {
    let c = num(r, 0.5, 2.0);
    match r.random_range(0..6) {
        0 => format!("{c} + x1*x2 + x3^2"),
        1 => format!("exp({}*x1*x2)*(1 + x3)", num(r, -0.5, 0.5)),
        2 => format!("{c}*(x1 + x2 + x3)^({})", num(r, -2.0, 2.0)),
        3 => format!("{c}*(2 + sin(x1*x2*x3))"),
        4 => format!("{c}/(x1 + x2*x3)"),
        _ => format!(
            "({})*({})*({})",
            positive_univariate(r, Axis::X1),
            positive_univariate(r, Axis::X2),
            positive_univariate(r, Axis::X3)
        ),
    }
}

pub fn signed_trivariate(r: &mut ChaCha8Rng) -> String {
    let f = positive_trivariate(r);
    if r.random_bool(0.5) {
        f
    } else {
        format!("-({f})")
    }
}

pub fn random_delta(r: &mut ChaCha8Rng, domain: &Domain) -> DeltaSpec {
    let eta = signed_trivariate(r);
    let psi = Axis::ALL.map(|a| signed_univariate(r, a));
    let phi = Axis::ALL.map(|a| signed_univariate(r, a));
    DeltaSpec::parse(
        &eta,
        [&psi[0], &psi[1], &psi[2]],
        [&phi[0], &phi[1], &phi[2]],
        domain.clone(),
    )
    .unwrap()
}

/// Delta spec with every factor positive, the input of the superposition
/// operations.
pub fn random_delta_positive(r: &mut ChaCha8Rng, domain: &Domain) -> DeltaSpec {
    let eta = positive_trivariate(r);
    let psi = Axis::ALL.map(|a| positive_univariate(r, a));
    let phi = Axis::ALL.map(|a| positive_univariate(r, a));
    DeltaSpec::parse(
        &eta,
        [&psi[0], &psi[1], &psi[2]],
        [&phi[0], &phi[1], &phi[2]],
        domain.clone(),
    )
    .unwrap()
}

/// Pair spec whose shape is a ratio of univariates on the admissible axes;
/// the parts are not handed over, so building a Casimir has to separate it.
pub fn random_pair(r: &mut ChaCha8Rng, zero: Entry, domain: &Domain, positive: bool) -> GammaPairSpec {
    let (a, b) = zero.shape_axes();
    let (eta, top, bottom) = if positive {
        (positive_trivariate(r), positive_univariate(r, a), positive_univariate(r, b))
    } else {
        (signed_trivariate(r), signed_univariate(r, a), positive_univariate(r, b))
    };
    GammaPairSpec::parse(zero, &eta, &format!("({top})/({bottom})"), domain.clone()).unwrap()
}

pub fn random_singleton(r: &mut ChaCha8Rng, nonzero: Entry, domain: &Domain) -> GammaSingletonSpec {
    GammaSingletonSpec::parse(nonzero, &signed_trivariate(r), domain.clone()).unwrap()
}

/// One spec from any family, uniformly over delta and the six zero patterns.
pub fn random_spec(r: &mut ChaCha8Rng, domain: &Domain) -> FamilySpec {
    let e = Entry::ALL[r.random_range(0..3)];
    match r.random_range(0..3) {
        0 => FamilySpec::Delta(random_delta(r, domain)),
        1 => FamilySpec::GammaPair(random_pair(r, e, domain, false)),
        _ => FamilySpec::GammaSingleton(random_singleton(r, e, domain)),
    }
}

/// A smooth expression that evaluates without error on `[0.5, 2]^3`.
pub fn random_expr_text(r: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || r.random_bool(0.2) {
        return match r.random_range(0..4) {
            0 => num(r, -2.0, 2.0),
            i => format!("x{i}"),
        };
    }
    let sub = |r: &mut ChaCha8Rng| random_expr_text(r, depth - 1);
    match r.random_range(0..12) {
        0 => format!("({} + {})", sub(r), sub(r)),
        1 => format!("({} - {})", sub(r), sub(r)),
        2 | 3 => format!("({})*({})", sub(r), sub(r)),
        4 => format!("({})/(1.5 + cos({}))", sub(r), sub(r)),
        5 => format!("sin({})", sub(r)),
        6 => format!("cos({})", sub(r)),
        7 => format!("exp(sin({}))", sub(r)),
        8 => format!("ln(1 + ({})^2)", sub(r)),
        9 => format!("({})^{}", sub(r), r.random_range(2..=3)),
        10 => format!("(1 + ({})^2)^({})", sub(r), num(r, -1.0, 1.0)),
        _ => format!("x{}^({})", r.random_range(1..=3), num(r, -2.0, 2.0)),
    }
}

pub fn random_expr(r: &mut ChaCha8Rng, depth: u32) -> Expr {
    random_expr_text(r, depth).parse().unwrap()
}

/// Central difference with a step scaled to the coordinate.
pub fn central_difference(f: &Expr, p: &[f64; 3], axis: Axis) -> f64 {
    let i = axis.index();
    let h = 1e-5 * p[i].abs().max(1.0);
    let (mut a, mut b) = (*p, *p);
    a[i] += h;
    b[i] -= h;
    (f.eval_at(&a).unwrap() - f.eval_at(&b).unwrap()) / (2.0 * h)
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

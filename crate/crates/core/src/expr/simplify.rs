//! Canonical-form simplification.
//!
//! An expression is rewritten as a sum of `coefficient * monomial` terms, where a
//! monomial is a product of atoms raised to constant exponents. Atoms are
//! coordinates, parameters, function applications with simplified arguments,
//! powers with non-constant exponents, and sums that could not be distributed.
//! Collecting like terms in this form gives constant folding, the 0/1 identities
//! and cancellation of commuted products.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use super::eval::{apply, power};
use super::Expr;

/// Distribute a product of two sums only when the expansion stays this small.
const MAX_EXPANSION: usize = 16;

#[derive(Clone, Copy, Debug)]
struct Num(f64);

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Num {}
impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Num {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Debug)]
struct Atom(Expr);

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Atom {}
impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_expr(&self.0, &other.0)
    }
}

fn rank(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) => 0,
        Expr::Param(_) => 1,
        Expr::Var(_) => 2,
        Expr::Func(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Neg(_) => 5,
        Expr::Add(..) => 6,
        Expr::Sub(..) => 7,
        Expr::Mul(..) => 8,
        Expr::Div(..) => 9,
    }
}

/// Total structural order: constants, parameters, coordinates, functions, then
/// compound nodes.
fn cmp_expr(a: &Expr, b: &Expr) -> Ordering {
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => x.total_cmp(y),
        (Expr::Param(x), Expr::Param(y)) => x.cmp(y),
        (Expr::Var(x), Expr::Var(y)) => x.cmp(y),
        (Expr::Func(f, x), Expr::Func(g, y)) => f.cmp(g).then_with(|| cmp_expr(x, y)),
        (Expr::Neg(x), Expr::Neg(y)) => cmp_expr(x, y),
        (Expr::Add(a1, a2), Expr::Add(b1, b2))
        | (Expr::Sub(a1, a2), Expr::Sub(b1, b2))
        | (Expr::Mul(a1, a2), Expr::Mul(b1, b2))
        | (Expr::Div(a1, a2), Expr::Div(b1, b2))
        | (Expr::Pow(a1, a2), Expr::Pow(b1, b2)) => {
            cmp_expr(a1, b1).then_with(|| cmp_expr(a2, b2))
        }
        _ => Ordering::Equal,
    })
}

type Mono = BTreeMap<Atom, Num>;
type Poly = BTreeMap<Mono, Num>;

fn constant(c: f64) -> Poly {
    let mut p = Poly::new();
    if c != 0.0 {
        p.insert(Mono::new(), Num(c));
    }
    p
}

fn single(mono: Mono, coeff: f64) -> Poly {
    let mut p = Poly::new();
    if coeff != 0.0 {
        p.insert(mono, Num(coeff));
    }
    p
}

fn atom_poly(e: Expr) -> Poly {
    let mut m = Mono::new();
    m.insert(Atom(e), Num(1.0));
    single(m, 1.0)
}

fn as_constant(p: &Poly) -> Option<f64> {
    match p.len() {
        0 => Some(0.0),
        1 => {
            let (m, c) = p.iter().next()?;
            m.is_empty().then_some(c.0)
        }
        _ => None,
    }
}

fn as_single(p: &Poly) -> Option<(&Mono, f64)> {
    if p.len() == 1 {
        p.iter().next().map(|(m, c)| (m, c.0))
    } else {
        None
    }
}

fn add_term(p: &mut Poly, m: Mono, c: f64) {
    if c == 0.0 {
        return;
    }
    let entry = p.entry(m);
    match entry {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(Num(c));
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get().0 + c;
            if sum == 0.0 {
                o.remove();
            } else {
                o.insert(Num(sum));
            }
        }
    }
}

fn add(mut a: Poly, b: Poly) -> Poly {
    for (m, c) in b {
        add_term(&mut a, m, c.0);
    }
    a
}

fn scale(p: Poly, k: f64) -> Poly {
    if k == 0.0 {
        return Poly::new();
    }
    p.into_iter().map(|(m, c)| (m, Num(c.0 * k))).collect()
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = a.clone();
    for (atom, e) in b {
        let sum = out.get(atom).map_or(0.0, |x| x.0) + e.0;
        if sum == 0.0 {
            out.remove(atom);
        } else {
            out.insert(atom.clone(), Num(sum));
        }
    }
    out
}

fn mono_pow(m: &Mono, k: f64) -> Mono {
    m.iter().map(|(a, e)| (a.clone(), Num(e.0 * k))).collect()
}

/// Treat a multi-term polynomial as an opaque factor.
fn sum_atom(p: &Poly) -> Atom {
    Atom(from_poly(p))
}

fn mul(a: Poly, b: Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Poly::new();
    }
    // A sum times a monomial that already carries that sum as a factor merges
    // exponents instead of distributing, so `s / s` cancels.
    if a.len() > 1 && b.len() == 1 {
        let atom = sum_atom(&a);
        let (m, c) = b.iter().next().unwrap();
        if m.contains_key(&atom) {
            let mut f = Mono::new();
            f.insert(atom, Num(1.0));
            return single(mono_mul(m, &f), c.0);
        }
    }
    if b.len() > 1 && a.len() == 1 {
        return mul(b, a);
    }
    if a.len() == 1 || b.len() == 1 || a.len() * b.len() <= MAX_EXPANSION {
        let mut out = Poly::new();
        for (ma, ca) in &a {
            for (mb, cb) in &b {
                add_term(&mut out, mono_mul(ma, mb), ca.0 * cb.0);
            }
        }
        return out;
    }
    let mut m = Mono::new();
    m.insert(sum_atom(&a), Num(1.0));
    m = mono_mul(&m, &BTreeMap::from([(sum_atom(&b), Num(1.0))]));
    single(m, 1.0)
}

/// Multiplicative inverse, or `None` for the zero polynomial.
fn reciprocal(p: &Poly) -> Option<Poly> {
    if p.is_empty() {
        return None;
    }
    if let Some((m, c)) = as_single(p) {
        return Some(single(mono_pow(m, -1.0), 1.0 / c));
    }
    let mut m = Mono::new();
    m.insert(sum_atom(p), Num(-1.0));
    Some(single(m, 1.0))
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0 && x.abs() <= 1e6
}

/// `p ^ k` for a constant exponent, or `None` when no rewrite is valid.
fn pow_const(p: &Poly, k: f64) -> Option<Poly> {
    if k == 0.0 {
        return Some(constant(1.0));
    }
    if k == 1.0 {
        return Some(p.clone());
    }
    if let Some(c) = as_constant(p) {
        return power(c, k).ok().map(constant);
    }
    // A sum raised to a power stays a single factor.
    let (m, c) = as_single(p)?;
    if is_integer(k) {
        let ck = power(c, k).ok()?;
        return Some(single(mono_pow(m, k), ck));
    }
    // (c * a)^k = c^k * a^k needs c > 0 and a single unit-exponent factor.
    if c > 0.0 && m.len() == 1 && m.values().next().map(|e| e.0) == Some(1.0) {
        let ck = power(c, k).ok()?;
        return Some(single(mono_pow(m, k), ck));
    }
    None
}

fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Const(c) => constant(*c),
        Expr::Var(_) | Expr::Param(_) => atom_poly(e.clone()),
        Expr::Neg(a) => scale(to_poly(a), -1.0),
        Expr::Add(a, b) => add(to_poly(a), to_poly(b)),
        Expr::Sub(a, b) => add(to_poly(a), scale(to_poly(b), -1.0)),
        Expr::Mul(a, b) => mul(to_poly(a), to_poly(b)),
        Expr::Div(a, b) => {
            let num = to_poly(a);
            let den = to_poly(b);
            match reciprocal(&den) {
                Some(r) => mul(num, r),
                None => atom_poly(Expr::Div(
                    Arc::new(from_poly(&num)),
                    Arc::new(Expr::zero()),
                )),
            }
        }
        Expr::Pow(a, b) => {
            let base = to_poly(a);
            let exponent = simplify(b);
            if let Some(k) = exponent.as_const() {
                if let Some(p) = pow_const(&base, k) {
                    return p;
                }
                if base.len() > 1 && is_integer(k) {
                    let mut m = Mono::new();
                    m.insert(sum_atom(&base), Num(k));
                    return single(m, 1.0);
                }
            } else if as_constant(&base) == Some(1.0) {
                return constant(1.0);
            }
            atom_poly(Expr::Pow(Arc::new(from_poly(&base)), Arc::new(exponent)))
        }
        Expr::Func(f, a) => {
            let arg = simplify(a);
            if let Some(c) = arg.as_const() {
                if let Ok(v) = apply(*f, c) {
                    return constant(v);
                }
            }
            atom_poly(Expr::Func(*f, Arc::new(arg)))
        }
    }
}

fn factor_expr(atom: &Atom, e: f64) -> Expr {
    if e == 1.0 {
        atom.0.clone()
    } else {
        atom.0.clone().powf(e)
    }
}

/// Coefficient magnitude times monomial, with negative exponents moved to a
/// denominator. `negate_first` folds a unit negative coefficient into the
/// first numerator factor.
fn term_expr(m: &Mono, coeff: f64, negate_first: bool) -> Expr {
    let mag = coeff.abs();
    let mut num: Vec<Expr> = m
        .iter()
        .filter(|(_, e)| e.0 > 0.0)
        .map(|(a, e)| factor_expr(a, e.0))
        .collect();
    let den: Vec<Expr> = m
        .iter()
        .filter(|(_, e)| e.0 < 0.0)
        .map(|(a, e)| factor_expr(a, -e.0))
        .collect();
    if negate_first {
        if mag != 1.0 || num.is_empty() {
            num.insert(0, Expr::constant(-mag));
        } else {
            let first = num.remove(0);
            num.insert(0, -first);
        }
    } else if mag != 1.0 || num.is_empty() {
        num.insert(0, Expr::constant(mag));
    }
    let numerator = Expr::product(num);
    if den.is_empty() {
        numerator
    } else {
        numerator / Expr::product(den)
    }
}

fn from_poly(p: &Poly) -> Expr {
    let empty = Mono::new();
    let constant_term = p.get(&empty).map(|c| c.0);
    let mut terms = p
        .iter()
        .filter(|(m, _)| !m.is_empty())
        .map(|(m, c)| (m, c.0))
        .chain(constant_term.map(|c| (&empty, c)));
    let Some((m, c)) = terms.next() else {
        return Expr::zero();
    };
    let mut acc = term_expr(m, c, c < 0.0);
    for (m, c) in terms {
        let t = term_expr(m, c, false);
        acc = if c < 0.0 { acc - t } else { acc + t };
    }
    acc
}

/// Algebraically equivalent expression in canonical form.
pub(crate) fn simplify(e: &Expr) -> Expr {
    from_poly(&to_poly(e))
}

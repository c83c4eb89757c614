use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::antiderivative::{Antiderivative, AntiderivativeInfo};
use super::casimir::{delta_parts, pair_parts};
use crate::error::{Error, Result};
use crate::expr::{Axis, Domain, Expr, Point};
use crate::families::{DeltaSpec, Entry, FamilySpec, FamilyTag, GammaPairSpec, GammaSingletonSpec};
use crate::structure::{
    transform, CoordinateMap, Mat3, Permutation, StructureField, StructureMatrix, Verdict,
};
use crate::DEFAULT_SEED;

pub const CHART_TOL: f64 = 1e-8;
pub const CHART_SAMPLES: usize = 100;

/// `[[0,1,0],[-1,0,0],[0,0,0]]`: the Casimir is the third coordinate.
pub const DELTA_TARGET: Mat3 = [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
/// `[[0,0,0],[0,0,1],[0,-1,0]]`: the Casimir is the first coordinate.
pub const GAMMA_TARGET: Mat3 = [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]];

fn pair_target(p: usize, q: usize, sign: f64) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    m[p][q] = sign;
    m[q][p] = -sign;
    m
}

#[derive(Clone, Debug)]
enum Layout {
    /// `(F1, F2, F1 + F2 + F3)`
    Delta { parts: [Antiderivative; 3] },
    /// Slots hold either the Casimir `T0 + T1` (`None`) or a kept axis;
    /// `solved` indexes the term recovered by inversion.
    Casimir {
        terms: [Antiderivative; 2],
        slots: [Option<Axis>; 3],
        solved: usize,
    },
    Permutation(Permutation),
}

/// Global chart in which the structure becomes `mu_hat` times a constant
/// canonical matrix.
#[derive(Clone, Debug)]
pub struct DarbouxChart {
    layout: Layout,
    /// Reparametrization factor written in the original coordinates.
    pub mu_hat: Expr,
    pub target: Mat3,
    /// Index of the Casimir coordinate.
    pub distinguished: usize,
    pub family: FamilyTag,
    pub domain: Domain,
}

impl DarbouxChart {
    pub fn inverse(&self, y: &Point) -> Result<Point> {
        match &self.layout {
            Layout::Delta { parts } => {
                let x1 = parts[0].inverse(y[0])?;
                let x2 = parts[1].inverse(y[1])?;
                let x3 = parts[2].inverse(y[2] - y[0] - y[1])?;
                Ok([x1, x2, x3])
            }
            Layout::Casimir { terms, slots, solved } => {
                let mut x = [0.0; 3];
                let mut c = 0.0;
                for (i, s) in slots.iter().enumerate() {
                    match s {
                        Some(a) => x[a.index()] = y[i],
                        None => c = y[i],
                    }
                }
                let (s, o) = (&terms[*solved], &terms[1 - solved]);
                let rest = c - o.eval(x[o.axis().index()])?;
                x[s.axis().index()] = s.inverse(rest)?;
                Ok(x)
            }
            Layout::Permutation(p) => Ok(p.invert(y)),
        }
    }

    pub fn mu_hat_at_source(&self, x: &Point) -> Result<f64> {
        Ok(self.mu_hat.eval_at(x)?)
    }

    /// `mu_hat` in chart coordinates.
    pub fn mu_hat_at(&self, y: &Point) -> Result<f64> {
        self.mu_hat_at_source(&self.inverse(y)?)
    }

    /// Replace the reparametrization factor by `factor * mu_hat`.
    pub fn rescaled(&self, factor: f64) -> DarbouxChart {
        let mut out = self.clone();
        out.mu_hat = (Expr::constant(factor) * self.mu_hat.clone()).simplify();
        out
    }

    fn antiderivatives(&self) -> Vec<&Antiderivative> {
        match &self.layout {
            Layout::Delta { parts } => parts.iter().collect(),
            Layout::Casimir { terms, .. } => terms.iter().collect(),
            Layout::Permutation(_) => Vec::new(),
        }
    }

    pub fn export(&self) -> ChartExport {
        let term = |t: &Antiderivative| -> String {
            match t.closed_form() {
                Some(c) => c.to_string(),
                None => format!("integral({}, {}, {})", t.integrand(), t.axis(), t.anchor()),
            }
        };
        let (forward, inverse) = match &self.layout {
            Layout::Delta { parts } => {
                let [a, b, c] = parts.each_ref().map(term);
                (
                    json!({
                        "kind": "sum",
                        "components": [a.clone(), b.clone(), format!("({a}) + ({b}) + ({c})")],
                    }),
                    json!({ "kind": "per-axis-antiderivative", "order": ["x1", "x2", "x3"] }),
                )
            }
            Layout::Casimir { terms, slots, solved } => {
                let c = format!("({}) + ({})", term(&terms[0]), term(&terms[1]));
                let components: Vec<String> = slots
                    .iter()
                    .map(|s| s.map_or(c.clone(), |a| a.to_string()))
                    .collect();
                (
                    json!({ "kind": "sum", "components": components }),
                    json!({
                        "kind": "per-axis-antiderivative",
                        "solve": terms[*solved].axis().to_string(),
                    }),
                )
            }
            Layout::Permutation(p) => {
                let source: Vec<String> = p.source.iter().map(Axis::to_string).collect();
                let kind = if p.source == Axis::ALL { "identity" } else { "permutation" };
                (
                    json!({ "kind": kind, "components": source }),
                    json!({ "kind": kind }),
                )
            }
        };
        ChartExport {
            family: self.family.to_string(),
            forward,
            inverse,
            mu_hat: self.mu_hat.to_string(),
            target: self.target,
            distinguished: self.distinguished,
            antiderivatives: self.antiderivatives().into_iter().map(Antiderivative::info).collect(),
        }
    }
}

impl CoordinateMap for DarbouxChart {
    fn forward(&self, x: &Point) -> Result<Point> {
        match &self.layout {
            Layout::Delta { parts } => {
                let [a, b, c] = [0, 1, 2].map(|i| parts[i].eval(x[i]));
                let (a, b, c) = (a?, b?, c?);
                Ok([a, b, a + b + c])
            }
            Layout::Casimir { terms, slots, .. } => {
                let c = terms[0].eval(x[terms[0].axis().index()])?
                    + terms[1].eval(x[terms[1].axis().index()])?;
                Ok(slots.map(|s| s.map_or(c, |a| x[a.index()])))
            }
            Layout::Permutation(p) => Ok(p.apply(x)),
        }
    }

    fn jacobian(&self, x: &Point) -> Result<Mat3> {
        let mut m = [[0.0; 3]; 3];
        match &self.layout {
            Layout::Delta { parts } => {
                for i in 0..3 {
                    let d = parts[i].derivative(x[i])?;
                    if i < 2 {
                        m[i][i] = d;
                    }
                    m[2][i] = d;
                }
            }
            Layout::Casimir { terms, slots, .. } => {
                for (i, s) in slots.iter().enumerate() {
                    match s {
                        Some(a) => m[i][a.index()] = 1.0,
                        None => {
                            for t in terms {
                                m[i][t.axis().index()] += t.derivative(x[t.axis().index()])?;
                            }
                        }
                    }
                }
            }
            Layout::Permutation(p) => return p.jacobian(x),
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartExport {
    pub family: String,
    pub forward: Value,
    pub inverse: Value,
    pub mu_hat: String,
    pub target: Mat3,
    pub distinguished: usize,
    pub antiderivatives: Vec<AntiderivativeInfo>,
}

/// `y_i = integral of phi_i/psi_i`; the first step of the delta reduction.
#[derive(Clone, Debug)]
pub struct PerAxisMap {
    parts: [Antiderivative; 3],
}

impl CoordinateMap for PerAxisMap {
    fn forward(&self, x: &Point) -> Result<Point> {
        let [a, b, c] = [0, 1, 2].map(|i| self.parts[i].eval(x[i]));
        Ok([a?, b?, c?])
    }

    fn jacobian(&self, x: &Point) -> Result<Mat3> {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[i][i] = self.parts[i].derivative(x[i])?;
        }
        Ok(m)
    }
}

pub fn step_one_map(s: &DeltaSpec) -> Result<PerAxisMap> {
    s.validate()?;
    Ok(PerAxisMap { parts: delta_parts(s)? })
}

pub fn darboux_delta(s: &DeltaSpec) -> Result<DarbouxChart> {
    s.validate()?;
    let mu = Expr::product([s.eta.clone(), s.phi[0].clone(), s.phi[1].clone(), s.phi[2].clone()]);
    Ok(DarbouxChart {
        layout: Layout::Delta { parts: delta_parts(s)? },
        mu_hat: mu.bind(&s.params).simplify(),
        target: DELTA_TARGET,
        distinguished: 2,
        family: FamilyTag::DeltaVerified,
        domain: s.domain.clone(),
    })
}

/// Casimir first, then the two axes of the slot holding `eta * shape`;
/// with `alternate` the Casimir replaces one shape axis in place and the
/// factor is `eta`.
pub fn darboux_gamma_pair(s: &GammaPairSpec, alternate: bool) -> Result<DarbouxChart> {
    let terms = pair_parts(s)?;
    let entries = s.entries();
    let axis_pos = |a: Axis| terms.iter().position(|t| t.axis() == a).unwrap();
    use Axis::*;
    let (slots, solved, mu, target, distinguished) = if !alternate {
        let (slots, solved_axis, shaped) = match s.zero {
            Entry::U => ([None, Some(X2), Some(X3)], X1, Entry::W),
            Entry::V => ([None, Some(X1), Some(X2)], X3, Entry::U),
            Entry::W => ([None, Some(X3), Some(X1)], X2, Entry::V),
        };
        (slots, axis_pos(solved_axis), entries[shaped.index()].clone(), GAMMA_TARGET, 0)
    } else {
        let (slots, solved_axis, target) = match s.zero {
            Entry::U => ([Some(X1), None, Some(X3)], X2, pair_target(0, 2, -1.0)),
            Entry::V => ([None, Some(X2), Some(X3)], X1, pair_target(1, 2, 1.0)),
            Entry::W => ([Some(X1), Some(X2), None], X3, pair_target(0, 1, 1.0)),
        };
        let distinguished = slots.iter().position(Option::is_none).unwrap();
        (slots, axis_pos(solved_axis), s.eta.clone(), target, distinguished)
    };
    Ok(DarbouxChart {
        layout: Layout::Casimir { terms, slots, solved },
        mu_hat: mu.bind(&s.params).simplify(),
        target,
        distinguished,
        family: FamilyTag::GammaPair(s.zero),
        domain: s.domain.clone(),
    })
}

/// Relabel axes so the nonzero entry sits in slot (2,3); the factor is `eta`.
pub fn darboux_gamma_singleton(s: &GammaSingletonSpec) -> Result<DarbouxChart> {
    s.validate()?;
    use Axis::*;
    let source = match s.nonzero {
        Entry::U => [X3, X1, X2],
        Entry::V => [X2, X3, X1],
        Entry::W => [X1, X2, X3],
    };
    Ok(DarbouxChart {
        layout: Layout::Permutation(Permutation::new(source)),
        mu_hat: s.eta.bind(&s.params).simplify(),
        target: GAMMA_TARGET,
        distinguished: 0,
        family: FamilyTag::GammaSingleton(s.nonzero),
        domain: s.domain.clone(),
    })
}

pub fn darboux(spec: &FamilySpec, alternate: bool) -> Result<DarbouxChart> {
    match spec {
        FamilySpec::Delta(s) => darboux_delta(s),
        FamilySpec::GammaPair(s) => darboux_gamma_pair(s, alternate),
        FamilySpec::GammaSingleton(s) => darboux_gamma_singleton(s),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartReport {
    /// max over samples and entries of `|J'(x)/mu_hat - target|`
    pub max_deviation: f64,
    /// max of `|inverse(forward(x)) - x|` in the max norm
    pub max_round_trip: f64,
    pub sample_count: usize,
    pub failed_samples: usize,
    pub tol: f64,
    pub verdict: Verdict,
}

/// Push `j` through the chart and compare with `mu_hat * target`.
pub fn verify_chart(j: &StructureMatrix, chart: &DarbouxChart, samples: usize) -> ChartReport {
    verify_chart_seeded(j, chart, samples, DEFAULT_SEED)
}

pub fn verify_chart_seeded(
    j: &StructureMatrix,
    chart: &DarbouxChart,
    samples: usize,
    seed: u64,
) -> ChartReport {
    let pushed = transform(j, chart);
    let mut dev: f64 = 0.0;
    let mut trip: f64 = 0.0;
    let mut failed = 0;
    for x in j.domain.quasi_random(samples, seed) {
        let one = || -> Result<(f64, f64)> {
            let m = pushed.matrix_at(&x)?;
            let mu = chart.mu_hat_at_source(&x)?;
            if mu == 0.0 {
                return Err(Error::Vanishing { what: "mu_hat".into(), point: x });
            }
            let mut d: f64 = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    d = d.max((m[a][b] / mu - chart.target[a][b]).abs());
                }
            }
            let back = chart.inverse(&chart.forward(&x)?)?;
            let r = (0..3).fold(0.0f64, |acc, i| acc.max((back[i] - x[i]).abs()));
            Ok((d, r))
        };
        match one() {
            Ok((d, r)) => {
                dev = dev.max(d);
                trip = trip.max(r);
            }
            Err(_) => failed += 1,
        }
    }
    ChartReport {
        max_deviation: dev,
        max_round_trip: trip,
        sample_count: samples,
        failed_samples: failed,
        tol: CHART_TOL,
        verdict: Verdict::from_bool(
            failed == 0 && samples > 0 && dev <= CHART_TOL && trip <= CHART_TOL,
        ),
    }
}

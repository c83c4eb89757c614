use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::integrate::Status;
use super::ScalarField;
use crate::expr::Point;

/// Sampled solution. `tau` and `chart_states` are filled by reparametrized
/// runs only.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Point>,
    pub h: Vec<f64>,
    pub c: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
    pub chart_states: Option<Vec<Point>>,
    pub status: Status,
    /// Set when the structure depends on time.
    pub experimental: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedDrift {
    pub h: f64,
    pub c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub name: String,
    pub initial: f64,
    pub max_abs_drift: f64,
    /// `max_abs_drift / (1 + |initial|)`
    pub max_rel_drift: f64,
    pub failed_samples: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub drifts: Vec<Drift>,
}

impl DriftReport {
    pub fn get(&self, name: &str) -> Option<&Drift> {
        self.drifts.iter().find(|d| d.name == name)
    }
}

fn max_drift(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else { return 0.0 };
    values.iter().fold(0.0f64, |m, v| m.max((v - first).abs()))
}

impl Trajectory {
    pub(crate) fn new(with_c: bool, reparam: bool) -> Trajectory {
        Trajectory {
            t: Vec::new(),
            x: Vec::new(),
            h: Vec::new(),
            c: with_c.then(Vec::new),
            tau: reparam.then(Vec::new),
            chart_states: reparam.then(Vec::new),
            status: Status::Completed,
            experimental: false,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: Point, h: f64, c: Option<f64>, chart: Option<(f64, Point)>) {
        self.t.push(t);
        self.x.push(x);
        self.h.push(h);
        if let (Some(col), Some(c)) = (self.c.as_mut(), c) {
            col.push(c);
        }
        if let Some((tau, z)) = chart {
            self.tau.get_or_insert_with(Vec::new).push(tau);
            self.chart_states.get_or_insert_with(Vec::new).push(z);
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Max absolute change of the recorded `H` and `C` columns.
    pub fn drift(&self) -> ConservedDrift {
        ConservedDrift { h: max_drift(&self.h), c: self.c.as_deref().map(max_drift) }
    }

    /// Drift of the recorded `H` and `C` columns in report form.
    pub fn column_drift(&self) -> DriftReport {
        let one = |name: &str, col: &[f64]| {
            let initial = col.first().copied().unwrap_or(f64::NAN);
            let max_abs_drift = max_drift(col);
            Drift {
                name: name.into(),
                initial,
                max_abs_drift,
                max_rel_drift: max_abs_drift / (1.0 + initial.abs()),
                failed_samples: 0,
            }
        };
        let mut drifts = vec![one("H", &self.h)];
        if let Some(c) = &self.c {
            drifts.push(one("C", c));
        }
        DriftReport { drifts }
    }

    /// Rows `0, stride, 2*stride, ...` plus the final row.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> io::Result<()> {
        let stride = stride.max(1);
        let reparam = self.tau.is_some();
        writeln!(out, "t,x1,x2,x3,H,C{}", if reparam { ",tau" } else { "" })?;
        let n = self.len();
        for k in (0..n).filter(|k| k % stride == 0 || *k + 1 == n) {
            let [x1, x2, x3] = self.x[k];
            write!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},", self.t[k], x1, x2, x3, self.h[k])?;
            if let Some(c) = &self.c {
                write!(out, "{:.16e}", c[k])?;
            }
            if let Some(tau) = &self.tau {
                write!(out, ",{:.16e}", tau[k])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Drift of each named function along the trajectory. Samples where a
/// function fails to evaluate are counted, not fatal.
pub fn monitor(traj: &Trajectory, fns: &[(&str, &dyn ScalarField)]) -> DriftReport {
    let drifts = fns
        .iter()
        .map(|(name, f)| {
            let mut failed = 0;
            let values: Vec<f64> = traj
                .x
                .iter()
                .filter_map(|x| match f.value(x) {
                    Ok(v) => Some(v),
                    Err(_) => {
                        failed += 1;
                        None
                    }
                })
                .collect();
            let initial = values.first().copied().unwrap_or(f64::NAN);
            let max_abs_drift = max_drift(&values);
            Drift {
                name: name.to_string(),
                initial,
                max_abs_drift,
                max_rel_drift: max_abs_drift / (1.0 + initial.abs()),
                failed_samples: failed,
            }
        })
        .collect();
    DriftReport { drifts }
}

//! Poisson vector fields `J grad H`, their integration in original and
//! Darboux coordinates, and conservation monitoring.

mod integrate;
mod trajectory;

pub use integrate::{
    integrate, integrate_reparam, integrate_to_times, rk4_step, Status, StepControl,
    DEFAULT_STEP,
};
pub use trajectory::{monitor, ConservedDrift, Drift, DriftReport, Trajectory};

use crate::error::Result;
use crate::expr::{Axis, Domain, Expr, Params, Point};
use crate::reduction::CasimirFn;
use crate::structure::StructureMatrix;

/// Parameter that, when present, makes the structure depend on time.
pub const TIME_PARAM: &str = "t";

/// A scalar function sampled along trajectories.
pub trait ScalarField: Sync {
    fn value(&self, x: &Point) -> Result<f64>;
}

impl ScalarField for Expr {
    fn value(&self, x: &Point) -> Result<f64> {
        Ok(self.eval_at(x)?)
    }
}

impl ScalarField for CasimirFn {
    fn value(&self, x: &Point) -> Result<f64> {
        self.eval(x)
    }
}

impl<F: Fn(&Point) -> Result<f64> + Sync> ScalarField for F {
    fn value(&self, x: &Point) -> Result<f64> {
        self(x)
    }
}

#[derive(Clone, Debug)]
pub struct PoissonSystem {
    pub structure: StructureMatrix,
    pub hamiltonian: Expr,
    // entries and gradient with every parameter except time bound
    uvw: [Expr; 3],
    h: Expr,
    grad_h: [Expr; 3],
    time_dependent: bool,
}

impl PoissonSystem {
    pub fn new(structure: StructureMatrix, hamiltonian: Expr) -> PoissonSystem {
        let keep = [TIME_PARAM];
        let bind = |e: &Expr| e.bind_except(&structure.params, &keep).simplify();
        let uvw = structure.entries().map(bind);
        let h = bind(&hamiltonian);
        let grad_h = Axis::ALL.map(|a| h.diff(a));
        let time_dependent = uvw
            .iter()
            .chain(std::iter::once(&h))
            .any(|e| e.param_names().iter().any(|n| n == TIME_PARAM));
        PoissonSystem { structure, hamiltonian, uvw, h, grad_h, time_dependent }
    }

    pub fn domain(&self) -> &Domain {
        &self.structure.domain
    }

    /// True when the structure or Hamiltonian depends on the time parameter.
    /// Integration of such systems is experimental.
    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    fn time(t: f64) -> Params {
        [(TIME_PARAM.to_string(), t)].into()
    }

    pub fn energy(&self, x: &Point) -> Result<f64> {
        self.energy_at(0.0, x)
    }

    pub fn energy_at(&self, t: f64, x: &Point) -> Result<f64> {
        Ok(self.h.eval(x, &Self::time(t))?)
    }

    pub fn grad_energy_at(&self, t: f64, x: &Point) -> Result<[f64; 3]> {
        let p = Self::time(t);
        let mut g = [0.0; 3];
        for (gi, e) in g.iter_mut().zip(&self.grad_h) {
            *gi = e.eval(x, &p)?;
        }
        Ok(g)
    }

    /// `(u H2 - v H3, -u H1 + w H3, v H1 - w H2)` at time `t`.
    pub fn vector_field_at(&self, t: f64, x: &Point) -> Result<Point> {
        let p = Self::time(t);
        let [u, v, w] = [0, 1, 2].map(|i| self.uvw[i].eval(x, &p));
        let (u, v, w) = (u?, v?, w?);
        let [h1, h2, h3] = self.grad_energy_at(t, x)?;
        Ok([u * h2 - v * h3, -u * h1 + w * h3, v * h1 - w * h2])
    }

    pub fn vector_field(&self, x: &Point) -> Result<Point> {
        self.vector_field_at(0.0, x)
    }
}

use std::sync::Arc;

use super::{Mat3, StructureMatrix};
use crate::error::{Error, Result};
use crate::expr::{Axis, Expr, Params, Point};

/// A smooth change of coordinates `y = f(x)` with its Jacobian `dy_i/dx_k`.
pub trait CoordinateMap: Send + Sync {
    fn forward(&self, x: &Point) -> Result<Point>;
    fn jacobian(&self, x: &Point) -> Result<Mat3>;
}

impl<M: CoordinateMap + ?Sized> CoordinateMap for &M {
    fn forward(&self, x: &Point) -> Result<Point> {
        (**self).forward(x)
    }
    fn jacobian(&self, x: &Point) -> Result<Mat3> {
        (**self).jacobian(x)
    }
}

impl<M: CoordinateMap + ?Sized> CoordinateMap for Arc<M> {
    fn forward(&self, x: &Point) -> Result<Point> {
        (**self).forward(x)
    }
    fn jacobian(&self, x: &Point) -> Result<Mat3> {
        (**self).jacobian(x)
    }
}

impl<M: CoordinateMap + ?Sized> CoordinateMap for Box<M> {
    fn forward(&self, x: &Point) -> Result<Point> {
        (**self).forward(x)
    }
    fn jacobian(&self, x: &Point) -> Result<Mat3> {
        (**self).jacobian(x)
    }
}

/// Map given by three expressions, differentiated symbolically once.
#[derive(Clone, Debug)]
pub struct ExprMap {
    comps: [Expr; 3],
    jac: [[Expr; 3]; 3],
}

impl ExprMap {
    pub fn new(comps: [Expr; 3], params: &Params) -> ExprMap {
        let comps = comps.map(|c| c.bind(params).simplify());
        let jac = [0, 1, 2].map(|i| Axis::ALL.map(|a| comps[i].diff(a)));
        ExprMap { comps, jac }
    }

    pub fn parse(comps: [&str; 3]) -> Result<ExprMap> {
        let [a, b, c] = comps;
        Ok(ExprMap::new([a.parse()?, b.parse()?, c.parse()?], &Params::new()))
    }

    pub fn identity() -> ExprMap {
        ExprMap::new(Axis::ALL.map(Expr::var), &Params::new())
    }

    pub fn components(&self) -> &[Expr; 3] {
        &self.comps
    }
}

impl CoordinateMap for ExprMap {
    fn forward(&self, x: &Point) -> Result<Point> {
        let mut y = [0.0; 3];
        for (yi, c) in y.iter_mut().zip(&self.comps) {
            *yi = c.eval_at(x)?;
        }
        Ok(y)
    }

    fn jacobian(&self, x: &Point) -> Result<Mat3> {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                m[i][k] = self.jac[i][k].eval_at(x)?;
            }
        }
        Ok(m)
    }
}

/// Relabelling of axes: `y_i = x_{source[i]}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Permutation {
    pub source: [Axis; 3],
}

impl Permutation {
    pub fn new(source: [Axis; 3]) -> Permutation {
        Permutation { source }
    }

    pub fn apply(&self, x: &Point) -> Point {
        self.source.map(|a| x[a.index()])
    }

    pub fn invert(&self, y: &Point) -> Point {
        let mut x = [0.0; 3];
        for (i, a) in self.source.iter().enumerate() {
            x[a.index()] = y[i];
        }
        x
    }
}

impl CoordinateMap for Permutation {
    fn forward(&self, x: &Point) -> Result<Point> {
        Ok(self.apply(x))
    }

    fn jacobian(&self, _x: &Point) -> Result<Mat3> {
        let mut m = [[0.0; 3]; 3];
        for (i, a) in self.source.iter().enumerate() {
            m[i][a.index()] = 1.0;
        }
        Ok(m)
    }
}

/// `second` after `first`.
#[derive(Clone, Debug)]
pub struct Compose<F, G> {
    pub first: F,
    pub second: G,
}

impl<F: CoordinateMap, G: CoordinateMap> CoordinateMap for Compose<F, G> {
    fn forward(&self, x: &Point) -> Result<Point> {
        self.second.forward(&self.first.forward(x)?)
    }

    fn jacobian(&self, x: &Point) -> Result<Mat3> {
        let a = self.first.jacobian(x)?;
        let b = self.second.jacobian(&self.first.forward(x)?)?;
        Ok(matmul(&b, &a))
    }
}

pub(crate) fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub(crate) fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Congruence `D J D^T`, with the lower triangle copied from the upper one so
/// the result is exactly skew.
pub(crate) fn congruence(d: &Mat3, j: &Mat3) -> Mat3 {
    let entry = |a: usize, b: usize| -> f64 {
        let mut s = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                s += d[a][k] * j[k][l] * d[b][l];
            }
        }
        s
    };
    let (p, q, r) = (entry(0, 1), entry(0, 2), entry(1, 2));
    [[0.0, p, q], [-p, 0.0, r], [-q, -r, 0.0]]
}

/// A structure matrix field sampled through the original coordinates `x`.
pub trait StructureField {
    /// Matrix in this field's own coordinates at the point with original
    /// coordinates `x`.
    fn matrix_at(&self, x: &Point) -> Result<Mat3>;
    /// This field's own coordinates of the point `x`.
    fn position(&self, x: &Point) -> Result<Point>;
}

impl StructureField for StructureMatrix {
    fn matrix_at(&self, x: &Point) -> Result<Mat3> {
        StructureMatrix::matrix_at(self, x)
    }

    fn position(&self, x: &Point) -> Result<Point> {
        Ok(*x)
    }
}

impl<S: StructureField + ?Sized> StructureField for &S {
    fn matrix_at(&self, x: &Point) -> Result<Mat3> {
        (**self).matrix_at(x)
    }
    fn position(&self, x: &Point) -> Result<Point> {
        (**self).position(x)
    }
}

#[derive(Clone, Debug)]
pub struct Transformed<S, M> {
    pub inner: S,
    pub map: M,
}

impl<S: StructureField, M: CoordinateMap> StructureField for Transformed<S, M> {
    fn matrix_at(&self, x: &Point) -> Result<Mat3> {
        let here = self.inner.position(x)?;
        let d = self.map.jacobian(&here)?;
        let scale = d.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if det(&d).abs() <= 1e-14 * scale.powi(3) || scale == 0.0 {
            return Err(Error::SingularJacobian(here));
        }
        Ok(congruence(&d, &self.inner.matrix_at(x)?))
    }

    fn position(&self, x: &Point) -> Result<Point> {
        self.map.forward(&self.inner.position(x)?)
    }
}

/// Push `j` forward through `map` by the tensor rule.
pub fn transform<S: StructureField, M: CoordinateMap>(j: S, map: M) -> Transformed<S, M> {
    Transformed { inner: j, map }
}

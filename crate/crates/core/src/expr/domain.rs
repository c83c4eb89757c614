use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Axis, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("axis {axis}: lower bound {lo} must be below upper bound {hi}")]
    EmptyInterval { axis: usize, lo: f64, hi: f64 },
    #[error("axis {axis}: bounds must be finite")]
    NonFinite { axis: usize },
}

/// Axis-aligned open box `(lo_i, hi_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 3]", into = "[[f64; 2]; 3]")]
pub struct Domain {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Domain {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Domain, DomainError> {
        for i in 0..3 {
            if !lo[i].is_finite() || !hi[i].is_finite() {
                return Err(DomainError::NonFinite { axis: i + 1 });
            }
            if lo[i] >= hi[i] {
                return Err(DomainError::EmptyInterval {
                    axis: i + 1,
                    lo: lo[i],
                    hi: hi[i],
                });
            }
        }
        Ok(Domain { lo, hi })
    }

    /// The same interval on all three axes.
    pub fn cube(lo: f64, hi: f64) -> Result<Domain, DomainError> {
        Domain::new([lo; 3], [hi; 3])
    }

    pub fn lo(&self) -> [f64; 3] {
        self.lo
    }

    pub fn hi(&self) -> [f64; 3] {
        self.hi
    }

    pub fn interval(&self, axis: Axis) -> (f64, f64) {
        (self.lo[axis.index()], self.hi[axis.index()])
    }

    pub fn center(&self) -> Point {
        [0, 1, 2].map(|i| 0.5 * (self.lo[i] + self.hi[i]))
    }

    /// Strict interior membership.
    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|i| p[i] > self.lo[i] && p[i] < self.hi[i])
    }

    /// Map a point of the open unit cube into the box.
    pub fn from_unit(&self, u: [f64; 3]) -> Point {
        [0, 1, 2].map(|i| self.lo[i] + (self.hi[i] - self.lo[i]) * u[i])
    }

    /// `n` low-discrepancy interior points, reproducible for a given seed.
    pub fn quasi_random(&self, n: usize, seed: u64) -> Vec<Point> {
        Sampler::new(seed).unit_points(n).into_iter().map(|u| self.from_unit(u)).collect()
    }
}

impl TryFrom<[[f64; 2]; 3]> for Domain {
    type Error = DomainError;

    fn try_from(b: [[f64; 2]; 3]) -> Result<Domain, DomainError> {
        Domain::new([b[0][0], b[1][0], b[2][0]], [b[0][1], b[1][1], b[2][1]])
    }
}

impl From<Domain> for [[f64; 2]; 3] {
    fn from(d: Domain) -> Self {
        [0, 1, 2].map(|i| [d.lo[i], d.hi[i]])
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton points in bases 2, 3, 5 with a seeded random shift (modulo 1).
#[derive(Clone, Debug)]
pub struct Sampler {
    seed: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { seed }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn unit_points(&self, n: usize) -> Vec<[f64; 3]> {
        let mut rng = self.rng();
        let shift: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let bases = [2u64, 3, 5];
        (0..n)
            .map(|k| {
                [0, 1, 2].map(|i| {
                    let u = (radical_inverse(k as u64 + 1, bases[i]) + shift[i]).fract();
                    // keep strictly inside the open cube
                    u.clamp(1e-9, 1.0 - 1e-9)
                })
            })
            .collect()
    }
}

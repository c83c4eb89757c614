use serde::{Deserialize, Serialize};

use super::trajectory::Trajectory;
use super::{PoissonSystem, ScalarField};
use crate::error::{Error, Result};
use crate::expr::Point;
use crate::reduction::DarbouxChart;
use crate::structure::{CoordinateMap, Mat3};

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepControl {
    Fixed { h: f64 },
    /// Step doubling with local error per unit state below `tol`.
    Adaptive { tol: f64, h_init: f64 },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Fixed { h: DEFAULT_STEP }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    /// The state left the domain; the trajectory stops at the last interior
    /// state.
    BoundaryExit,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

fn rk4<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N]> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// One classical Runge-Kutta step of the system.
pub fn rk4_step(sys: &PoissonSystem, t: f64, x: &Point, h: f64) -> Result<Point> {
    rk4(&|t, x| sys.vector_field_at(t, x), t, x, h)
}

fn finite<const N: usize>(y: &[f64; N]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration("non-finite state".into()))
    }
}

fn is_boundary(e: &Error) -> bool {
    matches!(e, Error::OutsideDomain(_) | Error::InverseFailed { .. })
}

/// Drive `f` from `t0` to `t1`, calling `accept` after every step. Returns
/// the final status; `inside` decides whether a state is admissible.
fn drive<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    inside: &dyn Fn(&[f64; N]) -> bool,
    y0: [f64; N],
    (t0, t1): (f64, f64),
    control: StepControl,
    accept: &mut dyn FnMut(f64, &[f64; N]) -> Result<()>,
) -> Result<Status> {
    let span = t1 - t0;
    if !(span.is_finite() && span >= 0.0) {
        return Err(Error::Invalid(format!("bad time span ({t0}, {t1})")));
    }
    let mut y = y0;
    let step = |t: f64, y: &[f64; N], h: f64| -> Result<Option<[f64; N]>> {
        match rk4(f, t, y, h) {
            Ok(next) => {
                finite(&next)?;
                Ok(inside(&next).then_some(next))
            }
            Err(e) if is_boundary(&e) => Ok(None),
            Err(e) => Err(e),
        }
    };
    match control {
        StepControl::Fixed { h } => {
            if !(h > 0.0) {
                return Err(Error::Invalid("step must be positive".into()));
            }
            let n = ((span / h) - 1e-9).ceil().max(0.0) as u64;
            let mut t = t0;
            for k in 1..=n {
                let next_t = if k == n { t1 } else { t0 + k as f64 * h };
                match step(t, &y, next_t - t)? {
                    Some(next) => y = next,
                    None => return Ok(Status::BoundaryExit),
                }
                t = next_t;
                accept(t, &y)?;
            }
        }
        StepControl::Adaptive { tol, h_init } => {
            let mut t = t0;
            let mut h = h_init.min(span);
            while t < t1 {
                h = h.min(t1 - t);
                if h <= 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::Integration(format!("step size underflow at t = {t}")));
                }
                let coarse = step(t, &y, h)?;
                let half = step(t, &y, 0.5 * h)?;
                let fine = match half {
                    Some(mid) => step(t + 0.5 * h, &mid, 0.5 * h)?,
                    None => None,
                };
                let (Some(coarse), Some(fine)) = (coarse, fine) else {
                    // retry smaller before declaring an exit
                    if h > 1e-6 * span.max(1e-12) {
                        h *= 0.25;
                        continue;
                    }
                    return Ok(Status::BoundaryExit);
                };
                let scale = 1.0 + fine.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let err = (0..N).fold(0.0f64, |m, i| m.max((fine[i] - coarse[i]).abs())) / 15.0;
                if err <= tol * scale {
                    let extrapolated: [f64; N] =
                        std::array::from_fn(|i| fine[i] + (fine[i] - coarse[i]) / 15.0);
                    y = if inside(&extrapolated) { extrapolated } else { fine };
                    t = if t1 - (t + h) <= 1e-14 * (1.0 + t1.abs()) { t1 } else { t + h };
                    accept(t, &y)?;
                }
                let factor = if err == 0.0 { 4.0 } else { 0.9 * (tol * scale / err).powf(0.2) };
                h *= factor.clamp(0.1, 4.0);
            }
        }
    }
    Ok(Status::Completed)
}

/// Integrate `dx/dt = J grad H` from `x0` over `t_span`, recording `H` and
/// the optional invariant `c` after every accepted step.
pub fn integrate(
    sys: &PoissonSystem,
    x0: &Point,
    t_span: (f64, f64),
    control: StepControl,
    c: Option<&dyn ScalarField>,
) -> Result<Trajectory> {
    let domain = sys.domain();
    if !domain.contains(x0) {
        return Err(Error::OutsideDomain(*x0));
    }
    let field = |t: f64, x: &Point| -> Result<Point> {
        if !domain.contains(x) {
            return Err(Error::OutsideDomain(*x));
        }
        sys.vector_field_at(t, x)
    };
    let mut traj = Trajectory::new(c.is_some(), false);
    let mut record = |t: f64, x: &Point| -> Result<()> {
        let cv = c.map(|c| c.value(x)).transpose()?;
        traj.push(t, *x, sys.energy_at(t, x)?, cv, None);
        Ok(())
    };
    record(t_span.0, x0)?;
    let status = drive(&field, &|x| domain.contains(x), *x0, t_span, control, &mut record)?;
    traj.status = status;
    traj.experimental = sys.is_time_dependent();
    Ok(traj)
}

/// States at each of `times` (increasing, not before `t0`), stepping with
/// `h` and shortening the last step before every output time.
pub fn integrate_to_times(
    sys: &PoissonSystem,
    x0: &Point,
    t0: f64,
    times: &[f64],
    h: f64,
) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(times.len());
    let (mut t, mut x) = (t0, *x0);
    for &target in times {
        if target < t {
            return Err(Error::Invalid("output times must be increasing".into()));
        }
        let mut last = None;
        let status = drive(
            &|t, x: &Point| {
                if !sys.domain().contains(x) {
                    return Err(Error::OutsideDomain(*x));
                }
                sys.vector_field_at(t, x)
            },
            &|x| sys.domain().contains(x),
            x,
            (t, target),
            StepControl::Fixed { h },
            &mut |_, y| {
                last = Some(*y);
                Ok(())
            },
        )?;
        if status == Status::BoundaryExit {
            return Err(Error::Integration(format!("left the domain before t = {target}")));
        }
        x = last.unwrap_or(x);
        t = target;
        out.push(x);
    }
    Ok(out)
}

/// Solve `m^T g = b` by Cramer's rule.
fn solve_transposed(m: &Mat3, b: &[f64; 3], at: &Point) -> Result<[f64; 3]> {
    let t = [0, 1, 2].map(|i| [m[0][i], m[1][i], m[2][i]]);
    let det = crate::structure::det(&t);
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularJacobian(*at));
    }
    let mut g = [0.0; 3];
    for (k, gk) in g.iter_mut().enumerate() {
        let mut c = t;
        for r in 0..3 {
            c[r][k] = b[r];
        }
        *gk = crate::structure::det(&c) / det;
    }
    Ok(g)
}

/// Integrate the canonical system `dz/dtau = target * grad_z H` together with
/// `dt/dtau = 1 / mu_hat`, starting from chart coordinates `z0`.
pub fn integrate_reparam(
    sys: &PoissonSystem,
    chart: &DarbouxChart,
    z0: &Point,
    tau_span: (f64, f64),
    control: StepControl,
    c: Option<&dyn ScalarField>,
) -> Result<Trajectory> {
    if sys.is_time_dependent() {
        return Err(Error::Invalid(
            "reparametrized integration needs a time-independent structure".into(),
        ));
    }
    let domain = sys.domain();
    let x0 = chart.inverse(z0)?;
    if !domain.contains(&x0) {
        return Err(Error::OutsideDomain(x0));
    }
    let mu0 = chart.mu_hat_at_source(&x0)?;
    if mu0 == 0.0 {
        return Err(Error::Vanishing { what: "mu_hat".into(), point: x0 });
    }
    let field = |_tau: f64, s: &[f64; 4]| -> Result<[f64; 4]> {
        let z = [s[0], s[1], s[2]];
        let x = chart.inverse(&z)?;
        if !domain.contains(&x) {
            return Err(Error::OutsideDomain(x));
        }
        let d = chart.jacobian(&x)?;
        let g = solve_transposed(&d, &sys.grad_energy_at(s[3], &x)?, &x)?;
        let m = &chart.target;
        let mu = chart.mu_hat_at_source(&x)?;
        if mu == 0.0 || mu.signum() != mu0.signum() {
            return Err(Error::Integration(format!("mu_hat changed sign near {x:?}")));
        }
        let dz: [f64; 3] = std::array::from_fn(|i| m[i][0] * g[0] + m[i][1] * g[1] + m[i][2] * g[2]);
        Ok([dz[0], dz[1], dz[2], 1.0 / mu])
    };
    let inside = |s: &[f64; 4]| {
        chart
            .inverse(&[s[0], s[1], s[2]])
            .map(|x| domain.contains(&x))
            .unwrap_or(false)
    };
    let mut traj = Trajectory::new(c.is_some(), true);
    let mut record = |tau: f64, s: &[f64; 4]| -> Result<()> {
        let z = [s[0], s[1], s[2]];
        let x = chart.inverse(&z)?;
        let cv = c.map(|c| c.value(&x)).transpose()?;
        traj.push(s[3], x, sys.energy(&x)?, cv, Some((tau, z)));
        Ok(())
    };
    let s0 = [z0[0], z0[1], z0[2], 0.0];
    record(tau_span.0, &s0)?;
    let status = drive(&field, &inside, s0, tau_span, control, &mut record)?;
    traj.status = status;
    Ok(traj)
}

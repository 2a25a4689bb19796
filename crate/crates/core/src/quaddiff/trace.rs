//! Adaptive RK4 integration of the line field `Q(w) dw² > 0`.
//!
//! The field only defines a direction up to sign, `dw ∝ ±(Q̄/|Q|)^{1/2}`;
//! every stage picks the sign closest to the previous tangent.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_gamma, q_eval, q_zeros};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Why a trajectory stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxLength,
    NearSingularity,
    Closed,
    StepUnderflow,
}

/// A traced trajectory, parametrized by arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Complex64>,
    pub length: f64,
    pub stop: StopReason,
    /// The zero or pole approached when `stop` is `NearSingularity`.
    pub endpoint: Option<Point>,
}

/// Beyond this modulus the walk is treated as having reached ∞.
const FAR: f64 = 1e6;
const LOCAL_TOL: f64 = 1e-12;
const MIN_STEP: f64 = 1e-13;

/// Unit direction of the line field, up to sign.
pub(crate) fn line_direction(q: Complex64) -> Option<Complex64> {
    let n = q.norm();
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some((q.conj() / n).sqrt())
}

fn aligned(d: Complex64, reference: Complex64) -> Complex64 {
    if (d * reference.conj()).re < 0.0 {
        -d
    } else {
        d
    }
}

pub(crate) struct Tracer<'a> {
    pub field: &'a dyn Fn(Complex64) -> Result<Complex64>,
    pub singular: &'a [Complex64],
    pub step: f64,
    pub max_length: f64,
}

impl Tracer<'_> {
    fn dir_at(&self, w: Complex64, reference: Complex64) -> Result<Complex64> {
        let q = (self.field)(w)?;
        let d = line_direction(q)
            .ok_or_else(|| Error::Numeric(format!("line field vanishes at {w}")))?;
        Ok(aligned(d, reference))
    }

    fn rk4(&self, w: Complex64, h: f64, t: Complex64) -> Result<Complex64> {
        let k1 = self.dir_at(w, t)?;
        let k2 = self.dir_at(w + k1 * (0.5 * h), k1)?;
        let k3 = self.dir_at(w + k2 * (0.5 * h), k1)?;
        let k4 = self.dir_at(w + k3 * h, k1)?;
        Ok(w + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
    }

    fn attempt(&self, w: Complex64, h: f64, t: Complex64) -> Result<(Complex64, f64)> {
        let full = self.rk4(w, h, t)?;
        let mid = self.rk4(w, 0.5 * h, t)?;
        let t_mid = self.dir_at(mid, t)?;
        let half = self.rk4(mid, 0.5 * h, t_mid)?;
        let err = (full - half).norm();
        Ok((half + (half - full) / 15.0, err))
    }

    /// Integrates from `start` with initial tangent close to `t0`. When
    /// `origin` is given the trace leaves that singular point, which is then
    /// ignored for the first few steps and closure is not tested.
    pub fn run(
        &self,
        start: Complex64,
        t0: Complex64,
        origin: Option<Complex64>,
    ) -> Result<Trajectory> {
        let mut t = self.dir_at(start, t0)?;
        let t_start = t;
        let mut points = vec![start];
        let mut w = start;
        let mut length = 0.0;
        let mut h = self.step;
        let finish =
            |points: Vec<Complex64>, length: f64, stop: StopReason, endpoint: Option<Point>| {
                Ok(Trajectory {
                    points,
                    length,
                    stop,
                    endpoint,
                })
            };
        loop {
            if length >= self.max_length {
                return finish(points, length, StopReason::MaxLength, None);
            }
            let h_try = h.min(self.max_length - length);
            let scale = w.norm().max(1.0);
            let accepted = match self.attempt(w, h_try, t) {
                Ok((next, err)) if err <= LOCAL_TOL * scale => Some((next, err)),
                _ => None,
            };
            let Some((next, err)) = accepted else {
                h *= 0.5;
                if h < MIN_STEP * scale {
                    return finish(points, length, StopReason::StepUnderflow, None);
                }
                continue;
            };
            w = next;
            length += h_try;
            points.push(w);
            if err < LOCAL_TOL * scale / 64.0 {
                h = (2.0 * h).min(self.step);
            }

            if w.norm() > FAR {
                return finish(
                    points,
                    length,
                    StopReason::NearSingularity,
                    Some(Point::Infinity),
                );
            }
            let leaving = |s: Complex64| origin == Some(s) && length < 4.0 * self.step;
            if let Some(&s) = self
                .singular
                .iter()
                .find(|&&s| (w - s).norm() < self.step && !leaving(s))
            {
                return finish(
                    points,
                    length,
                    StopReason::NearSingularity,
                    Some(Point::Finite(s)),
                );
            }
            t = match self.dir_at(w, t) {
                Ok(d) => d,
                Err(_) => return finish(points, length, StopReason::StepUnderflow, None),
            };
            if origin.is_none()
                && length > 4.0 * self.step
                && (w - start).norm() < self.step
                && (t * t_start.conj()).re > 0.0
            {
                points.push(start);
                length += (w - start).norm();
                return finish(points, length, StopReason::Closed, None);
            }
        }
    }
}

/// Traces the trajectory of `Q(w) dw² > 0` through a regular point `start`.
///
/// Stops after `max_length`, within `step` of a zero or pole, on returning
/// within `step` of `start` with the same direction, or on step underflow.
pub fn trace_trajectory(
    start: Complex64,
    gamma: f64,
    step: f64,
    max_length: f64,
) -> Result<Trajectory> {
    check_gamma(gamma)?;
    if !(step > 0.0 && max_length > 0.0) {
        return Err(Error::Domain("step and max_length must be positive".into()));
    }
    let q = q_eval(start, gamma)?;
    let t0 = line_direction(q).ok_or_else(|| Error::Domain(format!("{start} is a zero of Q")))?;
    let mut singular: Vec<Complex64> = q_zeros(gamma)?.to_vec();
    singular.extend([
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ]);
    if singular.iter().any(|&s| (start - s).norm() < 1e-9) {
        return Err(Error::Domain(format!("{start} is not a regular point")));
    }
    let field = |w: Complex64| q_eval(w, gamma);
    Tracer {
        field: &field,
        singular: &singular,
        step,
        max_length,
    }
    .run(start, t0, None)
}

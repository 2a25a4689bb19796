//! Critical graph, circular domains and the Monte Carlo check of the
//! extremal value.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trace::{line_direction, StopReason, Tracer};
use super::{check_gamma, distinct_zeros, q_derivative_at_zero, q_eval};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::wos::{
    estimate_inner_radius, winding_number, Loop, McEstimate, PolylineDomain, WosParams,
};

/// Distance from a zero at which a critical trajectory is started along its prong.
const PRONG_OFFSET: f64 = 1e-6;
const EDGE_MAX_LENGTH: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroInfo {
    pub point: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleInfo {
    pub point: Point,
    pub order: usize,
}

/// Boundary of the circular domain of one pole. The domain at ∞ is stored in
/// the coordinate `ζ = 1/w`, where it is the bounded face around `ζ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularBoundary {
    pub pole: Point,
    pub inverted: bool,
    /// Closed, counterclockwise polyline.
    pub boundary: Loop,
}

impl CircularBoundary {
    /// The marked point in the coordinates of `boundary`.
    pub fn center(&self) -> Complex64 {
        match self.pole {
            Point::Finite(z) => z,
            Point::Infinity => Complex64::new(0.0, 0.0),
        }
    }

    /// The boundary in the `w` plane.
    pub fn boundary_w(&self) -> Loop {
        if self.inverted {
            self.boundary.iter().map(|z| z.inv()).collect()
        } else {
            self.boundary.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryField {
    pub gamma: f64,
    pub zeros: Vec<ZeroInfo>,
    pub poles: Vec<PoleInfo>,
    /// Critical trajectories, each running from one zero to another.
    pub trajectories: Vec<Vec<Complex64>>,
    pub circular_boundaries: Vec<CircularBoundary>,
}

impl TrajectoryField {
    pub fn poles_of_q() -> Vec<PoleInfo> {
        let f = |re: f64| Point::Finite(Complex64::new(re, 0.0));
        vec![
            PoleInfo {
                point: f(0.0),
                order: 2,
            },
            PoleInfo {
                point: f(1.0),
                order: 2,
            },
            PoleInfo {
                point: f(-1.0),
                order: 2,
            },
            PoleInfo {
                point: Point::Infinity,
                order: 2,
            },
        ]
    }

    pub fn boundary(&self, pole: Point) -> Option<&CircularBoundary> {
        self.circular_boundaries.iter().find(|b| b.pole == pole)
    }
}

struct Edge {
    from: usize,
    to: usize,
    points: Vec<Complex64>,
}

fn signed_area(lp: &[Complex64]) -> f64 {
    0.5 * lp
        .windows(2)
        .map(|w| w[0].re * w[1].im - w[1].re * w[0].im)
        .sum::<f64>()
}

fn point_at_half_length(points: &[Complex64]) -> Complex64 {
    let total: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let mut acc = 0.0;
    for w in points.windows(2) {
        let d = (w[1] - w[0]).norm();
        if acc + d >= 0.5 * total && d > 0.0 {
            return w[0] + (w[1] - w[0]) * ((0.5 * total - acc) / d);
        }
        acc += d;
    }
    points[points.len() / 2]
}

fn polyline_distance(z: Complex64, points: &[Complex64]) -> f64 {
    points
        .windows(2)
        .map(|w| (z - crate::wos::closest_on_segment(z, w[0], w[1])).norm())
        .fold(f64::INFINITY, f64::min)
}

// distance from p to the smooth curve through the vertices of `lp`,
// using the circle through the three vertices nearest p
fn curve_distance(p: Complex64, lp: &[Complex64]) -> f64 {
    let n = lp.len() - 1;
    let (j, _) = lp[..n]
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (p - v).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let (a, b, cc) = (lp[(j + n - 1) % n], lp[j], lp[(j + 1) % n]);
    let d = 2.0 * (a.re * (b.im - cc.im) + b.re * (cc.im - a.im) + cc.re * (a.im - b.im));
    let seg = polyline_distance(p, &[a, b, cc]);
    if d.abs() < 1e-14 {
        return seg;
    }
    let ux = (a.norm_sqr() * (b.im - cc.im)
        + b.norm_sqr() * (cc.im - a.im)
        + cc.norm_sqr() * (a.im - b.im))
        / d;
    let uy = (a.norm_sqr() * (cc.re - b.re)
        + b.norm_sqr() * (a.re - cc.re)
        + cc.norm_sqr() * (b.re - a.re))
        / d;
    let center = Complex64::new(ux, uy);
    ((p - center).norm() - (a - center).norm()).abs().min(seg)
}

/// Symmetric Hausdorff distance between two closed curves given by their
/// vertices, measured against the local circle fits so that vertex placement
/// does not count as distance.
pub fn curve_hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one = |x: &[Complex64], y: &[Complex64]| {
        x.iter().map(|&p| curve_distance(p, y)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

impl TrajectoryField {
    /// For every critical trajectory, the distance by which the last traced
    /// segment, extended as a line, misses the zero it was snapped to.
    pub fn closure_gaps(&self) -> Vec<f64> {
        self.trajectories
            .iter()
            .map(|t| {
                let n = t.len();
                if n < 4 {
                    return 0.0;
                }
                let (a, b, z) = (t[n - 3], t[n - 2], t[n - 1]);
                let d = b - a;
                if d.norm() == 0.0 {
                    return (z - b).norm();
                }
                ((z - a) * d.conj()).im.abs() / d.norm()
            })
            .collect()
    }
}

/// Traces the three critical trajectories out of every zero, assembles the
/// critical graph and extracts the faces containing 0, 1, −1 and ∞.
pub fn critical_graph(gamma: f64, step: f64) -> Result<TrajectoryField> {
    check_gamma(gamma)?;
    if (gamma - 1.0).abs() < 1e-9 {
        return Err(Error::Domain(
            "gamma = 1 has double zeros; the critical graph degenerates".into(),
        ));
    }
    if !(step > 0.0 && step < 0.1) {
        return Err(Error::Domain(format!(
            "step must lie in (0, 0.1), got {step}"
        )));
    }
    let zeros = distinct_zeros(gamma)?;
    let zero_points: Vec<Complex64> = zeros.iter().map(|z| z.point).collect();
    let mut singular = zero_points.clone();
    singular.extend([
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ]);
    let field = |w: Complex64| q_eval(w, gamma);
    let tracer = Tracer {
        field: &field,
        singular: &singular,
        step,
        max_length: EDGE_MAX_LENGTH,
    };

    let mut traced = Vec::new();
    let mut failures = Vec::new();
    for (i, &z0) in zero_points.iter().enumerate() {
        let base = -q_derivative_at_zero(z0, gamma).arg();
        for j in 0..3 {
            let dir = Complex64::from_polar(1.0, (base + 2.0 * PI * j as f64) / 3.0);
            let start = z0 + dir * PRONG_OFFSET;
            let tr = tracer.run(start, dir, Some(z0))?;
            let end = match (tr.stop, tr.endpoint) {
                (StopReason::NearSingularity, Some(Point::Finite(p))) => {
                    zero_points.iter().position(|&z| z == p)
                }
                _ => None,
            };
            let mut points = vec![z0];
            points.extend(tr.points);
            match end {
                Some(k) => {
                    points.push(zero_points[k]);
                    traced.push(Edge {
                        from: i,
                        to: k,
                        points,
                    });
                }
                None => failures.push(points),
            }
        }
    }
    if !failures.is_empty() {
        return Err(Error::Structure {
            message: format!(
                "{} critical trajectories did not end at a zero",
                failures.len()
            ),
            polylines: failures,
        });
    }

    // every edge is traced from both ends; keep the first copy
    let same_tol = 1e-3 + 10.0 * step;
    let mut edges: Vec<Edge> = Vec::new();
    for e in traced {
        let mid = point_at_half_length(&e.points);
        let duplicate = edges.iter().any(|f| {
            ((f.from == e.to && f.to == e.from) || (f.from == e.from && f.to == e.to))
                && polyline_distance(mid, &f.points) < same_tol
        });
        if !duplicate {
            edges.push(e);
        }
    }
    let all_polylines = || edges.iter().map(|e| e.points.clone()).collect::<Vec<_>>();
    let simple = zeros.iter().filter(|z| z.multiplicity == 1).count();
    if edges.len() * 2 != 3 * simple {
        return Err(Error::Structure {
            message: format!(
                "expected {} critical edges, found {}",
                3 * simple / 2,
                edges.len()
            ),
            polylines: all_polylines(),
        });
    }

    let faces = extract_faces(&edges, zero_points.len());
    let structure_err = |message: String| Error::Structure {
        message,
        polylines: all_polylines(),
    };

    let mut circular_boundaries = Vec::new();
    for pole in [0.0, 1.0, -1.0] {
        let p = Complex64::new(pole, 0.0);
        let found: Vec<&Loop> = faces
            .iter()
            .filter(|f| signed_area(f) > 0.0 && winding_number(f, p) != 0)
            .collect();
        let [face] = found.as_slice() else {
            return Err(structure_err(format!(
                "{} faces contain the pole {pole}",
                found.len()
            )));
        };
        circular_boundaries.push(CircularBoundary {
            pole: Point::Finite(p),
            inverted: false,
            boundary: (*face).clone(),
        });
    }
    let outer: Vec<&Loop> = faces.iter().filter(|f| signed_area(f) < 0.0).collect();
    let [outer] = outer.as_slice() else {
        return Err(structure_err(format!("{} unbounded faces", outer.len())));
    };
    // ζ = 1/w reverses orientation, so the inverted outer face is counterclockwise
    let inverted: Loop = outer.iter().map(|z| z.inv()).collect();
    circular_boundaries.push(CircularBoundary {
        pole: Point::Infinity,
        inverted: true,
        boundary: inverted,
    });

    for b in &circular_boundaries {
        let center = b.center();
        let others = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]
        .into_iter()
        .filter(|&p| p != center && !(b.inverted && p == Complex64::new(0.0, 0.0)));
        let wraps_other = others.clone().any(|p| winding_number(&b.boundary, p) != 0);
        if winding_number(&b.boundary, center) != 1
            || wraps_other
            || signed_area(&b.boundary) <= 0.0
        {
            return Err(structure_err(format!(
                "face of {:?} is not a circular domain",
                b.pole
            )));
        }
    }

    Ok(TrajectoryField {
        gamma,
        zeros,
        poles: TrajectoryField::poles_of_q(),
        trajectories: edges.into_iter().map(|e| e.points).collect(),
        circular_boundaries,
    })
}

// Faces of the embedded graph, each traced with the face on its left.
fn extract_faces(edges: &[Edge], vertices: usize) -> Vec<Loop> {
    // half-edge 2e runs along the edge, 2e+1 against it
    let path = |h: usize| -> Vec<Complex64> {
        let pts = &edges[h / 2].points;
        if h % 2 == 0 {
            pts.clone()
        } else {
            pts.iter().rev().copied().collect()
        }
    };
    let origin = |h: usize| {
        if h % 2 == 0 {
            edges[h / 2].from
        } else {
            edges[h / 2].to
        }
    };
    let angle = |h: usize| {
        let p = path(h);
        (p[1] - p[0]).arg()
    };
    let mut outgoing: Vec<Vec<(f64, usize)>> = vec![Vec::new(); vertices];
    for h in 0..2 * edges.len() {
        outgoing[origin(h)].push((angle(h), h));
    }
    for list in &mut outgoing {
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    // next half-edge: the first one clockwise from the twin at the arrival vertex
    let next = |h: usize| -> usize {
        let twin = h ^ 1;
        let list = &outgoing[origin(twin)];
        let pos = list.iter().position(|&(_, g)| g == twin).unwrap();
        list[(pos + list.len() - 1) % list.len()].1
    };

    let mut seen = vec![false; 2 * edges.len()];
    let mut faces = Vec::new();
    for start in 0..2 * edges.len() {
        if seen[start] {
            continue;
        }
        let mut lp: Loop = Vec::new();
        let mut h = start;
        while !seen[h] {
            seen[h] = true;
            let p = path(h);
            let skip = usize::from(!lp.is_empty());
            lp.extend_from_slice(&p[skip..]);
            h = next(h);
        }
        faces.push(lp);
    }
    faces
}

/// Monte Carlo estimate of `[r(Λ₀,0) r(Λ_∞,∞)]^γ r(Λ₁,1) r(Λ₂,−1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalEstimate {
    pub gamma: f64,
    pub value: f64,
    pub std_error: f64,
    pub r_zero: McEstimate,
    pub r_one: McEstimate,
    pub r_minus_one: McEstimate,
    pub r_infinity: McEstimate,
}

/// Estimates the inner radii of the four circular domains by walk on spheres
/// (the one at ∞ in `ζ = 1/w`) and combines them with delta-method errors.
pub fn extremal_product_estimate(
    field: &TrajectoryField,
    params: &WosParams,
) -> Result<ExtremalEstimate> {
    let estimate = |pole: Point, salt: u64| -> Result<McEstimate> {
        let b = field.boundary(pole).ok_or_else(|| Error::Structure {
            message: format!("no boundary for {pole:?}"),
            polylines: Vec::new(),
        })?;
        let domain = PolylineDomain::interior_of(b.boundary.clone())?;
        estimate_inner_radius(&domain, b.center(), &params.reseeded(salt))
    };
    let f = |re: f64| Point::Finite(Complex64::new(re, 0.0));
    let r_zero = estimate(f(0.0), 0)?;
    let r_one = estimate(f(1.0), 1)?;
    let r_minus_one = estimate(f(-1.0), 2)?;
    let r_infinity = estimate(Point::Infinity, 3)?;
    let g = field.gamma;
    let log_value =
        g * (r_zero.log_value + r_infinity.log_value) + r_one.log_value + r_minus_one.log_value;
    let log_var = g * g * (r_zero.log_std_error.powi(2) + r_infinity.log_std_error.powi(2))
        + r_one.log_std_error.powi(2)
        + r_minus_one.log_std_error.powi(2);
    let value = log_value.exp();
    Ok(ExtremalEstimate {
        gamma: g,
        value,
        std_error: value * log_var.sqrt(),
        r_zero,
        r_one,
        r_minus_one,
        r_infinity,
    })
}

/// `arg(Q(m) t²)` at every segment midpoint of a `w`-plane polyline; zero on
/// trajectories.
pub fn trajectory_phase_errors(points: &[Complex64], gamma: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(points.len());
    for s in points.windows(2) {
        let d = s[1] - s[0];
        if d.norm() < 1e-12 {
            continue;
        }
        let m = 0.5 * (s[0] + s[1]);
        let q = q_eval(m, gamma)?;
        if line_direction(q).is_none() {
            continue;
        }
        out.push((q * d * d).arg().abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn graph_for_half() {
        let f = critical_graph(0.5, 2e-3).unwrap();
        assert_eq!(f.zeros.len(), 4);
        assert_eq!(f.trajectories.len(), 6);
        assert_eq!(f.circular_boundaries.len(), 4);
        for b in &f.circular_boundaries {
            let lp = &b.boundary;
            assert!((lp[0] - lp[lp.len() - 1]).norm() < 1e-3);
        }
        let gaps = f.closure_gaps();
        assert_eq!(gaps.len(), 6);
        assert!(gaps.iter().all(|&g| g < 1e-3), "{gaps:?}");
        for t in &f.trajectories {
            let errs = trajectory_phase_errors(t, 0.5).unwrap();
            assert!(errs.iter().all(|&e| e < 5e-2));
        }
    }

    #[test]
    fn boundary_around_one_brackets_one() {
        let f = critical_graph(0.5, 2e-3).unwrap();
        let b = f.boundary(Point::Finite(c(1.0, 0.0))).unwrap();
        let mut crossings = Vec::new();
        for w in b.boundary.windows(2) {
            if (w[0].im > 0.0) != (w[1].im > 0.0) {
                let t = w[0].im / (w[0].im - w[1].im);
                crossings.push(w[0].re + t * (w[1].re - w[0].re));
            }
        }
        assert_eq!(crossings.len(), 2);
        crossings.sort_by(f64::total_cmp);
        assert!(crossings[0] < 1.0 && 1.0 < crossings[1], "{crossings:?}");
    }

    #[test]
    fn boundaries_are_symmetric() {
        let f = critical_graph(0.5, 2e-3).unwrap();
        let get = |p: Point| f.boundary(p).unwrap().boundary.clone();
        let one = get(Point::Finite(c(1.0, 0.0)));
        let minus_one = get(Point::Finite(c(-1.0, 0.0)));
        let neg: Vec<Complex64> = one.iter().map(|z| -z).collect();
        assert!(curve_hausdorff(&neg, &minus_one) < 1e-6);
        for lp in [
            &one,
            &minus_one,
            &get(Point::Finite(c(0.0, 0.0))),
            &get(Point::Infinity),
        ] {
            let conj: Vec<Complex64> = lp.iter().map(|z| z.conj()).collect();
            let negated: Vec<Complex64> = lp.iter().map(|z| -z).collect();
            assert!(curve_hausdorff(&conj, lp) < 1e-6);
            if lp != &one && lp != &minus_one {
                assert!(curve_hausdorff(&negated, lp) < 1e-6);
            }
        }
    }

    #[test]
    fn infinity_face_matches_zero_face() {
        // Q is invariant under w -> 1/w, so the inverted face at ∞ is the face at 0
        let f = critical_graph(0.5, 2e-3).unwrap();
        let zero = &f.boundary(Point::Finite(c(0.0, 0.0))).unwrap().boundary;
        let inf = &f.boundary(Point::Infinity).unwrap().boundary;
        assert!(curve_hausdorff(zero, inf) < 1e-5);
    }

    #[test]
    fn gamma_one_is_rejected() {
        assert!(matches!(critical_graph(1.0, 2e-3), Err(Error::Domain(_))));
    }

    #[test]
    fn other_gammas() {
        for g in [0.25, 0.65, 0.9] {
            let f = critical_graph(g, 4e-3).unwrap();
            assert_eq!(f.circular_boundaries.len(), 4, "gamma {g}");
        }
    }
}

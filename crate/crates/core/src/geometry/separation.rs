//! The separating transformation `π_k(w) = −i (e^{−iθ_k} w)^{1/α_k}`.
//!
//! Each map opens the closed sector `θ_k ≤ arg w ≤ θ_{k+1}` onto the closed
//! right half-plane. A domain is carried over by taking the component of its
//! trace on the sector that contains the marked point, mapping it, and adding
//! its mirror image across the imaginary axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Configuration, ElementaryDomain, Point, RaySystem};
use crate::error::{Error, Result};
use crate::wos::{
    estimate_inner_radius, estimate_inner_radius_at_infinity, winding_number, DomainOracle, Invert,
    Loop, McEstimate, PolylineDomain, WosParams,
};

/// Angular slack when deciding membership of the closed sector.
const PHASE_TOL: f64 = 1e-9;
/// Minimum image spacing is `diameter / REFINE_RATIO`.
const REFINE_RATIO: f64 = 512.0;
const MAX_REFINE_DEPTH: u32 = 24;

fn check_sector(k: usize, ray: &RaySystem) -> Result<()> {
    if k >= ray.n() {
        return Err(Error::Domain(format!(
            "sector index {k} out of range for n = {}",
            ray.n()
        )));
    }
    Ok(())
}

/// Phase of `w` inside sector `k`, in `[0, πα_k]`.
fn sector_phase(w: Complex64, k: usize, ray: &RaySystem) -> Result<f64> {
    let (lo, hi) = ray.sector_bounds(k);
    let width = hi - lo;
    let phi = (w.arg() - lo).rem_euclid(2.0 * PI);
    if phi <= width {
        Ok(phi)
    } else if phi <= width + PHASE_TOL {
        Ok(width)
    } else if phi >= 2.0 * PI - PHASE_TOL {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!(
            "{w} lies outside the closed sector {k}"
        )))
    }
}

fn map_polar(modulus: f64, phase: f64, alpha: f64) -> Complex64 {
    let z = Complex64::from_polar(modulus.powf(1.0 / alpha), phase / alpha);
    Complex64::new(z.im, -z.re)
}

/// `π_k(w)` for `w ≠ 0` in the closed sector `k` (0-based: sector `k` lies
/// between `a_k` and `a_{k+1}`, the last one closing at `2π`).
pub fn separating_map(w: Complex64, k: usize, ray: &RaySystem) -> Result<Complex64> {
    check_sector(k, ray)?;
    if w == Complex64::new(0.0, 0.0) || !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Domain(format!("separating map undefined at {w}")));
    }
    let phase = sector_phase(w, k, ray)?;
    Ok(map_polar(w.norm(), phase, ray.alphas()[k]))
}

fn mirror(z: Complex64) -> Complex64 {
    Complex64::new(-z.re, z.im)
}

/// One transformed domain: the face of the image loops that contains the
/// image of the marked point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedDomain {
    pub sector: usize,
    pub owner_image: Point,
    pub domain: PolylineDomain,
    /// Largest distance between a boundary chord and the image arc it replaces.
    pub chord_error: f64,
}

impl SeparatedDomain {
    /// All boundary loops, outer first.
    pub fn boundary(&self) -> Vec<&Loop> {
        self.domain.loops().collect()
    }
}

struct Crossing {
    psi: f64,
    modulus: f64,
    phase: f64,
}

/// Image under `π_k` of `∂(B ∩ P̄_k)`, symmetrized across the imaginary axis,
/// restricted to the face containing the image of `owner`.
pub fn transform_boundary(
    domain: &ElementaryDomain,
    owner: Point,
    k: usize,
    ray: &RaySystem,
    samples: usize,
) -> Result<SeparatedDomain> {
    check_sector(k, ray)?;
    domain.validate()?;
    if !domain.contains(owner) {
        return Err(Error::Geometry(format!(
            "{owner:?} is not inside {domain:?}"
        )));
    }
    let (center, radius) = match *domain {
        ElementaryDomain::Disk { center, radius }
        | ElementaryDomain::ExteriorDisk { center, radius } => (center, radius),
        ElementaryDomain::HalfPlane { .. } => {
            return Err(Error::Geometry(
                "separating transform supports disks and disk exteriors only".into(),
            ))
        }
    };
    if (center.norm() - radius).abs() < 1e-12 {
        return Err(Error::Geometry("boundary circle passes through 0".into()));
    }
    let alpha = ray.alphas()[k];
    let (lo, hi) = ray.sector_bounds(k);
    let samples = samples.max(8);

    let mut crossings = Vec::new();
    for (theta, phase) in [(lo, 0.0), (hi, PI * alpha)] {
        let u = Complex64::from_polar(1.0, theta);
        let b = (center * u.conj()).re;
        let disc = b * b - (center.norm_sqr() - radius * radius);
        if disc <= 0.0 {
            continue;
        }
        for t in [b - disc.sqrt(), b + disc.sqrt()] {
            if t > 0.0 {
                let psi = (u * t - center).arg().rem_euclid(2.0 * PI);
                crossings.push(Crossing {
                    psi,
                    modulus: t,
                    phase,
                });
            }
        }
    }
    crossings.sort_by(|a, b| a.psi.total_cmp(&b.psi));

    let on_circle = |psi: f64| center + Complex64::from_polar(radius, psi);
    let image = |psi: f64| -> Option<Complex64> {
        let w = on_circle(psi);
        sector_phase(w, k, ray)
            .ok()
            .map(|ph| map_polar(w.norm(), ph, alpha))
    };

    // Arcs of the circle inside the closed sector, as (psi_start, psi_end, endpoint data).
    let mut arcs: Vec<(f64, f64, Option<(&Crossing, &Crossing)>)> = Vec::new();
    if crossings.is_empty() {
        if image(0.0).is_some() {
            arcs.push((0.0, 2.0 * PI, None));
        }
    } else {
        let m = crossings.len();
        for i in 0..m {
            let a = &crossings[i];
            let b = &crossings[(i + 1) % m];
            let end = if i + 1 < m { b.psi } else { b.psi + 2.0 * PI };
            if end - a.psi < 1e-14 {
                continue;
            }
            let mid = 0.5 * (a.psi + end);
            let w = on_circle(mid);
            let phi = (w.arg() - lo).rem_euclid(2.0 * PI);
            if phi > 0.0 && phi < hi - lo {
                arcs.push((a.psi, end, Some((a, b))));
            }
        }
    }
    if arcs.is_empty() {
        return Err(Error::Geometry(format!(
            "{domain:?} has no boundary inside sector {k}"
        )));
    }

    // Initial sampling, then refinement against the overall image diameter.
    let mut polylines: Vec<Vec<(f64, Complex64)>> = Vec::new();
    for &(s, e, ends) in &arcs {
        let count = ((samples as f64 * (e - s) / (2.0 * PI)).ceil() as usize).max(8);
        let mut pts = Vec::with_capacity(count + 1);
        for i in 0..=count {
            let psi = s + (e - s) * i as f64 / count as f64;
            let z = match (i, ends) {
                (0, Some((a, _))) => map_polar(a.modulus, a.phase, alpha),
                (j, Some((_, b))) if j == count => map_polar(b.modulus, b.phase, alpha),
                _ => image(psi)
                    .ok_or_else(|| Error::Geometry("arc sample left the sector".into()))?,
            };
            pts.push((psi, z));
        }
        if ends.is_some() {
            pts[0].1.re = 0.0;
            let last = pts.len() - 1;
            pts[last].1.re = 0.0;
        }
        polylines.push(pts);
    }
    let diameter = image_diameter(&polylines);
    let spacing = diameter / REFINE_RATIO;
    for pts in &mut polylines {
        let mut refined = vec![pts[0]];
        for w in pts.windows(2) {
            refine(&image, w[0], w[1], spacing, 0, &mut refined)?;
        }
        *pts = refined;
    }

    let mut chord_error: f64 = 0.0;
    for pts in &polylines {
        for w in pts.windows(2) {
            if let Some(m) = image(0.5 * (w[0].0 + w[1].0)) {
                let p = crate::wos::closest_on_segment(m, w[0].1, w[1].1);
                chord_error = chord_error.max((m - p).norm());
            }
        }
    }

    let mut loops: Vec<Loop> = Vec::new();
    for (pts, &(_, _, ends)) in polylines.iter().zip(&arcs) {
        let forward: Vec<Complex64> = pts.iter().map(|p| p.1).collect();
        if ends.is_some() {
            let mut lp = forward.clone();
            lp.extend(
                forward[1..forward.len() - 1]
                    .iter()
                    .rev()
                    .map(|&z| mirror(z)),
            );
            lp.push(forward[0]);
            loops.push(lp);
        } else {
            let mut lp = forward.clone();
            *lp.last_mut().unwrap() = lp[0];
            loops.push(lp.iter().map(|&z| mirror(z)).collect());
            loops.push(lp);
        }
    }

    let owner_image = match owner {
        Point::Infinity => Point::Infinity,
        Point::Finite(z) if z == Complex64::new(0.0, 0.0) => Point::Finite(z),
        Point::Finite(z) => Point::Finite(separating_map(z, k, ray)?),
    };
    let domain = select_face(loops, owner_image, diameter)?;
    Ok(SeparatedDomain {
        sector: k,
        owner_image,
        domain,
        chord_error,
    })
}

fn image_diameter(polylines: &[Vec<(f64, Complex64)>]) -> f64 {
    let (mut lo, mut hi) = (
        Complex64::new(f64::INFINITY, f64::INFINITY),
        Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in polylines.iter().flatten() {
        // include the mirror image
        for z in [p.1, mirror(p.1)] {
            lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
        }
    }
    (hi - lo).norm()
}

fn refine<F: Fn(f64) -> Option<Complex64>>(
    image: &F,
    a: (f64, Complex64),
    b: (f64, Complex64),
    spacing: f64,
    depth: u32,
    out: &mut Vec<(f64, Complex64)>,
) -> Result<()> {
    if (b.1 - a.1).norm() > spacing && depth < MAX_REFINE_DEPTH {
        let psi = 0.5 * (a.0 + b.0);
        let z = image(psi).ok_or_else(|| Error::Geometry("refinement left the sector".into()))?;
        refine(image, a, (psi, z), spacing, depth + 1, out)?;
        refine(image, (psi, z), b, spacing, depth + 1, out)?;
    } else {
        out.push(b);
    }
    Ok(())
}

fn inside(outer: &Loop, inner: &Loop) -> bool {
    // loops only meet on the imaginary axis at arc endpoints; test an interior vertex
    winding_number(outer, inner[inner.len() / 2]) != 0
}

fn loop_area(lp: &Loop) -> f64 {
    0.5 * lp
        .windows(2)
        .map(|w| w[0].re * w[1].im - w[1].re * w[0].im)
        .sum::<f64>()
        .abs()
}

fn select_face(loops: Vec<Loop>, owner: Point, diameter: f64) -> Result<PolylineDomain> {
    let (outer, candidates): (Option<Loop>, Vec<Loop>) = match owner {
        Point::Infinity => (None, loops),
        Point::Finite(z) => {
            for lp in &loops {
                let d = lp
                    .windows(2)
                    .map(|w| (z - crate::wos::closest_on_segment(z, w[0], w[1])).norm())
                    .fold(f64::INFINITY, f64::min);
                if d < 1e-12 * diameter.max(1.0) {
                    return Err(Error::Geometry(format!(
                        "image point {z} lies on a boundary loop"
                    )));
                }
            }
            let (enclosing, rest): (Vec<Loop>, Vec<Loop>) =
                loops.into_iter().partition(|lp| winding_number(lp, z) != 0);
            let outer = enclosing
                .into_iter()
                .min_by(|a, b| loop_area(a).total_cmp(&loop_area(b)));
            let rest = match &outer {
                Some(o) => rest.into_iter().filter(|lp| inside(o, lp)).collect(),
                None => rest,
            };
            (outer, rest)
        }
    };
    let holes: Vec<Loop> = candidates
        .iter()
        .enumerate()
        .filter(|(i, lp)| {
            !candidates
                .iter()
                .enumerate()
                .any(|(j, other)| j != *i && inside(other, lp))
        })
        .map(|(_, lp)| lp.clone())
        .collect();
    if outer.is_none() && matches!(owner, Point::Finite(_)) {
        return Err(Error::Geometry(
            "image of the marked point is not enclosed by any loop".into(),
        ));
    }
    PolylineDomain::new(outer, holes)
}

/// The transformed system of one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedSystem {
    pub sector: usize,
    /// `π_k(a_k)`
    pub omega1: Complex64,
    /// `π_k(a_{k+1})`
    pub omega2: Complex64,
    pub zero: SeparatedDomain,
    pub first: SeparatedDomain,
    pub second: SeparatedDomain,
    pub infinity: SeparatedDomain,
}

/// Transforms `B₀`, `B_k`, `B_{k+1}` (cyclically) and `B_∞` for sector `k`.
pub fn separated_system(
    config: &Configuration,
    k: usize,
    samples: usize,
) -> Result<SeparatedSystem> {
    config.validate()?;
    let ray = &config.ray;
    check_sector(k, ray)?;
    let n = ray.n();
    let next = (k + 1) % n;
    let a_k = ray.points()[k];
    let a_next = ray.points()[next];
    let omega1 = separating_map(a_k, k, ray)?;
    let omega2 = separating_map(a_next, k, ray)?;
    Ok(SeparatedSystem {
        sector: k,
        omega1,
        omega2,
        zero: transform_boundary(
            &config.domain_at_zero,
            Complex64::new(0.0, 0.0).into(),
            k,
            ray,
            samples,
        )?,
        first: transform_boundary(&config.domains[k], a_k.into(), k, ray, samples)?,
        second: transform_boundary(&config.domains[next], a_next.into(), k, ray, samples)?,
        infinity: transform_boundary(&config.domain_at_infinity, Point::Infinity, k, ray, samples)?,
    })
}

/// Outcome of one Monte Carlo inequality check, judged against three
/// standard errors plus the deterministic discretization bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    /// Margin at least the tolerance above zero.
    Holds,
    /// Margin within the tolerance of zero.
    Inconclusive,
    /// Margin more than the tolerance below zero.
    Violated,
}

/// `lhs ≤ rhs` with a Monte Carlo right side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rhs_std_error: f64,
    /// Deterministic bound on the polygon and shell bias of `rhs`.
    pub rhs_bias_bound: f64,
    pub margin: f64,
    pub status: CheckStatus,
}

impl InequalityCheck {
    fn new(name: String, lhs: f64, log_rhs: f64, log_rhs_se: f64, log_rhs_bias: f64) -> Self {
        let rhs = log_rhs.exp();
        let rhs_std_error = rhs * log_rhs_se;
        let rhs_bias_bound = rhs * log_rhs_bias.exp_m1();
        let margin = rhs - lhs;
        let tol = 3.0 * rhs_std_error + rhs_bias_bound;
        let status = if margin >= tol {
            CheckStatus::Holds
        } else if margin >= -tol {
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Violated
        };
        InequalityCheck {
            name,
            lhs,
            rhs,
            rhs_std_error,
            rhs_bias_bound,
            margin,
            status,
        }
    }
}

/// Per-inequality margins for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub checks: Vec<InequalityCheck>,
    pub violations: usize,
}

fn bounded_estimate(d: &SeparatedDomain, params: &WosParams) -> Result<McEstimate> {
    let Point::Finite(z) = d.owner_image else {
        return Err(Error::Internal(
            "bounded estimate requested at infinity".into(),
        ));
    };
    if !d.domain.contains(z) {
        return Err(Error::Geometry(format!(
            "{z} is not inside its transformed domain"
        )));
    }
    estimate_inner_radius(&d.domain, z, params)
}

// Bound on |log r(polygon) − log r(true face)| plus the shell bias: moving the
// boundary by δ changes the log-radius by at most about δ / dist(point, ∂).
fn log_bias_bound(d: &SeparatedDomain, epsilon: f64) -> Result<f64> {
    match d.owner_image {
        Point::Finite(z) => Ok((d.chord_error + epsilon) / d.domain.distance_to_boundary(z)),
        Point::Infinity => {
            let inv = d.domain.invert()?;
            let rmin = d
                .domain
                .loops()
                .flatten()
                .map(|v| v.norm())
                .fold(f64::INFINITY, f64::min);
            let dist = inv.distance_to_boundary(Complex64::new(0.0, 0.0));
            Ok((d.chord_error / (rmin * rmin) + epsilon) / dist)
        }
    }
}

/// Checks, for every sector `k`,
/// `r(B_k,a_k) ≤ [r(Ω_k¹,ω_k¹) r(Ω_{k−1}²,ω_{k−1}²) / (c_k c'_{k−1})]^{1/2}`
/// and the two product inequalities at 0 and ∞ with weights `α_k²`,
/// estimating every transformed radius by walk on spheres.
pub fn check_separation_bounds(
    config: &Configuration,
    params: &WosParams,
    samples: usize,
) -> Result<SeparationReport> {
    config.validate()?;
    let ray = &config.ray;
    let n = ray.n();
    let alphas = ray.alphas();
    let systems = (0..n)
        .map(|k| separated_system(config, k, samples))
        .collect::<Result<Vec<_>>>()?;

    let salt = |k: usize, which: u64| (k as u64) * 8 + which;
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    let mut zero = Vec::with_capacity(n);
    let mut infinity = Vec::with_capacity(n);
    for (k, s) in systems.iter().enumerate() {
        first.push(bounded_estimate(&s.first, &params.reseeded(salt(k, 1)))?);
        second.push(bounded_estimate(&s.second, &params.reseeded(salt(k, 2)))?);
        zero.push(bounded_estimate(&s.zero, &params.reseeded(salt(k, 3)))?);
        infinity.push(estimate_inner_radius_at_infinity(
            &s.infinity.domain,
            &params.reseeded(salt(k, 4)),
        )?);
    }

    let bias = |f: fn(&SeparatedSystem) -> &SeparatedDomain| -> Result<Vec<f64>> {
        systems
            .iter()
            .map(|s| log_bias_bound(f(s), params.epsilon))
            .collect()
    };
    let (b_first, b_second) = (bias(|s| &s.first)?, bias(|s| &s.second)?);
    let (b_zero, b_inf) = (bias(|s| &s.zero)?, bias(|s| &s.infinity)?);

    let mut checks = Vec::new();
    for k in 0..n {
        let prev = (k + n - 1) % n;
        let a = ray.points()[k].norm();
        let c_k = a.powf(1.0 / alphas[k] - 1.0) / alphas[k];
        let c_prev = a.powf(1.0 / alphas[prev] - 1.0) / alphas[prev];
        let log_rhs = 0.5 * (first[k].log_value + second[prev].log_value - (c_k * c_prev).ln());
        let se = 0.5 * first[k].log_std_error.hypot(second[prev].log_std_error);
        let b = 0.5 * (b_first[k] + b_second[prev]);
        checks.push(InequalityCheck::new(
            format!("point_{}", k + 1),
            config.radius_at(k)?,
            log_rhs,
            se,
            b,
        ));
    }
    for (name, lhs, ests, biases) in [
        ("zero", config.radius_at_zero()?, &zero, &b_zero),
        ("infinity", config.radius_at_infinity()?, &infinity, &b_inf),
    ] {
        let log_rhs = 0.5
            * ests
                .iter()
                .zip(alphas)
                .map(|(e, a)| a * a * e.log_value)
                .sum::<f64>();
        let var = ests
            .iter()
            .zip(alphas)
            .map(|(e, a)| (a * a * e.log_std_error).powi(2))
            .sum::<f64>();
        let b = 0.5
            * biases
                .iter()
                .zip(alphas)
                .map(|(b, a)| a * a * b)
                .sum::<f64>();
        checks.push(InequalityCheck::new(
            name.into(),
            lhs,
            log_rhs,
            0.5 * var.sqrt(),
            b,
        ));
    }
    let violations = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Violated)
        .count();
    Ok(SeparationReport { checks, violations })
}

//! The quadratic differential
//!
//! `Q(w) dw² = −(γw⁴ + (4−2γ)w² + γ) / (w²(w²−1)²) dw²`
//!
//! with double poles at 0, ±1 and ∞. Its circular domains around the poles
//! are the extremal configuration for the symmetric two-point problem.
//! Trajectories are the curves along which `Q dw² > 0`; near every double
//! pole (leading coefficient negative) these close around the pole.

mod graph;
mod svg;
mod trace;

pub use graph::{
    critical_graph, curve_hausdorff, extremal_product_estimate, trajectory_phase_errors,
    CircularBoundary, ExtremalEstimate, PoleInfo, TrajectoryField, ZeroInfo,
};
pub use svg::{render_svg, SvgOptions};
pub use trace::{trace_trajectory, StopReason, Trajectory};

use num_complex::Complex64;

use crate::error::{domain_err, Error, Result};

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return domain_err(format!("gamma must be positive, got {gamma}"));
    }
    Ok(())
}

/// Numerator `γw⁴ + (4−2γ)w² + γ`.
pub fn numerator(w: Complex64, gamma: f64) -> Complex64 {
    let w2 = w * w;
    (w2 * gamma + (4.0 - 2.0 * gamma)) * w2 + gamma
}

fn numerator_derivative(w: Complex64, gamma: f64) -> Complex64 {
    w * (w * w * (4.0 * gamma) + 2.0 * (4.0 - 2.0 * gamma))
}

fn denominator(w: Complex64) -> Complex64 {
    let w2 = w * w;
    let m = w2 - 1.0;
    w2 * m * m
}

/// `Q(w)`.
pub fn q_eval(w: Complex64, gamma: f64) -> Result<Complex64> {
    check_gamma(gamma)?;
    let d = denominator(w);
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole { re: w.re, im: w.im });
    }
    let q = -numerator(w, gamma) / d;
    if !(q.re.is_finite() && q.im.is_finite()) {
        return Err(Error::Pole { re: w.re, im: w.im });
    }
    Ok(q)
}

/// The same differential in `ζ = 1/w`: `Q(1/ζ) ζ⁻⁴`, which equals `Q(ζ)`.
pub fn q_eval_inverted(zeta: Complex64, gamma: f64) -> Result<Complex64> {
    if zeta == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole { re: 0.0, im: 0.0 });
    }
    let z2 = zeta * zeta;
    Ok(q_eval(zeta.inv(), gamma)? / (z2 * z2))
}

/// `Q'(z)` at a zero `z` of the numerator.
pub(crate) fn q_derivative_at_zero(z: Complex64, gamma: f64) -> Complex64 {
    -numerator_derivative(z, gamma) / denominator(z)
}

/// The four zeros of `Q`, repeated by multiplicity and sorted by `(re, im)`.
///
/// Solved as a quadratic in `u = w²`; the roots satisfy `u₁u₂ = 1`, which is
/// used for the smaller one to avoid cancellation.
pub fn q_zeros(gamma: f64) -> Result<[Complex64; 4]> {
    check_gamma(gamma)?;
    let b = 4.0 - 2.0 * gamma;
    let disc = 16.0 - 16.0 * gamma;
    let (u1, u2) = if disc >= 0.0 {
        // both negative reals
        let big = (-b - disc.sqrt()) / (2.0 * gamma);
        (Complex64::new(big, 0.0), Complex64::new(1.0 / big, 0.0))
    } else {
        let u = Complex64::new(-b, (-disc).sqrt()) / (2.0 * gamma);
        (u, u.conj())
    };
    let mut roots = Vec::with_capacity(4);
    for u in [u1, u2] {
        let r = if u.im == 0.0 && u.re < 0.0 {
            Complex64::new(0.0, (-u.re).sqrt())
        } else {
            u.sqrt()
        };
        roots.push(r);
        roots.push(-r);
    }
    for r in &mut roots {
        polish(r, gamma);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok([roots[0], roots[1], roots[2], roots[3]])
}

// Newton steps on the quartic; skipped at (near-)double roots.
fn polish(r: &mut Complex64, gamma: f64) {
    for _ in 0..3 {
        let d = numerator_derivative(*r, gamma);
        if d.norm() < 1e-6 {
            return;
        }
        let next = *r - numerator(*r, gamma) / d;
        if numerator(next, gamma).norm() < numerator(*r, gamma).norm() {
            *r = next;
        } else {
            return;
        }
    }
}

/// Distinct zeros with multiplicities.
pub fn distinct_zeros(gamma: f64) -> Result<Vec<ZeroInfo>> {
    let roots = q_zeros(gamma)?;
    let mut out: Vec<ZeroInfo> = Vec::new();
    for r in roots {
        match out.iter_mut().find(|z| (z.point - r).norm() < 1e-6) {
            Some(z) => z.multiplicity += 1,
            None => out.push(ZeroInfo {
                point: r,
                multiplicity: 1,
            }),
        }
    }
    Ok(out)
}

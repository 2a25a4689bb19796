//! Bracketed location of the critical points of Ψ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun;

/// Initial bracket for the maximizer of Ψ; excludes both singular points 0 and 1.
pub const PSI_MAX_BRACKET: (f64, f64) = (0.3, 0.8);
/// Initial bracket for the zero of (log Ψ)''.
pub const CURVATURE_ZERO_BRACKET: (f64, f64) = (0.6, 0.99);

/// A sign-change bracket around a root of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketedRoot {
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

const MAX_ITERATIONS: usize = 500;

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("f({x}) = {v}")))
    }
}

/// Shrinks a sign-change bracket to width `tol` with secant steps guarded
/// by bisection: every iteration takes one secant (false position) step and
/// then bisects unless the secant step already halved the bracket.
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<BracketedRoot>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Domain(format!(
            "bracketed_root needs lo < hi and tol > 0, got [{lo}, {hi}], tol = {tol}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (eval(&mut f, a)?, eval(&mut f, b)?);
    if fa * fb >= 0.0 {
        return Err(Error::Bracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut iterations = 0;
    while b - a > tol {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::Numeric(format!(
                "bracket [{a}, {b}] did not shrink below {tol} in {MAX_ITERATIONS} iterations"
            )));
        }
        iterations += 1;
        let width = b - a;

        let s = b - fb * (b - a) / (fb - fa);
        if s > a && s < b {
            let fs = eval(&mut f, s)?;
            if fs == 0.0 {
                return Ok(exact_root(&mut f, s, a, b, fa, fb, iterations, tol));
            }
            if fa * fs < 0.0 {
                b = s;
                fb = fs;
            } else {
                a = s;
                fa = fs;
            }
        }

        if b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = eval(&mut f, m)?;
            if fm == 0.0 {
                return Ok(exact_root(&mut f, m, a, b, fa, fb, iterations, tol));
            }
            if fa * fm < 0.0 {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
        }
    }

    Ok(BracketedRoot {
        lo: a,
        hi: b,
        root: 0.5 * (a + b),
        f_lo: fa,
        f_hi: fb,
        iterations,
        tolerance: tol,
    })
}

// An exact zero was hit: report a bracket of width <= tol around it, using
// the nearest points that still show a sign change.
#[allow(clippy::too_many_arguments)]
fn exact_root<F: FnMut(f64) -> f64>(
    f: &mut F,
    x: f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    iterations: usize,
    tol: f64,
) -> BracketedRoot {
    let delta = 0.25 * tol;
    let lo = (x - delta).max(a);
    let hi = (x + delta).min(b);
    let f_lo = if lo == a { fa } else { f(lo) };
    let f_hi = if hi == b { fb } else { f(hi) };
    BracketedRoot {
        lo,
        hi,
        root: x,
        f_lo,
        f_hi,
        iterations,
        tolerance: tol,
    }
}

/// A located critical point of Ψ and its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub psi: f64,
    pub bracket: BracketedRoot,
}

fn derivative_closure(g: fn(f64) -> Result<f64>) -> impl FnMut(f64) -> f64 {
    move |x| g(x).unwrap_or(f64::NAN)
}

fn internal(e: Error) -> Error {
    Error::Internal(format!("critical point bracket failed: {e}"))
}

/// The maximizer x₁ of Ψ, as the root of (log Ψ)' in [0.3, 0.8].
pub fn locate_psi_max(tol: f64) -> Result<CriticalPoint> {
    if !(tol >= 1e-12) {
        return Err(Error::Domain(format!(
            "locate_psi_max needs tol >= 1e-12, got {tol}"
        )));
    }
    let (lo, hi) = PSI_MAX_BRACKET;
    let bracket =
        bracketed_root(derivative_closure(specfun::dlog_psi), lo, hi, tol).map_err(internal)?;
    let x = bracket.root;
    if specfun::d2log_psi(x)? >= 0.0 {
        return Err(Error::Internal(format!(
            "second-order condition fails at x1 = {x}"
        )));
    }
    Ok(CriticalPoint {
        x,
        psi: specfun::psi(x)?,
        bracket,
    })
}

/// The zero x₀ of (log Ψ)'' in [0.6, 0.99].
pub fn locate_curvature_zero(tol: f64) -> Result<CriticalPoint> {
    if !(tol >= 1e-10) {
        return Err(Error::Domain(format!(
            "locate_curvature_zero needs tol >= 1e-10, got {tol}"
        )));
    }
    let (lo, hi) = CURVATURE_ZERO_BRACKET;
    let bracket =
        bracketed_root(derivative_closure(specfun::d2log_psi), lo, hi, tol).map_err(internal)?;
    let x = bracket.root;
    Ok(CriticalPoint {
        x,
        psi: specfun::psi(x)?,
        bracket,
    })
}

//! The majorant functions Φ and Ψ = x²Φ and the derivatives of log Ψ.
//!
//! Everything is evaluated in log space; the power terms have exponents that
//! grow quadratically in `x` and would otherwise overflow or underflow.

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Result};

/// Below this distance from 1 the term `(1-x)^2 ln|1-x|` is replaced by its limit 0.
pub const SINGULAR_CUTOFF: f64 = 1e-12;

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return domain_err(format!("{what} requires a finite x > 0, got {x}"));
    }
    Ok(())
}

/// `(1-x)^2 ln|1-x|`, continuous at x = 1.
fn singular_term(x: f64) -> f64 {
    let d = 1.0 - x;
    if d.abs() < SINGULAR_CUTOFF {
        0.0
    } else {
        d * d * d.abs().ln()
    }
}

/// `(1+x)^2 ln(1+x)`.
fn tail_term(x: f64) -> f64 {
    let s = 1.0 + x;
    s * s * x.ln_1p()
}

/// ln Φ(x) = 2x² ln x − (1−x)² ln|1−x| − (1+x)² ln(1+x).
pub fn log_phi(x: f64) -> Result<f64> {
    check_positive(x, "log_phi")?;
    Ok(2.0 * x * x * x.ln() - singular_term(x) - tail_term(x))
}

/// Φ(x) = x^{2x²} |1−x|^{−(1−x)²} (1+x)^{−(1+x)²}; Φ(1) = 1/16.
pub fn phi(x: f64) -> Result<f64> {
    log_phi(x).map(f64::exp)
}

/// ln Ψ(x) = (2x²+2) ln x − (1−x)² ln|1−x| − (1+x)² ln(1+x).
pub fn log_psi(x: f64) -> Result<f64> {
    check_positive(x, "log_psi")?;
    Ok((2.0 * x * x + 2.0) * x.ln() - singular_term(x) - tail_term(x))
}

/// Ψ(x) = x²Φ(x), extended by Ψ(0) = 0.
pub fn psi(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if !x.is_finite() || x < 0.0 {
        return domain_err(format!("psi requires a finite x >= 0, got {x}"));
    }
    log_psi(x).map(f64::exp)
}

fn check_derivative_arg(x: f64, what: &str) -> Result<()> {
    check_positive(x, what)?;
    if x == 1.0 {
        return domain_err(format!("{what} is singular at x = 1"));
    }
    Ok(())
}

/// d/dx ln Ψ(x).
pub fn dlog_psi(x: f64) -> Result<f64> {
    check_derivative_arg(x, "dlog_psi")?;
    let d = 1.0 - x;
    let s = 1.0 + x;
    Ok(
        4.0 * x * x.ln() + (2.0 * x * x + 2.0) / x + 2.0 * d * d.abs().ln() + d
            - 2.0 * s * x.ln_1p()
            - s,
    )
}

/// d²/dx² ln Ψ(x) = 4 ln x − 2/x² − 2 ln|1−x²|.
pub fn d2log_psi(x: f64) -> Result<f64> {
    check_derivative_arg(x, "d2log_psi")?;
    let one_minus_sq = (1.0 - x) * (1.0 + x);
    Ok(4.0 * x.ln() - 2.0 / (x * x) - 2.0 * one_minus_sq.abs().ln())
}

/// One sample of the Ψ profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiSample {
    pub x: f64,
    pub psi: f64,
    pub log_psi: f64,
}

/// Ψ on a grid together with its located critical data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiProfile {
    pub eval_grid: Vec<PsiSample>,
    /// Maximizer of Ψ.
    pub x1: f64,
    pub psi_x1: f64,
    /// Zero of (log Ψ)''.
    pub x0: f64,
    pub psi_x0: f64,
}

impl PsiProfile {
    /// Samples Ψ at `points` evenly spaced abscissae in (0, `x_max`] and
    /// attaches the critical points located to within `tol`.
    pub fn build(points: usize, x_max: f64, tol: f64) -> Result<Self> {
        check_positive(x_max, "PsiProfile::build")?;
        if points == 0 {
            return domain_err("PsiProfile::build needs at least one grid point");
        }
        let eval_grid = (1..=points)
            .map(|i| {
                let x = x_max * i as f64 / points as f64;
                let log_psi = log_psi(x)?;
                Ok(PsiSample {
                    x,
                    psi: log_psi.exp(),
                    log_psi,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let max = crate::critpoints::locate_psi_max(tol)?;
        let curv = crate::critpoints::locate_curvature_zero(tol.max(1e-10))?;
        Ok(PsiProfile {
            eval_grid,
            x1: max.x,
            psi_x1: max.psi,
            x0: curv.x,
            psi_x0: curv.psi,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Direct power-form evaluation, kept independent of the log-space path.
    fn psi_direct(x: f64) -> f64 {
        x.powf(2.0 * x * x + 2.0)
            * (1.0 - x).abs().powf(-(1.0 - x) * (1.0 - x))
            * (1.0 + x).powf(-(1.0 + x) * (1.0 + x))
    }

    fn phi_direct(x: f64) -> f64 {
        x.powf(2.0 * x * x)
            * (1.0 - x).abs().powf(-(1.0 - x) * (1.0 - x))
            * (1.0 + x).powf(-(1.0 + x) * (1.0 + x))
    }

    #[test]
    fn phi_at_one_is_one_sixteenth() {
        assert!((phi(1.0).unwrap() - 0.0625).abs() < 1e-15);
        assert!((psi(1.0).unwrap() - 0.0625).abs() < 1e-15);
        assert!((log_psi(1.0).unwrap() + 4.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn phi_matches_psi_over_x_squared() {
        for x in [0.25, 0.5, 0.75, 1.5] {
            let p = phi(x).unwrap();
            assert!((p - psi_direct(x) / (x * x)).abs() <= 1e-13 * p);
            assert!((p - phi_direct(x)).abs() <= 1e-13 * p);
        }
    }

    #[test]
    fn phi_is_positive() {
        for i in 1..=300 {
            let x = 3.0 * i as f64 / 300.0;
            assert!(phi(x).unwrap() > 0.0);
        }
    }

    #[test]
    fn psi_reported_values() {
        assert_eq!(psi(0.0).unwrap(), 0.0);
        assert!((psi(0.58142).unwrap() - 0.08674).abs() < 2e-5);
        assert!((psi(0.88441).unwrap() - 0.07002).abs() < 2e-5);
        assert!((log_psi(0.58142).unwrap() - 0.08674f64.ln()).abs() < 3e-4);
    }

    #[test]
    fn log_psi_consistent_with_power_form() {
        let lp = log_psi(0.5).unwrap();
        assert!((lp.exp() - psi_direct(0.5)).abs() <= 1e-12 * psi_direct(0.5));
    }

    #[test]
    fn domain_errors() {
        assert!(phi(0.0).is_err());
        assert!(phi(-1.0).is_err());
        assert!(phi(f64::NAN).is_err());
        assert!(phi(f64::INFINITY).is_err());
        assert!(psi(-0.1).is_err());
        assert!(log_psi(0.0).is_err());
        assert!(dlog_psi(1.0).is_err());
        assert!(d2log_psi(1.0).is_err());
        assert!(dlog_psi(0.0).is_err());
    }

    #[test]
    fn first_derivative_signs() {
        assert!(dlog_psi(0.58142).unwrap().abs() < 1e-4);
        assert!(dlog_psi(0.1).unwrap() > 0.0);
        assert!(dlog_psi(0.8).unwrap() < 0.0);
    }

    #[test]
    fn second_derivative_sign_change() {
        assert!(d2log_psi(0.88441).unwrap().abs() < 1e-3);
        let a = d2log_psi(0.5).unwrap();
        let b = d2log_psi(0.99).unwrap();
        assert!(a.signum() != b.signum());
        // dense scan on (0.3, 1): exactly one sign change
        let mut changes = 0;
        let mut prev = d2log_psi(0.3).unwrap().signum();
        for i in 1..7000 {
            let x = 0.3 + 0.7 * i as f64 / 7000.0;
            let s = d2log_psi(x).unwrap().signum();
            if s != prev {
                changes += 1;
                assert!((x - 0.88441).abs() < 1e-3);
            }
            prev = s;
        }
        assert_eq!(changes, 1);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for x in [0.3, 0.6, 0.95] {
            let h = 1e-5;
            let fd = (dlog_psi(x + h).unwrap() - dlog_psi(x - h).unwrap()) / (2.0 * h);
            assert!((d2log_psi(x).unwrap() - fd).abs() < 1e-5, "x = {x}");
        }
    }

    #[test]
    fn identity_and_derivatives_on_grid() {
        for i in 1..=10_000 {
            let x = 3.0 * i as f64 / 10_000.0;
            let p = psi(x).unwrap();
            assert!((p - x * x * phi(x).unwrap()).abs() <= 1e-12 * p, "x = {x}");
            if (x - 1.0).abs() < 1e-3 || x < 0.05 || i % 10 != 0 {
                continue;
            }
            let h = 1e-6;
            let fd = (log_psi(x + h).unwrap() - log_psi(x - h).unwrap()) / (2.0 * h);
            let d1 = dlog_psi(x).unwrap();
            assert!((d1 - fd).abs() < 1e-6 * d1.abs().max(1.0), "x = {x}");
            let h2 = 1e-5;
            let fd2 = (dlog_psi(x + h2).unwrap() - dlog_psi(x - h2).unwrap()) / (2.0 * h2);
            let d2 = d2log_psi(x).unwrap();
            assert!((d2 - fd2).abs() < 1e-5 * d2.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn monotone_around_the_maximum() {
        let up: Vec<f64> = (0..1000).map(|i| 0.01 + 0.56 * i as f64 / 999.0).collect();
        for w in up.windows(2) {
            assert!(psi(w[1]).unwrap() > psi(w[0]).unwrap());
        }
        let down: Vec<f64> = (0..1000).map(|i| 0.59 + 2.41 * i as f64 / 999.0).collect();
        for w in down.windows(2) {
            assert!(psi(w[1]).unwrap() < psi(w[0]).unwrap());
        }
    }

    #[test]
    fn profile_invariants() {
        let prof = PsiProfile::build(500, 3.0, 1e-10).unwrap();
        assert!(prof.x1 < prof.x0);
        assert!(prof.psi_x1 > prof.psi_x0);
        for s in &prof.eval_grid {
            assert!(s.psi > 0.0);
            assert!((s.psi - s.log_psi.exp()).abs() <= 1e-12 * s.psi);
        }
    }
}

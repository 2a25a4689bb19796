//! The two-point bound chain and the search for the exponent range on which
//! the symmetric split of the unit circle is optimal.
//!
//! With `τ_k = √γ α_k` and `α₁ + α₂ = 2`, the functional is bounded by
//! `(4/γ) [Ψ(τ₁) Ψ(τ₂)]^{1/2}`. The symmetric point `α₁ = α₂ = 1` gives
//! `E(γ) = (4/γ) Ψ(√γ)`, attained by the circular domains of the extremal
//! quadratic differential.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{evaluate_j, sample_configuration, Configuration, SamplerParams};
use crate::specfun;
use crate::wos::derive_seed;

/// Relative tie tolerance between the asymmetric and symmetric maxima.
pub const TIE_TOLERANCE: f64 = 1e-14;
/// γ-interval searched by [`gamma_threshold`].
pub const GAMMA_SEARCH_INTERVAL: (f64, f64) = (0.5, 1.5);

/// `[r(B₀,0) r(B_∞,∞)]^{τ²} r(B₁,a₁) r(B₂,a₂) / |a₁ − a₂|²` for a two-point configuration.
pub fn evaluate_k(tau: f64, config: &Configuration) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!(
            "tau must be finite and >= 0, got {tau}"
        )));
    }
    config.validate()?;
    if config.ray.n() != 2 {
        return Err(Error::Configuration(format!(
            "K is defined for two points, got {}",
            config.ray.n()
        )));
    }
    let pts = config.ray.points();
    let outer = (config.radius_at_zero()? * config.radius_at_infinity()?).powf(tau * tau);
    Ok(outer * config.radius_at(0)? * config.radius_at(1)? / (pts[0] - pts[1]).norm_sqr())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "gamma must be finite and > 0, got {gamma}"
        )));
    }
    Ok(())
}

/// The pair `(α_small, α_big)` with `α_big = max(α₁, 2 − α₁)` and
/// `α_small = 2 − α_big`. Both subtractions are exact, so `α₁` and `2 − α₁`
/// give bitwise identical pairs.
fn split(alpha1: f64) -> Result<(f64, f64)> {
    if !(alpha1 > 0.0 && alpha1 < 2.0) {
        return Err(Error::Domain(format!(
            "alpha1 must lie in (0, 2), got {alpha1}"
        )));
    }
    let big = if alpha1 >= 1.0 { alpha1 } else { 2.0 - alpha1 };
    Ok((2.0 - big, big))
}

/// `(4/γ) [Ψ(τ₁) Ψ(τ₂)]^{1/2}` with `τ_k = √γ α_k`, `α₂ = 2 − α₁`.
pub fn chain_bound(gamma: f64, alpha1: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let (small, big) = split(alpha1)?;
    let s = gamma.sqrt();
    let log_prod = specfun::log_psi(s * small)? + specfun::log_psi(s * big)?;
    Ok(4.0 / gamma * (0.5 * log_prod).exp())
}

/// The other algebraic form: `4 α₁ α₂ [Φ(τ₁) Φ(τ₂)]^{1/2}`.
pub fn chain_bound_phi_form(gamma: f64, alpha1: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let (small, big) = split(alpha1)?;
    let s = gamma.sqrt();
    let log_prod = specfun::log_phi(s * small)? + specfun::log_phi(s * big)?;
    Ok(4.0 * small * big * (0.5 * log_prod).exp())
}

/// `E(γ) = (4/γ) Ψ(√γ)`, the chain at the symmetric point.
pub fn symmetric_value(gamma: f64) -> Result<f64> {
    chain_bound(gamma, 1.0)
}

/// `Ψ(√γ α₁) Ψ(√γ (2 − α₁)) − Ψ(√γ)²`.
pub fn excess(gamma: f64, alpha1: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let (small, big) = split(alpha1)?;
    let s = gamma.sqrt();
    let sym = specfun::psi(s)?;
    Ok(specfun::psi(s * small)? * specfun::psi(s * big)? - sym * sym)
}

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section_max<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Outcome of maximizing the excess over `α₁` at a fixed `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaScan {
    pub gamma: f64,
    /// Maximizer in `(0, 1]`; its mirror `2 − α` gives the same value.
    pub best_alpha: f64,
    pub max_excess: f64,
    /// `Ψ(√γ)²`, the symmetric product.
    pub symmetric_product: f64,
    pub symmetric_wins: bool,
}

/// Grid `α_j = 2j/N`, `j = 1..N−1`, followed by golden-section refinement
/// around the best grid point and around `α₁ = 1`.
pub fn scan_alpha(gamma: f64, grid_size: usize) -> Result<AlphaScan> {
    check_gamma(gamma)?;
    if grid_size < 4 {
        return Err(Error::Domain(format!(
            "alpha grid needs at least 4 cells, got {grid_size}"
        )));
    }
    let h = 2.0 / grid_size as f64;
    let values: Vec<f64> = (1..grid_size)
        .into_par_iter()
        .map(|j| excess(gamma, j as f64 * h))
        .collect::<Result<_>>()?;
    // first maximum in index order
    let (mut best_j, mut best) = (1, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            best_j = i + 1;
        }
    }
    let mut best_alpha = best_j as f64 * h;
    let ex = |a: f64| excess(gamma, a).unwrap_or(f64::NEG_INFINITY);
    let lo = ((best_j as f64 - 1.0) * h).max(0.5 * h);
    let hi = ((best_j as f64 + 1.0) * h).min(2.0 - 0.5 * h);
    let (a, v) = golden_section_max(ex, lo, hi, 1e-10);
    if v > best {
        best = v;
        best_alpha = a;
    }
    let (a, v) = golden_section_max(ex, 1.0 - 2.0 * h, 1.0 + 2.0 * h, 1e-10);
    if v > best {
        best = v;
        best_alpha = a;
    }
    let sym = specfun::psi(gamma.sqrt())?;
    let symmetric_product = sym * sym;
    Ok(AlphaScan {
        gamma,
        best_alpha: best_alpha.min(2.0 - best_alpha),
        max_excess: best,
        symmetric_product,
        symmetric_wins: best <= TIE_TOLERANCE * symmetric_product,
    })
}

/// How the threshold search ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdStatus {
    /// The predicate changes sign inside the search interval.
    Bracketed,
    /// The symmetric split wins on the whole interval; `gamma_hat` is its upper end.
    HoldsOnWholeInterval,
    /// The symmetric split already loses at the lower end.
    FailsAtLowerEnd,
}

/// Result of [`gamma_threshold`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub gamma_hat: f64,
    pub grid_size: usize,
    pub refine_tol: f64,
    /// Asymmetric maximizer at the smallest evaluated γ where the symmetric split loses.
    pub witness_alpha: Option<f64>,
    pub witness_excess: Option<f64>,
    /// Every evaluated `(γ, symmetric_wins)`, sorted by γ.
    pub comparisons: Vec<(f64, bool)>,
    pub status: ThresholdStatus,
}

/// Bisects on γ ∈ [0.5, 1.5] for the largest γ with
/// `max_α excess(γ, α) ≤ 0` (ties within [`TIE_TOLERANCE`] count as wins).
pub fn gamma_threshold(grid_size: usize, refine_tol: f64) -> Result<ThresholdReport> {
    if grid_size < 1000 {
        return Err(Error::Domain(format!(
            "grid_size must be >= 1000, got {grid_size}"
        )));
    }
    if !(refine_tol > 0.0 && refine_tol <= 1e-4) {
        return Err(Error::Domain(format!(
            "refine_tol must lie in (0, 1e-4], got {refine_tol}"
        )));
    }
    let (mut lo, mut hi) = GAMMA_SEARCH_INTERVAL;
    let mut comparisons = Vec::new();
    let mut record = |scan: &AlphaScan| comparisons.push((scan.gamma, scan.symmetric_wins));

    let at_lo = scan_alpha(lo, grid_size)?;
    record(&at_lo);
    let at_hi = scan_alpha(hi, grid_size)?;
    record(&at_hi);

    let mut witness = None;
    let status = if !at_lo.symmetric_wins {
        witness = Some(at_lo);
        ThresholdStatus::FailsAtLowerEnd
    } else if at_hi.symmetric_wins {
        ThresholdStatus::HoldsOnWholeInterval
    } else {
        witness = Some(at_hi);
        while hi - lo > refine_tol {
            let mid = 0.5 * (lo + hi);
            let scan = scan_alpha(mid, grid_size)?;
            record(&scan);
            if scan.symmetric_wins {
                lo = mid;
            } else {
                hi = mid;
                witness = Some(scan);
            }
        }
        ThresholdStatus::Bracketed
    };
    comparisons.sort_by(|a, b| a.0.total_cmp(&b.0));
    let gamma_hat = match status {
        ThresholdStatus::Bracketed => lo,
        ThresholdStatus::HoldsOnWholeInterval => hi,
        ThresholdStatus::FailsAtLowerEnd => lo,
    };
    Ok(ThresholdReport {
        gamma_hat,
        grid_size,
        refine_tol,
        witness_alpha: witness.map(|w| w.best_alpha),
        witness_excess: witness.map(|w| w.max_excess),
        comparisons,
        status,
    })
}

/// Outcome of a randomized check of `J(γ) ≤ E(γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub gamma: f64,
    pub samples: usize,
    pub seed: u64,
    pub bound: f64,
    pub violations: usize,
    /// Largest `J / E` seen and the index of the sample attaining it.
    pub max_ratio: f64,
    pub worst_sample: usize,
}

/// Evaluates `J(γ)` on `samples` random disjoint configurations (sample `i`
/// drawn from `derive_seed(seed, i)`) and counts those exceeding `E(γ)`
/// by more than a relative `1e-12`.
pub fn verify_random(
    gamma: f64,
    samples: usize,
    seed: u64,
    params: &SamplerParams,
) -> Result<VerifyReport> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let bound = symmetric_value(gamma)?;
    let ratios = (0..samples)
        .into_par_iter()
        .map(|i| {
            let cfg = sample_configuration(derive_seed(seed, i as u64), params)?;
            Ok(evaluate_j(gamma, &cfg)? / bound)
        })
        .collect::<Result<Vec<f64>>>()?;
    let violations = ratios.iter().filter(|&&r| r > 1.0 + 1e-12).count();
    let (worst_sample, max_ratio) =
        ratios
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, r)| if r > acc.1 { (i, r) } else { acc },
            );
    Ok(VerifyReport {
        gamma,
        samples,
        seed,
        bound,
        violations,
        max_ratio,
        worst_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_configuration, ElementaryDomain, RaySystem, SamplerParams};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // direct power form of Ψ, independent of the log-space evaluation
    fn psi_direct(x: f64) -> f64 {
        x.powf(2.0 * x * x + 2.0)
            * (1.0 - x).abs().powf(-(1.0 - x) * (1.0 - x))
            * (1.0 + x).powf(-(1.0 + x) * (1.0 + x))
    }

    #[test]
    fn k_at_tau_zero() {
        let cfg = Configuration::new(
            RaySystem::two_point(PI).unwrap(),
            ElementaryDomain::disk(c(0.0, 0.0), 4e-4),
            ElementaryDomain::exterior_disk(c(0.0, 0.0), 3.0),
            vec![
                ElementaryDomain::disk(c(1.0, 0.0), 1.0 - 1e-3),
                ElementaryDomain::disk(c(-1.0, 0.0), 1.0 - 1e-3),
            ],
        );
        // unit disks at ±1 touch at 0, leaving no room for B₀; shrink them slightly
        let cfg = cfg.unwrap();
        let k = evaluate_k(0.0, &cfg).unwrap();
        assert!((k - (1.0 - 1e-3f64).powi(2) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn k_for_half_radius_disks() {
        let cfg = Configuration::new(
            RaySystem::two_point(PI).unwrap(),
            ElementaryDomain::disk(c(0.0, 0.0), 0.5),
            ElementaryDomain::exterior_disk(c(0.0, 0.0), 1.5),
            vec![
                ElementaryDomain::disk(c(1.0, 0.0), 0.45),
                ElementaryDomain::disk(c(-1.0, 0.0), 0.45),
            ],
        )
        .unwrap();
        let expected = (0.5 * (1.0 / 1.5)) * (0.45 * 0.45) / 4.0;
        assert!((evaluate_k(1.0, &cfg).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn k_is_below_phi_on_random_configurations() {
        let p = SamplerParams::default();
        for seed in 0..2000 {
            let cfg = sample_configuration(seed, &p).unwrap();
            for tau in [0.5, 1.0, 1.5] {
                assert!(evaluate_k(tau, &cfg).unwrap() <= specfun::phi(tau).unwrap());
            }
        }
    }

    #[test]
    fn chain_symmetric_point() {
        let g: f64 = 0.65;
        let expected = 4.0 / g * psi_direct(g.sqrt());
        assert!((chain_bound(g, 1.0).unwrap() - expected).abs() < 1e-13 * expected);
        for g in [0.1, 0.65, 1.0] {
            assert!((symmetric_value(g).unwrap() - chain_bound(g, 1.0).unwrap()).abs() <= 1e-14);
        }
        assert!((symmetric_value(0.25).unwrap() - 16.0 * psi_direct(0.5)).abs() < 1e-13);
    }

    #[test]
    fn chain_forms_agree() {
        for (g, a) in [(0.5, 0.7), (1.0, 1.3)] {
            let x = chain_bound(g, a).unwrap();
            let y = chain_bound_phi_form(g, a).unwrap();
            assert!((x - y).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn chain_and_excess_are_symmetric() {
        for a in [0.013, 0.3, 0.7, 0.999_999, 1.25, 1.9] {
            assert_eq!(
                chain_bound(0.8, a).unwrap(),
                chain_bound(0.8, 2.0 - a).unwrap()
            );
            assert_eq!(
                excess(0.8, a).unwrap().to_bits(),
                excess(0.8, 2.0 - a).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn chain_through_tau_one() {
        // γ = 1, α₁ = 1 puts both τ at the removable singularity
        assert!((chain_bound(1.0, 1.0).unwrap() - 4.0 / 16.0).abs() < 1e-15);
        assert!(chain_bound(1.0, 0.0).is_err());
        assert!(chain_bound(1.0, 2.0).is_err());
        assert!(chain_bound(0.0, 1.0).is_err());
    }

    #[test]
    fn excess_signs() {
        assert_eq!(excess(0.3, 1.0).unwrap(), 0.0);
        for j in 1..10_000 {
            let a = 2.0 * j as f64 / 10_000.0;
            assert!(excess(0.65, a).unwrap() <= 0.0, "alpha = {a}");
        }
        let some_positive = (1..1000).any(|j| excess(2.0, 2.0 * j as f64 / 1000.0).unwrap() > 0.0);
        assert!(some_positive);
    }

    #[test]
    fn small_gamma_predicate_holds() {
        assert!(scan_alpha(0.1, 1000).unwrap().symmetric_wins);
        assert!(!scan_alpha(1.0, 1000).unwrap().symmetric_wins);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v <= 0.0 && v > -1e-17);
    }

    #[test]
    fn threshold_report() {
        let rep = gamma_threshold(1000, 1e-4).unwrap();
        assert_eq!(rep.status, ThresholdStatus::Bracketed);
        assert!(rep.gamma_hat >= 0.65);
        // monotone predicate over the recorded comparisons
        let first_loss = rep.comparisons.iter().position(|c| !c.1).unwrap();
        assert!(rep.comparisons[..first_loss].iter().all(|c| c.1));
        assert!(rep.comparisons[first_loss..].iter().all(|c| !c.1));
        assert!(rep.comparisons[first_loss].0 - rep.gamma_hat <= 1e-4 + 1e-12);
        let w = rep.witness_alpha.unwrap();
        assert!(w > 0.0 && w < 1.0);
        assert!(gamma_threshold(999, 1e-4).is_err());
        assert!(gamma_threshold(1000, 1e-3).is_err());
    }

    #[test]
    fn predicate_changes_sign_once() {
        let signs: Vec<bool> = (0..50)
            .map(|i| {
                scan_alpha(0.5 + i as f64 / 49.0, 1000)
                    .unwrap()
                    .symmetric_wins
            })
            .collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
        assert!(signs[0]);
    }

    #[test]
    fn chain_below_symmetric_value_up_to_threshold() {
        let g_hat = gamma_threshold(1000, 1e-4).unwrap().gamma_hat;
        for g in [0.1, 0.3, 0.5, 0.65, g_hat] {
            let e = symmetric_value(g).unwrap();
            for j in 1..1000 {
                let v = chain_bound(g, 2.0 * j as f64 / 1000.0).unwrap();
                assert!(v <= e + 1e-12 * e, "gamma {g}, j {j}");
            }
        }
    }
}

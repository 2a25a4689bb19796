//! Walk-on-spheres estimation of inner radii.
//!
//! For a domain `B` and an interior point `a`, the constant term of the Green
//! function gives `log r(B, a) = E[log |W - a|]`, where `W` is the exit point
//! of Brownian motion started at `a`. Exit points are sampled by jumping to a
//! uniform point of the largest circle about the current position that fits
//! in the domain, until the walk is within `epsilon` of the boundary.

mod elementary;
mod polyline;

pub use elementary::ElementaryOracle;
pub use polyline::{closest_on_segment, winding_number, Loop, PolylineDomain, JUMP_SLACK};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of jumps of a single walk.
pub const MAX_STEPS: usize = 1_000_000;
/// Walks are reduced in fixed chunks of this size, in chunk order.
const CHUNK: usize = 1024;

/// Geometric queries a walk needs.
pub trait DomainOracle: Sync {
    /// Distance to the boundary together with the closest boundary point.
    fn nearest_boundary(&self, z: Complex64) -> (f64, Complex64);

    fn distance_to_boundary(&self, z: Complex64) -> f64 {
        self.nearest_boundary(z).0
    }

    /// Radius of a disk about `z` inside the domain, with a boundary point at
    /// most `(1 + η)` times that far for a small fixed `η`. Walks only need
    /// this; the default is the exact nearest point.
    fn jump_radius(&self, z: Complex64) -> (f64, Complex64) {
        self.nearest_boundary(z)
    }

    fn contains(&self, z: Complex64) -> bool;

    /// Radius of a disk about 0 containing the domain; infinite when unbounded.
    fn bounding_radius(&self) -> f64;

    /// Radius at which an unbounded domain has been cut off, if any.
    fn truncation(&self) -> Option<f64> {
        None
    }
}

/// Domains that contain infinity and can be mapped by `w -> 1/w`.
pub trait Invert {
    type Image: DomainOracle;
    fn invert(&self) -> Result<Self::Image>;
}

/// Walk-on-spheres parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WosParams {
    pub walks: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl WosParams {
    pub fn new(walks: usize, epsilon: f64, seed: u64) -> Self {
        WosParams {
            walks,
            epsilon,
            seed,
        }
    }

    /// Same walk budget on an independent stream family.
    pub fn reseeded(&self, salt: u64) -> Self {
        WosParams {
            seed: derive_seed(self.seed, salt),
            ..*self
        }
    }
}

/// Independent child seed for `(seed, salt)`.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A Monte Carlo inner-radius estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    /// Delta-method standard error of `value`: `value * log_std_error`.
    pub std_error: f64,
    /// Mean of the per-walk terms `log |exit - a|`.
    pub log_value: f64,
    pub log_std_error: f64,
    pub walks: usize,
    pub epsilon_shell: f64,
    pub seed: u64,
    pub mean_steps: f64,
    pub truncation_radius: Option<f64>,
}

/// Exit point of one walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkExit {
    pub point: Complex64,
    pub steps: usize,
}

/// Per-walk generator: ChaCha keyed by the seed, one stream per walk index.
pub fn walk_rng(seed: u64, walk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walk);
    rng
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Runs one walk from `start` until it is within `epsilon` of the boundary and
/// returns the closest boundary point.
pub fn wos_exit<D, R>(oracle: &D, start: Complex64, epsilon: f64, rng: &mut R) -> Result<WalkExit>
where
    D: DomainOracle + ?Sized,
    R: Rng + ?Sized,
{
    check_epsilon(epsilon)?;
    if !oracle.contains(start) {
        return Err(Error::Domain(format!(
            "walk start {start} is not inside the domain"
        )));
    }
    let first = oracle.jump_radius(start);
    walk_from(oracle, start, first, epsilon, rng)
}

fn walk_from<D, R>(
    oracle: &D,
    start: Complex64,
    first: (f64, Complex64),
    epsilon: f64,
    rng: &mut R,
) -> Result<WalkExit>
where
    D: DomainOracle + ?Sized,
    R: Rng + ?Sized,
{
    let mut z = start;
    let (mut dist, mut closest) = first;
    for steps in 0..MAX_STEPS {
        if dist <= epsilon {
            return Ok(WalkExit {
                point: closest,
                steps,
            });
        }
        let theta = 2.0 * PI * rng.gen::<f64>();
        z += Complex64::from_polar(dist, theta);
        (dist, closest) = oracle.jump_radius(z);
    }
    Err(Error::NonConvergence { steps: MAX_STEPS })
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    steps: f64,
}

impl Moments {
    fn push(&mut self, x: f64, steps: usize) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
        self.steps += steps as f64;
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
            steps: self.steps + o.steps,
        }
    }
}

/// `r(B, a) ≈ exp(mean log |exit - a|)`, bit-for-bit reproducible for given
/// `(seed, walks, epsilon)` under any thread count.
pub fn estimate_inner_radius<D>(
    oracle: &D,
    point: Complex64,
    params: &WosParams,
) -> Result<McEstimate>
where
    D: DomainOracle + ?Sized,
{
    let WosParams {
        walks,
        epsilon,
        seed,
    } = *params;
    check_epsilon(epsilon)?;
    if walks < 2 {
        return Err(Error::Domain(format!("need at least 2 walks, got {walks}")));
    }
    if !oracle.contains(point) {
        return Err(Error::Domain(format!("{point} is not inside the domain")));
    }
    if !oracle.bounding_radius().is_finite() {
        return Err(Error::Domain(
            "unbounded domain: use estimate_inner_radius_at_infinity or a truncated oracle".into(),
        ));
    }
    let first = oracle.jump_radius(point);
    let chunks = walks.div_ceil(CHUNK);
    let partial: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::default();
            for w in c * CHUNK..((c + 1) * CHUNK).min(walks) {
                let mut rng = walk_rng(seed, w as u64);
                let exit = walk_from(oracle, point, first, epsilon, &mut rng)?;
                m.push((exit.point - point).norm().ln(), exit.steps);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for m in partial {
        total = total.merge(m?);
    }
    let sd = (total.m2 / (total.n - 1.0)).sqrt();
    let log_std_error = sd / total.n.sqrt();
    let value = total.mean.exp();
    Ok(McEstimate {
        value,
        std_error: value * log_std_error,
        log_value: total.mean,
        log_std_error,
        walks,
        epsilon_shell: epsilon,
        seed,
        mean_steps: total.steps / total.n,
        truncation_radius: oracle.truncation(),
    })
}

/// `r(B, ∞)` through the image of `B` under `w -> 1/w`, estimated at 0.
pub fn estimate_inner_radius_at_infinity<D: Invert>(
    domain: &D,
    params: &WosParams,
) -> Result<McEstimate> {
    let image = domain.invert()?;
    estimate_inner_radius(&image, Complex64::new(0.0, 0.0), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ElementaryDomain;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_disk() -> ElementaryOracle {
        ElementaryOracle::new(ElementaryDomain::disk(c(0.0, 0.0), 1.0))
    }

    #[test]
    fn exit_points_lie_within_epsilon() {
        let o = ElementaryOracle::new(ElementaryDomain::disk(c(0.2, 0.1), 0.8));
        let mut rng = walk_rng(5, 0);
        for _ in 0..200 {
            let e = wos_exit(&o, c(0.3, 0.0), 1e-3, &mut rng).unwrap();
            assert!(((e.point - c(0.2, 0.1)).norm() - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn exit_angle_is_uniform_from_center() {
        // Kolmogorov-Smirnov against the uniform law, 1% level
        let o = unit_disk();
        let n = 100_000;
        let mut angles: Vec<f64> = (0..n)
            .map(|w| {
                let e = wos_exit(&o, c(0.0, 0.0), 1e-4, &mut walk_rng(11, w)).unwrap();
                (e.point.arg() + PI) / (2.0 * PI)
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        let d = angles
            .iter()
            .enumerate()
            .map(|(i, &u)| ((i + 1) as f64 / n as f64 - u).max(u - i as f64 / n as f64))
            .fold(0.0, f64::max);
        assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn step_count_grows_logarithmically() {
        // off-center: from the center the first jump lands on the boundary
        let o = unit_disk();
        let mean_steps = |eps: f64| {
            let n = 20_000u64;
            let total: usize = (0..n)
                .map(|w| {
                    wos_exit(&o, c(0.3, 0.0), eps, &mut walk_rng(3, w))
                        .unwrap()
                        .steps
                })
                .sum();
            total as f64 / n as f64
        };
        let s: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&e| mean_steps(e)).collect();
        let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
        assert!(d1 > 0.0 && d2 > 0.0);
        // equal increments per decade of epsilon
        assert!((d1 / d2 - 1.0).abs() < 0.25, "steps {s:?}");
    }

    #[test]
    fn disk_radius_estimates() {
        let est =
            estimate_inner_radius(&unit_disk(), c(0.0, 0.0), &WosParams::new(200_000, 1e-4, 1))
                .unwrap();
        assert!((est.value - 1.0).abs() < 0.01);
        let d2 = ElementaryOracle::new(ElementaryDomain::disk(c(0.0, 0.0), 2.0));
        let est =
            estimate_inner_radius(&d2, c(1.0, 0.0), &WosParams::new(200_000, 1e-4, 2)).unwrap();
        assert!((est.value - 1.5).abs() < 0.015);
    }

    #[test]
    fn truncated_half_plane() {
        let hp = ElementaryOracle::truncated(
            ElementaryDomain::half_plane(c(0.0, 0.0), c(1.0, 0.0)),
            1e3,
        );
        let est =
            estimate_inner_radius(&hp, c(1.0, 0.0), &WosParams::new(50_000, 1e-4, 3)).unwrap();
        assert_eq!(est.truncation_radius, Some(1e3));
        assert!((est.value - 2.0).abs() < 0.04, "{}", est.value);
    }

    #[test]
    fn radius_at_infinity_by_inversion() {
        for (center, rho, tol) in [
            (c(0.0, 0.0), 2.0, 0.01),
            (c(0.0, 0.0), 1.0, 0.01),
            (c(0.3, 0.0), 2.0, 0.015),
        ] {
            let ext = ElementaryDomain::exterior_disk(center, rho);
            let est =
                estimate_inner_radius_at_infinity(&ext, &WosParams::new(100_000, 1e-4, 4)).unwrap();
            assert!(
                (est.value - 1.0 / rho).abs() < tol / rho,
                "{center} {rho}: {}",
                est.value
            );
        }
        let around_zero = ElementaryDomain::exterior_disk(c(3.0, 0.0), 1.0);
        assert!(matches!(
            estimate_inner_radius_at_infinity(&around_zero, &WosParams::new(1000, 1e-4, 4)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn determinism_across_thread_counts() {
        let o = ElementaryOracle::new(ElementaryDomain::disk(c(0.1, 0.0), 1.3));
        let p = WosParams::new(5000, 1e-4, 99);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_inner_radius(&o, c(0.4, 0.2), &p).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn consistency_over_repetitions() {
        let cases = [
            (ElementaryDomain::disk(c(0.0, 0.0), 1.0), c(0.3, -0.4)),
            (ElementaryDomain::disk(c(1.0, 1.0), 0.5), c(1.2, 1.1)),
        ];
        for (dom, a) in cases {
            let truth = crate::geometry::inner_radius_analytic(&dom, a.into()).unwrap();
            let o = ElementaryOracle::new(dom);
            let inside = (0..100)
                .filter(|&s| {
                    let e = estimate_inner_radius(&o, a, &WosParams::new(2000, 1e-4, s)).unwrap();
                    (e.value - truth).abs() <= 3.0 * e.std_error
                })
                .count();
            assert!(inside >= 99, "{inside}/100 within 3 sigma");
        }
    }

    #[test]
    fn epsilon_bias_is_below_noise() {
        let o = unit_disk();
        let a = estimate_inner_radius(&o, c(0.2, 0.0), &WosParams::new(20_000, 1e-3, 8)).unwrap();
        let b = estimate_inner_radius(&o, c(0.2, 0.0), &WosParams::new(20_000, 5e-4, 8)).unwrap();
        assert!((a.value - b.value).abs() < a.std_error);
    }

    #[test]
    fn bad_inputs() {
        let o = unit_disk();
        assert!(estimate_inner_radius(&o, c(2.0, 0.0), &WosParams::new(1000, 1e-4, 0)).is_err());
        assert!(estimate_inner_radius(&o, c(0.0, 0.0), &WosParams::new(1000, 0.0, 0)).is_err());
        let ext = ElementaryOracle::new(ElementaryDomain::exterior_disk(c(0.0, 0.0), 1.0));
        assert!(estimate_inner_radius(&ext, c(3.0, 0.0), &WosParams::new(1000, 1e-4, 0)).is_err());
    }
}

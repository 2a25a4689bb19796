use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::domain::{inner_radius_analytic, ElementaryDomain, Point};
use crate::error::{Error, Result};

/// Minimum closed-disk gap required between any two domains of a configuration.
pub const DISJOINT_GAP: f64 = 1e-6;

/// Points on the unit circle with strictly increasing arguments starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RaySystemShape", into = "RaySystemShape")]
pub struct RaySystem {
    angles: Vec<f64>,
    points: Vec<Complex64>,
    alphas: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RaySystemShape {
    angles: Vec<f64>,
    #[serde(default)]
    points: Vec<Complex64>,
    #[serde(default)]
    alphas: Vec<f64>,
}

impl TryFrom<RaySystemShape> for RaySystem {
    type Error = Error;
    fn try_from(shape: RaySystemShape) -> Result<Self> {
        RaySystem::from_angles(&shape.angles)
    }
}

impl From<RaySystem> for RaySystemShape {
    fn from(r: RaySystem) -> Self {
        RaySystemShape {
            angles: r.angles,
            points: r.points,
            alphas: r.alphas,
        }
    }
}

impl RaySystem {
    /// Builds the system from arguments `0 = θ₁ < θ₂ < … < θₙ < 2π`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        if angles.len() < 2 {
            return Err(Error::Configuration(
                "a ray system needs n >= 2 points".into(),
            ));
        }
        if angles[0] != 0.0 {
            return Err(Error::Configuration(format!(
                "first angle must be 0, got {}",
                angles[0]
            )));
        }
        if angles.windows(2).any(|w| !(w[0] < w[1])) || !(angles[angles.len() - 1] < 2.0 * PI) {
            return Err(Error::Configuration(format!(
                "angles must increase strictly within [0, 2pi): {angles:?}"
            )));
        }
        let n = angles.len();
        let points = angles
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect();
        let alphas = (0..n)
            .map(|k| {
                let next = if k + 1 < n { angles[k + 1] } else { 2.0 * PI };
                (next - angles[k]) / PI
            })
            .collect();
        Ok(RaySystem {
            angles: angles.to_vec(),
            points,
            alphas,
        })
    }

    /// Two points `1` and `e^{iθ}`.
    pub fn two_point(theta: f64) -> Result<Self> {
        Self::from_angles(&[0.0, theta])
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `θ_k` for a 0-based sector index, with `θ_n = 2π` closing the last sector.
    pub(crate) fn sector_bounds(&self, k: usize) -> (f64, f64) {
        let lo = self.angles[k];
        let hi = if k + 1 < self.n() {
            self.angles[k + 1]
        } else {
            2.0 * PI
        };
        (lo, hi)
    }
}

/// Domains `B₀, B₁, …, Bₙ, B_∞` attached to `0, a₁, …, aₙ, ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub ray: RaySystem,
    pub domain_at_zero: ElementaryDomain,
    pub domain_at_infinity: ElementaryDomain,
    pub domains: Vec<ElementaryDomain>,
}

impl Configuration {
    pub fn new(
        ray: RaySystem,
        domain_at_zero: ElementaryDomain,
        domain_at_infinity: ElementaryDomain,
        domains: Vec<ElementaryDomain>,
    ) -> Result<Self> {
        let cfg = Configuration {
            ray,
            domain_at_zero,
            domain_at_infinity,
            domains,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every marked point inside its domain and all closures pairwise disjoint.
    pub fn validate(&self) -> Result<()> {
        if self.domains.len() != self.ray.n() {
            return Err(Error::Configuration(format!(
                "{} domains for {} points",
                self.domains.len(),
                self.ray.n()
            )));
        }
        if !matches!(
            self.domain_at_infinity,
            ElementaryDomain::ExteriorDisk { .. }
        ) {
            return Err(Error::Configuration(
                "the domain at infinity must be an exterior disk".into(),
            ));
        }
        for d in self.all_domains() {
            d.validate()
                .map_err(|e| Error::Configuration(e.to_string()))?;
        }
        for (d, p) in self.marked() {
            if !d.contains(p) {
                return Err(Error::Configuration(format!("{p:?} is not inside {d:?}")));
            }
        }
        let all: Vec<_> = self.all_domains().collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let gap = all[i].separation(all[j]);
                if !(gap > 0.0) {
                    return Err(Error::Configuration(format!(
                        "domains {i} and {j} overlap (gap {gap})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn all_domains(&self) -> impl Iterator<Item = &ElementaryDomain> {
        std::iter::once(&self.domain_at_zero)
            .chain(self.domains.iter())
            .chain(std::iter::once(&self.domain_at_infinity))
    }

    fn marked(&self) -> impl Iterator<Item = (&ElementaryDomain, Point)> {
        std::iter::once((
            &self.domain_at_zero,
            Point::Finite(Complex64::new(0.0, 0.0)),
        ))
        .chain(
            self.domains
                .iter()
                .zip(self.ray.points().iter().map(|&a| Point::Finite(a))),
        )
        .chain(std::iter::once((&self.domain_at_infinity, Point::Infinity)))
    }

    /// Smallest pairwise gap between domain closures.
    pub fn min_gap(&self) -> f64 {
        let all: Vec<_> = self.all_domains().collect();
        let mut gap = f64::INFINITY;
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                gap = gap.min(all[i].separation(all[j]));
            }
        }
        gap
    }

    pub fn radius_at_zero(&self) -> Result<f64> {
        inner_radius_analytic(&self.domain_at_zero, Complex64::new(0.0, 0.0).into())
    }

    pub fn radius_at_infinity(&self) -> Result<f64> {
        inner_radius_analytic(&self.domain_at_infinity, Point::Infinity)
    }

    pub fn radius_at(&self, k: usize) -> Result<f64> {
        inner_radius_analytic(&self.domains[k], self.ray.points()[k].into())
    }

    /// The whole configuration rotated by `e^{iφ}` (no longer normalized to θ₁ = 0).
    pub fn rotated_domains(
        &self,
        phi: f64,
    ) -> (
        ElementaryDomain,
        ElementaryDomain,
        Vec<ElementaryDomain>,
        Vec<Complex64>,
    ) {
        let rot = Complex64::from_polar(1.0, phi);
        (
            self.domain_at_zero.rotated(phi),
            self.domain_at_infinity.rotated(phi),
            self.domains.iter().map(|d| d.rotated(phi)).collect(),
            self.ray.points().iter().map(|&a| a * rot).collect(),
        )
    }
}

/// `[r(B₀,0) r(B_∞,∞)]^γ ∏ r(B_k, a_k)`.
pub fn evaluate_j(gamma: f64, config: &Configuration) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "gamma must be finite and >= 0, got {gamma}"
        )));
    }
    config.validate()?;
    let mut prod = (config.radius_at_zero()? * config.radius_at_infinity()?).powf(gamma);
    for k in 0..config.ray.n() {
        prod *= config.radius_at(k)?;
    }
    Ok(prod)
}

/// Size ranges for randomly drawn two-point configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    /// Radii of the disks around `a₁`, `a₂` are drawn from `[min_radius, max_radius]`.
    pub min_radius: f64,
    pub max_radius: f64,
    /// Radius of the disk around 0 is drawn from `[min_radius, max_zero_radius]`.
    pub max_zero_radius: f64,
    /// Relative offset of each disk center from its marked point, in units of its radius.
    pub max_offset: f64,
    /// Extra room between the outermost disk and the boundary of `B_∞`.
    pub max_outer_slack: f64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            min_radius: 0.05,
            max_radius: 0.7,
            max_zero_radius: 0.9,
            max_offset: 0.8,
            max_outer_slack: 1.0,
        }
    }
}

/// Maximum number of rejected draws before sampling gives up.
pub const SAMPLING_ATTEMPTS: usize = 10_000;

/// Draws a random disjoint configuration for `a₁ = 1`, `a₂ = e^{iθ}`, θ ~ U[π/2, 3π/2].
pub fn sample_configuration(seed: u64, params: &SamplerParams) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SAMPLING_ATTEMPTS {
        let theta = rng.gen_range(0.5 * PI..=1.5 * PI);
        let ray = RaySystem::two_point(theta)?;
        let mut disk_around = |a: Complex64, max_r: f64| {
            let r = rng.gen_range(params.min_radius..=max_r);
            let off = Complex64::from_polar(
                r * params.max_offset * rng.gen::<f64>(),
                2.0 * PI * rng.gen::<f64>(),
            );
            ElementaryDomain::disk(a + off, r)
        };
        let b0 = disk_around(Complex64::new(0.0, 0.0), params.max_zero_radius);
        let domains: Vec<_> = ray
            .points()
            .iter()
            .map(|&a| disk_around(a, params.max_radius))
            .collect();

        let outer_center =
            Complex64::from_polar(0.2 * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
        let reach = std::iter::once(&b0)
            .chain(domains.iter())
            .map(|d| match *d {
                ElementaryDomain::Disk { center, radius } => {
                    (center - outer_center).norm() + radius
                }
                _ => unreachable!(),
            })
            .fold(0.0, f64::max);
        let outer_radius = reach + 2.0 * DISJOINT_GAP + params.max_outer_slack * rng.gen::<f64>();
        let binf = ElementaryDomain::exterior_disk(outer_center, outer_radius);

        let cfg = Configuration {
            ray,
            domain_at_zero: b0,
            domain_at_infinity: binf,
            domains,
        };
        if cfg.validate().is_ok() && cfg.min_gap() > DISJOINT_GAP {
            return Ok(cfg);
        }
    }
    Err(Error::Sampling {
        attempts: SAMPLING_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reference_config() -> Configuration {
        Configuration::new(
            RaySystem::two_point(PI).unwrap(),
            ElementaryDomain::disk(c(0.0, 0.0), 0.5),
            ElementaryDomain::exterior_disk(c(0.0, 0.0), 1.5),
            vec![
                ElementaryDomain::disk(c(1.0, 0.0), 0.45),
                ElementaryDomain::disk(c(-1.0, 0.0), 0.45),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ray_system_invariants() {
        let r = RaySystem::from_angles(&[0.0, 1.0, 4.0]).unwrap();
        assert!((r.alphas().iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert!(r.points().iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        assert!(RaySystem::from_angles(&[0.1, 1.0]).is_err());
        assert!(RaySystem::from_angles(&[0.0, 1.0, 1.0]).is_err());
        assert!(RaySystem::from_angles(&[0.0, 7.0]).is_err());
        assert!(RaySystem::from_angles(&[0.0]).is_err());
    }

    #[test]
    fn j_for_reference_configuration() {
        let cfg = reference_config();
        let expected = (0.5f64 * (2.0 / 3.0)).powf(0.5) * 0.45 * 0.45;
        let j = evaluate_j(0.5, &cfg).unwrap();
        assert!((j - expected).abs() < 1e-15);
        assert!((evaluate_j(0.0, &cfg).unwrap() - 0.45 * 0.45).abs() < 1e-15);
    }

    #[test]
    fn j_is_rotation_invariant() {
        let cfg = sample_configuration(3, &SamplerParams::default()).unwrap();
        let j = evaluate_j(0.65, &cfg).unwrap();
        for phi in [0.3, 1.7, -2.5] {
            let (b0, binf, bs, pts) = cfg.rotated_domains(phi);
            let mut rot = (inner_radius_analytic(&b0, c(0.0, 0.0).into()).unwrap()
                * inner_radius_analytic(&binf, Point::Infinity).unwrap())
            .powf(0.65);
            for (d, a) in bs.iter().zip(pts) {
                rot *= inner_radius_analytic(d, a.into()).unwrap();
            }
            assert!((rot - j).abs() <= 1e-14 * j);
        }
    }

    #[test]
    fn invalid_configurations() {
        let ray = RaySystem::two_point(PI).unwrap();
        let overlapping = Configuration::new(
            ray.clone(),
            ElementaryDomain::disk(c(0.0, 0.0), 0.6),
            ElementaryDomain::exterior_disk(c(0.0, 0.0), 1.5),
            vec![
                ElementaryDomain::disk(c(1.0, 0.0), 0.5),
                ElementaryDomain::disk(c(-1.0, 0.0), 0.3),
            ],
        );
        assert!(matches!(overlapping, Err(Error::Configuration(_))));
        let misplaced = Configuration::new(
            ray.clone(),
            ElementaryDomain::disk(c(0.0, 0.0), 0.3),
            ElementaryDomain::exterior_disk(c(0.0, 0.0), 1.5),
            vec![
                ElementaryDomain::disk(c(1.0, 0.5), 0.3),
                ElementaryDomain::disk(c(-1.0, 0.0), 0.3),
            ],
        );
        assert!(matches!(misplaced, Err(Error::Configuration(_))));
        let bad_inf = Configuration::new(
            ray,
            ElementaryDomain::disk(c(0.0, 0.0), 0.3),
            ElementaryDomain::disk(c(5.0, 0.0), 1.0),
            vec![
                ElementaryDomain::disk(c(1.0, 0.0), 0.3),
                ElementaryDomain::disk(c(-1.0, 0.0), 0.3),
            ],
        );
        assert!(matches!(bad_inf, Err(Error::Configuration(_))));
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let p = SamplerParams::default();
        let a = sample_configuration(42, &p).unwrap();
        let b = sample_configuration(42, &p).unwrap();
        assert_eq!(a, b);
        for seed in 0..200 {
            let cfg = sample_configuration(seed, &p).unwrap();
            cfg.validate().unwrap();
            assert!(cfg.min_gap() > DISJOINT_GAP);
            let theta = cfg.ray.angles()[1];
            assert!((0.5 * PI..=1.5 * PI).contains(&theta));
        }
    }

    #[test]
    fn impossible_sampling_reports_error() {
        let p = SamplerParams {
            min_radius: 1.2,
            max_radius: 1.3,
            max_zero_radius: 1.3,
            max_offset: 0.0,
            max_outer_slack: 0.0,
        };
        assert!(matches!(
            sample_configuration(1, &p),
            Err(Error::Sampling { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let cfg = reference_config();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"disk\":{\"center\":[1.0,0.0],\"radius\":0.45}"));
        let back: Configuration = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let broken = text.replace("3.14159", "9.14159");
        assert!(serde_json::from_str::<Configuration>(&broken).is_err());
    }
}

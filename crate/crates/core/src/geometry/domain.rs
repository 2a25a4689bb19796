use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};

/// A point of the extended plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Finite(z)
    }
}

/// Domains with a closed-form inner radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementaryDomain {
    /// `|w - center| < radius`
    Disk { center: Complex64, radius: f64 },
    /// `Re((w - boundary_point) * conj(normal)) > 0`
    HalfPlane {
        boundary_point: Complex64,
        normal: Complex64,
    },
    /// `|w - center| > radius`, together with the point at infinity.
    ExteriorDisk { center: Complex64, radius: f64 },
}

impl ElementaryDomain {
    pub fn disk(center: Complex64, radius: f64) -> Self {
        ElementaryDomain::Disk { center, radius }
    }

    /// Half-plane on the side of `normal`; the normal is rescaled to unit length.
    pub fn half_plane(boundary_point: Complex64, normal: Complex64) -> Self {
        ElementaryDomain::HalfPlane {
            boundary_point,
            normal: normal / normal.norm(),
        }
    }

    pub fn exterior_disk(center: Complex64, radius: f64) -> Self {
        ElementaryDomain::ExteriorDisk { center, radius }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ElementaryDomain::Disk { center, radius }
            | ElementaryDomain::ExteriorDisk { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) || !finite(center) {
                    return domain_err(format!("invalid radius {radius} or center {center}"));
                }
            }
            ElementaryDomain::HalfPlane {
                boundary_point,
                normal,
            } => {
                if !finite(boundary_point) || !((normal.norm() - 1.0).abs() < 1e-12) {
                    return domain_err(format!(
                        "half-plane normal must have unit modulus, got |n| = {}",
                        normal.norm()
                    ));
                }
            }
        }
        Ok(())
    }

    /// Signed distance to the boundary: positive inside, negative outside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        match *self {
            ElementaryDomain::Disk { center, radius } => radius - (z - center).norm(),
            ElementaryDomain::ExteriorDisk { center, radius } => (z - center).norm() - radius,
            ElementaryDomain::HalfPlane {
                boundary_point,
                normal,
            } => ((z - boundary_point) * normal.conj()).re,
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, p: Point) -> bool {
        match p {
            Point::Finite(z) => self.signed_distance(z) > 0.0,
            Point::Infinity => matches!(self, ElementaryDomain::ExteriorDisk { .. }),
        }
    }

    /// Rotation `w -> e^{i phi} w` of the whole domain.
    pub fn rotated(&self, phi: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phi);
        match *self {
            ElementaryDomain::Disk { center, radius } => ElementaryDomain::Disk {
                center: center * rot,
                radius,
            },
            ElementaryDomain::ExteriorDisk { center, radius } => ElementaryDomain::ExteriorDisk {
                center: center * rot,
                radius,
            },
            ElementaryDomain::HalfPlane {
                boundary_point,
                normal,
            } => ElementaryDomain::HalfPlane {
                boundary_point: boundary_point * rot,
                normal: normal * rot,
            },
        }
    }

    /// Gap between two domains: non-negative exactly when their closures are
    /// disjoint, `-inf` when they always overlap.
    pub fn separation(&self, other: &ElementaryDomain) -> f64 {
        use ElementaryDomain::*;
        match (*self, *other) {
            (
                Disk {
                    center: c1,
                    radius: r1,
                },
                Disk {
                    center: c2,
                    radius: r2,
                },
            ) => (c1 - c2).norm() - r1 - r2,
            (
                Disk {
                    center: c,
                    radius: r,
                },
                ExteriorDisk {
                    center: e,
                    radius: big,
                },
            )
            | (
                ExteriorDisk {
                    center: e,
                    radius: big,
                },
                Disk {
                    center: c,
                    radius: r,
                },
            ) => big - (c - e).norm() - r,
            (
                Disk { center, radius },
                HalfPlane {
                    boundary_point,
                    normal,
                },
            )
            | (
                HalfPlane {
                    boundary_point,
                    normal,
                },
                Disk { center, radius },
            ) => -((center - boundary_point) * normal.conj()).re - radius,
            (
                HalfPlane {
                    boundary_point: p1,
                    normal: n1,
                },
                HalfPlane {
                    boundary_point: p2,
                    normal: n2,
                },
            ) => {
                if (n1 + n2).norm() > 1e-12 {
                    f64::NEG_INFINITY
                } else {
                    // hp1 = {s > s1}, hp2 = {s < s2} along n1
                    (p1 * n1.conj()).re - (p2 * n1.conj()).re
                }
            }
            (ExteriorDisk { .. }, ExteriorDisk { .. })
            | (ExteriorDisk { .. }, HalfPlane { .. })
            | (HalfPlane { .. }, ExteriorDisk { .. }) => f64::NEG_INFINITY,
        }
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Inner (conformal) radius of an elementary domain at an interior point.
///
/// At infinity the radius is taken through `w -> 1/w`, which gives `1/rho`
/// for the exterior of a disk of radius `rho`.
pub fn inner_radius_analytic(domain: &ElementaryDomain, point: Point) -> Result<f64> {
    domain.validate()?;
    if !domain.contains(point) {
        return domain_err(format!("{point:?} is not an interior point of {domain:?}"));
    }
    let r = match (*domain, point) {
        (ElementaryDomain::Disk { center, radius }, Point::Finite(a)) => {
            (radius * radius - (a - center).norm_sqr()) / radius
        }
        (ElementaryDomain::HalfPlane { .. }, Point::Finite(a)) => 2.0 * domain.signed_distance(a),
        (ElementaryDomain::ExteriorDisk { radius, .. }, Point::Infinity) => 1.0 / radius,
        // Inversion about `a` maps the exterior onto the exterior of a disk of
        // radius rho / (|a-c|^2 - rho^2); the radius at `a` is the radius at
        // infinity of that image.
        (ElementaryDomain::ExteriorDisk { center, radius }, Point::Finite(a)) => {
            ((a - center).norm_sqr() - radius * radius) / radius
        }
        (_, Point::Infinity) => {
            return Err(Error::Domain(
                "only an exterior disk contains infinity".into(),
            ))
        }
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_radii() {
        let unit = ElementaryDomain::disk(c(0.0, 0.0), 1.0);
        assert_eq!(
            inner_radius_analytic(&unit, c(0.0, 0.0).into()).unwrap(),
            1.0
        );
        let d2 = ElementaryDomain::disk(c(0.0, 0.0), 2.0);
        assert!((inner_radius_analytic(&d2, c(1.0, 0.0).into()).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn exterior_radius_at_infinity_by_inversion() {
        let ext = ElementaryDomain::exterior_disk(c(0.0, 0.0), 1.0);
        assert_eq!(inner_radius_analytic(&ext, Point::Infinity).unwrap(), 1.0);
        for (center, rho) in [(c(0.3, 0.0), 2.0), (c(-0.1, 0.2), 1.5)] {
            let ext = ElementaryDomain::exterior_disk(center, rho);
            // image of |w - c| = rho under 1/w: a disk containing 0
            let d = rho * rho - center.norm_sqr();
            let img = ElementaryDomain::disk(-center.conj() / d, rho / d);
            let oracle = inner_radius_analytic(&img, c(0.0, 0.0).into()).unwrap();
            let r = inner_radius_analytic(&ext, Point::Infinity).unwrap();
            assert!((r - 1.0 / rho).abs() < 1e-14);
            assert!((r - oracle).abs() < 1e-14);
        }
    }

    #[test]
    fn exterior_radius_at_finite_point() {
        // inversion about a: w -> 1/(w - a), radius at infinity of the image
        let (center, rho, a) = (c(0.2, -0.1), 0.7, c(1.5, 0.4));
        let ext = ElementaryDomain::exterior_disk(center, rho);
        let dd = (center - a).norm_sqr();
        let image_radius = rho / (dd - rho * rho);
        let r = inner_radius_analytic(&ext, a.into()).unwrap();
        assert!((r - 1.0 / image_radius).abs() < 1e-13);
    }

    #[test]
    fn half_plane_radius() {
        let hp = ElementaryDomain::half_plane(c(0.0, 0.0), c(1.0, 0.0));
        assert!((inner_radius_analytic(&hp, c(1.0, 0.3).into()).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn points_outside_are_rejected() {
        let unit = ElementaryDomain::disk(c(0.0, 0.0), 1.0);
        assert!(inner_radius_analytic(&unit, c(1.0, 0.0).into()).is_err());
        assert!(inner_radius_analytic(&unit, Point::Infinity).is_err());
        let bad = ElementaryDomain::Disk {
            center: c(0.0, 0.0),
            radius: -1.0,
        };
        assert!(inner_radius_analytic(&bad, c(0.0, 0.0).into()).is_err());
    }

    #[test]
    fn nested_disks_are_monotone() {
        let a = c(0.3, -0.2);
        let mut prev = 0.0;
        for rho in [0.5, 0.8, 1.0, 2.0, 5.0] {
            let r =
                inner_radius_analytic(&ElementaryDomain::disk(c(0.1, 0.0), rho), a.into()).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn separations() {
        let d1 = ElementaryDomain::disk(c(1.0, 0.0), 0.5);
        let d2 = ElementaryDomain::disk(c(-1.0, 0.0), 0.5);
        assert!((d1.separation(&d2) - 1.0).abs() < 1e-15);
        let ext = ElementaryDomain::exterior_disk(c(0.0, 0.0), 2.0);
        assert!((d1.separation(&ext) - 0.5).abs() < 1e-15);
        let hp = ElementaryDomain::half_plane(c(2.0, 0.0), c(1.0, 0.0));
        assert!((d1.separation(&hp) - 0.5).abs() < 1e-15);
        let hq = ElementaryDomain::half_plane(c(0.0, 0.0), c(-1.0, 0.0));
        assert!((hp.separation(&hq) - 2.0).abs() < 1e-15);
        assert_eq!(ext.separation(&hp), f64::NEG_INFINITY);
    }
}

use num_complex::Complex64;

use super::{DomainOracle, Invert};
use crate::error::{Error, Result};
use crate::geometry::ElementaryDomain;

/// An elementary domain as a walk oracle. Unbounded shapes are intersected
/// with the disk of radius `truncation` about their reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryOracle {
    pub domain: ElementaryDomain,
    truncation: Option<f64>,
}

impl ElementaryOracle {
    pub fn new(domain: ElementaryDomain) -> Self {
        ElementaryOracle {
            domain,
            truncation: None,
        }
    }

    pub fn truncated(domain: ElementaryDomain, radius: f64) -> Self {
        let truncation = match domain {
            ElementaryDomain::Disk { .. } => None,
            _ => Some(radius),
        };
        ElementaryOracle { domain, truncation }
    }

    fn anchor(&self) -> Complex64 {
        match self.domain {
            ElementaryDomain::Disk { center, .. }
            | ElementaryDomain::ExteriorDisk { center, .. } => center,
            ElementaryDomain::HalfPlane { boundary_point, .. } => boundary_point,
        }
    }
}

impl DomainOracle for ElementaryOracle {
    fn nearest_boundary(&self, z: Complex64) -> (f64, Complex64) {
        let (d, p) = match self.domain {
            ElementaryDomain::Disk { center, radius }
            | ElementaryDomain::ExteriorDisk { center, radius } => {
                let v = z - center;
                let r = v.norm();
                let dir = if r > 0.0 {
                    v / r
                } else {
                    Complex64::new(1.0, 0.0)
                };
                ((r - radius).abs(), center + dir * radius)
            }
            ElementaryDomain::HalfPlane {
                boundary_point,
                normal,
            } => {
                let s = ((z - boundary_point) * normal.conj()).re;
                (s.abs(), z - normal * s)
            }
        };
        match self.truncation {
            Some(big) => {
                let v = z - self.anchor();
                let r = v.norm();
                let outer = (big - r).abs();
                if outer < d {
                    let dir = if r > 0.0 {
                        v / r
                    } else {
                        Complex64::new(1.0, 0.0)
                    };
                    (outer, self.anchor() + dir * big)
                } else {
                    (d, p)
                }
            }
            None => (d, p),
        }
    }

    fn contains(&self, z: Complex64) -> bool {
        self.domain.signed_distance(z) > 0.0
            && self
                .truncation
                .is_none_or(|big| (z - self.anchor()).norm() < big)
    }

    fn bounding_radius(&self) -> f64 {
        match (self.domain, self.truncation) {
            (ElementaryDomain::Disk { center, radius }, _) => center.norm() + radius,
            (_, Some(big)) => self.anchor().norm() + big,
            (_, None) => f64::INFINITY,
        }
    }

    fn truncation(&self) -> Option<f64> {
        self.truncation
    }
}

impl Invert for ElementaryDomain {
    type Image = ElementaryOracle;

    fn invert(&self) -> Result<ElementaryOracle> {
        match *self {
            ElementaryDomain::ExteriorDisk { center, radius } => {
                let d = radius * radius - center.norm_sqr();
                if !(d > 0.0) {
                    return Err(Error::Domain(format!(
                        "0 is not separated from infinity by |w - {center}| = {radius}"
                    )));
                }
                Ok(ElementaryOracle::new(ElementaryDomain::disk(
                    -center.conj() / d,
                    radius / d,
                )))
            }
            _ => Err(Error::Domain(format!("{self:?} does not contain infinity"))),
        }
    }
}

impl Invert for ElementaryOracle {
    type Image = ElementaryOracle;

    fn invert(&self) -> Result<ElementaryOracle> {
        self.domain.invert()
    }
}

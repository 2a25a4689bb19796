//! Numerical toolkit for the extremal problem on products of inner radii of
//! non-overlapping domains attached to `0`, two points of the unit circle and
//! `∞`.
//!
//! - [`specfun`]: the majorants Φ and Ψ = x²Φ, evaluated in log space.
//! - [`critpoints`]: bracketed location of the maximizer and curvature zero of Ψ.
//! - [`bound`]: the product bound chain, the symmetric extremal value and the
//!   search for the largest exponent at which the symmetric split wins.
//! - [`geometry`]: elementary domains with closed-form radii, configurations,
//!   the functional `J`, and the separating power maps.
//! - [`wos`]: walk-on-spheres inner-radius estimates.
//! - [`quaddiff`]: the quadratic differential whose circular domains are extremal.

pub mod bound;
pub mod critpoints;
pub mod error;
pub mod geometry;
pub mod quaddiff;
pub mod specfun;
pub mod wos;

pub use error::{Error, Result};

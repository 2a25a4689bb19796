//! Ray systems, elementary domains and configurations, the functional `J`,
//! and the separating power maps that split a configuration by sectors.

mod config;
mod domain;
mod separation;

pub use config::{
    evaluate_j, sample_configuration, Configuration, RaySystem, SamplerParams, DISJOINT_GAP,
    SAMPLING_ATTEMPTS,
};
pub use domain::{inner_radius_analytic, ElementaryDomain, Point};
pub use separation::{
    check_separation_bounds, separated_system, separating_map, transform_boundary, CheckStatus,
    InequalityCheck, SeparatedDomain, SeparatedSystem, SeparationReport,
};

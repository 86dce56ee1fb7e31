//! Distance between a global Maxwellian and arbitrary gas distributions.
//!
//! The central quantity is the functional `F(f) = -E(f)/T + S(f)` (energy
//! weighted by `λ = -1/T`, plus entropy `S = -∫∫ f log f`). Among fields with
//! the same total density it is maximized by the global Maxwellian `M` at
//! rest, which makes `dist{M, f} = F(M) - F(f)` a non-negative distance.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`grid`] | midpoint velocity grid, spatial cells, sphere rules |
//! | [`dist`] | fields, Maxwellians, moments, entropy, field files |
//! | [`functionals`] | `F`, `dist{M,f}`, Bregman form, closed forms |
//! | [`projection`] | nearest Maxwellian in a moment class, dual-Newton oracle |
//! | [`collision`] | σ-transform, brute-force `Q`, BGK relaxation |
//! | [`maxent`] | discrete maximum-entropy solver shared by the above |
//!
//! With the default `parallel` feature the data-parallel loops (collision
//! operator nodes, BGK cells, batch distances) run on rayon. Results are
//! identical with or without it.

pub mod collision;
pub mod dist;
pub mod error;
pub mod format;
pub mod functionals;
pub mod grid;
pub mod maxent;
pub mod par;
pub mod projection;

pub use collision::{
    bgk_step, invariant_residuals, q_evaluate, q_evaluate_with, relax, sigma_transform, CollisionPair,
    InvariantResiduals, QOptions, RelaxationTrace,
};
pub use dist::{
    entropy, local_maxwellian, maxwellian_eval, moments, DistributionField, MaxwellianParams,
    MomentSummary,
};
pub use error::{Error, Result};
pub use functionals::{
    bregman_integrand, dist_maxwellians_closed, distance, distance_bregman, distance_many,
    f_maxwellian_closed, functional_f, functional_f_integrand, projection_bound, DistanceMethod,
    DistanceReport, ProjectionBound,
};
pub use grid::{Interpolation, SpatialDomain, SphereRule, VelocityGrid};
pub use projection::{
    dist_lower_bound_over_class, project, project_oracle, sample_class_member, MomentClass,
    Multipliers, OracleResult, ProjectionResult,
};

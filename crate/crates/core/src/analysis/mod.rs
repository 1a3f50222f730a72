//! Decay functionals and inequality audits on simulation output.

pub mod audit;
pub mod compare;
pub mod cone;
pub mod functionals;
pub mod series;

pub use audit::{
    fit_constants, fit_stability, inequality_audit, AuditReport, ConstantDrift, FittedConstants, InequalityAudit,
    AUDIT_TOLERANCE, CONSTANT_NAMES, DEFAULT_BETA, STABILITY_TOLERANCE,
};
pub use compare::{linear_compare, LinearComparison};
pub use cone::{exterior_cone_check, ConeCheck, CONE_TOLERANCE};
pub use functionals::{
    decay_functionals, l6_decay_report, spacetime_norms, DecayFunctionals, L6DecayReport, SpacetimeNorms,
};
pub use series::{DecayRecord, DecaySeries, SeriesMeta, CSV_COLUMNS};

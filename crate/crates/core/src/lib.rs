//! Two-photon intensity correlations from a chain of independent
//! single-photon emitters, and searches over detector phases for violations
//! of the CH74 and homogeneous Bell-Wigner inequalities.

pub mod cli;
pub mod closed_form;
pub mod emitter;
pub mod error;
pub mod golden;
pub mod inequalities;
pub mod oracle;
pub mod search;
pub mod verify;

pub use closed_form::{
    g2_orthogonal, g2_parallel, joint_probability, normalization_constant, visibility,
    visibility_numeric, CorrelationSeries, CosineSeries, HeavisideConvention,
};
pub use emitter::{
    build_chain, phase_from_geometry, DetectorSetting, EmitterChain, PhysicalConstants,
    PolarizerSetting,
};
pub use error::{Error, Result};
pub use inequalities::{
    bw_scalar, ch74_value, ch74_value_reduced_visibility, hbw_scalar, hbw_value, Functional,
    InequalityEvaluator, PhaseTuple4,
};
pub use oracle::{branch_weight, g2_oracle, g2_oracle_unpolarized};
pub use search::{
    candidate_phases, maximize_ch74, minimize_hbw, sweep, InequalityResult, SearchConfig,
};

//! Graph-of-blocks assemblies: shell counts, scale schedules, matched truncations,
//! volume and completeness series, the curvature-budget planner, and the
//! curvature-growth/volume-decay diagnostic.

mod graph;
mod growth;
mod schedule;
mod series;
mod truncation;

pub use graph::{GraphKind, GraphPlan};
pub use growth::{
    cgvd_diagnostic, displacement_growth_check, growth_truncation_planner, margulis_threshold, mu1_from_env,
    neck_inflation, verify_plan, CgvdSample, ChainModel, ChainSegment, DisplacementVerdict, GrowthParams,
    GrowthPlan, Verification, MU1_ENV,
};
pub use schedule::{cyclic_cover_schedule, Lambda, ScaleSchedule};
pub use series::{
    classify_series, completeness_series, total_volume, Comparison, CompletenessVerdict, DiameterRule,
    SeriesVerdict, VolumeVerdict, MAX_CHECKPOINT, P_MARGIN,
};
pub use truncation::{
    boundary_coefficient, matching_truncation, plan_truncations, BlockTemplate, EdgeKind, GluedEdge, LevelPlan,
    Port, TruncationOptions, TruncationPlan, MATCHING_TOLERANCE,
};

use thiserror::Error;

use crate::cusps::CuspError;
use crate::numerics::quad::QuadratureError;
use crate::profiles::ProfileError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("invalid assembly input: {0}")]
    Invalid(String),
    #[error("side condition (m−1)/m < 1−ε fails for d = {d}, m = {m}: {lhs} ≥ {rhs}")]
    SideCondition { d: u32, m: u32, lhs: f64, rhs: f64 },
    #[error("truncation depth {t} lies before the exponential tail, which starts at {knot}")]
    Tail { t: f64, knot: f64 },
    #[error("no comparison series applies within {terms} terms (last exponent estimate {exponent})")]
    Inconclusive { terms: u64, exponent: f64 },
    #[error("curvature budget violated at r = {r}: b_p(r) = {curvature:e} ≥ f(r) = {budget:e}")]
    BudgetInfeasible { r: f64, curvature: f64, budget: f64 },
    #[error("radius {r} is outside the model range [{lo}, {hi}]")]
    Horizon { r: f64, lo: f64, hi: f64 },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Cusp(#[from] CuspError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

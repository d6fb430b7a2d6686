//! Shared fixtures for the benchmarks.

use cuspforge::assembly::GrowthParams;
use cuspforge::{
    make_decay_profile, CuspModel, DecayMode, GeodesicState, GraphSurfaceMetric, ProfileFunction, RevolutionSurface,
    Surface, Truncation,
};

/// Convex decay profile with a cubic-decay power tail, started at `a = −1`.
pub fn decay_profile() -> ProfileFunction {
    make_decay_profile(-1.0, DecayMode::CubicDecay).expect("a < 0 gives a valid decay profile")
}

/// Evaluation points spread over the blend region and the tail.
pub fn sample_points(n: usize) -> Vec<f64> {
    (0..n).map(|i| -1.0 + 30.0 * i as f64 / n as f64).collect()
}

/// An unbounded three-dimensional cusp on the decay profile.
pub fn decay_cusp() -> CuspModel {
    CuspModel::new(3, 1.0, decay_profile(), -1.0, Truncation::Unbounded).expect("valid cusp")
}

/// The surface of revolution `φ(z) = 1 + e^{−z}` over `z ≥ −3`.
pub fn cusp_surface() -> Surface {
    Surface::Revolution(RevolutionSurface::cusp(1.0, -3.0).expect("valid surface"))
}

/// A ray that climbs the cusp surface without turning back.
pub fn escaping_ray() -> GeodesicState {
    GeodesicState::new(0.0, 0.0, 0.45f64.asin())
}

pub fn softplus_surface() -> GraphSurfaceMetric {
    GraphSurfaceMetric::default_invisibility()
}

pub fn planner_params() -> GrowthParams {
    GrowthParams::default()
}

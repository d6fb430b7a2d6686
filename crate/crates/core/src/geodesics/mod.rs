//! Geodesics on surfaces of revolution `(z, θ) ↦ (φ(z)cos θ, φ(z)sin θ, z)` and on graph
//! surfaces `z = g(x) − g(y)`, with the connecting-geodesic solver and the experiments
//! built on it.
//!
//! Directions are angles in an orthonormal frame: against the meridian `∂z` on a surface
//! of revolution, against `∂x` (Gram–Schmidt with `∂y`) on a graph surface.

mod graph;
mod plot;
mod revolution;

pub use graph::{
    gauss_bonnet_triangle, invisibility_witness, GaussBonnetReport, InvisibilityReport, InvisibilityRow, WitnessOptions,
    FAR_ANGLE_SLACK,
};
pub use plot::{svg_plot, trajectory_csv, PlotSeries};
pub use revolution::{
    trapped_ray_check, visibility_experiment, RevolutionSurface, TrappedRay, VisibilityReport, VisibilityRow,
    ENDPOINT_SLACK,
};

use thiserror::Error;

use crate::curvature::{CurvatureError, GraphSurfaceMetric};
use crate::numerics::{DormandPrince, OdeError};
use crate::profiles::ProfileError;

pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error("tolerance {0:e} is outside [1e-12, 1e-4]")]
    Tolerance(f64),
    #[error("step size underflow at s = {s} (h = {h:e})")]
    StepFailure { s: f64, h: f64 },
    #[error("trajectory left the chart at s = {s}")]
    DomainExit { s: f64 },
    #[error("no sign change of the shooting miss over {samples} initial angles")]
    NoBracket { samples: usize },
    #[error("shooting stopped with endpoint error {error:e} above {tol:e}")]
    ToleranceFailure { error: f64, tol: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

impl GeodesicError {
    fn from_ode(e: OdeError, s: f64) -> Self {
        match e {
            OdeError::StepUnderflow { t, h } => GeodesicError::StepFailure { s: t, h },
            OdeError::NonFinite { t } => GeodesicError::DomainExit { s: t },
            OdeError::StepBudget(_) => GeodesicError::StepFailure { s, h: 0.0 },
        }
    }
}

/// Local error target per unit of requested tolerance. Local errors accumulate along the
/// path, so the step controller works well below `tol` to keep global errors near it.
const LOCAL_TOL_FACTOR: f64 = 1e-2;
const LOCAL_TOL_FLOOR: f64 = 1e-15;

pub(crate) fn stepper(tol: f64) -> DormandPrince {
    DormandPrince::new((tol * LOCAL_TOL_FACTOR).max(LOCAL_TOL_FLOOR))
}

pub(crate) fn check_tol(tol: f64) -> Result<(), GeodesicError> {
    if (MIN_TOL..=MAX_TOL).contains(&tol) {
        Ok(())
    } else {
        Err(GeodesicError::Tolerance(tol))
    }
}

/// Position `(u, v)` (either `(z, θ)` or `(x, y)`), direction angle `alpha`, arc length `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub alpha: f64,
}

impl GeodesicState {
    pub fn new(u: f64, v: f64, alpha: f64) -> Self {
        Self { s: 0.0, u, v, alpha }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// One sample per accepted step, ordered by arc length.
    pub samples: Vec<GeodesicState>,
    /// Coordinate velocity `(du/ds, dv/ds)` at each sample.
    pub velocities: Vec<[f64; 2]>,
    pub accepted: usize,
    pub rejected: usize,
    /// `ρ·sin α` at the start (surfaces of revolution only).
    pub clairaut: Option<f64>,
    /// Largest deviation of `ρ·sin α` from its starting value.
    pub drift: f64,
    /// Largest deviation of the metric speed from 1.
    pub speed_drift: f64,
}

impl Trajectory {
    pub fn end(&self) -> &GeodesicState {
        self.samples.last().expect("trajectories are never empty")
    }

    pub fn length(&self) -> f64 {
        self.end().s - self.samples[0].s
    }

    /// Points along the path at `sub` equal subdivisions of every step, by cubic Hermite
    /// interpolation of positions and velocities.
    pub fn dense_points(&self, sub: usize) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.samples.len() * sub);
        for i in 0..self.samples.len() - 1 {
            let (a, b) = (&self.samples[i], &self.samples[i + 1]);
            let (va, vb) = (self.velocities[i], self.velocities[i + 1]);
            let h = b.s - a.s;
            for j in 0..sub {
                let t = j as f64 / sub as f64;
                let (h00, h10, h01, h11) = (
                    (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
                    t * (1.0 - t) * (1.0 - t),
                    t * t * (3.0 - 2.0 * t),
                    t * t * (t - 1.0),
                );
                out.push([
                    h00 * a.u + h10 * h * va[0] + h01 * b.u + h11 * h * vb[0],
                    h00 * a.v + h10 * h * va[1] + h01 * b.v + h11 * h * vb[1],
                ]);
            }
        }
        let e = self.end();
        out.push([e.u, e.v]);
        out
    }
}

/// A surface on which geodesics can be integrated.
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Revolution(RevolutionSurface),
    Graph(GraphSurfaceMetric),
}

/// Integrate the geodesic from `start` over signed arc length `length`.
pub fn integrate_geodesic(surface: &Surface, start: GeodesicState, length: f64, tol: f64) -> Result<Trajectory, GeodesicError> {
    check_tol(tol)?;
    if !length.is_finite() {
        return Err(GeodesicError::Invalid(format!("arc length {length} must be finite")));
    }
    match surface {
        Surface::Revolution(r) => r.trace(&start, length, tol, f64::INFINITY),
        Surface::Graph(g) => graph::trace(g, &start, length, tol, f64::INFINITY),
    }
}

/// A solved two-point problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSegment {
    pub alpha0: f64,
    pub length: f64,
    pub trajectory: Trajectory,
    /// Surface distance between the computed endpoint and the target.
    pub endpoint_error: f64,
    pub iterations: usize,
}

/// Geodesic from `p` to `q` (coordinates `(u, v)`) by shooting on the initial direction.
pub fn connect_geodesic(surface: &Surface, p: (f64, f64), q: (f64, f64), tol: f64) -> Result<GeodesicSegment, GeodesicError> {
    check_tol(tol)?;
    if p == q {
        return Err(GeodesicError::Invalid("endpoints coincide".into()));
    }
    match surface {
        Surface::Revolution(r) => r.connect(p, q, tol),
        Surface::Graph(g) => graph::connect(g, p, q, tol),
    }
}

//! Numeric models of negatively curved warped-product cusps, block assemblies, and
//! surfaces, with the verification routines that check their curvature, volume,
//! completeness, and geodesic behaviour.

pub mod numerics;
pub mod profiles;
pub mod curvature;
pub mod cusps;
pub mod assembly;
pub mod geodesics;

pub use profiles::{
    make_decay_profile, parse_profile, scale_profile, smooth_kink, DecayMode, Form, Jet, ProfileError,
    ProfileFunction, Segment,
};
pub use curvature::{CurvatureError, DiagonalMetric3D, GraphSurfaceMetric, WarpedCuspMetric};
pub use cusps::{CuspError, CuspModel, Truncation};
pub use assembly::{AssemblyError, ChainModel, GraphKind, GraphPlan, ScaleSchedule};
pub use geodesics::{GeodesicError, GeodesicState, RevolutionSurface, Surface, Trajectory};

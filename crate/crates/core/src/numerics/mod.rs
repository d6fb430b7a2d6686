//! Numerical building blocks shared by the geometry modules.

pub mod ode;
pub mod quad;
pub mod roots;
pub mod sum;

pub use ode::{DormandPrince, Flow, OdeError, OdeStats};
pub use quad::{QuadResult, QuadratureError, Rect};
pub use sum::{compensated_sum, order_independent_sum, pairwise_sum, CompensatedSum};

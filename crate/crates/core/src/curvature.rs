//! Sectional and Gaussian curvature for warped cusp metrics, diagonal 3-metrics with
//! coefficients depending on one coordinate, and graph surfaces `z = g(x) − g(y)`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::numerics::quad::{integrate_rect, QuadratureError, Rect};
use crate::profiles::{scale_profile, Form, ProfileError, ProfileFunction, Segment};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Domain(#[from] ProfileError),
    #[error("r = {r} is within the axis exclusion zone (b(r) = {b:e})")]
    Axis { r: f64, b: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid metric: {0}")]
    Invalid(String),
}

/// Sectional curvatures of the two coordinate plane families of a warped cusp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspCurvature {
    /// Planes containing `∂t`.
    pub radial: f64,
    /// Planes tangent to the cross-section.
    pub tangential: f64,
}

/// `K_radial = −f''/f` and `K_tangential = −(1 + f'²)/f²` at `t`.
pub fn cusp_sectional_curvatures(f: &ProfileFunction, t: f64) -> Result<CuspCurvature, CurvatureError> {
    let j = f.jet(t)?;
    Ok(CuspCurvature {
        radial: -j.d2 / j.value,
        tangential: -(1.0 + j.d1 * j.d1) / (j.value * j.value),
    })
}

/// `dt² + 4f(t)²/(1 − r²)²·Σ dx_i²` on `[domain of f] × (unit disc in ℝⁿ⁻¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedCuspMetric {
    n: usize,
    profile: ProfileFunction,
}

impl WarpedCuspMetric {
    pub fn new(n: usize, profile: ProfileFunction) -> Result<Self, CurvatureError> {
        if n < 2 {
            return Err(CurvatureError::Invalid(format!("dimension {n} must be at least 2")));
        }
        if profile.is_generator() {
            return Err(CurvatureError::Invalid("warping profile must be a positive profile".into()));
        }
        Ok(Self { n, profile })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> &ProfileFunction {
        &self.profile
    }

    /// Conformal factor of the cross-section at Euclidean radius `r < 1`.
    pub fn conformal_factor(r: f64) -> f64 {
        2.0 / (1.0 - r * r)
    }

    /// Whether tangential planes exist (the cross-section has dimension at least 2).
    pub fn has_tangential_planes(&self) -> bool {
        self.n >= 3
    }

    /// The metric multiplied by `s²`, written in its own arc-length coordinate `s·t`.
    pub fn homothetic(&self, s: f64) -> Result<Self, CurvatureError> {
        if !(s > 0.0) {
            return Err(CurvatureError::Invalid(format!("homothety factor {s} must be positive")));
        }
        Ok(Self {
            n: self.n,
            profile: scale_profile(&self.profile, 1.0 / s, 0.0)?,
        })
    }
}

/// Extremes of one plane family over a sampled region.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBounds {
    pub family: String,
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
}

/// Sampled curvature values with per-family extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub region: String,
    pub resolution: usize,
    pub families: Vec<FamilyBounds>,
    /// `(coordinate, family index, value)` in sampling order.
    pub samples: Vec<(f64, usize, f64)>,
}

impl CurvatureReport {
    /// Lower bound valid for every tangent 2-plane in the region.
    pub fn global_min(&self) -> f64 {
        self.families.iter().map(|f| f.min).fold(f64::INFINITY, f64::min)
    }

    /// Upper bound valid for every tangent 2-plane in the region.
    pub fn global_max(&self) -> f64 {
        self.families.iter().map(|f| f.max).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn family(&self, name: &str) -> Option<&FamilyBounds> {
        self.families.iter().find(|f| f.family == name)
    }

    /// CSV with columns `t_or_xy,K_family,value` and trailing `min`/`max` rows per family.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_or_xy,K_family,value\n");
        for &(t, fam, v) in &self.samples {
            let _ = writeln!(out, "{t:.17e},{},{v:.17e}", self.families[fam].family);
        }
        for f in &self.families {
            let _ = writeln!(out, "min,{},{:.17e}", f.family, f.min);
            let _ = writeln!(out, "max,{},{:.17e}", f.family, f.max);
        }
        out
    }
}

/// Scan both plane families on a uniform grid over `[t_lo, t_hi]`.
///
/// Every mixed curvature-tensor component vanishes for this metric, so the curvature of
/// any 2-plane is a convex combination of the radial and tangential values; the global
/// extremes of the report therefore bound all planes at the sampled points.
pub fn plane_curvature_bounds(
    m: &WarpedCuspMetric,
    t_lo: f64,
    t_hi: f64,
    resolution: usize,
) -> Result<CurvatureReport, CurvatureError> {
    if resolution < 2 {
        return Err(CurvatureError::Invalid(format!("resolution {resolution} must be at least 2")));
    }
    if !(t_lo <= t_hi) {
        return Err(CurvatureError::Invalid(format!("empty interval [{t_lo}, {t_hi}]")));
    }
    let mut names = vec!["radial"];
    if m.has_tangential_planes() {
        names.push("tangential");
    }
    let mut families: Vec<FamilyBounds> = names
        .iter()
        .map(|n| FamilyBounds {
            family: (*n).to_string(),
            min: f64::INFINITY,
            argmin: f64::NAN,
            max: f64::NEG_INFINITY,
            argmax: f64::NAN,
        })
        .collect();
    let mut samples = Vec::with_capacity(resolution * names.len());
    for i in 0..resolution {
        let t = if i + 1 == resolution {
            t_hi
        } else {
            t_lo + (t_hi - t_lo) * i as f64 / (resolution - 1) as f64
        };
        let k = cusp_sectional_curvatures(&m.profile, t)?;
        for (idx, v) in [k.radial, k.tangential].into_iter().take(names.len()).enumerate() {
            let fb = &mut families[idx];
            if v < fb.min {
                fb.min = v;
                fb.argmin = t;
            }
            if v > fb.max {
                fb.max = v;
                fb.argmax = t;
            }
            samples.push((t, idx, v));
        }
    }
    Ok(CurvatureReport {
        region: format!("t in [{t_lo}, {t_hi}], n = {}", m.n),
        resolution,
        families,
        samples,
    })
}

/// `a(r)² du² + b(r)² dθ² + c(r)² dr²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric3D {
    pub a: ProfileFunction,
    pub b: ProfileFunction,
    pub c: ProfileFunction,
}

/// Coordinate-plane sectional curvatures of a [`DiagonalMetric3D`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalCurvatures {
    pub u_theta: f64,
    pub u_r: f64,
    pub theta_r: f64,
}

/// Distance (in units of `|b'|`) from a zero of `b` below which `r` counts as on the axis.
pub const AXIS_EXCLUSION: f64 = 1e-8;

impl DiagonalMetric3D {
    /// `a`, `c` must be positive profiles; `b` may be a generator vanishing on an axis.
    pub fn new(a: ProfileFunction, b: ProfileFunction, c: ProfileFunction) -> Result<Self, CurvatureError> {
        if a.is_generator() || c.is_generator() {
            return Err(CurvatureError::Invalid("a and c must be positive profiles".into()));
        }
        Ok(Self { a, b, c })
    }

    /// The hyperbolic metric `cosh²r du² + sinh²r dθ² + dr²` on `r ∈ [0, r_max]`.
    pub fn hyperbolic(r_max: f64) -> Result<Self, CurvatureError> {
        let unit = |form| {
            ProfileFunction::generator(vec![Segment::new(0.0, r_max, form)]).map_err(CurvatureError::from)
        };
        Self::new(
            ProfileFunction::cosh(0.0, r_max)?,
            unit(Form::Sinh { c: 1.0, k: 1.0, t0: 0.0 })?,
            ProfileFunction::constant(1.0, 0.0, r_max)?,
        )
    }

    /// All coefficients multiplied by `s` (the metric by `s²`).
    pub fn homothetic(&self, s: f64) -> Result<Self, CurvatureError> {
        Ok(Self {
            a: self.a.multiplied(s)?,
            b: self.b.multiplied(s)?,
            c: self.c.multiplied(s)?,
        })
    }
}

pub fn diagonal_curvatures(m: &DiagonalMetric3D, r: f64) -> Result<DiagonalCurvatures, CurvatureError> {
    let a = m.a.jet(r)?;
    let b = m.b.jet(r)?;
    let c = m.c.jet(r)?;
    if b.value.abs() <= AXIS_EXCLUSION * b.d1.abs().max(1.0) {
        return Err(CurvatureError::Axis { r, b: b.value });
    }
    let c2 = c.value * c.value;
    let c3 = c2 * c.value;
    Ok(DiagonalCurvatures {
        u_theta: -(a.d1 * b.d1) / (a.value * b.value * c2),
        u_r: -(a.d2 * c.value - a.d1 * c.d1) / (a.value * c3),
        theta_r: -(b.d2 * c.value - b.d1 * c.d1) / (b.value * c3),
    })
}

/// The graph of `(x, y) ↦ g(x) − g(y)` in Euclidean 3-space.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSurfaceMetric {
    g: ProfileFunction,
    budget: f64,
}

/// Partial derivatives of the height function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphJet {
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fyy: f64,
}

impl GraphJet {
    /// `1 + |∇f|²`
    pub fn w2(&self) -> f64 {
        1.0 + self.fx * self.fx + self.fy * self.fy
    }
}

impl GraphSurfaceMetric {
    /// Requires `g` convex on all of ℝ with finite slope budget `g'(∞) − g'(−∞)`.
    pub fn new(g: ProfileFunction) -> Result<Self, CurvatureError> {
        let (lo, hi) = g.domain();
        if lo != f64::NEG_INFINITY || hi != f64::INFINITY {
            return Err(CurvatureError::Invalid("generator must be defined on the whole line".into()));
        }
        if !g.is_convex() {
            return Err(CurvatureError::Invalid("generator must be convex".into()));
        }
        let budget = g
            .slope_budget()
            .ok_or_else(|| CurvatureError::Invalid("generator slope budget is not finite".into()))?;
        Ok(Self { g, budget })
    }

    /// Softplus generator `g(t) = (β/2)·ln(1 + e^{2t})`, so `g'(t) = (β/2)(1 + tanh t)`,
    /// with slope budget `β`.
    pub fn softplus(budget: f64) -> Result<Self, CurvatureError> {
        Self::new(ProfileFunction::generator(vec![Segment::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            Form::Softplus {
                c: budget / 2.0,
                k: 2.0,
                t0: 0.0,
            },
        )])?)
    }

    /// Slope budget `π/10`.
    pub fn default_invisibility() -> Self {
        Self::softplus(std::f64::consts::PI / 10.0).expect("softplus generator is valid")
    }

    /// `g(t) = slope·t`.
    pub fn linear(slope: f64) -> Result<Self, CurvatureError> {
        Self::new(ProfileFunction::generator(vec![Segment::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            Form::Quintic {
                t0: 0.0,
                coeffs: [0.0, slope, 0.0, 0.0, 0.0, 0.0],
            },
        )])?)
    }

    pub fn generator(&self) -> &ProfileFunction {
        &self.g
    }

    pub fn slope_budget(&self) -> f64 {
        self.budget
    }

    /// The surface scaled by `s` about the origin: generator `t ↦ s·g(t/s)`.
    pub fn homothetic(&self, s: f64) -> Result<Self, CurvatureError> {
        if !(s > 0.0) {
            return Err(CurvatureError::Invalid(format!("homothety factor {s} must be positive")));
        }
        Self::new(scale_profile(&self.g, 1.0 / s, 0.0)?)
    }

    pub fn height(&self, x: f64, y: f64) -> Result<f64, CurvatureError> {
        Ok(self.g.value(x)? - self.g.value(y)?)
    }

    pub fn jet(&self, x: f64, y: f64) -> Result<GraphJet, CurvatureError> {
        let gx = self.g.jet(x)?;
        let gy = self.g.jet(y)?;
        Ok(GraphJet {
            fx: gx.d1,
            fy: -gy.d1,
            fxx: gx.d2,
            fyy: -gy.d2,
        })
    }

    /// First fundamental form `(E, F, G)`.
    pub fn first_form(&self, x: f64, y: f64) -> Result<(f64, f64, f64), CurvatureError> {
        let j = self.jet(x, y)?;
        Ok((1.0 + j.fx * j.fx, j.fx * j.fy, 1.0 + j.fy * j.fy))
    }

    /// `√(EG − F²) = √(1 + g'(x)² + g'(y)²)`
    pub fn area_element(&self, x: f64, y: f64) -> Result<f64, CurvatureError> {
        Ok(self.jet(x, y)?.w2().sqrt())
    }
}

/// `κ = −g''(x)g''(y)/(1 + g'(x)² + g'(y)²)²`
pub fn graph_surface_gaussian(m: &GraphSurfaceMetric, x: f64, y: f64) -> Result<f64, CurvatureError> {
    let j = m.jet(x, y)?;
    let w2 = j.w2();
    Ok(j.fxx * j.fyy / (w2 * w2))
}

pub const TOTAL_CURVATURE_TOL: f64 = 1e-8;
pub const TOTAL_CURVATURE_MAX_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalCurvature {
    pub value: f64,
    pub error: f64,
    pub cells: usize,
}

/// `∫∫ κ dA` over `[−R, R]²`.
pub fn total_gaussian_curvature(m: &GraphSurfaceMetric, half_width: f64) -> Result<TotalCurvature, CurvatureError> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(CurvatureError::Invalid(format!("half-width {half_width} must be positive")));
    }
    let integrand = |x: f64, y: f64| {
        let j = m.jet(x, y).expect("generator is defined on the whole line");
        let w2 = j.w2();
        j.fxx * j.fyy / (w2 * w2.sqrt())
    };
    let r = integrate_rect(
        integrand,
        Rect::square(half_width),
        TOTAL_CURVATURE_TOL,
        TOTAL_CURVATURE_MAX_CELLS,
    )?;
    Ok(TotalCurvature {
        value: r.value,
        error: r.error,
        cells: r.subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_profile_values() {
        let f = ProfileFunction::unit_exponential(0.0);
        let k = cusp_sectional_curvatures(&f, 0.0).unwrap();
        assert_eq!((k.radial, k.tangential), (-1.0, -2.0));
        let k = cusp_sectional_curvatures(&f, 10f64.ln()).unwrap();
        assert!((k.tangential + 101.0).abs() < 1e-11);
        assert!(cusp_sectional_curvatures(&f, -1.0).is_err());
    }

    #[test]
    fn two_dimensional_cusp_has_only_radial_planes() {
        let m = WarpedCuspMetric::new(2, ProfileFunction::unit_exponential(0.0)).unwrap();
        let r = plane_curvature_bounds(&m, 0.0, 1.0, 5).unwrap();
        assert_eq!(r.families.len(), 1);
        assert_eq!(r.global_max(), -1.0);
        assert!(WarpedCuspMetric::new(1, ProfileFunction::unit_exponential(0.0)).is_err());
    }

    #[test]
    fn report_csv_footer() {
        let m = WarpedCuspMetric::new(3, ProfileFunction::cosh(-1.0, 1.0).unwrap()).unwrap();
        let r = plane_curvature_bounds(&m, -1.0, 1.0, 3).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("t_or_xy,K_family,value\n"));
        assert_eq!(csv.lines().count(), 1 + 6 + 4);
        assert!(csv.lines().last().unwrap().starts_with("max,tangential,"));
    }

    #[test]
    fn axis_is_rejected() {
        let m = DiagonalMetric3D::hyperbolic(2.0).unwrap();
        assert!(matches!(diagonal_curvatures(&m, 0.0), Err(CurvatureError::Axis { .. })));
        assert!(diagonal_curvatures(&m, 1e-6).is_ok());
    }

    #[test]
    fn default_generator_budget() {
        let m = GraphSurfaceMetric::default_invisibility();
        assert!((m.slope_budget() - std::f64::consts::PI / 10.0).abs() < 1e-16);
        let g = m.generator();
        for &t in &[-3.0, 0.0, 0.4, 2.0] {
            let want = std::f64::consts::PI / 20.0 * (1.0 + f64::tanh(t));
            assert!((g.d1(t).unwrap() - want).abs() < 1e-15);
        }
    }
}

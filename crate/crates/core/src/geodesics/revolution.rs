use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::{check_tol, GeodesicError, GeodesicSegment, GeodesicState, Trajectory};
use crate::numerics::ode::dp_step;
use crate::numerics::quad::integrate;
use crate::numerics::roots::bracketed_root;
use crate::numerics::Flow;
use crate::profiles::{Form, ProfileFunction, Segment};

/// Scalar function of the state whose sign change stops a trace.
type StopEvent<'a> = &'a dyn Fn(&[f64; 3]) -> f64;

/// Surface of revolution with radius `φ(z)` over `z ∈ (c, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RevolutionSurface {
    phi: ProfileFunction,
    width: f64,
}

const SHOOTING_ANGLES: usize = 96;
const MISS_FAR: f64 = 1e300;

impl RevolutionSurface {
    pub fn new(phi: ProfileFunction) -> Result<Self, GeodesicError> {
        let (lo, hi) = phi.domain();
        if !lo.is_finite() || hi != f64::INFINITY {
            return Err(GeodesicError::Invalid(format!("radius profile must live on (c, ∞), got [{lo}, {hi}]")));
        }
        if phi.is_generator() {
            return Err(GeodesicError::Invalid("radius profile must be positive".into()));
        }
        let far = phi.value(lo.max(0.0) + 1e4)?;
        Ok(Self {
            phi,
            width: if far.is_finite() { far } else { f64::INFINITY },
        })
    }

    /// `φ ≡ radius`.
    pub fn cylinder(radius: f64, lo: f64) -> Result<Self, GeodesicError> {
        Self::new(ProfileFunction::constant(radius, lo, f64::INFINITY)?)
    }

    /// `φ(z) = h + e^{−z}` on `[lo, ∞)`.
    pub fn cusp(h: f64, lo: f64) -> Result<Self, GeodesicError> {
        let seg = Segment::new(lo, f64::INFINITY, Form::Exp { c: 1.0, k: 1.0, t0: 0.0 });
        Self::new(ProfileFunction::with_offset(vec![seg], h)?)
    }

    pub fn profile(&self) -> &ProfileFunction {
        &self.phi
    }

    /// `φ` far up the surface, standing in for `inf φ` on decreasing profiles.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn lower_end(&self) -> f64 {
        self.phi.domain().0
    }

    pub fn radius(&self, z: f64) -> Result<f64, GeodesicError> {
        Ok(self.phi.value(z)?)
    }

    fn is_decreasing(&self) -> bool {
        let lo = self.lower_end();
        (0..=2000).all(|i| self.phi.d1(lo + 0.05 * i as f64).is_ok_and(|d| d <= 0.0))
    }

    fn rhs(&self, y: &[f64; 3]) -> [f64; 3] {
        let Ok(j) = self.phi.jet(y[0]) else {
            return [f64::NAN; 3];
        };
        let w = (1.0 + j.d1 * j.d1).sqrt();
        let (s, c) = y[2].sin_cos();
        [c / w, s / j.value, -j.d1 * s / (j.value * w)]
    }

    /// Surface distance between nearby points, from the metric at their midpoint.
    fn local_distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        match self.phi.jet(0.5 * (a.0 + b.0)) {
            Ok(j) => ((1.0 + j.d1 * j.d1) * (a.0 - b.0).powi(2) + (j.value * (a.1 - b.1)).powi(2)).sqrt(),
            Err(_) => f64::INFINITY,
        }
    }

    pub(crate) fn trace(&self, start: &GeodesicState, length: f64, tol: f64, h_max: f64) -> Result<Trajectory, GeodesicError> {
        self.trace_until(start, length, tol, h_max, None).map(|(t, _)| t)
    }

    /// Integrates until arc length `length` or until `event` changes sign; in the latter
    /// case the crossing is located by bisection on the last step and becomes the final
    /// sample.
    fn trace_until(
        &self,
        start: &GeodesicState,
        length: f64,
        tol: f64,
        h_max: f64,
        event: Option<StopEvent<'_>>,
    ) -> Result<(Trajectory, bool), GeodesicError> {
        let f = |y: &[f64; 3]| self.rhs(y);
        let y0 = [start.u, start.v, start.alpha];
        let c0 = self.radius(start.u)? * start.alpha.sin();
        let dp = super::stepper(tol).with_max_step(h_max);
        let mut states: Vec<(f64, [f64; 3], [f64; 3])> = Vec::new();
        let mut crossing: Option<(f64, [f64; 3])> = None;
        let stats = dp
            .integrate(f, y0, start.s, start.s + length, |t, y, dy| {
                if let (Some(g), Some((_, yp, _))) = (event, states.last()) {
                    let (gp, gy) = (g(yp), g(y));
                    if gp != 0.0 && (gy == 0.0 || gp.signum() != gy.signum()) {
                        crossing = Some((t, *y));
                        return Flow::Stop;
                    }
                }
                states.push((t, *y, *dy));
                Flow::Continue
            })
            .map_err(|e| GeodesicError::from_ode(e, start.s))?;
        let hit = crossing.is_some();
        if let (Some((t, _)), Some(g)) = (crossing, event) {
            let (tp, yp, kp) = *states.last().expect("initial state is recorded");
            let dir = (t - tp).signum();
            let g0 = g(&yp);
            let (mut lo, mut hi) = (0.0, (t - tp).abs());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let (ym, _, _) = dp_step(&f, &yp, &kp, dir * mid);
                if g(&ym).signum() == g0.signum() && g(&ym) != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (ys, _, _) = dp_step(&f, &yp, &kp, dir * hi);
            states.push((tp + dir * hi, ys, f(&ys)));
        }
        let mut traj = Trajectory {
            samples: Vec::with_capacity(states.len()),
            velocities: Vec::with_capacity(states.len()),
            accepted: stats.accepted,
            rejected: stats.rejected,
            clairaut: Some(c0),
            drift: 0.0,
            speed_drift: 0.0,
        };
        for (t, y, dy) in &states {
            let j = self.phi.jet(y[0])?;
            traj.drift = traj.drift.max((j.value * y[2].sin() - c0).abs());
            let speed2 = (1.0 + j.d1 * j.d1) * dy[0] * dy[0] + j.value * j.value * dy[1] * dy[1];
            traj.speed_drift = traj.speed_drift.max((speed2.sqrt() - 1.0).abs());
            traj.samples.push(GeodesicState {
                s: *t,
                u: y[0],
                v: y[1],
                alpha: y[2],
            });
            traj.velocities.push([dy[0], dy[1]]);
        }
        Ok((traj, hit))
    }

    /// Length of the meridian-then-parallel path from `p` to `q`.
    fn path_bound(&self, p: (f64, f64), q: (f64, f64)) -> Result<f64, GeodesicError> {
        let (lo, hi) = (p.0.min(q.0), p.0.max(q.0));
        let meridian = if hi > lo {
            integrate(|z| self.phi.d1(z).map_or(f64::NAN, |d| (1.0 + d * d).sqrt()), lo, hi, 1e-10, 1e-10, 2000)
                .map_err(|e| GeodesicError::Invalid(e.to_string()))?
                .value
        } else {
            0.0
        };
        Ok(meridian + (q.1 - p.1).abs() * self.radius(p.0.max(q.0))?)
    }

    pub(crate) fn connect(&self, p: (f64, f64), q: (f64, f64), tol: f64) -> Result<GeodesicSegment, GeodesicError> {
        let integ = (tol * 1e-4).max(super::MIN_TOL);
        let cap = 3.0 * self.path_bound(p, q)? + 1.0;
        let at = |alpha: f64| GeodesicState {
            s: 0.0,
            u: p.0,
            v: p.1,
            alpha,
        };
        let dtheta = q.1 - p.1;
        if dtheta.abs() < 1e-15 {
            let alpha = if q.0 > p.0 { 0.0 } else { PI };
            let g = |y: &[f64; 3]| y[0] - q.0;
            let (rough, _) = self.trace_until(&at(alpha), cap, integ, f64::INFINITY, Some(&g))?;
            return self.finish(at(alpha), rough.length() * 1.01, integ, &g, q, tol, 1);
        }
        let sigma = dtheta.signum();
        let g = move |y: &[f64; 3]| sigma * (y[1] - q.1);
        let mut iterations = 0usize;
        let mut miss = |a: f64| -> Result<f64, GeodesicError> {
            iterations += 1;
            match self.trace_until(&at(sigma * a), cap, integ, cap / 50.0, Some(&g)) {
                Ok((t, true)) => Ok(t.end().u - q.0),
                Ok((t, false)) => Ok(if t.end().u > q.0 { MISS_FAR } else { -MISS_FAR }),
                Err(GeodesicError::DomainExit { .. }) => Ok(-MISS_FAR),
                Err(e) => Err(e),
            }
        };
        // the sweep includes both meridians: straight up never reaches θ_q and ends above q
        // (+), straight down reaches the lower end or passes below q (−)
        let mut bracket = None;
        let mut prev = (0.0, f64::NAN);
        for i in 0..=SHOOTING_ANGLES {
            let a = PI * i as f64 / SHOOTING_ANGLES as f64;
            let m = miss(a)?;
            if m == 0.0 {
                bracket = Some((a, a));
                break;
            }
            if prev.1 > 0.0 && m < 0.0 {
                bracket = Some((prev.0, a));
                break;
            }
            prev = (a, m);
        }
        let (lo, hi) = bracket.ok_or(GeodesicError::NoBracket {
            samples: SHOOTING_ANGLES + 1,
        })?;
        let alpha = if lo == hi {
            lo
        } else {
            bracketed_root(&mut miss, lo, hi, 1e-15, 1e-3 * tol, 200)?
        };
        let (rough, _) = self.trace_until(&at(sigma * alpha), cap, integ, cap / 50.0, Some(&g))?;
        self.finish(at(sigma * alpha), rough.length() * 1.01, integ, &g, q, tol, iterations)
    }

    /// Re-traces the solved geodesic with dense sampling and checks the endpoint.
    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        start: GeodesicState,
        length: f64,
        integ: f64,
        g: &dyn Fn(&[f64; 3]) -> f64,
        q: (f64, f64),
        tol: f64,
        iterations: usize,
    ) -> Result<GeodesicSegment, GeodesicError> {
        let (trajectory, _) = self.trace_until(&start, length, integ, length / 400.0, Some(g))?;
        let end = trajectory.end();
        let endpoint_error = self.local_distance((end.u, end.v), q);
        if !(endpoint_error <= tol) {
            return Err(GeodesicError::ToleranceFailure { error: endpoint_error, tol });
        }
        Ok(GeodesicSegment {
            alpha0: start.alpha,
            length: trajectory.length(),
            trajectory,
            endpoint_error,
            iterations,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrappedRay {
    /// `ρ₀·sin α₀`.
    pub clairaut: f64,
    pub width: f64,
    pub escapes: bool,
    pub alpha_sup: f64,
    /// `π/2 − arcsin(ρ₀ sin α₀ / h)` when the ray is below the width.
    pub epsilon: Option<f64>,
    pub z_reached: f64,
    /// Radius and height where `α` reaches `π/2`.
    pub turning: Option<(f64, f64)>,
}

/// Follows the ray from height `z0` at angle `alpha0` (`|α₀| ≤ π/2`, pointing up the
/// surface) for arc length `length`.
pub fn trapped_ray_check(
    surface: &RevolutionSurface,
    z0: f64,
    alpha0: f64,
    length: f64,
    tol: f64,
) -> Result<TrappedRay, GeodesicError> {
    check_tol(tol)?;
    if alpha0.abs() > FRAC_PI_2 {
        return Err(GeodesicError::Invalid(format!("ray angle {alpha0} points down the surface")));
    }
    if !surface.is_decreasing() {
        return Err(GeodesicError::Invalid("radius profile is not decreasing".into()));
    }
    let a = alpha0.abs();
    let c = surface.radius(z0)? * a.sin();
    let h = surface.width();
    let start = GeodesicState::new(z0, 0.0, a);
    if c < h {
        let t = surface.trace(&start, length, tol, 1.0)?;
        let alpha_sup = t.samples.iter().map(|s| s.alpha).fold(f64::NEG_INFINITY, f64::max);
        let eps = FRAC_PI_2 - (c / h).asin();
        let rising = t.samples.windows(2).all(|w| w[1].u >= w[0].u);
        Ok(TrappedRay {
            clairaut: c,
            width: h,
            escapes: rising && alpha_sup <= FRAC_PI_2 - eps + 10.0 * tol,
            alpha_sup,
            epsilon: Some(eps),
            z_reached: t.end().u,
            turning: None,
        })
    } else {
        let g = |y: &[f64; 3]| y[2] - FRAC_PI_2;
        let (t, hit) = surface.trace_until(&start, length, tol, 1.0, Some(&g))?;
        let end = t.end();
        Ok(TrappedRay {
            clairaut: c,
            width: h,
            escapes: false,
            alpha_sup: t.samples.iter().map(|s| s.alpha).fold(f64::NEG_INFINITY, f64::max),
            epsilon: None,
            z_reached: t.samples.iter().map(|s| s.u).fold(f64::NEG_INFINITY, f64::max),
            turning: if hit { Some((surface.radius(end.u)?, end.u)) } else { None },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityRow {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    /// `(z, θ)` of `γ₁(a)` and `γ₂(b)`, the latter shifted by a multiple of `2π`.
    pub end1: (f64, f64),
    pub end2: (f64, f64),
    pub min_z: f64,
    pub max_z: f64,
    pub endpoint_min: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityReport {
    pub rows: Vec<VisibilityRow>,
    pub increasing: bool,
    pub bounded_by_endpoints: bool,
}

impl VisibilityReport {
    pub fn holds(&self) -> bool {
        self.increasing && self.bounded_by_endpoints
    }
}

/// Slack allowed below the lower endpoint height.
pub const ENDPOINT_SLACK: f64 = 1e-6;

/// Rays `γ₁, γ₂` from `(z_p, 0)` at angles `±α₀`; for each `(a_n, b_n)` connects `γ₁(a_n)`
/// to `γ₂(b_n)` and records how low the connecting geodesic dips.
pub fn visibility_experiment(
    surface: &RevolutionSurface,
    z_p: f64,
    alpha0: f64,
    pairs: &[(f64, f64)],
    tol: f64,
) -> Result<VisibilityReport, GeodesicError> {
    check_tol(tol)?;
    let longest = pairs.iter().map(|&(a, b)| a.max(b)).fold(0.0, f64::max);
    let ray = trapped_ray_check(surface, z_p, alpha0, longest.max(1.0), tol)?;
    if !ray.escapes {
        return Err(GeodesicError::Invalid(format!(
            "rays from z = {z_p} at ±{alpha0} do not escape (ρ₀ sin α₀ = {} ≥ h = {})",
            ray.clairaut, ray.width
        )));
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let e1 = *surface.trace(&GeodesicState::new(z_p, 0.0, alpha0), a, tol, 1.0)?.end();
        let e2 = *surface.trace(&GeodesicState::new(z_p, 0.0, -alpha0), b, tol, 1.0)?.end();
        let theta2 = e2.v + TAU * ((e1.v - e2.v) / TAU).round();
        let seg = surface.connect((e1.u, e1.v), (e2.u, theta2), tol.max(1e-10))?;
        let zs: Vec<f64> = seg.trajectory.dense_points(8).iter().map(|p| p[0]).collect();
        rows.push(VisibilityRow {
            n: i + 1,
            a,
            b,
            end1: (e1.u, e1.v),
            end2: (e2.u, theta2),
            min_z: zs.iter().copied().fold(f64::INFINITY, f64::min),
            max_z: zs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            endpoint_min: e1.u.min(e2.u),
            length: seg.length,
        });
    }
    Ok(VisibilityReport {
        increasing: rows.windows(2).all(|w| w[1].min_z > w[0].min_z),
        bounded_by_endpoints: rows.iter().all(|r| r.min_z >= r.endpoint_min - ENDPOINT_SLACK),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meridian_is_a_geodesic() {
        let s = RevolutionSurface::cusp(1.0, -3.0).unwrap();
        let t = s.trace(&GeodesicState::new(0.0, 0.3, 0.0), 20.0, 1e-10, f64::INFINITY).unwrap();
        assert!(t.samples.iter().all(|x| x.alpha == 0.0 && x.v == 0.3));
        assert!(t.drift < 1e-14);
    }

    #[test]
    fn turning_radius_matches_clairaut() {
        let s = RevolutionSurface::cusp(1.0, -3.0).unwrap();
        // φ(0) = 2, 2·sin α₀ = 1.5
        let r = trapped_ray_check(&s, 0.0, (0.75f64).asin(), 50.0, 1e-12).unwrap();
        let (rho, _) = r.turning.unwrap();
        assert!((rho - 1.5).abs() < 1e-6, "{rho}");
        assert!(!r.escapes);
    }

    #[test]
    fn connect_on_cylinder_is_a_helix() {
        let s = RevolutionSurface::cylinder(1.0, -100.0).unwrap();
        let seg = s.connect((0.0, 0.0), (3.0, 2.0), 1e-9).unwrap();
        assert!((seg.alpha0 - 2f64.atan2(3.0)).abs() < 1e-9);
        assert!((seg.length - 13f64.sqrt()).abs() < 1e-8);
    }
}

use std::f64::consts::PI;

use super::{check_tol, GeodesicError, GeodesicSegment, GeodesicState, Trajectory, MIN_TOL};
use crate::curvature::{graph_surface_gaussian, GraphSurfaceMetric};
use crate::numerics::Flow;

fn rhs(m: &GraphSurfaceMetric, y: &[f64; 4]) -> [f64; 4] {
    let Ok(j) = m.jet(y[0], y[1]) else {
        return [f64::NAN; 4];
    };
    // Γ^k_ij = f_ij·f_k / W², and f_xy = 0
    let q = (j.fxx * y[2] * y[2] + j.fyy * y[3] * y[3]) / j.w2();
    [y[2], y[3], -j.fx * q, -j.fy * q]
}

/// Coordinate velocity of the unit vector at angle `alpha` from `∂x`.
fn frame_velocity(m: &GraphSurfaceMetric, x: f64, y: f64, alpha: f64) -> Result<[f64; 2], GeodesicError> {
    let (e, f, g) = m.first_form(x, y)?;
    let d = g - f * f / e;
    let (s, c) = alpha.sin_cos();
    let vy = s / d.sqrt();
    Ok([c / e.sqrt() - f / e * vy, vy])
}

fn frame_angle(m: &GraphSurfaceMetric, x: f64, y: f64, v: [f64; 2]) -> Result<f64, GeodesicError> {
    let (e, f, g) = m.first_form(x, y)?;
    let a = (e * v[0] + f * v[1]) / e.sqrt();
    let b = v[1] * (g - f * f / e).sqrt();
    Ok(b.atan2(a))
}

/// Unsigned angle in `[0, π]` between coordinate vectors `u` and `w` at `(x, y)`.
fn metric_angle(m: &GraphSurfaceMetric, x: f64, y: f64, u: [f64; 2], w: [f64; 2]) -> Result<f64, GeodesicError> {
    let (e, f, g) = m.first_form(x, y)?;
    let dot = e * u[0] * w[0] + f * (u[0] * w[1] + u[1] * w[0]) + g * u[1] * w[1];
    let cross = (e * g - f * f).sqrt() * (u[0] * w[1] - u[1] * w[0]);
    Ok(cross.abs().atan2(dot))
}

fn metric_norm(m: &GraphSurfaceMetric, x: f64, y: f64, v: [f64; 2]) -> f64 {
    match m.first_form(x, y) {
        Ok((e, f, g)) => (e * v[0] * v[0] + 2.0 * f * v[0] * v[1] + g * v[1] * v[1]).sqrt(),
        Err(_) => f64::INFINITY,
    }
}

pub(crate) fn trace(
    m: &GraphSurfaceMetric,
    start: &GeodesicState,
    length: f64,
    tol: f64,
    h_max: f64,
) -> Result<Trajectory, GeodesicError> {
    let v0 = frame_velocity(m, start.u, start.v, start.alpha)?;
    let dp = super::stepper(tol).with_max_step(h_max);
    let mut states: Vec<(f64, [f64; 4])> = Vec::new();
    let stats = dp
        .integrate(|y: &[f64; 4]| rhs(m, y), [start.u, start.v, v0[0], v0[1]], start.s, start.s + length, |t, y, _| {
            states.push((t, *y));
            Flow::Continue
        })
        .map_err(|e| GeodesicError::from_ode(e, start.s))?;
    let mut traj = Trajectory {
        samples: Vec::with_capacity(states.len()),
        velocities: Vec::with_capacity(states.len()),
        accepted: stats.accepted,
        rejected: stats.rejected,
        clairaut: None,
        drift: 0.0,
        speed_drift: 0.0,
    };
    for (t, y) in states {
        let v = [y[2], y[3]];
        traj.speed_drift = traj.speed_drift.max((metric_norm(m, y[0], y[1], v) - 1.0).abs());
        traj.samples.push(GeodesicState {
            s: t,
            u: y[0],
            v: y[1],
            alpha: frame_angle(m, y[0], y[1], v)?,
        });
        traj.velocities.push(v);
    }
    Ok(traj)
}

const NEWTON_ITERATIONS: usize = 40;

/// Newton shooting on `(initial angle, length)` with a finite-difference Jacobian.
pub(crate) fn connect(m: &GraphSurfaceMetric, p: (f64, f64), q: (f64, f64), tol: f64) -> Result<GeodesicSegment, GeodesicError> {
    let integ = (tol * 1e-4).max(MIN_TOL);
    let d = [q.0 - p.0, q.1 - p.1];
    let mut len = metric_norm(m, 0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1), d);
    let mut psi = frame_angle(m, p.0, p.1, d)?;
    let end = |psi: f64, len: f64| -> Result<[f64; 2], GeodesicError> {
        let t = trace(m, &GeodesicState { s: 0.0, u: p.0, v: p.1, alpha: psi }, len, integ, f64::INFINITY)?;
        let e = t.end();
        Ok([e.u - q.0, e.v - q.1])
    };
    let dist = |r: [f64; 2]| metric_norm(m, q.0, q.1, r);
    let mut r = end(psi, len)?;
    let mut iterations = 0;
    while iterations < NEWTON_ITERATIONS && dist(r) > 0.1 * tol {
        iterations += 1;
        let (dpsi, dlen) = (1e-7, 1e-7 * len.max(1.0));
        let rp = end(psi + dpsi, len)?;
        let rl = end(psi, len + dlen)?;
        let j = [
            [(rp[0] - r[0]) / dpsi, (rl[0] - r[0]) / dlen],
            [(rp[1] - r[1]) / dpsi, (rl[1] - r[1]) / dlen],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step_psi = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let step_len = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let (np, nl) = (psi - lambda * step_psi, len - lambda * step_len);
            if nl > 0.0 {
                let nr = end(np, nl)?;
                if dist(nr) < dist(r) {
                    (psi, len, r) = (np, nl, nr);
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let start = GeodesicState {
        s: 0.0,
        u: p.0,
        v: p.1,
        alpha: psi,
    };
    let trajectory = trace(m, &start, len, integ, len / 400.0)?;
    let e = trajectory.end();
    let endpoint_error = dist([e.u - q.0, e.v - q.1]);
    if !(endpoint_error <= tol) {
        return Err(GeodesicError::ToleranceFailure { error: endpoint_error, tol });
    }
    Ok(GeodesicSegment {
        alpha0: psi,
        length: len,
        trajectory,
        endpoint_error,
        iterations,
    })
}

/// A triangle side, possibly traversed against its trajectory.
struct Side<'a> {
    traj: &'a Trajectory,
    reversed: bool,
}

impl Side<'_> {
    fn start(&self) -> [f64; 2] {
        let s = if self.reversed { self.traj.end() } else { &self.traj.samples[0] };
        [s.u, s.v]
    }

    fn start_tangent(&self) -> [f64; 2] {
        if self.reversed {
            let v = self.traj.velocities.last().expect("non-empty");
            [-v[0], -v[1]]
        } else {
            self.traj.velocities[0]
        }
    }

    fn end_tangent(&self) -> [f64; 2] {
        if self.reversed {
            let v = self.traj.velocities[0];
            [-v[0], -v[1]]
        } else {
            *self.traj.velocities.last().expect("non-empty")
        }
    }

    fn points(&self) -> Vec<[f64; 2]> {
        let mut pts = self.traj.dense_points(8);
        if self.reversed {
            pts.reverse();
        }
        pts.pop();
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussBonnetReport {
    pub vertices: [(f64, f64); 3],
    /// Interior angles at the three vertices.
    pub angles: [f64; 3],
    pub side_lengths: [f64; 3],
    /// `Σ angles − π`
    pub angle_excess: f64,
    /// `∫κ dA` over the enclosed region.
    pub integral: f64,
    pub area: f64,
    pub residual: f64,
    pub cells: usize,
}

fn triangle_report(m: &GraphSurfaceMetric, sides: [Side<'_>; 3], cells: usize) -> Result<GaussBonnetReport, GeodesicError> {
    let mut angles = [0.0; 3];
    let mut vertices = [(0.0, 0.0); 3];
    for i in 0..3 {
        let prev = &sides[(i + 2) % 3];
        let back = prev.end_tangent();
        let at = sides[i].start();
        vertices[i] = (at[0], at[1]);
        angles[i] = metric_angle(m, at[0], at[1], sides[i].start_tangent(), [-back[0], -back[1]])?;
    }
    let poly: Vec<[f64; 2]> = sides.iter().flat_map(Side::points).collect();
    let (integral, area, used) = region_integral(m, &poly, cells)?;
    let angle_excess = angles.iter().sum::<f64>() - PI;
    Ok(GaussBonnetReport {
        vertices,
        angles,
        side_lengths: [sides[0].traj.length(), sides[1].traj.length(), sides[2].traj.length()],
        angle_excess,
        integral,
        area,
        residual: (angle_excess - integral).abs(),
        cells: used,
    })
}

/// Geodesic triangle on `vertices`: angle excess against `∫κ dA` on a grid of about
/// `cells` cells over the bounding box.
pub fn gauss_bonnet_triangle(
    m: &GraphSurfaceMetric,
    vertices: [(f64, f64); 3],
    cells: usize,
    tol: f64,
) -> Result<GaussBonnetReport, GeodesicError> {
    check_tol(tol)?;
    if cells == 0 {
        return Err(GeodesicError::Invalid("cell count must be positive".into()));
    }
    let s0 = connect(m, vertices[0], vertices[1], tol)?;
    let s1 = connect(m, vertices[1], vertices[2], tol)?;
    let s2 = connect(m, vertices[2], vertices[0], tol)?;
    let sides = [&s0, &s1, &s2].map(|s| Side {
        traj: &s.trajectory,
        reversed: false,
    });
    triangle_report(m, sides, cells)
}

fn clip(poly: &[[f64; 2]], axis: usize, value: f64, keep_above: bool) -> Vec<[f64; 2]> {
    let inside = |p: &[f64; 2]| if keep_above { p[axis] >= value } else { p[axis] <= value };
    let mut out = Vec::with_capacity(poly.len() + 4);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let t = (value - a[axis]) / (b[axis] - a[axis]);
            let mut c = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            c[axis] = value;
            out.push(c);
        }
    }
    out
}

/// Signed area and centroid.
fn area_centroid(poly: &[[f64; 2]]) -> (f64, [f64; 2]) {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let cr = p[0] * q[1] - q[0] * p[1];
        a += cr;
        cx += (p[0] + q[0]) * cr;
        cy += (p[1] + q[1]) * cr;
    }
    if a == 0.0 {
        return (0.0, [0.0, 0.0]);
    }
    (0.5 * a, [cx / (3.0 * a), cy / (3.0 * a)])
}

/// `(∫κ dA, area)` over the polygon: cells crossed by the boundary are clipped exactly
/// and integrated at the centroid of the clipped piece, the rest by the midpoint rule.
fn region_integral(m: &GraphSurfaceMetric, poly: &[[f64; 2]], cells: usize) -> Result<(f64, f64, usize), GeodesicError> {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in poly {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    if !(w > 0.0 && h > 0.0) {
        return Err(GeodesicError::Invalid("degenerate triangle".into()));
    }
    let side = (w * h / cells as f64).sqrt();
    let nx = ((w / side).ceil() as usize).max(1);
    let ny = ((h / side).ceil() as usize).max(1);
    let (hx, hy) = (w / nx as f64, h / ny as f64);
    let col = |x: f64| (((x - x0) / hx).floor().max(0.0) as usize).min(nx - 1);
    let row = |y: f64| (((y - y0) / hy).floor().max(0.0) as usize).min(ny - 1);

    let mut boundary = vec![false; nx * ny];
    let step = hx.min(hy);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let pieces = ((b[0] - a[0]).hypot(b[1] - a[1]) / step).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let (t0, t1) = (k as f64 / pieces as f64, (k + 1) as f64 / pieces as f64);
            let (p, q) = (
                [a[0] + t0 * (b[0] - a[0]), a[1] + t0 * (b[1] - a[1])],
                [a[0] + t1 * (b[0] - a[0]), a[1] + t1 * (b[1] - a[1])],
            );
            for r in row(p[1].min(q[1]))..=row(p[1].max(q[1])) {
                for c in col(p[0].min(q[0]))..=col(p[0].max(q[0])) {
                    boundary[r * nx + c] = true;
                }
            }
        }
    }

    let density = |x: f64, y: f64| -> Result<(f64, f64), GeodesicError> {
        let da = m.area_element(x, y)?;
        Ok((graph_surface_gaussian(m, x, y)? * da, da))
    };
    let (mut integral, mut area) = (0.0, 0.0);
    let mut crossings = Vec::new();
    for r in 0..ny {
        let (ya, yb) = (y0 + r as f64 * hy, y0 + (r + 1) as f64 * hy);
        let strip = clip(&clip(poly, 1, ya, true), 1, yb, false);
        if strip.len() < 3 {
            continue;
        }
        let yc = 0.5 * (ya + yb);
        crossings.clear();
        for i in 0..strip.len() {
            let a = strip[i];
            let b = strip[(i + 1) % strip.len()];
            if (a[1] > yc) != (b[1] > yc) {
                crossings.push(a[0] + (yc - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
            }
        }
        crossings.sort_by(f64::total_cmp);
        let mut k = 0;
        let (mut row_int, mut row_area) = (0.0, 0.0);
        for c in 0..nx {
            let (xa, xb) = (x0 + c as f64 * hx, x0 + (c + 1) as f64 * hx);
            if boundary[r * nx + c] {
                let piece = clip(&clip(&strip, 0, xa, true), 0, xb, false);
                if piece.len() < 3 {
                    continue;
                }
                let (a, cen) = area_centroid(&piece);
                let a = a.abs();
                if a > 0.0 {
                    let (kd, da) = density(cen[0], cen[1])?;
                    row_int += kd * a;
                    row_area += da * a;
                }
            } else {
                let xc = 0.5 * (xa + xb);
                while k < crossings.len() && crossings[k] < xc {
                    k += 1;
                }
                if k % 2 == 1 {
                    let (kd, da) = density(xc, yc)?;
                    row_int += kd * hx * hy;
                    row_area += da * hx * hy;
                }
            }
        }
        integral += row_int;
        area += row_area;
    }
    Ok((integral, area, nx * ny))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessOptions {
    pub origin: (f64, f64),
    /// Direction of the bisector of the two rays, as an angle from `∂x`.
    pub heading: f64,
    pub cells: usize,
    pub tol: f64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self {
            origin: (0.0, 0.0),
            heading: 0.0,
            cells: 250_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvisibilityRow {
    pub horizon: f64,
    pub base_angle: f64,
    pub far_angles: [f64; 2],
    pub far_sum: f64,
    pub integral: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvisibilityReport {
    pub separation: f64,
    pub budget: f64,
    /// `π − separation − budget²`
    pub bound: f64,
    pub rows: Vec<InvisibilityRow>,
}

/// Slack on the far-angle bound.
pub const FAR_ANGLE_SLACK: f64 = 1e-3;

impl InvisibilityReport {
    pub fn holds(&self) -> bool {
        let b2 = self.budget * self.budget;
        self.rows.iter().all(|r| {
            r.far_sum >= self.bound - FAR_ANGLE_SLACK
                && r.integral.abs() <= b2
                && (r.base_angle - self.separation).abs() <= 1e-9
        })
    }
}

/// Two rays from the origin at angle `separation`, cut at each horizon `T` and joined by
/// a geodesic; the far angles of the triangle must sum to at least
/// `π − separation − budget²`, so they never close up.
pub fn invisibility_witness(
    m: &GraphSurfaceMetric,
    separation: f64,
    horizons: &[f64],
    opts: WitnessOptions,
) -> Result<InvisibilityReport, GeodesicError> {
    check_tol(opts.tol)?;
    if !(separation > 0.0 && separation < PI) {
        return Err(GeodesicError::Invalid(format!("separation {separation} must lie in (0, π)")));
    }
    let (px, py) = opts.origin;
    let mut rows = Vec::with_capacity(horizons.len());
    for &t in horizons {
        if !(t > 0.0) {
            return Err(GeodesicError::Invalid(format!("horizon {t} must be positive")));
        }
        let ray = |a: f64| trace(m, &GeodesicState { s: 0.0, u: px, v: py, alpha: a }, t, opts.tol, t / 400.0);
        let r1 = ray(opts.heading - 0.5 * separation)?;
        let r2 = ray(opts.heading + 0.5 * separation)?;
        let base_angle = metric_angle(m, px, py, r1.velocities[0], r2.velocities[0])?;
        let (e1, e2) = (r1.end(), r2.end());
        let seg = connect(m, (e1.u, e1.v), (e2.u, e2.v), opts.tol.max(1e-10))?;
        let rep = triangle_report(
            m,
            [
                Side { traj: &r1, reversed: false },
                Side {
                    traj: &seg.trajectory,
                    reversed: false,
                },
                Side { traj: &r2, reversed: true },
            ],
            opts.cells,
        )?;
        rows.push(InvisibilityRow {
            horizon: t,
            base_angle,
            far_angles: [rep.angles[1], rep.angles[2]],
            far_sum: rep.angles[1] + rep.angles[2],
            integral: rep.integral,
            residual: rep.residual,
        });
    }
    let budget = m.slope_budget();
    Ok(InvisibilityReport {
        separation,
        budget,
        bound: PI - separation - budget * budget,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip() {
        let m = GraphSurfaceMetric::default_invisibility();
        for &(x, y, a) in &[(0.3, -0.7, 1.1), (2.0, 1.0, -2.5), (0.0, 0.0, 0.0)] {
            let v = frame_velocity(&m, x, y, a).unwrap();
            assert!((metric_norm(&m, x, y, v) - 1.0).abs() < 1e-14);
            assert!((frame_angle(&m, x, y, v).unwrap() - a).abs() < 1e-14);
        }
    }

    #[test]
    fn clipping_areas() {
        let sq = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let c = clip(&clip(&sq, 0, 0.5, true), 1, 1.5, false);
        let (a, cen) = area_centroid(&c);
        assert!((a - 2.25).abs() < 1e-15);
        assert!((cen[0] - 1.25).abs() < 1e-15 && (cen[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn flat_triangle() {
        let m = GraphSurfaceMetric::default_invisibility();
        let r = gauss_bonnet_triangle(&m, [(20.0, 20.0), (23.0, 20.5), (21.0, 23.0)], 10_000, 1e-10).unwrap();
        assert!(r.angle_excess.abs() < 1e-9 && r.integral.abs() < 1e-12, "{r:?}");
    }
}

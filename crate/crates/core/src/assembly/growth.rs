//! Radial chain models, the curvature-budget truncation planner, and the
//! curvature-growth/volume-decay diagnostic `b_p(r)ⁿ·Vol(A_p(r))²`.
//!
//! A chain is the line-graph assembly seen from a basepoint `p`: block interiors,
//! cusp ends (traversed outward or inward), and zero-length necks where two cusps are
//! glued. Distance from `p` is the chain's radial coordinate.

use std::fmt::Write as _;

use super::schedule::ScaleSchedule;
use super::AssemblyError;
use crate::curvature::cusp_sectional_curvatures;
use crate::numerics::quad::integrate;
use crate::profiles::{smooth_kink, ProfileFunction};

pub const MU1_ENV: &str = "CUSPFORGE_MU1";

#[derive(Debug, Clone, PartialEq)]
pub enum ChainSegment {
    /// Compact block core of radial extent `length`, with `|K| ≤ curvature`.
    Interior { length: f64, volume: f64, curvature: f64 },
    /// Cusp of a block scaled by `scale`, from profile parameter `t_from` to `t_to`
    /// (either direction; `t_to` may be infinite).
    Cusp {
        profile: ProfileFunction,
        t_from: f64,
        t_to: f64,
        scale: f64,
    },
    /// Gluing region of negligible radial extent with `|K| ≤ curvature`.
    Neck { curvature: f64 },
}

impl ChainSegment {
    fn length(&self) -> f64 {
        match self {
            ChainSegment::Interior { length, .. } => *length,
            ChainSegment::Cusp { t_from, t_to, scale, .. } => scale * (t_to - t_from).abs(),
            ChainSegment::Neck { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    n: usize,
    cross_section_volume: f64,
    segments: Vec<ChainSegment>,
}

fn cusp_abs_curvature(profile: &ProfileFunction, t: f64, scale: f64, n: usize) -> Result<f64, AssemblyError> {
    let k = cusp_sectional_curvatures(profile, t).map_err(|e| AssemblyError::Invalid(e.to_string()))?;
    let tangential = if n >= 3 { k.tangential.abs() } else { 0.0 };
    Ok(k.radial.abs().max(tangential) / (scale * scale))
}

impl ChainModel {
    pub fn new(n: usize, cross_section_volume: f64, segments: Vec<ChainSegment>) -> Result<Self, AssemblyError> {
        if n < 2 {
            return Err(AssemblyError::Invalid(format!("dimension {n} must be at least 2")));
        }
        if !(cross_section_volume > 0.0) {
            return Err(AssemblyError::Invalid("cross-section volume must be positive".into()));
        }
        if segments.is_empty() {
            return Err(AssemblyError::Invalid("chain has no segments".into()));
        }
        let last = segments.len() - 1;
        for (i, s) in segments.iter().enumerate() {
            match s {
                ChainSegment::Interior { length, volume, curvature } => {
                    if !(*length > 0.0 && length.is_finite() && *volume >= 0.0 && *curvature >= 0.0) {
                        return Err(AssemblyError::Invalid(format!("bad interior segment {i}")));
                    }
                }
                ChainSegment::Cusp { profile, t_from, t_to, scale } => {
                    if !(*scale > 0.0) || !t_from.is_finite() || t_to.is_nan() {
                        return Err(AssemblyError::Invalid(format!("bad cusp segment {i}")));
                    }
                    if t_to.is_infinite() && i != last {
                        return Err(AssemblyError::Invalid("only the last segment may be unbounded".into()));
                    }
                    let (lo, hi) = (t_from.min(*t_to), t_from.max(*t_to));
                    let (d_lo, d_hi) = profile.domain();
                    if lo < d_lo || hi > d_hi {
                        return Err(AssemblyError::Invalid(format!(
                            "cusp segment {i} runs over [{lo}, {hi}], outside the profile domain"
                        )));
                    }
                }
                ChainSegment::Neck { curvature } => {
                    if !(*curvature >= 0.0) {
                        return Err(AssemblyError::Invalid(format!("bad neck segment {i}")));
                    }
                }
            }
        }
        Ok(Self {
            n,
            cross_section_volume,
            segments,
        })
    }

    /// A single unbounded cusp starting at the basepoint.
    pub fn single_cusp(n: usize, cross_section_volume: f64, profile: ProfileFunction, start: f64) -> Result<Self, AssemblyError> {
        Self::new(
            n,
            cross_section_volume,
            vec![ChainSegment::Cusp {
                profile,
                t_from: start,
                t_to: f64::INFINITY,
                scale: 1.0,
            }],
        )
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn segments(&self) -> &[ChainSegment] {
        &self.segments
    }

    /// Largest radius covered by the chain (possibly infinite).
    pub fn horizon(&self) -> f64 {
        self.segments.iter().map(ChainSegment::length).sum()
    }

    /// Radii at which necks sit.
    pub fn neck_radii(&self) -> Vec<f64> {
        let mut pos = 0.0;
        let mut out = Vec::new();
        for s in &self.segments {
            if let ChainSegment::Neck { .. } = s {
                out.push(pos);
            }
            pos += s.length();
        }
        out
    }

    /// The chain of the metric scaled by `σ²`.
    pub fn homothetic(&self, sigma: f64) -> Result<Self, AssemblyError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(AssemblyError::Invalid(format!("homothety factor {sigma} must be positive")));
        }
        let n = self.n as i32;
        let segments = self
            .segments
            .iter()
            .map(|s| match s {
                ChainSegment::Interior { length, volume, curvature } => ChainSegment::Interior {
                    length: length * sigma,
                    volume: volume * sigma.powi(n),
                    curvature: curvature / (sigma * sigma),
                },
                ChainSegment::Cusp { profile, t_from, t_to, scale } => ChainSegment::Cusp {
                    profile: profile.clone(),
                    t_from: *t_from,
                    t_to: *t_to,
                    scale: scale * sigma,
                },
                ChainSegment::Neck { curvature } => ChainSegment::Neck {
                    curvature: curvature / (sigma * sigma),
                },
            })
            .collect();
        Self::new(self.n, self.cross_section_volume, segments)
    }

    fn check_radius(&self, r: f64) -> Result<(), AssemblyError> {
        let hi = self.horizon();
        if !(r >= 0.0 && r <= hi) {
            return Err(AssemblyError::Horizon { r, lo: 0.0, hi });
        }
        Ok(())
    }

    /// `b_p(r)`, the running maximum of `|K|` over the ball of radius `r`, for every `r`
    /// in an ascending grid. Within a cusp the maximum is taken over the grid points and
    /// the segment's starting point.
    pub fn curvature_envelope(&self, rs: &[f64]) -> Result<Vec<f64>, AssemblyError> {
        if rs.windows(2).any(|w| w[1] < w[0]) {
            return Err(AssemblyError::Invalid("radius grid must be ascending".into()));
        }
        for &r in rs {
            self.check_radius(r)?;
        }
        let mut out = Vec::with_capacity(rs.len());
        let mut running = 0.0f64;
        let mut idx = 0;
        let mut pos = 0.0;
        let last = self.segments.len() - 1;
        for (i, seg) in self.segments.iter().enumerate() {
            let len = seg.length();
            let end = pos + len;
            let in_segment = |r: f64| if i == last { r <= end } else { r < end };
            match seg {
                ChainSegment::Interior { curvature, .. } | ChainSegment::Neck { curvature } => {
                    running = running.max(*curvature);
                    while idx < rs.len() && in_segment(rs[idx]) {
                        out.push(running);
                        idx += 1;
                    }
                }
                ChainSegment::Cusp { profile, t_from, t_to, scale } => {
                    running = running.max(cusp_abs_curvature(profile, *t_from, *scale, self.n)?);
                    let dir = (t_to - t_from).signum();
                    while idx < rs.len() && in_segment(rs[idx]) {
                        let t = t_from + dir * (rs[idx] - pos) / scale;
                        running = running.max(cusp_abs_curvature(profile, t, *scale, self.n)?);
                        out.push(running);
                        idx += 1;
                    }
                }
            }
            pos = end;
        }
        Ok(out)
    }

    /// Volume of `B_p(r) \ B_p(r − width)`.
    pub fn annulus_volume(&self, r: f64, width: f64) -> Result<f64, AssemblyError> {
        self.check_radius(r)?;
        let lo = (r - width).max(0.0);
        let mut pos = 0.0;
        let mut total = 0.0;
        for seg in &self.segments {
            let len = seg.length();
            let (a, b) = (lo.max(pos), r.min(pos + len));
            if b > a {
                total += match seg {
                    ChainSegment::Interior { length, volume, .. } => volume * (b - a) / length,
                    ChainSegment::Neck { .. } => 0.0,
                    ChainSegment::Cusp { profile, t_from, t_to, scale } => {
                        let dir = (t_to - t_from).signum();
                        let m = (self.n - 1) as i32;
                        let density = |rho: f64| {
                            let t = t_from + dir * (rho - pos) / scale;
                            profile.value(t).map_or(f64::NAN, |f| (scale * f).powi(m))
                        };
                        self.cross_section_volume * integrate(density, a, b, 0.0, 1e-13, 4000)?.value
                    }
                };
            }
            pos += len;
            if pos >= r {
                break;
            }
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgvdSample {
    pub r: f64,
    pub b: f64,
    pub vol: f64,
    pub product: f64,
}

impl CgvdSample {
    pub fn csv(samples: &[CgvdSample]) -> String {
        let mut s = String::from("r,b_p,vol_annulus,product\n");
        for x in samples {
            let _ = writeln!(s, "{},{:e},{:e},{:e}", x.r, x.b, x.vol, x.product);
        }
        s
    }
}

/// `b_p(r)ⁿ·Vol(A_p(r))²` along an ascending radius grid, with annuli of the given width.
pub fn cgvd_diagnostic(model: &ChainModel, r_grid: &[f64], width: f64) -> Result<Vec<CgvdSample>, AssemblyError> {
    if !(width > 0.0) {
        return Err(AssemblyError::Invalid(format!("annulus width {width} must be positive")));
    }
    let bs = model.curvature_envelope(r_grid)?;
    r_grid
        .iter()
        .zip(bs)
        .map(|(&r, b)| {
            let vol = model.annulus_volume(r, width)?;
            Ok(CgvdSample {
                r,
                b,
                vol,
                product: b.powi(model.n as i32) * vol * vol,
            })
        })
        .collect()
}

/// Worst ratio `sup h''/h` over the smoothing patch of `smooth_kink(2, 1)` relative to the
/// larger branch value `4A²`, floored at 1.
pub fn neck_inflation() -> f64 {
    const A: f64 = 2.0;
    let Ok(h) = smooth_kink(A, 1.0) else {
        return 1.0;
    };
    let patch = &h.segments()[1];
    let worst = (0..=2000)
        .map(|i| {
            let t = patch.lo + (patch.hi - patch.lo) * i as f64 / 2000.0;
            let j = patch.form.jet(t);
            j.d2 / j.value
        })
        .fold(0.0, f64::max);
    (worst / (4.0 * A * A)).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthParams {
    pub n: usize,
    pub blocks: usize,
    pub schedule: ScaleSchedule,
    pub t_min: f64,
    pub t_cap: f64,
    pub t_step: f64,
    pub interior_radius: f64,
    pub interior_volume: f64,
    pub cross_section_volume: f64,
    /// Verification grid spacing.
    pub verify_step: f64,
    /// Verification starts just above this radius.
    pub verify_from: f64,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            n: 3,
            blocks: 6,
            schedule: ScaleSchedule::linear(),
            t_min: 1.0,
            t_cap: 30.0,
            t_step: 0.25,
            interior_radius: 1.0,
            interior_volume: 1.0,
            cross_section_volume: 1.0,
            verify_step: 0.01,
            verify_from: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub samples: usize,
    /// Smallest `f(r) − b_p(r)` seen.
    pub worst_margin: f64,
    pub worst_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPlan {
    /// Outward truncation depth of each block but the last.
    pub depths: Vec<f64>,
    /// Inward truncation depth of each block but the first, forced by matching.
    pub inner_depths: Vec<f64>,
    pub scales: Vec<f64>,
    pub chain: ChainModel,
    pub verification: Verification,
}

impl GrowthPlan {
    /// The plan in `key = value` form, one section per glued edge.
    pub fn to_config(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[plan]\nblocks = {}\nhorizon = {}\n", self.scales.len(), self.chain.horizon());
        for (i, (t_out, t_in)) in self.depths.iter().zip(&self.inner_depths).enumerate() {
            let _ = writeln!(
                s,
                "[edge.{i}]\nscale_from = {}\nscale_to = {}\nt_out = {t_out}\nt_in = {t_in}\n",
                self.scales[i],
                self.scales[i + 1]
            );
        }
        s
    }
}

fn exp_profile() -> ProfileFunction {
    ProfileFunction::unit_exponential(0.0)
}

fn interior(p: &GrowthParams, s: f64, first: bool) -> ChainSegment {
    let through = if first { 1.0 } else { 2.0 };
    ChainSegment::Interior {
        length: through * p.interior_radius * s,
        volume: p.interior_volume * s.powi(p.n as i32),
        curvature: 1.0 / (s * s),
    }
}

/// Edge between blocks of scales `s` and `s_next`, cut at outward depth `t`: the outer
/// cusp, the neck, and the inner cusp of the next block.
fn edge_segments(s: f64, s_next: f64, t: f64, inflation: f64) -> [ChainSegment; 3] {
    let t_in = t + (s_next / s).ln();
    [
        ChainSegment::Cusp {
            profile: exp_profile(),
            t_from: 0.0,
            t_to: t,
            scale: s,
        },
        ChainSegment::Neck {
            curvature: inflation * ((2.0 * t).exp() / (s * s) + 1.0 / (s_next * s_next)),
        },
        ChainSegment::Cusp {
            profile: exp_profile(),
            t_from: t_in,
            t_to: 0.0,
            scale: s_next,
        },
    ]
}

/// Checks `|K| < f(r)` at sample points of the given segments laid out from radius `pos`.
fn locally_feasible(segs: &[ChainSegment], mut pos: f64, n: usize, budget: &dyn Fn(f64) -> f64) -> bool {
    for seg in segs {
        let ok = match seg {
            ChainSegment::Interior { curvature, .. } | ChainSegment::Neck { curvature } => *curvature < budget(pos),
            ChainSegment::Cusp { profile, t_from, t_to, scale } => {
                let steps = ((t_to - t_from).abs() * 32.0).ceil().max(1.0) as usize;
                (0..=steps).all(|i| {
                    let t = t_from + (t_to - t_from) * i as f64 / steps as f64;
                    let r = pos + scale * (t - t_from).abs();
                    cusp_abs_curvature(profile, t, *scale, n).is_ok_and(|k| k < budget(r))
                })
            }
        };
        if !ok {
            return false;
        }
        pos += seg.length();
    }
    true
}

/// Chooses truncation depths for a line-graph chain of blocks so that the curvature
/// envelope stays under `budget`, taking at each edge the deepest feasible cut from a grid
/// on `[t_min, t_cap]`, then verifies the whole chain on a radius grid.
///
/// Every cusp uses the profile `e^{−t}`; the neck bound is the tangential curvature at the
/// cut on both sides times [`neck_inflation`].
pub fn growth_truncation_planner(budget: &dyn Fn(f64) -> f64, p: &GrowthParams) -> Result<GrowthPlan, AssemblyError> {
    if p.blocks < 2 {
        return Err(AssemblyError::Invalid("growth chain needs at least two blocks".into()));
    }
    if !(p.t_step > 0.0 && p.t_min >= 0.0 && p.t_cap >= p.t_min && p.verify_step > 0.0) {
        return Err(AssemblyError::Invalid("planner grid parameters are inconsistent".into()));
    }
    let inflation = neck_inflation();
    let scales: Vec<f64> = (0..p.blocks as u32).map(|k| p.schedule.scale(k)).collect();
    let mut segments = vec![interior(p, scales[0], true)];
    let mut pos = segments[0].length();
    let mut depths = Vec::new();
    let mut inner_depths = Vec::new();
    for i in 0..p.blocks - 1 {
        let (s, s_next) = (scales[i], scales[i + 1]);
        let lower = p.t_min.max((s / s_next).ln());
        let steps = ((p.t_cap - lower) / p.t_step).floor().max(0.0) as usize;
        let candidate = |j: usize| lower + j as f64 * p.t_step;
        let chosen = (0..=steps)
            .rev()
            .map(candidate)
            .find(|&t| {
                let edge = edge_segments(s, s_next, t, inflation);
                let mut local = edge.to_vec();
                local.push(interior(p, s_next, false));
                locally_feasible(&local, pos, p.n, budget)
            })
            .unwrap_or(lower);
        let edge = edge_segments(s, s_next, chosen, inflation);
        depths.push(chosen);
        inner_depths.push(chosen + (s_next / s).ln());
        for seg in edge {
            pos += seg.length();
            segments.push(seg);
        }
        let core = interior(p, s_next, false);
        pos += core.length();
        segments.push(core);
    }
    let chain = ChainModel::new(p.n, p.cross_section_volume, segments)?;
    let verification = verify_plan(&chain, budget, p.verify_from, p.verify_step)?;
    Ok(GrowthPlan {
        depths,
        inner_depths,
        scales,
        chain,
        verification,
    })
}

/// Checks `b_p(r) < f(r)` on a grid over `(from, horizon]` and at every neck radius.
pub fn verify_plan(
    chain: &ChainModel,
    budget: &dyn Fn(f64) -> f64,
    from: f64,
    step: f64,
) -> Result<Verification, AssemblyError> {
    let hi = chain.horizon();
    if !hi.is_finite() {
        return Err(AssemblyError::Invalid("cannot verify an unbounded chain on a grid".into()));
    }
    let mut rs: Vec<f64> = Vec::new();
    let mut k = 1usize;
    loop {
        let r = from + k as f64 * step;
        if r > hi {
            break;
        }
        rs.push(r);
        k += 1;
    }
    rs.extend(chain.neck_radii().into_iter().filter(|&r| r > from));
    rs.push(hi);
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    let bs = chain.curvature_envelope(&rs)?;
    let mut worst = Verification {
        samples: rs.len(),
        worst_margin: f64::INFINITY,
        worst_r: f64::NAN,
    };
    for (&r, &b) in rs.iter().zip(&bs) {
        let f = budget(r);
        if !(b < f) {
            return Err(AssemblyError::BudgetInfeasible { r, curvature: b, budget: f });
        }
        if f - b < worst.worst_margin {
            worst.worst_margin = f - b;
            worst.worst_r = r;
        }
    }
    Ok(worst)
}

/// `μ_b = μ₁/b`.
pub fn margulis_threshold(b: f64, mu1: Option<f64>) -> Result<f64, AssemblyError> {
    let mu1 = mu1.ok_or_else(|| AssemblyError::Config(format!("Margulis constant μ₁ is not set (export {MU1_ENV})")))?;
    if !(mu1 > 0.0) || !mu1.is_finite() {
        return Err(AssemblyError::Config(format!("Margulis constant μ₁ = {mu1} must be positive")));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(AssemblyError::Invalid(format!("curvature bound {b} must be positive")));
    }
    Ok(mu1 / b)
}

pub fn mu1_from_env() -> Result<Option<f64>, AssemblyError> {
    match std::env::var(MU1_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| AssemblyError::Config(format!("{MU1_ENV} = {v:?} is not a number"))),
        Err(_) => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementVerdict {
    /// The schedule has the `1/k` tail for which this displacement model applies.
    pub applicable: bool,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub d_at_lo: f64,
    pub increasing: bool,
    /// First grid radius with `D(ρ) > 10⁶`.
    pub first_above_million: Option<f64>,
}

impl DisplacementVerdict {
    pub fn holds(&self) -> bool {
        self.applicable && self.increasing && self.first_above_million.is_some()
    }
}

/// Displacement of a loop of unit length at depth `ρ` in a cusp of the harmonic schedule:
/// `D(ρ) = e^ρ/ρ`. Checks it is increasing and unbounded over `[ρ_lo, ρ_hi]`.
pub fn displacement_growth_check(schedule: &ScaleSchedule, rho_lo: f64, rho_hi: f64) -> Result<DisplacementVerdict, AssemblyError> {
    if !(rho_lo > 1.0 && rho_hi > rho_lo) {
        return Err(AssemblyError::Invalid(format!("range [{rho_lo}, {rho_hi}] must satisfy 1 < lo < hi")));
    }
    let d = |rho: f64| rho.exp() / rho;
    const N: usize = 10_000;
    let grid: Vec<f64> = (0..=N).map(|i| rho_lo + (rho_hi - rho_lo) * i as f64 / N as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&r| d(r)).collect();
    Ok(DisplacementVerdict {
        applicable: schedule.has_harmonic_tail(),
        rho_lo,
        rho_hi,
        d_at_lo: d(rho_lo),
        increasing: values.windows(2).all(|w| w[1] > w[0]),
        first_above_million: grid.iter().zip(&values).find(|(_, &v)| v > 1e6).map(|(&r, _)| r),
    })
}

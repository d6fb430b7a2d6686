//! Single warped cusps `N × [a, T)`: volume, completeness, and curvature behaviour far out.

use std::fmt::Write as _;

use thiserror::Error;

use crate::curvature::cusp_sectional_curvatures;
use crate::numerics::quad::{integrate, QuadratureError};
use crate::numerics::sum::CompensatedSum;
use crate::profiles::{scale_profile, Form, ProfileError, ProfileFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CuspError {
    #[error("invalid cusp: {0}")]
    Invalid(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("volume quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("the cusp is truncated at T = {0}; this needs an unbounded cusp")]
    Truncated(f64),
}

/// Where the cusp stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    At(f64),
    Unbounded,
}

impl Truncation {
    pub fn end(&self) -> f64 {
        match *self {
            Truncation::At(t) => t,
            Truncation::Unbounded => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuspModel {
    n: usize,
    cross_section_volume: f64,
    profile: ProfileFunction,
    start: f64,
    truncation: Truncation,
}

impl CuspModel {
    pub fn new(
        n: usize,
        cross_section_volume: f64,
        profile: ProfileFunction,
        start: f64,
        truncation: Truncation,
    ) -> Result<Self, CuspError> {
        if n < 2 {
            return Err(CuspError::Invalid(format!("dimension {n} must be at least 2")));
        }
        if !(cross_section_volume > 0.0) || !cross_section_volume.is_finite() {
            return Err(CuspError::Invalid(format!(
                "cross-section volume {cross_section_volume} must be positive"
            )));
        }
        if profile.is_generator() {
            return Err(CuspError::Invalid("cusp profile must be positive".into()));
        }
        let end = truncation.end();
        if !(start < end) || !start.is_finite() || end.is_nan() {
            return Err(CuspError::Invalid(format!("need a < T, got a = {start}, T = {end}")));
        }
        let (lo, hi) = profile.domain();
        if start < lo || end > hi {
            return Err(CuspError::Invalid(format!(
                "profile domain [{lo}, {hi}] does not contain [{start}, {end})"
            )));
        }
        Ok(Self {
            n,
            cross_section_volume,
            profile,
            start,
            truncation,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn cross_section_volume(&self) -> f64 {
        self.cross_section_volume
    }

    pub fn profile(&self) -> &ProfileFunction {
        &self.profile
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Same cusp restricted to `[lo, hi)`.
    pub fn restricted(&self, lo: f64, hi: Truncation) -> Result<Self, CuspError> {
        Self::new(self.n, self.cross_section_volume, self.profile.clone(), lo, hi)
    }

    /// The cusp in the coordinate `τ = t/A` with profile `f(Aτ)/A`.
    pub fn scaled(&self, big_a: f64) -> Result<Self, CuspError> {
        let profile = scale_profile(&self.profile, big_a, 0.0)?;
        let truncation = match self.truncation {
            Truncation::At(t) => Truncation::At(t / big_a),
            Truncation::Unbounded => Truncation::Unbounded,
        };
        Self::new(self.n, self.cross_section_volume, profile, self.start / big_a, truncation)
    }
}

/// Compact part plus cusps.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldDescriptor {
    pub label: String,
    pub compact_volume: f64,
    pub cusps: Vec<CuspModel>,
}

impl ManifoldDescriptor {
    pub fn new(label: impl Into<String>, compact_volume: f64, cusps: Vec<CuspModel>) -> Result<Self, CuspError> {
        if !(compact_volume >= 0.0) {
            return Err(CuspError::Invalid(format!("compact volume {compact_volume} is negative")));
        }
        if cusps.is_empty() && compact_volume == 0.0 {
            return Err(CuspError::Invalid("a manifold needs a cusp or a compact part".into()));
        }
        Ok(Self {
            label: label.into(),
            compact_volume,
            cusps,
        })
    }

    /// Total volume, or `None` if some cusp has infinite volume.
    pub fn volume(&self) -> Result<Option<f64>, CuspError> {
        let mut acc = CompensatedSum::new();
        acc.add(self.compact_volume);
        for c in &self.cusps {
            match cusp_volume(c)?.value() {
                Some(v) => acc.add(v),
                None => return Ok(None),
            }
        }
        Ok(Some(acc.value()))
    }
}

/// One radial piece of a volume computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumePiece {
    pub lo: f64,
    pub hi: f64,
    pub contribution: f64,
    /// Whether the piece was integrated in closed form.
    pub closed_form: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuspVolume {
    pub pieces: Vec<VolumePiece>,
    /// Set when the tail integral provably diverges.
    pub divergent: bool,
    total: f64,
}

impl CuspVolume {
    /// `None` when divergent.
    pub fn value(&self) -> Option<f64> {
        (!self.divergent).then_some(self.total)
    }

    /// CSV with columns `segment,lo,hi,contribution,cumulative`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("segment,lo,hi,contribution,cumulative\n");
        let mut acc = CompensatedSum::new();
        for (i, p) in self.pieces.iter().enumerate() {
            acc.add(p.contribution);
            let _ = writeln!(
                out,
                "{i},{:.17e},{:.17e},{:.17e},{:.17e}",
                p.lo,
                p.hi,
                p.contribution,
                acc.value()
            );
        }
        out
    }
}

const VOLUME_TOL_REL: f64 = 1e-13;
const VOLUME_MAX_SUBDIVISIONS: usize = 20_000;

/// `∫_lo^∞ (c·φ(t))^m dt` for the decaying tail forms, `None` if divergent.
fn tail_integral(form: &Form, lo: f64, m: i32) -> Option<f64> {
    let mf = m as f64;
    match *form {
        Form::Exp { c, k, t0 } if k > 0.0 => Some(c.powi(m) * (-mf * k * (lo - t0)).exp() / (mf * k)),
        Form::Power { c, s, t0 } if s * mf > 1.0 => {
            Some(c.powi(m) * (lo - t0).powf(1.0 - s * mf) / (s * mf - 1.0))
        }
        _ => None,
    }
}

/// `V_N·∫_a^T f(t)^{n−1} dt`, with unbounded tails integrated in closed form.
pub fn cusp_volume(c: &CuspModel) -> Result<CuspVolume, CuspError> {
    let m = (c.n - 1) as i32;
    let end = c.truncation.end();
    let f = &c.profile;
    let mut pieces = Vec::new();
    let mut divergent = false;
    for seg in f.segments() {
        let lo = seg.lo.max(c.start);
        let hi = seg.hi.min(end);
        if !(lo < hi) {
            continue;
        }
        if hi.is_infinite() {
            let closed = if f.offset() == 0.0 { tail_integral(&seg.form, lo, m) } else { None };
            match closed {
                Some(v) => pieces.push(VolumePiece {
                    lo,
                    hi,
                    contribution: c.cross_section_volume * v,
                    closed_form: true,
                }),
                None => {
                    // every other tail form stays bounded below by a positive constant
                    divergent = true;
                    pieces.push(VolumePiece {
                        lo,
                        hi,
                        contribution: f64::INFINITY,
                        closed_form: true,
                    });
                }
            }
            continue;
        }
        let closed = match seg.form {
            Form::Exp { .. } | Form::Power { .. } if f.offset() == 0.0 => {
                match (tail_integral(&seg.form, lo, m), tail_integral(&seg.form, hi, m)) {
                    (Some(a), Some(b)) if a > 0.0 && (a - b) > 1e-3 * a => Some(a - b),
                    _ => None,
                }
            }
            Form::Constant { c: k } => Some((k + f.offset()).powi(m) * (hi - lo)),
            _ => None,
        };
        let (contribution, closed_form) = match closed {
            Some(v) => (v, true),
            None => {
                let offset = f.offset();
                let r = integrate(
                    |t| (seg.form.jet(t).value + offset).powi(m),
                    lo,
                    hi,
                    0.0,
                    VOLUME_TOL_REL,
                    VOLUME_MAX_SUBDIVISIONS,
                );
                (r?.value, false)
            }
        };
        pieces.push(VolumePiece {
            lo,
            hi,
            contribution: c.cross_section_volume * contribution,
            closed_form,
        });
    }
    let mut acc = CompensatedSum::new();
    for p in &pieces {
        if p.contribution.is_finite() {
            acc.add(p.contribution);
        }
    }
    Ok(CuspVolume {
        pieces,
        divergent,
        total: if divergent { f64::INFINITY } else { acc.value() },
    })
}

/// Why a cusp is or is not complete at its far end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompletenessCertificate {
    /// `∫_a^∞ dt` diverges: radial geodesics have infinite length.
    UnboundedRadialLength { from: f64 },
    /// The cusp has a boundary at radial distance `T − a`.
    Boundary { at: f64, radial_length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completeness {
    pub complete: bool,
    pub certificate: CompletenessCertificate,
}

pub fn completeness_check(c: &CuspModel) -> Completeness {
    match c.truncation {
        Truncation::Unbounded => Completeness {
            complete: true,
            certificate: CompletenessCertificate::UnboundedRadialLength { from: c.start },
        },
        Truncation::At(t) => Completeness {
            complete: false,
            certificate: CompletenessCertificate::Boundary {
                at: t,
                radial_length: t - c.start,
            },
        },
    }
}

/// Sampled curvature along an unbounded cusp.
#[derive(Debug, Clone, PartialEq)]
pub struct Asymptotics {
    /// Tangential curvature tends to −∞ (the profile tends to 0).
    pub blows_down: bool,
    /// Largest sampled curvature over both families.
    pub sup_curvature: f64,
    /// Largest sampled curvature on the last (tail) segment.
    pub sup_tail: f64,
    /// `(t, K_radial, K_tangential)`
    pub samples: Vec<(f64, f64, f64)>,
    /// Slope of `log|K_tangential|` against `log t` over `t ∈ [10, 100]`, when that
    /// window lies in the domain.
    pub growth_exponent: Option<f64>,
}

pub const ASYMPTOTIC_SPAN: f64 = 100.0;
pub const ASYMPTOTIC_SAMPLES: usize = 4001;

pub fn curvature_asymptotics(c: &CuspModel) -> Result<Asymptotics, CuspError> {
    if let Truncation::At(t) = c.truncation {
        return Err(CuspError::Truncated(t));
    }
    let f = &c.profile;
    let tail = f.tail();
    let blows_down = f.offset() == 0.0
        && match tail.form {
            Form::Exp { k, .. } => k > 0.0,
            Form::Power { s, .. } => s > 0.0,
            _ => false,
        };
    let mut samples = Vec::with_capacity(ASYMPTOTIC_SAMPLES);
    let mut sup = f64::NEG_INFINITY;
    let mut sup_tail = f64::NEG_INFINITY;
    for i in 0..ASYMPTOTIC_SAMPLES {
        let t = c.start + ASYMPTOTIC_SPAN * i as f64 / (ASYMPTOTIC_SAMPLES - 1) as f64;
        let k = cusp_sectional_curvatures(f, t).map_err(|e| match e {
            crate::curvature::CurvatureError::Domain(p) => CuspError::Profile(p),
            other => CuspError::Invalid(other.to_string()),
        })?;
        let top = k.radial.max(k.tangential);
        sup = sup.max(top);
        if t >= tail.lo {
            sup_tail = sup_tail.max(top);
        }
        samples.push((t, k.radial, k.tangential));
    }
    let growth_exponent = if c.start <= 10.0 {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 10.0 * 10f64.powf(i as f64 / 39.0);
                let k = cusp_sectional_curvatures(f, t).expect("inside the domain").tangential;
                (t.ln(), k.abs().ln())
            })
            .collect();
        Some(least_squares_slope(&pts))
    } else {
        None
    };
    Ok(Asymptotics {
        blows_down,
        sup_curvature: sup,
        sup_tail,
        samples,
        growth_exponent,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

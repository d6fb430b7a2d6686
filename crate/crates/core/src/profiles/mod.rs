//! Piecewise warping profiles with exact first and second derivatives.
//!
//! A [`ProfileFunction`] is an ordered list of [`Segment`]s, each carrying one closed
//! form from [`Form`]. Derivatives are evaluated in closed form per segment, never by
//! differencing: the curvature formulas divide by `f²`, so derivative noise would be
//! amplified.

mod construct;
mod text;

pub use construct::{make_decay_profile, scale_profile, smooth_kink, DecayMode, DECAY_POWER, KINK_CURVATURE_FLOOR};
pub use text::{parse_profile, ParseProfileError};

use thiserror::Error;

/// Relative tolerance for value/derivative agreement at interior knots.
pub const KNOT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile has no segments")]
    Empty,
    #[error("segment {index} has an empty or reversed interval [{lo}, {hi})")]
    BadInterval { index: usize, lo: f64, hi: f64 },
    #[error("gap or overlap between segment {index} (ends at {hi}) and the next (starts at {next_lo})")]
    NotPartition { index: usize, hi: f64, next_lo: f64 },
    #[error("{order}-th derivative jumps at knot t = {t}: {left} vs {right}")]
    NotC2 {
        t: f64,
        order: usize,
        left: f64,
        right: f64,
    },
    #[error("profile is not positive: f({t}) = {value}")]
    NotPositive { t: f64, value: f64 },
    #[error("t = {t} lies outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("smoothing patch failed: no window down to width {min_width:e} satisfies h''/h > {bound:e}")]
    PatchFailure { min_width: f64, bound: f64 },
}

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }
}

/// Closed forms available to a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Form {
    /// `c·cosh(k(t − t0))`
    Cosh { c: f64, k: f64, t0: f64 },
    /// `c·sinh(k(t − t0))`
    Sinh { c: f64, k: f64, t0: f64 },
    /// `c·exp(−k(t − t0))`; negative `k` gives a growing branch.
    Exp { c: f64, k: f64, t0: f64 },
    /// `c·(t − t0)^(−s)`, defined for `t > t0`.
    Power { c: f64, s: f64, t0: f64 },
    /// `Σ coeffs[i]·(t − t0)^i`
    Quintic { t0: f64, coeffs: [f64; 6] },
    /// `c`
    Constant { c: f64 },
    /// `c·ln(1 + exp(k(t − t0)))`
    Softplus { c: f64, k: f64, t0: f64 },
}

fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl Form {
    pub fn tag(&self) -> &'static str {
        match self {
            Form::Cosh { .. } => "cosh",
            Form::Sinh { .. } => "sinh",
            Form::Exp { .. } => "exp",
            Form::Power { .. } => "power",
            Form::Quintic { .. } => "quintic",
            Form::Constant { .. } => "constant",
            Form::Softplus { .. } => "softplus",
        }
    }

    pub fn jet(&self, t: f64) -> Jet {
        match *self {
            Form::Cosh { c, k, t0 } => {
                let u = k * (t - t0);
                let (ch, sh) = (u.cosh(), u.sinh());
                Jet::new(c * ch, c * k * sh, c * k * k * ch)
            }
            Form::Sinh { c, k, t0 } => {
                let u = k * (t - t0);
                let (ch, sh) = (u.cosh(), u.sinh());
                Jet::new(c * sh, c * k * ch, c * k * k * sh)
            }
            Form::Exp { c, k, t0 } => {
                let e = c * (-k * (t - t0)).exp();
                Jet::new(e, -k * e, k * k * e)
            }
            Form::Power { c, s, t0 } => {
                let u = t - t0;
                let v = c * u.powf(-s);
                Jet::new(v, -s * v / u, s * (s + 1.0) * v / (u * u))
            }
            Form::Quintic { t0, coeffs: cf } => {
                let x = t - t0;
                let v = cf[0] + x * (cf[1] + x * (cf[2] + x * (cf[3] + x * (cf[4] + x * cf[5]))));
                let d1 = cf[1]
                    + x * (2.0 * cf[2] + x * (3.0 * cf[3] + x * (4.0 * cf[4] + x * 5.0 * cf[5])));
                let d2 = 2.0 * cf[2] + x * (6.0 * cf[3] + x * (12.0 * cf[4] + x * 20.0 * cf[5]));
                Jet::new(v, d1, d2)
            }
            Form::Constant { c } => Jet::new(c, 0.0, 0.0),
            Form::Softplus { c, k, t0 } => {
                let u = k * (t - t0);
                let sg = logistic(u);
                Jet::new(c * softplus(u), c * k * sg, c * k * k * sg * (1.0 - sg))
            }
        }
    }

    /// Limit of `f'` as `t → ±∞`, when it exists in closed form.
    fn slope_limit(&self, towards_plus: bool) -> Option<f64> {
        match *self {
            Form::Constant { .. } => Some(0.0),
            Form::Exp { k, .. } => {
                let decays = (k > 0.0) == towards_plus;
                (k == 0.0 || decays).then_some(0.0)
            }
            Form::Power { .. } => towards_plus.then_some(0.0),
            Form::Softplus { c, k, .. } => {
                let saturates = (k > 0.0) == towards_plus;
                Some(if saturates { c * k } else { 0.0 })
            }
            Form::Quintic { coeffs, .. } => {
                if coeffs[2..].iter().all(|&x| x == 0.0) {
                    Some(coeffs[1])
                } else {
                    None
                }
            }
            Form::Cosh { .. } | Form::Sinh { .. } => None,
        }
    }

    /// Closed-form lower bound on `f''` over `[lo, hi)` being non-negative.
    fn convex_on(&self, lo: f64, hi: f64) -> bool {
        match *self {
            Form::Cosh { c, .. } => c >= 0.0,
            Form::Sinh { c, k, t0 } => {
                // sign of sinh(k(t − t0)) over the interval
                let a = k * (lo - t0);
                let b = k * (hi - t0);
                (c >= 0.0 && a.min(b) >= 0.0) || (c <= 0.0 && a.max(b) <= 0.0)
            }
            Form::Exp { c, .. } => c >= 0.0,
            Form::Power { c, .. } => c >= 0.0,
            Form::Constant { .. } => true,
            Form::Softplus { c, .. } => c >= 0.0,
            Form::Quintic { t0, coeffs } => {
                // f'' is a cubic in x = t − t0
                let q = [2.0 * coeffs[2], 6.0 * coeffs[3], 12.0 * coeffs[4], 20.0 * coeffs[5]];
                cubic_min(&q, lo - t0, hi - t0) >= -1e-12 * q.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
        }
    }
}

fn eval_cubic(q: &[f64; 4], x: f64) -> f64 {
    q[0] + x * (q[1] + x * (q[2] + x * q[3]))
}

/// Minimum of `q0 + q1 x + q2 x² + q3 x³` on `[lo, hi]` (either end may be infinite).
fn cubic_min(q: &[f64; 4], lo: f64, hi: f64) -> f64 {
    let mut best = f64::INFINITY;
    let lead = if q[3] != 0.0 {
        (3, q[3])
    } else if q[2] != 0.0 {
        (2, q[2])
    } else if q[1] != 0.0 {
        (1, q[1])
    } else {
        (0, q[0])
    };
    for (end, sign) in [(lo, -1.0), (hi, 1.0)] {
        if end.is_finite() {
            best = best.min(eval_cubic(q, end));
        } else {
            let (deg, c) = lead;
            let s = if deg % 2 == 1 { sign * c } else { c };
            if deg > 0 && s < 0.0 {
                return f64::NEG_INFINITY;
            }
            if deg == 0 {
                best = best.min(c);
            }
        }
    }
    // interior critical points: q1 + 2 q2 x + 3 q3 x² = 0
    let (a, b, c) = (3.0 * q[3], 2.0 * q[2], q[1]);
    let mut crit = Vec::with_capacity(2);
    if a != 0.0 {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            crit.push((-b + sq) / (2.0 * a));
            crit.push((-b - sq) / (2.0 * a));
        }
    } else if b != 0.0 {
        crit.push(-c / b);
    }
    for x in crit {
        if x > lo && x < hi {
            best = best.min(eval_cubic(q, x));
        }
    }
    best
}

/// One piece of a profile: a closed form on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub form: Form,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, form: Form) -> Self {
        Self { lo, hi, form }
    }

    pub fn is_unbounded(&self) -> bool {
        self.hi == f64::INFINITY || self.lo == f64::NEG_INFINITY
    }

    /// Finite sample points across the segment; unbounded ends are truncated at 50 units.
    fn sample_points(&self, n: usize) -> impl Iterator<Item = f64> {
        let lo = if self.lo.is_finite() { self.lo } else { self.hi - 50.0 };
        let hi = if self.hi.is_finite() { self.hi } else { lo + 50.0 };
        (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
    }
}

/// Piecewise profile `t ↦ offset + form_i(t)` on a partition of its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFunction {
    segments: Vec<Segment>,
    offset: f64,
    signed: bool,
}

impl ProfileFunction {
    /// Build a positive C² profile, checking the partition, knot continuity, and
    /// positivity on the domain.
    pub fn new(segments: Vec<Segment>) -> Result<Self, ProfileError> {
        Self::with_offset(segments, 0.0)
    }

    /// Like [`ProfileFunction::new`] with a constant added to every segment.
    pub fn with_offset(segments: Vec<Segment>, offset: f64) -> Result<Self, ProfileError> {
        let p = Self::unchecked(segments, offset, false)?;
        p.check_positive()?;
        Ok(p)
    }

    /// A C² piecewise function that may change sign (graph generators).
    pub fn generator(segments: Vec<Segment>) -> Result<Self, ProfileError> {
        Self::unchecked(segments, 0.0, true)
    }

    fn unchecked(segments: Vec<Segment>, offset: f64, signed: bool) -> Result<Self, ProfileError> {
        if segments.is_empty() {
            return Err(ProfileError::Empty);
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.lo < s.hi) || s.lo.is_nan() || s.hi.is_nan() {
                return Err(ProfileError::BadInterval {
                    index: i,
                    lo: s.lo,
                    hi: s.hi,
                });
            }
            if let Form::Power { t0, .. } = s.form {
                if s.lo <= t0 {
                    return Err(ProfileError::InvalidParameter(format!(
                        "power segment {i} starts at {} but its pole is at {t0}",
                        s.lo
                    )));
                }
            }
        }
        for (i, w) in segments.windows(2).enumerate() {
            if w[0].hi != w[1].lo {
                return Err(ProfileError::NotPartition {
                    index: i,
                    hi: w[0].hi,
                    next_lo: w[1].lo,
                });
            }
            let t = w[0].hi;
            let l = w[0].form.jet(t);
            let r = w[1].form.jet(t);
            let scale = (l.value + offset).abs().max((r.value + offset).abs());
            for (order, a, b) in [(0, l.value, r.value), (1, l.d1, r.d1), (2, l.d2, r.d2)] {
                let tol = KNOT_TOLERANCE * a.abs().max(b.abs()).max(scale).max(1e-300);
                if (a - b).abs() > tol {
                    return Err(ProfileError::NotC2 {
                        t,
                        order,
                        left: a,
                        right: b,
                    });
                }
            }
        }
        Ok(Self {
            segments,
            offset,
            signed,
        })
    }

    fn check_positive(&self) -> Result<(), ProfileError> {
        for s in &self.segments {
            let closed_form_positive = match s.form {
                Form::Cosh { c, .. } | Form::Exp { c, .. } | Form::Power { c, .. } | Form::Constant { c } => {
                    c > 0.0 && self.offset >= 0.0
                }
                _ => false,
            };
            if closed_form_positive {
                continue;
            }
            for t in s.sample_points(2000) {
                if !(t >= s.lo && t < s.hi) && !(t == s.hi && s.hi == self.domain().1) {
                    continue;
                }
                let v = self.offset + s.form.jet(t).value;
                if !(v > 0.0) {
                    return Err(ProfileError::NotPositive { t, value: v });
                }
            }
        }
        Ok(())
    }

    /// `c·exp(−k(t − t0))` on `[lo, ∞)`.
    pub fn exponential(c: f64, k: f64, t0: f64, lo: f64) -> Result<Self, ProfileError> {
        Self::new(vec![Segment::new(lo, f64::INFINITY, Form::Exp { c, k, t0 })])
    }

    /// `e^{−t}` on `[lo, ∞)`.
    pub fn unit_exponential(lo: f64) -> Self {
        Self::exponential(1.0, 1.0, 0.0, lo).expect("e^{-t} is a valid profile")
    }

    /// `cosh(t)` on `[lo, hi)`.
    pub fn cosh(lo: f64, hi: f64) -> Result<Self, ProfileError> {
        Self::new(vec![Segment::new(
            lo,
            hi,
            Form::Cosh {
                c: 1.0,
                k: 1.0,
                t0: 0.0,
            },
        )])
    }

    pub fn constant(c: f64, lo: f64, hi: f64) -> Result<Self, ProfileError> {
        Self::new(vec![Segment::new(lo, hi, Form::Constant { c })])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Closed domain `[lo, hi]`; `hi` may be `+∞` and `lo` may be `−∞`.
    pub fn domain(&self) -> (f64, f64) {
        (self.segments[0].lo, self.segments[self.segments.len() - 1].hi)
    }

    pub fn is_right_unbounded(&self) -> bool {
        self.domain().1 == f64::INFINITY
    }

    /// Interior knots.
    pub fn knots(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.lo).collect()
    }

    /// The last segment, which carries the tail of a right-unbounded profile.
    pub fn tail(&self) -> &Segment {
        &self.segments[self.segments.len() - 1]
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        t.is_finite() && t >= lo && t <= hi
    }

    fn segment_index(&self, t: f64) -> Result<usize, ProfileError> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) || !t.is_finite() {
            return Err(ProfileError::OutOfDomain { t, lo, hi });
        }
        // segments are few; a partition_point keeps this O(log n) anyway
        let idx = self.segments.partition_point(|s| s.hi <= t);
        Ok(idx.min(self.segments.len() - 1))
    }

    /// Value and derivatives at `t`, taken from the right at interior knots.
    pub fn jet(&self, t: f64) -> Result<Jet, ProfileError> {
        let i = self.segment_index(t)?;
        let mut j = self.segments[i].form.jet(t);
        j.value += self.offset;
        Ok(j)
    }

    pub fn value(&self, t: f64) -> Result<f64, ProfileError> {
        Ok(self.jet(t)?.value)
    }

    pub fn d1(&self, t: f64) -> Result<f64, ProfileError> {
        Ok(self.jet(t)?.d1)
    }

    pub fn d2(&self, t: f64) -> Result<f64, ProfileError> {
        Ok(self.jet(t)?.d2)
    }

    /// Whether `f'' ≥ 0` on every segment, decided from the closed forms.
    pub fn is_convex(&self) -> bool {
        self.segments.iter().all(|s| s.form.convex_on(s.lo, s.hi))
    }

    /// `lim f'(t)` as `t → +∞` (or `−∞`), when the end segment is unbounded and the
    /// limit exists.
    pub fn slope_at_infinity(&self, plus: bool) -> Option<f64> {
        let (lo, hi) = self.domain();
        if plus {
            (hi == f64::INFINITY).then(|| self.tail().form.slope_limit(true)).flatten()
        } else {
            (lo == f64::NEG_INFINITY)
                .then(|| self.segments[0].form.slope_limit(false))
                .flatten()
        }
    }

    /// `f'(∞) − f'(−∞)` for profiles defined on all of ℝ.
    pub fn slope_budget(&self) -> Option<f64> {
        Some(self.slope_at_infinity(true)? - self.slope_at_infinity(false)?)
    }

    /// Plain-text serialization, one record per segment, 17 significant digits.
    pub fn to_text(&self) -> String {
        text::write_profile(self)
    }

    /// The pointwise product `k·f` (for homothetic rescaling of metric coefficients).
    pub fn multiplied(&self, k: f64) -> Result<Self, ProfileError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(ProfileError::InvalidParameter(format!("factor {k} must be positive")));
        }
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let form = match s.form {
                    Form::Cosh { c, k: r, t0 } => Form::Cosh { c: c * k, k: r, t0 },
                    Form::Sinh { c, k: r, t0 } => Form::Sinh { c: c * k, k: r, t0 },
                    Form::Exp { c, k: r, t0 } => Form::Exp { c: c * k, k: r, t0 },
                    Form::Softplus { c, k: r, t0 } => Form::Softplus { c: c * k, k: r, t0 },
                    Form::Power { c, s, t0 } => Form::Power { c: c * k, s, t0 },
                    Form::Constant { c } => Form::Constant { c: c * k },
                    Form::Quintic { t0, coeffs } => Form::Quintic {
                        t0,
                        coeffs: coeffs.map(|v| v * k),
                    },
                };
                Segment::new(s.lo, s.hi, form)
            })
            .collect();
        Self::rebuild(segments, self.offset * k, self.signed)
    }

    /// Whether this was built as a sign-changing generator rather than a positive profile.
    pub fn is_generator(&self) -> bool {
        self.signed
    }

    /// Rebuild with partition and knot checks, adding the positivity check for profiles.
    pub(crate) fn rebuild(segments: Vec<Segment>, offset: f64, signed: bool) -> Result<Self, ProfileError> {
        let p = Self::unchecked(segments, offset, signed)?;
        if !signed {
            p.check_positive()?;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2(p: &ProfileFunction, t: f64) -> f64 {
        let h = 1e-5;
        (p.value(t + h).unwrap() - 2.0 * p.value(t).unwrap() + p.value(t - h).unwrap()) / (h * h)
    }

    #[test]
    fn form_jets_match_finite_differences() {
        let forms = [
            Form::Cosh { c: 1.3, k: 0.7, t0: 0.2 },
            Form::Sinh { c: 0.5, k: 1.1, t0: -1.0 },
            Form::Exp { c: 2.0, k: 1.5, t0: 0.3 },
            Form::Power { c: 3.0, s: 4.0, t0: -2.0 },
            Form::Quintic { t0: 0.5, coeffs: [1.0, -0.5, 0.25, 0.1, -0.02, 0.003] },
            Form::Softplus { c: 0.157, k: 2.0, t0: 0.0 },
        ];
        for f in forms {
            for &t in &[0.0, 0.4, 1.7] {
                let j = f.jet(t);
                let h = 1e-5;
                let d1 = (f.jet(t + h).value - f.jet(t - h).value) / (2.0 * h);
                let d2 = (f.jet(t + h).value - 2.0 * j.value + f.jet(t - h).value) / (h * h);
                assert!((d1 - j.d1).abs() < 1e-7 * j.d1.abs().max(1.0), "{f:?} d1 at {t}");
                assert!((d2 - j.d2).abs() < 1e-4 * j.d2.abs().max(1.0), "{f:?} d2 at {t}");
            }
        }
    }

    #[test]
    fn softplus_is_stable_far_out() {
        let f = Form::Softplus { c: 1.0, k: 1.0, t0: 0.0 };
        assert!((f.jet(800.0).value - 800.0).abs() < 1e-9);
        assert!(f.jet(-800.0).value >= 0.0);
        assert!(f.jet(-800.0).d1.is_finite());
    }

    #[test]
    fn rejects_gaps_and_jumps() {
        let e = ProfileFunction::new(vec![
            Segment::new(0.0, 1.0, Form::Constant { c: 1.0 }),
            Segment::new(1.5, 2.0, Form::Constant { c: 1.0 }),
        ]);
        assert!(matches!(e, Err(ProfileError::NotPartition { .. })));
        let e = ProfileFunction::new(vec![
            Segment::new(0.0, 1.0, Form::Constant { c: 1.0 }),
            Segment::new(1.0, 2.0, Form::Constant { c: 1.1 }),
        ]);
        assert!(matches!(e, Err(ProfileError::NotC2 { order: 0, .. })));
        let e = ProfileFunction::new(vec![Segment::new(1.0, 1.0, Form::Constant { c: 1.0 })]);
        assert!(matches!(e, Err(ProfileError::BadInterval { .. })));
        assert_eq!(ProfileFunction::new(vec![]), Err(ProfileError::Empty));
    }

    #[test]
    fn rejects_nonpositive() {
        let e = ProfileFunction::new(vec![Segment::new(
            -1.0,
            1.0,
            Form::Quintic { t0: 0.0, coeffs: [0.0, 1.0, 0.0, 0.0, 0.0, 0.0] },
        )]);
        assert!(matches!(e, Err(ProfileError::NotPositive { .. })));
        // the same function is an acceptable generator
        assert!(ProfileFunction::generator(vec![Segment::new(
            -1.0,
            1.0,
            Form::Quintic { t0: 0.0, coeffs: [0.0, 1.0, 0.0, 0.0, 0.0, 0.0] },
        )])
        .is_ok());
    }

    #[test]
    fn domain_errors() {
        let p = ProfileFunction::unit_exponential(0.0);
        assert!(matches!(p.value(-0.1), Err(ProfileError::OutOfDomain { .. })));
        assert!(p.value(f64::INFINITY).is_err());
        assert!(p.value(f64::NAN).is_err());
        assert_eq!(p.value(0.0).unwrap(), 1.0);
    }

    #[test]
    fn right_derivative_at_knots() {
        let p = ProfileFunction::new(vec![
            Segment::new(0.0, 1.0, Form::Exp { c: 1.0, k: 1.0, t0: 0.0 }),
            Segment::new(1.0, f64::INFINITY, Form::Exp { c: (-1.0f64).exp(), k: 1.0, t0: 1.0 }),
        ])
        .unwrap();
        let j = p.jet(1.0).unwrap();
        assert!((j.value - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(p.knots(), vec![1.0]);
    }

    #[test]
    fn cubic_minimum() {
        // (x − 1)² x on [0, 3] has minimum 0 at 0 and 1
        let q = [0.0, 1.0, -2.0, 1.0];
        assert!(cubic_min(&q, 0.0, 3.0).abs() < 1e-15);
        assert!(cubic_min(&q, -1.0, 3.0) < -3.9);
        assert_eq!(cubic_min(&q, 0.0, f64::INFINITY), 0.0);
        assert_eq!(cubic_min(&q, f64::NEG_INFINITY, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn slope_budget_of_softplus() {
        let g = ProfileFunction::generator(vec![Segment::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            Form::Softplus { c: 0.25, k: 2.0, t0: 0.0 },
        )])
        .unwrap();
        assert_eq!(g.slope_budget(), Some(0.5));
        assert!(g.is_convex());
        assert!((fd2(&g, 0.3) - g.d2(0.3).unwrap()).abs() < 1e-5);
    }
}

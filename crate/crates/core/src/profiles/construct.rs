use super::{Form, Jet, ProfileError, ProfileFunction, Segment};
use crate::numerics::roots::bracketed_root;

/// Exponent of the power tail used by [`DecayMode::CubicDecay`].
pub const DECAY_POWER: f64 = 4.0;

/// Tail behaviour of [`make_decay_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayMode {
    /// Power tail `C·(t − t₀)^{−4}`, so `t³f(t) → 0`.
    CubicDecay,
    /// Exponential tail `C·e^{−t}` beyond the last knot.
    Exponential,
}

/// Quintic in `x − x0` matching the 2-jets `j0` at `x0` and `j1` at `x1`.
pub fn hermite_quintic(x0: f64, x1: f64, j0: Jet, j1: Jet) -> Form {
    let h = x1 - x0;
    let (p0, v0, a0) = (j0.value, j0.d1, j0.d2);
    let (p1, v1, a1) = (j1.value, j1.d1, j1.d2);
    let h2 = h * h;
    let c3 = (20.0 * (p1 - p0) - (8.0 * v1 + 12.0 * v0) * h - (3.0 * a0 - a1) * h2) / (2.0 * h2 * h);
    let c4 = (30.0 * (p0 - p1) + (14.0 * v1 + 16.0 * v0) * h + (3.0 * a0 - 2.0 * a1) * h2) / (2.0 * h2 * h2);
    let c5 = (12.0 * (p1 - p0) - 6.0 * (v1 + v0) * h - (a0 - a1) * h2) / (2.0 * h2 * h2 * h);
    Form::Quintic {
        t0: x0,
        coeffs: [p0, v0, 0.5 * a0, c3, c4, c5],
    }
}

/// Tail segment starting at `t1` whose 2-jet there is `(y1, −y1, κ·y1)`, together with κ.
fn tail_form(mode: DecayMode, t1: f64, y1: f64) -> (Form, f64) {
    match mode {
        DecayMode::Exponential => (Form::Exp { c: y1, k: 1.0, t0: t1 }, 1.0),
        DecayMode::CubicDecay => {
            // f' = −s·f/u gives u = s at unit relative slope
            let s = DECAY_POWER;
            (
                Form::Power {
                    c: y1 * s.powf(s),
                    s,
                    t0: t1 - s,
                },
                (s + 1.0) / s,
            )
        }
    }
}

/// Convex decaying profile on `[a, ∞)` that starts with the 2-jet of `cosh` at `a`.
///
/// For `a < 0` the profile is convex: `f''` ramps linearly from `cosh a` down to the tail's
/// curvature over a short interval, stays constant until the slope meets the tail slope,
/// then the tail takes over. For `a ≥ 0` no convex decaying function has that initial
/// jet (`f'(a) ≥ 0`), so a single quintic on `[a, a + 1]` carries the jet down to a tail
/// at level `cosh(a)/2`; that profile is positive and C² but not convex.
pub fn make_decay_profile(a: f64, mode: DecayMode) -> Result<ProfileFunction, ProfileError> {
    if !a.is_finite() {
        return Err(ProfileError::InvalidParameter(format!("start a = {a} must be finite")));
    }
    let start = Jet::new(a.cosh(), a.sinh(), a.cosh());
    if a >= 0.0 {
        let t1 = a + 1.0;
        let y1 = 0.5 * start.value;
        let (tail, kappa) = tail_form(mode, t1, y1);
        let blend = hermite_quintic(a, t1, start, Jet::new(y1, -y1, kappa * y1));
        return ProfileFunction::new(vec![
            Segment::new(a, t1, blend),
            Segment::new(t1, f64::INFINITY, tail),
        ]);
    }
    let (_, kappa) = tail_form(mode, 0.0, 1.0);
    let (w0, s0) = (start.value, start.d1);
    for halving in 0..40 {
        let delta = a.tanh().abs() * 0.5 * 0.5f64.powi(halving);
        // First segment: f'' linear from w0 to w2 = κ·y1 on [a, a + δ].
        let v1 = |y1: f64| s0 + (w0 + kappa * y1) * delta / 2.0;
        let f_delta = |y1: f64| w0 + s0 * delta + delta * delta * (2.0 * w0 + kappa * y1) / 6.0;
        // Second segment: constant f'' = w2 until the slope reaches −y1.
        let length = |y1: f64| (-y1 - v1(y1)) / (kappa * y1);
        let residual = |y1: f64| {
            let l = length(y1);
            Ok::<f64, ()>(f_delta(y1) + v1(y1) * l + 0.5 * kappa * y1 * l * l - y1)
        };
        let y_max = (-s0 - w0 * delta / 2.0) / (1.0 + kappa * delta / 2.0);
        if !(y_max > 0.0) {
            continue;
        }
        let hi = y_max * (1.0 - 1e-12);
        let mut lo = hi;
        while residual(lo).unwrap() >= 0.0 && lo > 1e-300 {
            lo *= 0.5;
        }
        if residual(hi).unwrap() <= 0.0 || residual(lo).unwrap() >= 0.0 {
            continue;
        }
        let y1 = bracketed_root(residual, lo, hi, 0.0, 0.0, 400).unwrap();
        let l = length(y1);
        if !(l > 0.0) {
            continue;
        }
        let w2 = kappa * y1;
        let k1 = a + delta;
        let t1 = k1 + l;
        let (tail, _) = tail_form(mode, t1, y1);
        let ramp = Form::Quintic {
            t0: a,
            coeffs: [w0, s0, 0.5 * w0, (w2 - w0) / (6.0 * delta), 0.0, 0.0],
        };
        // anchored at the right knot so the small tail values are reproduced exactly
        let glide = Form::Quintic {
            t0: t1,
            coeffs: [y1, -y1, 0.5 * w2, 0.0, 0.0, 0.0],
        };
        let built = ProfileFunction::new(vec![
            Segment::new(a, k1, ramp),
            Segment::new(k1, t1, glide),
            Segment::new(t1, f64::INFINITY, tail),
        ]);
        if built.is_ok() {
            return built;
        }
    }
    Err(ProfileError::InvalidParameter(format!(
        "no convex decay profile found from a = {a}"
    )))
}

/// Minimum `h''/h` required of the smoothing patch.
pub const KINK_CURVATURE_FLOOR: f64 = 1e-10;

const KINK_GRID: usize = 10_000;

/// C² smoothing of the kink between `e^{−A(t+2a)}` and `e^{2A(t−a)}`.
///
/// A quintic Hermite patch replaces the branches on `(−w, w)`, starting at `w = 1/A` and
/// halving the window until `h''/h > 1e−10` holds on a dense grid.
pub fn smooth_kink(big_a: f64, a: f64) -> Result<ProfileFunction, ProfileError> {
    if !(big_a >= 2.0) || !big_a.is_finite() {
        return Err(ProfileError::InvalidParameter(format!("A = {big_a} must be at least 2")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(ProfileError::InvalidParameter(format!("a = {a} must be positive")));
    }
    let left = Form::Exp {
        c: 1.0,
        k: big_a,
        t0: -2.0 * a,
    };
    let right = Form::Exp {
        c: 1.0,
        k: -2.0 * big_a,
        t0: a,
    };
    let min_width = 1e-6 / big_a;
    let mut w = 1.0 / big_a;
    while w >= min_width {
        let patch = hermite_quintic(-w, w, left.jet(-w), right.jet(w));
        let ok = (0..=KINK_GRID).all(|i| {
            let t = -w + 2.0 * w * i as f64 / KINK_GRID as f64;
            let j = patch.jet(t);
            j.value > 0.0 && j.d2 / j.value > KINK_CURVATURE_FLOOR
        });
        if ok {
            if let Ok(p) = ProfileFunction::new(vec![
                Segment::new(f64::NEG_INFINITY, -w, left),
                Segment::new(-w, w, patch),
                Segment::new(w, f64::INFINITY, right),
            ]) {
                return Ok(p);
            }
        }
        w *= 0.5;
    }
    Err(ProfileError::PatchFailure {
        min_width,
        bound: KINK_CURVATURE_FLOOR,
    })
}

/// The profile `τ ↦ f(Aτ + c)/A`, transformed segment by segment in closed form.
pub fn scale_profile(f: &ProfileFunction, big_a: f64, c: f64) -> Result<ProfileFunction, ProfileError> {
    if !(big_a > 0.0) || !big_a.is_finite() || !c.is_finite() {
        return Err(ProfileError::InvalidParameter(format!(
            "scale factor A = {big_a} must be positive and shift c = {c} finite"
        )));
    }
    let map = |t: f64| {
        if t.is_infinite() {
            t
        } else {
            (t - c) / big_a
        }
    };
    let segments = f
        .segments()
        .iter()
        .map(|s| {
            let form = match s.form {
                Form::Cosh { c: amp, k, t0 } => Form::Cosh {
                    c: amp / big_a,
                    k: k * big_a,
                    t0: map(t0),
                },
                Form::Sinh { c: amp, k, t0 } => Form::Sinh {
                    c: amp / big_a,
                    k: k * big_a,
                    t0: map(t0),
                },
                Form::Exp { c: amp, k, t0 } => Form::Exp {
                    c: amp / big_a,
                    k: k * big_a,
                    t0: map(t0),
                },
                Form::Softplus { c: amp, k, t0 } => Form::Softplus {
                    c: amp / big_a,
                    k: k * big_a,
                    t0: map(t0),
                },
                Form::Power { c: amp, s, t0 } => Form::Power {
                    c: amp * big_a.powf(-s - 1.0),
                    s,
                    t0: map(t0),
                },
                Form::Constant { c: amp } => Form::Constant { c: amp / big_a },
                Form::Quintic { t0, coeffs } => {
                    let mut out = [0.0; 6];
                    let mut pow = 1.0 / big_a;
                    for (o, v) in out.iter_mut().zip(coeffs) {
                        *o = v * pow;
                        pow *= big_a;
                    }
                    Form::Quintic { t0: map(t0), coeffs: out }
                }
            };
            Segment::new(map(s.lo), map(s.hi), form)
        })
        .collect();
    ProfileFunction::rebuild(segments, f.offset() / big_a, f.is_generator())
}

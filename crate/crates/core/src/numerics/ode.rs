//! Dormand–Prince 5(4) integrator for autonomous systems with PI step-size control.
//!
//! Only autonomous right-hand sides are needed here, so the node abscissae of the
//! tableau never appear.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("right-hand side not finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget of {0} exhausted")]
    StepBudget(usize),
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl DormandPrince {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step of size `h` from `y` (with `k1 = f(y)`).
///
/// Returns the 5th-order solution, its derivative (FSAL), and the embedded error vector.
pub fn dp_step<const N: usize, F: Fn(&[f64; N]) -> [f64; N]>(
    f: &F,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    let k2 = f(&comb(y, h, &[(A21, k1)]));
    let k3 = f(&comb(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&comb(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y_new = comb(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, k7, err)
}

/// Summary of an integration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub t_end: f64,
}

impl DormandPrince {
    fn error_norm<const N: usize>(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y0[i].abs().max(y1[i].abs());
            acc = acc.max((err[i] / sc).abs());
        }
        acc
    }

    /// Integrate `y' = f(y)` from `t0` towards `t_end` (which may be below `t0`).
    ///
    /// `observe(t, y, dy)` is called for the initial state and after every accepted step;
    /// returning [`Flow::Stop`] ends the run early.
    pub fn integrate<const N: usize, F, O>(
        &self,
        f: F,
        y0: [f64; N],
        t0: f64,
        t_end: f64,
        mut observe: O,
    ) -> Result<OdeStats, OdeError>
    where
        F: Fn(&[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N], &[f64; N]) -> Flow,
    {
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let span = (t_end - t0).abs();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(&y);
        if k1.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFinite { t });
        }
        let mut stats = OdeStats {
            accepted: 0,
            rejected: 0,
            t_end: t0,
        };
        if observe(t, &y, &k1) == Flow::Stop || span == 0.0 {
            return Ok(stats);
        }
        let mut h = (self.rtol.powf(0.2) * 0.1).min(self.h_max).min(span);
        let mut prev_err: f64 = 1e-4;
        loop {
            let remaining = (t_end - t).abs();
            if remaining <= 1e-14 * span.max(1.0) {
                break;
            }
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(OdeError::StepBudget(self.max_steps));
            }
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let (y_new, k_new, err) = dp_step(&f, &y, &k1, dir * step);
            if y_new.iter().chain(k_new.iter()).any(|v| !v.is_finite()) {
                h *= 0.25;
                stats.rejected += 1;
                if h < self.h_min {
                    return Err(OdeError::NonFinite { t });
                }
                continue;
            }
            let en = self.error_norm(&y, &y_new, &err);
            if en <= 1.0 {
                t = if last { t_end } else { t + dir * step };
                y = y_new;
                k1 = k_new;
                stats.accepted += 1;
                stats.t_end = t;
                // PI controller (Gustafsson)
                let fac = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0)
                };
                prev_err = en.max(1e-4);
                if observe(t, &y, &k1) == Flow::Stop || last {
                    break;
                }
                h = (step * fac).min(self.h_max);
            } else {
                stats.rejected += 1;
                h = step * (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.h_min {
                    return Err(OdeError::StepUnderflow { t, h });
                }
            }
        }
        Ok(stats)
    }
}

/// Bisection followed by secant polishing on a bracket `[lo, hi]` with `g(lo)·g(hi) ≤ 0`.
///
/// `g` may fail; a failure inside the bracket aborts with that error. Returns the root
/// estimate once the bracket is narrower than `x_tol` or `|g| ≤ f_tol`.
pub fn bracketed_root<E, G>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<f64, E>
where
    G: FnMut(f64) -> Result<f64, E>,
{
    let mut g_lo = g(lo)?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    let mut g_hi = g(hi)?;
    if g_hi == 0.0 {
        return Ok(hi);
    }
    debug_assert!(g_lo * g_hi < 0.0, "bracket must straddle a sign change");
    for _ in 0..max_iter {
        // secant candidate, accepted only when it falls well inside the bracket
        let sec = hi - g_hi * (hi - lo) / (g_hi - g_lo);
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        let x = if sec.is_finite() && (sec - lo) > 0.05 * width && (hi - sec) > 0.05 * width {
            sec
        } else {
            mid
        };
        let gx = g(x)?;
        if gx.abs() <= f_tol {
            return Ok(x);
        }
        if (gx < 0.0) == (g_lo < 0.0) {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
            g_hi = gx;
        }
        if (hi - lo).abs() <= x_tol {
            break;
        }
    }
    Ok(if g_lo.abs() < g_hi.abs() { lo } else { hi })
}

/// Plain bisection on a monotone predicate: returns the boundary between `true` at `lo`
/// and `false` at `hi` to within `x_tol`.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(mut p: P, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    while (hi - lo).abs() > x_tol {
        let mid = 0.5 * (lo + hi);
        if p(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

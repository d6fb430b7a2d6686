//! Convergence verdicts for series of positive terms.
//!
//! A verdict is never read off partial sums. The term sequence is sampled at dyadic
//! checkpoints `K = 2^j`, and the local decay exponent `p_K = −log₂(a_{2K}/a_K)` decides
//! between geometric decay (`p_K` doubles with `K`), power-law decay (`p_K` settles),
//! and non-vanishing terms. A power law is only accepted once the drift of `p_K` is
//! shrinking geometrically, which rejects logarithmic corrections such as `1/(k ln k)`.
//! Convergent sums are completed with a geometric tail bound or an Euler–Maclaurin tail.

use super::graph::GraphPlan;
use super::schedule::ScaleSchedule;
use super::AssemblyError;
use crate::numerics::quad::integrate;
use crate::numerics::sum::CompensatedSum;

/// The comparison series that decided a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Comparison {
    /// Eventually dominated by (or dominating) a geometric series with this ratio.
    Geometric { ratio: f64 },
    /// Eventually comparable to `Σ k^{−p}`.
    PSeries { p: f64 },
    /// `k·a_k` tends to a positive limit, so the series dominates a multiple of `Σ 1/k`.
    Harmonic { limit: f64 },
    /// The terms do not tend to zero.
    NonVanishing { last_term: f64 },
}

impl Comparison {
    pub fn describe(&self) -> String {
        match *self {
            Comparison::Geometric { ratio } => format!("geometric(ratio={ratio:.6})"),
            Comparison::PSeries { p } => format!("p-series(p={p:.4})"),
            Comparison::Harmonic { limit } => format!("harmonic(limit={limit:.6})"),
            Comparison::NonVanishing { last_term } => format!("non-vanishing(term={last_term:.6e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesVerdict {
    Convergent {
        sum: f64,
        /// Estimated (Euler–Maclaurin) or bounded (geometric) tail beyond the partial sum.
        tail: f64,
        terms: u64,
        witness: Comparison,
    },
    Divergent {
        partial_sum: f64,
        terms: u64,
        witness: Comparison,
    },
}

impl SeriesVerdict {
    pub fn converges(&self) -> bool {
        matches!(self, SeriesVerdict::Convergent { .. })
    }

    pub fn witness(&self) -> Comparison {
        match *self {
            SeriesVerdict::Convergent { witness, .. } | SeriesVerdict::Divergent { witness, .. } => witness,
        }
    }

    pub fn sum(&self) -> Option<f64> {
        match *self {
            SeriesVerdict::Convergent { sum, .. } => Some(sum),
            SeriesVerdict::Divergent { .. } => None,
        }
    }
}

/// Distance from `p = 1` inside which a settled exponent is not trusted either way.
pub const P_MARGIN: f64 = 0.05;
/// Largest checkpoint exponent: the engine looks at no more than about 10⁶ terms.
pub const MAX_CHECKPOINT: u32 = 19;
const MIN_CHECKPOINT: u32 = 3;
const SUM_REL_TOL: f64 = 1e-13;
/// Terms summed directly before the Euler–Maclaurin tail takes over.
const HEAD_TERMS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy)]
struct Checkpoint {
    k: f64,
    a: f64,
    p: f64,
}

fn partial_sum<F: Fn(u32) -> f64>(term: &F, n: u64) -> f64 {
    let mut acc = CompensatedSum::new();
    for k in 0..n {
        acc.add(term(k as u32));
    }
    acc.value()
}

/// Euler–Maclaurin estimate of `Σ_{k ≥ K} a(k)` for terms decaying like `k^{−p}`.
fn euler_maclaurin_tail<G: Fn(f64) -> f64>(a: &G, k: f64, p: f64) -> Result<f64, AssemblyError> {
    // ∫_K^∞ a(x) dx with x = K·u^{−q}; q = 2/(p − 1) makes the integrand vanish linearly at u = 0
    let q = 2.0 / (p - 1.0).max(0.05);
    let integral = integrate(
        |u: f64| {
            let x = k * u.powf(-q);
            let v = a(x) * q * x / u;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        0.0,
        1e-14,
        4000,
    )?
    .value;
    let h = 1e-2 * k;
    let d1 = (a(k + h) - a(k - h)) / (2.0 * h);
    Ok(integral + 0.5 * a(k) - d1 / 12.0)
}

/// Decide convergence of `Σ_{k≥0} term(k)` for non-negative terms.
///
/// `term_real` must agree with `term` at integers `k ≥ 1` and be smooth there; it is
/// used for the dyadic samples and the tail integral.
pub fn classify_series<F, G>(term: F, term_real: G) -> Result<SeriesVerdict, AssemblyError>
where
    F: Fn(u32) -> f64,
    G: Fn(f64) -> f64,
{
    let mut cps: Vec<Checkpoint> = Vec::new();
    for j in MIN_CHECKPOINT..=MAX_CHECKPOINT {
        let k = 2f64.powi(j as i32);
        let a = term_real(k);
        let a2 = term_real(2.0 * k);
        if !(a.is_finite() && a2.is_finite()) || a < 0.0 || a2 < 0.0 {
            return Err(AssemblyError::Invalid(format!("series term at k = {k} is {a}")));
        }
        let p = if a == 0.0 && a2 == 0.0 {
            f64::INFINITY
        } else {
            -(a2 / a).log2()
        };
        cps.push(Checkpoint { k, a, p });
        let n = cps.len();
        if n < 3 {
            continue;
        }
        let (c0, c1, c2) = (cps[n - 3], cps[n - 2], cps[n - 1]);

        // Terms underflowed between checkpoints: decay faster than any power of 2^{-K}.
        if c2.p == f64::INFINITY && c1.p > 0.0 {
            let ratio = 2f64.powf(-c1.p / c1.k).min(0.5);
            return geometric_sum(&term, ratio, c1.k as u64);
        }
        // Geometric behaviour: the exponent doubles with K.
        let doubling = |x: Checkpoint, y: Checkpoint| y.p.abs() >= 1.8 * x.p.abs() && x.p.signum() == y.p.signum();
        if c1.p.is_finite() && c2.p.is_finite() && doubling(c0, c1) && doubling(c1, c2) && c1.p.abs() > 1e-9 {
            if c2.p > 0.0 {
                let ratio = 2f64.powf(-c2.p / c2.k);
                return geometric_sum(&term, ratio, c2.k as u64);
            }
            return Ok(SeriesVerdict::Divergent {
                partial_sum: partial_sum(&term, c2.k as u64),
                terms: c2.k as u64,
                witness: Comparison::NonVanishing { last_term: c2.a },
            });
        }
        // Power-law behaviour: the exponent settles with geometrically shrinking drift.
        let drift = (c2.p - c1.p).abs();
        let prev_drift = (c1.p - c0.p).abs();
        let older_drift = if n >= 4 { (c0.p - cps[n - 4].p).abs() } else { 0.0 };
        let settled = drift < 1e-12 || (drift <= 0.6 * prev_drift && prev_drift <= 0.6 * older_drift && drift < 0.05);
        if !settled {
            continue;
        }
        // with drift ratios at most 0.6 the remaining movement is below 1.5·drift
        let lo = c2.p - 3.0 * drift;
        let hi = c2.p + 3.0 * drift;
        if hi <= 0.0 + 1e-9 && lo <= 0.0 {
            return Ok(SeriesVerdict::Divergent {
                partial_sum: partial_sum(&term, c2.k as u64),
                terms: c2.k as u64,
                witness: Comparison::NonVanishing { last_term: c2.a },
            });
        }
        if lo > 1.0 + P_MARGIN {
            let n_terms = (c2.k as u64).max(HEAD_TERMS);
            let head = partial_sum(&term, n_terms);
            let tail = euler_maclaurin_tail(&term_real, n_terms as f64, lo)?;
            return Ok(SeriesVerdict::Convergent {
                sum: head + tail,
                tail,
                terms: n_terms,
                witness: Comparison::PSeries { p: c2.p },
            });
        }
        if hi < 1.0 - P_MARGIN {
            return Ok(SeriesVerdict::Divergent {
                partial_sum: partial_sum(&term, c2.k as u64),
                terms: c2.k as u64,
                witness: Comparison::PSeries { p: c2.p },
            });
        }
        if (c2.p - 1.0).abs() < 1e-3 && drift < 1e-3 {
            return Ok(SeriesVerdict::Divergent {
                partial_sum: partial_sum(&term, c2.k as u64),
                terms: c2.k as u64,
                witness: Comparison::Harmonic { limit: c2.k * c2.a },
            });
        }
    }
    let last = cps.last().expect("at least one checkpoint");
    Err(AssemblyError::Inconclusive {
        terms: (2.0 * last.k) as u64,
        exponent: last.p,
    })
}

fn geometric_sum<F: Fn(u32) -> f64>(term: &F, ratio: f64, start: u64) -> Result<SeriesVerdict, AssemblyError> {
    let mut acc = CompensatedSum::new();
    let mut k: u64 = 0;
    loop {
        let a = term(k as u32);
        acc.add(a);
        k += 1;
        let bound = term(k as u32) / (1.0 - ratio);
        if k >= start && bound <= SUM_REL_TOL * acc.value() {
            return Ok(SeriesVerdict::Convergent {
                sum: acc.value(),
                tail: bound,
                terms: k,
                witness: Comparison::Geometric { ratio },
            });
        }
        if k > 10_000_000 {
            return Err(AssemblyError::Inconclusive {
                terms: k,
                exponent: f64::NAN,
            });
        }
    }
}

/// Verdict on `Σ_k count(k)·scale(k)ⁿ·V` for block volume `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeVerdict {
    pub verdict: SeriesVerdict,
    /// Block volume used for the upper-bound series.
    pub block_volume: f64,
}

impl VolumeVerdict {
    pub fn finite(&self) -> bool {
        self.verdict.converges()
    }
}

/// Total volume of an assembly whose blocks all have volume at most `block_volume`
/// (before scaling).
pub fn total_volume(
    graph: &GraphPlan,
    schedule: &ScaleSchedule,
    block_volume: f64,
    n: usize,
) -> Result<VolumeVerdict, AssemblyError> {
    if !(block_volume > 0.0) || !block_volume.is_finite() {
        return Err(AssemblyError::Invalid(format!("block volume {block_volume} must be positive")));
    }
    if n < 2 {
        return Err(AssemblyError::Invalid(format!("dimension {n} must be at least 2")));
    }
    let ni = n as i32;
    let verdict = classify_series(
        |k| graph.count(k) * schedule.scale(k).powi(ni) * block_volume,
        |k| graph.count_real(k) * schedule.scale_real(k).powi(ni) * block_volume,
    )?;
    Ok(VolumeVerdict { verdict, block_volume })
}

/// How block diameters are bounded below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiameterRule {
    /// `diam(k) ≥ scale(k)·base`
    Scaled { base: f64 },
    /// Truncations are chosen so that every block has diameter at least 1.
    UnitFloor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessVerdict {
    pub complete: bool,
    /// The diameter series verdict; `None` under [`DiameterRule::UnitFloor`].
    pub series: Option<SeriesVerdict>,
}

/// Complete when the block diameters along a ray are not summable.
pub fn completeness_series(schedule: &ScaleSchedule, rule: DiameterRule) -> Result<CompletenessVerdict, AssemblyError> {
    match rule {
        DiameterRule::UnitFloor => Ok(CompletenessVerdict {
            complete: true,
            series: None,
        }),
        DiameterRule::Scaled { base } => {
            if !(base > 0.0) {
                return Err(AssemblyError::Invalid(format!("base diameter {base} must be positive")));
            }
            let v = classify_series(|k| schedule.scale(k) * base, |k| schedule.scale_real(k) * base)?;
            Ok(CompletenessVerdict {
                complete: !v.converges(),
                series: Some(v),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(f: impl Fn(f64) -> f64 + Copy) -> Result<SeriesVerdict, AssemblyError> {
        classify_series(move |k| f(k as f64), f)
    }

    #[test]
    fn basel() {
        let v = classify(|k| 1.0 / ((k + 1.0) * (k + 1.0))).unwrap();
        let s = v.sum().unwrap();
        assert!((s - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10, "{s}");
        assert!(matches!(v.witness(), Comparison::PSeries { .. }));
    }

    #[test]
    fn geometric() {
        let v = classify(|k| 0.5f64.powf(k)).unwrap();
        assert!((v.sum().unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(v.witness(), Comparison::Geometric { .. }));
    }

    #[test]
    fn harmonic_and_constant_diverge() {
        let v = classify(|k| 1.0 / (k + 3.0)).unwrap();
        assert!(matches!(v.witness(), Comparison::Harmonic { .. }), "{v:?}");
        let v = classify(|_| 1.0).unwrap();
        assert!(matches!(v.witness(), Comparison::NonVanishing { .. }));
        let v = classify(|k| 1.1f64.powf(k)).unwrap();
        assert!(!v.converges());
    }

    #[test]
    fn logarithmic_corrections_are_inconclusive() {
        let r = classify(|k| 1.0 / ((k + 2.0) * (k + 2.0).ln()));
        assert!(matches!(r, Err(AssemblyError::Inconclusive { .. })), "{r:?}");
    }

    #[test]
    fn slow_power_law() {
        let v = classify(|k| (k + 1.0).powf(-1.5)).unwrap();
        // ζ(3/2)
        assert!((v.sum().unwrap() - 2.612_375_348_685_488).abs() < 1e-9);
    }

    #[test]
    fn assembly_volume_examples() {
        use crate::assembly::GraphKind;
        let line = GraphPlan::new(GraphKind::Line);
        let cyc = ScaleSchedule::cyclic_cover(1, 2).unwrap();
        assert!(total_volume(&line, &cyc, 1.0, 2).unwrap().finite());
        assert!(!total_volume(&line, &ScaleSchedule::constant(), 1.0, 2).unwrap().finite());
        let tree = GraphPlan::new(GraphKind::TrivalentTree);
        let v = total_volume(&tree, &ScaleSchedule::default_for(GraphKind::TrivalentTree), 2.0, 2).unwrap();
        assert!((v.verdict.sum().unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn completeness_examples() {
        let c = completeness_series(&ScaleSchedule::linear(), DiameterRule::Scaled { base: 1.0 }).unwrap();
        assert!(c.complete);
        let sq = ScaleSchedule::Lambda(crate::assembly::Lambda::Power(2.0));
        assert!(!completeness_series(&sq, DiameterRule::Scaled { base: 1.0 }).unwrap().complete);
        assert!(completeness_series(&sq, DiameterRule::UnitFloor).unwrap().complete);
    }
}

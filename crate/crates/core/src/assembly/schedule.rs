use super::AssemblyError;
use super::graph::GraphKind;

/// Growth law of `λ` (blocks at graph distance `k` are scaled by `1/λ(k)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    /// `λ ≡ c`
    Constant(f64),
    /// `λ(k) = (k + 1)^p`
    Power(f64),
    /// `λ(k) = base^k`
    Exponential(f64),
}

/// Length scale of each block as a function of its graph distance from the base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleSchedule {
    Lambda(Lambda),
    /// `c_k = (1−ε)^{k+1}` for `k < d` and `1/(k − d + m + 1)` for `k ≥ d`, where
    /// `(1−ε)^d = 1/m`.
    CyclicCover { eps: f64, d: u32, m: u32 },
}

impl ScaleSchedule {
    /// `λ(k) = k + 1`
    pub fn linear() -> Self {
        ScaleSchedule::Lambda(Lambda::Power(1.0))
    }

    pub fn constant() -> Self {
        ScaleSchedule::Lambda(Lambda::Constant(1.0))
    }

    /// The default `λ` for a graph: slowest growth that keeps the volume finite for `n ≥ 2`.
    pub fn default_for(kind: GraphKind) -> Self {
        match kind {
            GraphKind::Line | GraphKind::Chord => Self::linear(),
            GraphKind::TrivalentTree => ScaleSchedule::Lambda(Lambda::Exponential(2.0)),
            GraphKind::F2Cayley => ScaleSchedule::Lambda(Lambda::Exponential(3.0)),
        }
    }

    /// Cyclic-cover schedule without checking the side condition.
    pub fn cyclic_cover(d: u32, m: u32) -> Result<Self, AssemblyError> {
        if d == 0 || m < 2 {
            return Err(AssemblyError::Invalid(format!(
                "cyclic cover needs d ≥ 1 and m ≥ 2, got d = {d}, m = {m}"
            )));
        }
        let eps = 1.0 - (m as f64).powf(-1.0 / d as f64);
        Ok(ScaleSchedule::CyclicCover { eps, d, m })
    }

    /// Scale at integer distance `k`.
    pub fn scale(&self, k: u32) -> f64 {
        match *self {
            ScaleSchedule::CyclicCover { eps, d, .. } if k < d => (1.0 - eps).powi(k as i32 + 1),
            _ => self.scale_real(k as f64),
        }
    }

    /// Scale as a smooth function of real `k`, valid beyond the initial segment.
    pub fn scale_real(&self, k: f64) -> f64 {
        match *self {
            ScaleSchedule::Lambda(Lambda::Constant(c)) => 1.0 / c,
            ScaleSchedule::Lambda(Lambda::Power(p)) => (k + 1.0).powf(-p),
            ScaleSchedule::Lambda(Lambda::Exponential(b)) => b.powf(-k),
            ScaleSchedule::CyclicCover { d, m, .. } => 1.0 / (k - d as f64 + m as f64 + 1.0),
        }
    }

    /// Whether the scale decays like `1/k`.
    pub fn has_harmonic_tail(&self) -> bool {
        match *self {
            ScaleSchedule::Lambda(Lambda::Power(p)) => p == 1.0,
            ScaleSchedule::CyclicCover { .. } => true,
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            ScaleSchedule::Lambda(Lambda::Constant(c)) => format!("lambda=constant({c})"),
            ScaleSchedule::Lambda(Lambda::Power(p)) => format!("lambda=(k+1)^{p}"),
            ScaleSchedule::Lambda(Lambda::Exponential(b)) => format!("lambda={b}^k"),
            ScaleSchedule::CyclicCover { d, m, .. } => format!("cyclic-cover(d={d},m={m})"),
        }
    }
}

/// The cyclic-cover schedule, rejected unless `(m−1)/m < 1−ε`.
pub fn cyclic_cover_schedule(d: u32, m: u32) -> Result<ScaleSchedule, AssemblyError> {
    let s = ScaleSchedule::cyclic_cover(d, m)?;
    let ScaleSchedule::CyclicCover { eps, .. } = s else {
        unreachable!()
    };
    let lhs = (m as f64 - 1.0) / m as f64;
    let rhs = 1.0 - eps;
    if lhs >= rhs {
        return Err(AssemblyError::SideCondition { d, m, lhs, rhs });
    }
    Ok(s)
}

//! The experiment config format.
//!
//! ```text
//! # comment
//! tol = 1e-10          # keys before the first header belong to [run]
//!
//! [cusp]
//! profile = exp
//! n = 3
//! a = 0
//! ```
//!
//! Every problem in a file is reported, not just the first one.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cuspforge::assembly::Lambda;
use cuspforge::{DecayMode, GraphKind, ScaleSchedule};
use thiserror::Error;

pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

impl ConfigError {
    fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// All errors found in one config.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        write!(f, "{n} config error{}", if n == 1 { "" } else { "s" })?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Command {
    Cusp,
    Curvature,
    Smooth,
    Assemble,
    PlanGrowth,
    Cgvd,
    Geodesic,
    Visibility,
    Invisibility,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Cusp,
        Command::Curvature,
        Command::Smooth,
        Command::Assemble,
        Command::PlanGrowth,
        Command::Cgvd,
        Command::Geodesic,
        Command::Visibility,
        Command::Invisibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Cusp => "cusp",
            Command::Curvature => "curvature",
            Command::Smooth => "smooth",
            Command::Assemble => "assemble",
            Command::PlanGrowth => "plan-growth",
            Command::Cgvd => "cgvd",
            Command::Geodesic => "geodesic",
            Command::Visibility => "visibility",
            Command::Invisibility => "invisibility",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a cusp or curvature profile comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    /// `e^{−t}` on `[a, ∞)`
    Exp,
    /// `cosh t` on `[a, ∞)`
    Cosh,
    /// Convex decaying profile joined to a tail at `a`.
    Decay(DecayMode),
    /// A profile in the segment text format.
    File(PathBuf),
}

impl FromStr for ProfileSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exp" => Ok(ProfileSpec::Exp),
            "cosh" => Ok(ProfileSpec::Cosh),
            "decay" | "decay-exp" => Ok(ProfileSpec::Decay(DecayMode::Exponential)),
            "decay-cubic" => Ok(ProfileSpec::Decay(DecayMode::CubicDecay)),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(ProfileSpec::File(PathBuf::from(p))),
                _ => Err(format!(
                    "expected exp, cosh, decay, decay-cubic, or file:<path>, got `{s}`"
                )),
            },
        }
    }
}

/// Scale schedule names: `default`, `linear`, `constant`, `power:p`, `exp:b`, `cyclic:d,m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleSpec {
    /// The graph's own default.
    Default,
    Fixed(ScaleSchedule),
}

impl ScheduleSpec {
    pub fn resolve(self, kind: GraphKind) -> ScaleSchedule {
        match self {
            ScheduleSpec::Default => ScaleSchedule::default_for(kind),
            ScheduleSpec::Fixed(s) => s,
        }
    }
}

impl FromStr for ScheduleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let number = |v: &str| v.parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
        let fixed = |l| Ok(ScheduleSpec::Fixed(ScaleSchedule::Lambda(l)));
        match s {
            "default" => return Ok(ScheduleSpec::Default),
            "linear" => return Ok(ScheduleSpec::Fixed(ScaleSchedule::linear())),
            "constant" => return Ok(ScheduleSpec::Fixed(ScaleSchedule::constant())),
            _ => {}
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("unknown schedule `{s}` (default, linear, constant, power:p, exp:b, cyclic:d,m)"))?;
        match kind {
            "power" => {
                let p = number(arg)?;
                if !(p > 0.0) || !p.is_finite() {
                    return Err(format!("power {p} must be positive"));
                }
                fixed(Lambda::Power(p))
            }
            "exp" => {
                let b = number(arg)?;
                if !(b > 1.0) || !b.is_finite() {
                    return Err(format!("base {b} must exceed 1"));
                }
                fixed(Lambda::Exponential(b))
            }
            "cyclic" => {
                let (d, m) = arg.split_once(',').ok_or("cyclic schedule needs `cyclic:d,m`")?;
                let d: u32 = d.trim().parse().map_err(|_| format!("d = `{d}` is not a positive integer"))?;
                let m: u32 = m.trim().parse().map_err(|_| format!("m = `{m}` is not an integer"))?;
                ScaleSchedule::cyclic_cover(d, m)
                    .map(ScheduleSpec::Fixed)
                    .map_err(|e| e.to_string())
            }
            _ => Err(format!("unknown schedule kind `{kind}`")),
        }
    }
}

/// Curvature budgets `f(r)` for the growth planner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetSpec {
    /// `e^{k r}`
    Exp(f64),
    /// `(1 + r)^p`
    Power(f64),
    /// `c`
    Const(f64),
}

impl BudgetSpec {
    pub fn eval(self, r: f64) -> f64 {
        match self {
            BudgetSpec::Exp(k) => (k * r).exp(),
            BudgetSpec::Power(p) => (1.0 + r).powf(p),
            BudgetSpec::Const(c) => c,
        }
    }
}

impl FromStr for BudgetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("expected exp:k, power:p, or const:c, got `{s}`"))?;
        let v: f64 = arg.parse().map_err(|_| format!("`{arg}` is not a number"))?;
        if !v.is_finite() {
            return Err(format!("budget parameter {v} must be finite"));
        }
        match kind {
            "exp" if v > 0.0 => Ok(BudgetSpec::Exp(v)),
            "power" if v > 0.0 => Ok(BudgetSpec::Power(v)),
            "const" if v > 0.0 => Ok(BudgetSpec::Const(v)),
            "exp" | "power" | "const" => Err(format!("budget parameter {v} must be positive")),
            _ => Err(format!("unknown budget kind `{kind}`")),
        }
    }
}

impl crate::result::MetricValue for BudgetSpec {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BudgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetSpec::Exp(k) => write!(f, "exp:{k}"),
            BudgetSpec::Power(p) => write!(f, "power:{p}"),
            BudgetSpec::Const(c) => write!(f, "const:{c}"),
        }
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident = $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!("expected one of {}, got `{s}`", [$($text),+].join(", "))),
                }
            }
        }
    };
}

keyword_enum!(MetricKind { Warped = "warped", Diagonal = "diagonal", Graph = "graph" });
keyword_enum!(CgvdModel { Cusp = "cusp", Planner = "planner" });
keyword_enum!(SurfaceKind { Cusp = "cusp", Cylinder = "cylinder", Graph = "graph" });
keyword_enum!(GeodesicMode { Integrate = "integrate", Connect = "connect", Random = "random" });

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub subcommand: Option<Command>,
    pub tol: f64,
    pub seed: u64,
    /// 0 lets the thread pool pick.
    pub threads: usize,
    pub out: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            subcommand: None,
            tol: 1e-10,
            seed: 0,
            threads: 0,
            out: PathBuf::from("cuspforge-out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuspSection {
    pub profile: ProfileSpec,
    pub a: f64,
    pub n: usize,
    pub cross_section_volume: f64,
    /// `None` for an unbounded cusp.
    pub truncation: Option<f64>,
    /// Sampled range `[a, a + span]` for unbounded cusps.
    pub span: f64,
    pub samples: usize,
}

impl Default for CuspSection {
    fn default() -> Self {
        Self {
            profile: ProfileSpec::Exp,
            a: 0.0,
            n: 3,
            cross_section_volume: 1.0,
            truncation: None,
            span: 20.0,
            samples: 1001,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSection {
    pub metric: MetricKind,
    pub profile: ProfileSpec,
    pub a: f64,
    pub n: usize,
    pub span: f64,
    pub resolution: usize,
    /// Outer radius of the hyperbolic diagonal metric.
    pub r_max: f64,
    /// Slope budget of the graph generator.
    pub budget: f64,
    pub half_widths: Vec<f64>,
}

impl Default for CurvatureSection {
    fn default() -> Self {
        Self {
            metric: MetricKind::Warped,
            profile: ProfileSpec::Exp,
            a: 0.0,
            n: 3,
            span: 20.0,
            resolution: 2001,
            r_max: 5.0,
            budget: PI / 10.0,
            half_widths: vec![5.0, 10.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothSection {
    pub big_a: f64,
    pub a: f64,
    pub samples: usize,
}

impl Default for SmoothSection {
    fn default() -> Self {
        Self {
            big_a: 2.0,
            a: 1.0,
            samples: 2001,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembleSection {
    pub graph: GraphKind,
    pub schedule: ScheduleSpec,
    pub n: usize,
    pub levels: u32,
    pub unit_diameter: bool,
}

impl Default for AssembleSection {
    fn default() -> Self {
        Self {
            graph: GraphKind::Line,
            schedule: ScheduleSpec::Default,
            n: 3,
            levels: 12,
            unit_diameter: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanGrowthSection {
    pub budget: BudgetSpec,
    pub n: usize,
    pub blocks: usize,
    pub schedule: ScheduleSpec,
    pub t_min: f64,
    pub t_cap: f64,
    pub t_step: f64,
    pub verify_step: f64,
}

impl Default for PlanGrowthSection {
    fn default() -> Self {
        Self {
            budget: BudgetSpec::Exp(2.0),
            n: 3,
            blocks: 6,
            schedule: ScheduleSpec::Fixed(ScaleSchedule::linear()),
            t_min: 1.0,
            t_cap: 30.0,
            t_step: 0.25,
            verify_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgvdSection {
    pub model: CgvdModel,
    /// Start of the hyperbolic cusp model.
    pub a: f64,
    pub n: usize,
    pub r_step: f64,
    pub r_max: f64,
    pub width: f64,
    /// The cusp model passes when the last product is below this.
    pub decay_threshold: f64,
    /// The planner model passes when the product at every neck is above this.
    pub floor: f64,
    pub budget: BudgetSpec,
}

impl Default for CgvdSection {
    fn default() -> Self {
        Self {
            model: CgvdModel::Cusp,
            a: -1.0,
            n: 2,
            r_step: 0.5,
            r_max: 10.0,
            width: 1.0,
            decay_threshold: 1e-6,
            floor: 1e-3,
            budget: BudgetSpec::Exp(2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSection {
    pub surface: SurfaceKind,
    pub mode: GeodesicMode,
    /// Asymptotic radius `h` of the cusp surface `φ = h + e^{−z}`.
    pub h: f64,
    pub radius: f64,
    /// Lower end of the surface of revolution.
    pub lower: f64,
    pub budget: f64,
    pub start: [f64; 2],
    pub alpha: f64,
    pub length: f64,
    pub target: [f64; 2],
    pub pairs: usize,
}

impl Default for GeodesicSection {
    fn default() -> Self {
        Self {
            surface: SurfaceKind::Cusp,
            mode: GeodesicMode::Integrate,
            h: 1.0,
            radius: 1.0,
            lower: -3.0,
            budget: PI / 10.0,
            start: [0.0, 0.0],
            alpha: 0.45f64.asin(),
            length: 100.0,
            target: [2.0, 1.0],
            pairs: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilitySection {
    pub h: f64,
    pub lower: f64,
    pub z_p: f64,
    /// `ρ₀ sin α₀ / h`, below 1 so the rays escape.
    pub clairaut_ratio: f64,
    pub count: usize,
    pub spacing: f64,
}

impl Default for VisibilitySection {
    fn default() -> Self {
        Self {
            h: 1.0,
            lower: -3.0,
            z_p: 0.0,
            clairaut_ratio: 0.9,
            count: 6,
            spacing: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvisibilitySection {
    pub budget: f64,
    pub separation: f64,
    pub horizons: Vec<f64>,
    pub cells: usize,
    pub heading: f64,
}

impl Default for InvisibilitySection {
    fn default() -> Self {
        Self {
            budget: PI / 10.0,
            separation: PI / 100.0,
            horizons: vec![5.0, 10.0, 20.0],
            cells: 250_000,
            heading: 0.0,
        }
    }
}

/// A validated experiment description. Sections not given in the text keep their defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub run: RunSection,
    pub cusp: CuspSection,
    pub curvature: CurvatureSection,
    pub smooth: SmoothSection,
    pub assemble: AssembleSection,
    pub plan_growth: PlanGrowthSection,
    pub cgvd: CgvdSection,
    pub geodesic: GeodesicSection,
    pub visibility: VisibilitySection,
    pub invisibility: InvisibilitySection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigErrors> {
        if let Some(tol) = o.tol {
            check_tol(tol).map_err(|m| ConfigErrors(vec![ConfigError::validation("--tol", m)]))?;
            self.run.tol = tol;
        }
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        if let Some(t) = o.threads {
            self.run.threads = t;
        }
        if let Some(out) = &o.out {
            self.run.out = out.clone();
        }
        Ok(())
    }
}

fn check_tol(tol: f64) -> Result<(), String> {
    if (MIN_TOL..=MAX_TOL).contains(&tol) {
        Ok(())
    } else {
        Err(format!("tolerance {tol} is outside the allowed interval [1e-12, 1e-4]"))
    }
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

/// Collects the keys under a malformed header, which are not checked further.
const DISCARD: &str = "\0";

/// Raw sections keyed by name ("run" for leading keys).
type RawSections = BTreeMap<String, (usize, Vec<Entry>)>;

fn tokenize(text: &str, errors: &mut Vec<ConfigError>) -> RawSections {
    let mut sections: RawSections = BTreeMap::new();
    sections.insert("run".into(), (0, Vec::new()));
    let mut current = "run".to_string();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let indent = body.len() - body.trim_start().len();
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = |byte: usize| raw[..byte].chars().count() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                errors.push(ConfigError::Parse {
                    line,
                    column: col(indent + trimmed.len()),
                    message: "section header is missing `]`".into(),
                });
                current = DISCARD.into();
                sections.entry(current.clone()).or_insert((line, Vec::new()));
                continue;
            };
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_lowercase() || c == '-' || c == '_') {
                errors.push(ConfigError::Parse {
                    line,
                    column: col(indent + 1),
                    message: format!("invalid section name `{name}`"),
                });
                current = DISCARD.into();
                sections.entry(current.clone()).or_insert((line, Vec::new()));
                continue;
            }
            current = name.replace('_', "-");
            sections.entry(current.clone()).or_insert((line, Vec::new()));
            continue;
        }
        let Some(eq) = body.find('=') else {
            errors.push(ConfigError::Parse {
                line,
                column: col(indent),
                message: format!("expected `key = value`, found `{trimmed}`"),
            });
            continue;
        };
        let key = body[..eq].trim();
        let value = body[eq + 1..].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            errors.push(ConfigError::Parse {
                line,
                column: col(indent),
                message: format!("invalid key `{key}`"),
            });
            continue;
        }
        if value.is_empty() {
            errors.push(ConfigError::Parse {
                line,
                column: col(eq + 1),
                message: format!("key `{key}` has no value"),
            });
            continue;
        }
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        let entries = &mut sections.get_mut(&current).expect("current section exists").1;
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            errors.push(ConfigError::Parse {
                line,
                column: col(indent),
                message: format!("duplicate key `{key}` (first set on line {})", prev.line),
            });
            continue;
        }
        entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    sections
}

/// Typed access to one section; unread keys are reported as unknown on drop.
struct Reader<'a> {
    section: &'static str,
    entries: &'a [Entry],
    used: Vec<bool>,
    errors: &'a mut Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn new(section: &'static str, raw: &'a RawSections, errors: &'a mut Vec<ConfigError>) -> Self {
        let entries = raw.get(section).map(|(_, e)| e.as_slice()).unwrap_or(&[]);
        Self {
            section,
            entries,
            used: vec![false; entries.len()],
            errors,
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.section)
    }

    fn get<T>(&mut self, key: &str, slot: &mut T, parse: impl Fn(&str) -> Result<T, String>) {
        let Some(i) = self.entries.iter().position(|e| e.key == key) else {
            return;
        };
        self.used[i] = true;
        match parse(&self.entries[i].value) {
            Ok(v) => *slot = v,
            Err(m) => {
                let path = self.path(key);
                self.errors.push(ConfigError::validation(path, format!("{m} (line {})", self.entries[i].line)));
            }
        }
    }

    fn parsed<T: FromStr<Err = String>>(&mut self, key: &str, slot: &mut T) {
        self.get(key, slot, T::from_str);
    }

    fn f64(&mut self, key: &str, slot: &mut f64) {
        self.get(key, slot, parse_f64);
    }

    fn positive(&mut self, key: &str, slot: &mut f64) {
        self.get(key, slot, |s| {
            let v = parse_f64(s)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(format!("{v} must be positive"))
            }
        });
    }

    fn int<T: FromStr>(&mut self, key: &str, slot: &mut T, min: u64) {
        self.get(key, slot, |s| {
            let v: u64 = s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))?;
            if v < min {
                return Err(format!("{v} must be at least {min}"));
            }
            s.parse::<T>().map_err(|_| format!("{v} is too large"))
        });
    }

    fn bool(&mut self, key: &str, slot: &mut bool) {
        self.get(key, slot, |s| match s {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(format!("expected true or false, got `{s}`")),
        });
    }

    fn list(&mut self, key: &str, slot: &mut Vec<f64>) {
        self.get(key, slot, |s| {
            let v = s.split(',').map(|x| parse_f64(x.trim())).collect::<Result<Vec<_>, _>>()?;
            if v.is_empty() {
                Err("list is empty".into())
            } else {
                Ok(v)
            }
        });
    }

    fn pair(&mut self, key: &str, slot: &mut [f64; 2]) {
        self.get(key, slot, |s| {
            let v = s.split(',').map(|x| parse_f64(x.trim())).collect::<Result<Vec<_>, _>>()?;
            <[f64; 2]>::try_from(v).map_err(|v| format!("expected two comma-separated numbers, got {}", v.len()))
        });
    }

    fn tol(&mut self, key: &str, slot: &mut f64) {
        self.get(key, slot, |s| {
            let v = parse_f64(s)?;
            check_tol(v)?;
            Ok(v)
        });
    }
}

impl Drop for Reader<'_> {
    fn drop(&mut self) {
        for (e, used) in self.entries.iter().zip(&self.used) {
            if !used {
                let path = self.path(&e.key);
                self.errors
                    .push(ConfigError::validation(path, format!("unknown key `{}` (line {})", e.key, e.line)));
            }
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let lower = s.to_ascii_lowercase();
    let v = match lower.as_str() {
        "pi" => PI,
        "inf" | "infinity" => f64::INFINITY,
        _ => match lower.strip_prefix("pi/") {
            Some(d) => PI / d.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?,
            None => s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?,
        },
    };
    if v.is_nan() {
        Err(format!("`{s}` is not a number"))
    } else {
        Ok(v)
    }
}

const SECTIONS: [&str; 10] = [
    "run",
    "cusp",
    "curvature",
    "smooth",
    "assemble",
    "plan-growth",
    "cgvd",
    "geodesic",
    "visibility",
    "invisibility",
];

/// Parse and validate a config, collecting every error.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let raw = tokenize(text, &mut errors);
    for (name, (line, _)) in &raw {
        if name != DISCARD && !SECTIONS.contains(&name.as_str()) {
            errors.push(ConfigError::validation(
                name.clone(),
                format!("unknown section `[{name}]` (line {line})"),
            ));
        }
    }
    let mut c = RunConfig::default();
    {
        let mut r = Reader::new("run", &raw, &mut errors);
        r.get("subcommand", &mut c.run.subcommand, |s| s.parse().map(Some));
        r.tol("tol", &mut c.run.tol);
        r.int("seed", &mut c.run.seed, 0);
        r.int("threads", &mut c.run.threads, 0);
        r.get("out", &mut c.run.out, |s| Ok(PathBuf::from(s)));
    }
    {
        let s = &mut c.cusp;
        let mut r = Reader::new("cusp", &raw, &mut errors);
        r.parsed("profile", &mut s.profile);
        r.f64("a", &mut s.a);
        r.int("n", &mut s.n, 2);
        r.positive("cross_section_volume", &mut s.cross_section_volume);
        r.get("truncation", &mut s.truncation, |v| match v {
            "none" => Ok(None),
            _ => parse_f64(v).map(|t| t.is_finite().then_some(t)),
        });
        r.positive("span", &mut s.span);
        r.int("samples", &mut s.samples, 2);
    }
    {
        let s = &mut c.curvature;
        let mut r = Reader::new("curvature", &raw, &mut errors);
        r.parsed("metric", &mut s.metric);
        r.parsed("profile", &mut s.profile);
        r.f64("a", &mut s.a);
        r.int("n", &mut s.n, 2);
        r.positive("span", &mut s.span);
        r.int("resolution", &mut s.resolution, 2);
        r.positive("r_max", &mut s.r_max);
        r.positive("budget", &mut s.budget);
        r.list("half_widths", &mut s.half_widths);
    }
    {
        let s = &mut c.smooth;
        let mut r = Reader::new("smooth", &raw, &mut errors);
        r.positive("big_a", &mut s.big_a);
        r.positive("a", &mut s.a);
        r.int("samples", &mut s.samples, 2);
    }
    {
        let s = &mut c.assemble;
        let mut r = Reader::new("assemble", &raw, &mut errors);
        r.get("graph", &mut s.graph, |v| {
            GraphKind::from_name(v).ok_or_else(|| format!("expected line, chord, trivalent-tree, or f2-cayley, got `{v}`"))
        });
        r.parsed("schedule", &mut s.schedule);
        r.int("n", &mut s.n, 2);
        r.int("levels", &mut s.levels, 1);
        r.bool("unit_diameter", &mut s.unit_diameter);
    }
    {
        let s = &mut c.plan_growth;
        let mut r = Reader::new("plan-growth", &raw, &mut errors);
        r.parsed("budget", &mut s.budget);
        r.int("n", &mut s.n, 2);
        r.int("blocks", &mut s.blocks, 2);
        r.parsed("schedule", &mut s.schedule);
        r.f64("t_min", &mut s.t_min);
        r.f64("t_cap", &mut s.t_cap);
        r.positive("t_step", &mut s.t_step);
        r.positive("verify_step", &mut s.verify_step);
    }
    {
        let s = &mut c.cgvd;
        let mut r = Reader::new("cgvd", &raw, &mut errors);
        r.parsed("model", &mut s.model);
        r.f64("a", &mut s.a);
        r.int("n", &mut s.n, 2);
        r.positive("r_step", &mut s.r_step);
        r.positive("r_max", &mut s.r_max);
        r.positive("width", &mut s.width);
        r.positive("decay_threshold", &mut s.decay_threshold);
        r.positive("floor", &mut s.floor);
        r.parsed("budget", &mut s.budget);
    }
    {
        let s = &mut c.geodesic;
        let mut r = Reader::new("geodesic", &raw, &mut errors);
        r.parsed("surface", &mut s.surface);
        r.parsed("mode", &mut s.mode);
        r.positive("h", &mut s.h);
        r.positive("radius", &mut s.radius);
        r.f64("lower", &mut s.lower);
        r.positive("budget", &mut s.budget);
        r.pair("start", &mut s.start);
        r.f64("alpha", &mut s.alpha);
        r.f64("length", &mut s.length);
        r.pair("target", &mut s.target);
        r.int("pairs", &mut s.pairs, 1);
    }
    {
        let s = &mut c.visibility;
        let mut r = Reader::new("visibility", &raw, &mut errors);
        r.positive("h", &mut s.h);
        r.f64("lower", &mut s.lower);
        r.f64("z_p", &mut s.z_p);
        r.get("clairaut_ratio", &mut s.clairaut_ratio, |v| {
            let x = parse_f64(v)?;
            if x > 0.0 && x < 1.0 {
                Ok(x)
            } else {
                Err(format!("{x} must lie in (0, 1)"))
            }
        });
        r.int("count", &mut s.count, 2);
        r.positive("spacing", &mut s.spacing);
    }
    {
        let s = &mut c.invisibility;
        let mut r = Reader::new("invisibility", &raw, &mut errors);
        r.positive("budget", &mut s.budget);
        r.positive("separation", &mut s.separation);
        r.list("horizons", &mut s.horizons);
        r.int("cells", &mut s.cells, 1);
        r.f64("heading", &mut s.heading);
    }
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(ConfigErrors(errors))
    }
}

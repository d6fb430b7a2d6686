mod assembly;
mod geometry;
mod surfaces;

use std::fs;

use anyhow::{Context, Result};
use cuspforge::{make_decay_profile, parse_profile, ProfileFunction};

use crate::config::{Command, ProfileSpec, RunConfig};
use crate::result::ResultLine;
use crate::run::Artifacts;

pub(crate) fn dispatch(command: Command, config: &RunConfig, out: &mut Artifacts) -> Result<ResultLine> {
    match command {
        Command::Cusp => geometry::cusp(&config.cusp, out),
        Command::Curvature => geometry::curvature(&config.curvature, out),
        Command::Smooth => geometry::smooth(&config.smooth, out),
        Command::Assemble => assembly::assemble(&config.assemble, out),
        Command::PlanGrowth => assembly::plan_growth(&config.plan_growth, out),
        Command::Cgvd => assembly::cgvd(&config.cgvd, out),
        Command::Geodesic => surfaces::geodesic(&config.geodesic, config.run.tol, config.run.seed, out),
        Command::Visibility => surfaces::visibility(&config.visibility, config.run.tol, out),
        Command::Invisibility => surfaces::invisibility(&config.invisibility, config.run.tol, out),
    }
}

fn build_profile(spec: &ProfileSpec, a: f64) -> Result<ProfileFunction> {
    Ok(match spec {
        ProfileSpec::Exp => ProfileFunction::unit_exponential(a),
        ProfileSpec::Cosh => ProfileFunction::cosh(a, f64::INFINITY)?,
        ProfileSpec::Decay(mode) => make_decay_profile(a, *mode)?,
        ProfileSpec::File(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read profile {}", path.display()))?;
            parse_profile(&text).with_context(|| format!("bad profile in {}", path.display()))?
        }
    })
}

/// `n` evenly spaced points from `lo` to `hi`, hitting `hi` exactly.
fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// `step, 2·step, ...` up to and including `hi` (within rounding).
fn steps_to(step: f64, hi: f64) -> Vec<f64> {
    let n = (hi / step + 1e-9).floor() as usize;
    (1..=n).map(|i| i as f64 * step).collect()
}

fn fmax(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn fmin(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}

//! `geodesic`, `visibility`, and `invisibility`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use cuspforge::geodesics::{
    connect_geodesic, integrate_geodesic, invisibility_witness, svg_plot, trajectory_csv, visibility_experiment,
    GeodesicSegment, PlotSeries, WitnessOptions,
};
use cuspforge::{GeodesicError, GeodesicState, GraphSurfaceMetric, RevolutionSurface, Surface, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{fmax, fmin};
use crate::config::{Command, GeodesicMode, GeodesicSection, InvisibilitySection, SurfaceKind, VisibilitySection};
use crate::result::ResultLine;
use crate::run::Artifacts;

/// Solver outcomes that count as a failed verification rather than a broken run.
fn failure_tag(e: &GeodesicError) -> Option<&'static str> {
    match e {
        GeodesicError::StepFailure { .. } => Some("step-failure"),
        GeodesicError::DomainExit { .. } => Some("domain-exit"),
        GeodesicError::NoBracket { .. } => Some("no-bracket"),
        GeodesicError::ToleranceFailure { .. } => Some("tolerance-failure"),
        _ => None,
    }
}

fn solver_failure(command: Command, e: GeodesicError) -> Result<ResultLine> {
    match failure_tag(&e) {
        Some(tag) => Ok(ResultLine::fail(command, tag).metric("reason", e.to_string())),
        None => Err(e.into()),
    }
}

fn build_surface(s: &GeodesicSection) -> Result<Surface> {
    Ok(match s.surface {
        SurfaceKind::Cusp => Surface::Revolution(RevolutionSurface::cusp(s.h, s.lower)?),
        SurfaceKind::Cylinder => Surface::Revolution(RevolutionSurface::cylinder(s.radius, s.lower)?),
        SurfaceKind::Graph => Surface::Graph(GraphSurfaceMetric::softplus(s.budget)?),
    })
}

fn write_trajectory(surface: &Surface, t: &Trajectory, out: &mut Artifacts) -> Result<()> {
    let csv = match surface {
        Surface::Revolution(r) => {
            let rho = |z: f64| r.radius(z).unwrap_or(f64::NAN);
            trajectory_csv(t, Some(&rho))
        }
        Surface::Graph(_) => trajectory_csv(t, None),
    };
    out.write("trajectory.csv", &csv)
}

pub(super) fn geodesic(s: &GeodesicSection, tol: f64, seed: u64, out: &mut Artifacts) -> Result<ResultLine> {
    const CMD: Command = Command::Geodesic;
    let surface = build_surface(s)?;
    match s.mode {
        GeodesicMode::Integrate => {
            let start = GeodesicState::new(s.start[0], s.start[1], s.alpha);
            let t = match integrate_geodesic(&surface, start, s.length, tol) {
                Ok(t) => t,
                Err(e) => return solver_failure(CMD, e),
            };
            write_trajectory(&surface, &t, out)?;
            let conserved = t.drift <= tol && t.speed_drift <= tol;
            let line = if conserved {
                ResultLine::pass(CMD)
            } else {
                ResultLine::fail(CMD, "drift")
            };
            let end = t.end();
            Ok(line
                .metric("mode", "integrate")
                .metric("steps", t.accepted)
                .metric("rejected", t.rejected)
                .metric("end_u", end.u)
                .metric("end_v", end.v)
                .metric("drift", t.drift)
                .metric("speed_drift", t.speed_drift))
        }
        GeodesicMode::Connect => {
            let seg = match connect_geodesic(&surface, (s.start[0], s.start[1]), (s.target[0], s.target[1]), tol) {
                Ok(seg) => seg,
                Err(e) => return solver_failure(CMD, e),
            };
            write_trajectory(&surface, &seg.trajectory, out)?;
            Ok(ResultLine::pass(CMD)
                .metric("mode", "connect")
                .metric("alpha0", seg.alpha0)
                .metric("length", seg.length)
                .metric("endpoint_error", seg.endpoint_error)
                .metric("iterations", seg.iterations))
        }
        GeodesicMode::Random => random_pairs(s, &surface, tol, seed, out),
    }
}

/// Connects `s.pairs` seeded random point pairs. Pairs are drawn up front in order, so
/// the artifacts do not depend on how the solves are scheduled.
fn random_pairs(s: &GeodesicSection, surface: &Surface, tol: f64, seed: u64, out: &mut Artifacts) -> Result<ResultLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u_range, v_range) = match surface {
        Surface::Revolution(_) => ((s.lower + 1.0, s.lower + 6.0), (-1.0, 1.0)),
        Surface::Graph(_) => ((-3.0, 3.0), (-3.0, 3.0)),
    };
    let mut draw = || (rng.gen_range(u_range.0..u_range.1), rng.gen_range(v_range.0..v_range.1));
    let pairs: Vec<((f64, f64), (f64, f64))> = (0..s.pairs).map(|_| (draw(), draw())).collect();
    let solved: Vec<Result<GeodesicSegment, GeodesicError>> =
        pairs.par_iter().map(|&(p, q)| connect_geodesic(surface, p, q, tol)).collect();

    let mut csv = String::from("pair,p_u,p_v,q_u,q_v,length,endpoint_error,status\n");
    let mut failures = 0usize;
    let mut worst: f64 = 0.0;
    for (i, ((p, q), r)) in pairs.iter().zip(solved).enumerate() {
        let _ = write!(csv, "{i},{:.15e},{:.15e},{:.15e},{:.15e},", p.0, p.1, q.0, q.1);
        match r {
            Ok(seg) => {
                worst = worst.max(seg.endpoint_error);
                let _ = writeln!(csv, "{:.15e},{:.3e},ok", seg.length, seg.endpoint_error);
            }
            Err(e) => match failure_tag(&e) {
                Some(tag) => {
                    failures += 1;
                    let _ = writeln!(csv, ",,{tag}");
                }
                None => return Err(e.into()),
            },
        }
    }
    out.write("pairs.csv", &csv)?;
    let line = if failures == 0 {
        ResultLine::pass(Command::Geodesic)
    } else {
        ResultLine::fail(Command::Geodesic, "unsolved-pairs")
    };
    Ok(line
        .metric("mode", "random")
        .metric("seed", seed)
        .metric("pairs", s.pairs)
        .metric("failures", failures)
        .metric("max_endpoint_error", worst))
}

pub(super) fn visibility(s: &VisibilitySection, tol: f64, out: &mut Artifacts) -> Result<ResultLine> {
    const CMD: Command = Command::Visibility;
    let surface = RevolutionSurface::cusp(s.h, s.lower)?;
    let rho = surface.radius(s.z_p)?;
    let sine = s.clairaut_ratio * surface.width() / rho;
    if sine > 1.0 {
        bail!("no ray from z = {} reaches ρ₀ sin α₀ = {} (radius there is {rho})", s.z_p, s.clairaut_ratio * surface.width());
    }
    let pairs: Vec<(f64, f64)> = (1..=s.count).map(|n| (s.spacing * n as f64, s.spacing * n as f64)).collect();
    let report = match visibility_experiment(&surface, s.z_p, sine.asin(), &pairs, tol) {
        Ok(r) => r,
        Err(e) => return solver_failure(CMD, e),
    };

    let mut csv = String::from("n,a,b,z1,theta1,z2,theta2,min_z,max_z,endpoint_min,length\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
            r.n, r.a, r.b, r.end1.0, r.end1.1, r.end2.0, r.end2.1, r.min_z, r.max_z, r.endpoint_min, r.length
        );
    }
    out.write("visibility.csv", &csv)?;
    let series = [
        PlotSeries {
            label: "min z along connecting geodesic".into(),
            points: report.rows.iter().map(|r| (r.n as f64, r.min_z)).collect(),
        },
        PlotSeries {
            label: "lower endpoint height".into(),
            points: report.rows.iter().map(|r| (r.n as f64, r.endpoint_min)).collect(),
        },
    ];
    out.write("visibility.svg", &svg_plot("Connecting geodesics between escaping rays", "n", "height z", &series, None))?;

    let line = if report.holds() {
        ResultLine::pass(CMD)
    } else if !report.increasing {
        ResultLine::fail(CMD, "not-increasing")
    } else {
        ResultLine::fail(CMD, "below-endpoints")
    };
    let mins = report.rows.iter().map(|r| r.min_z);
    Ok(line
        .metric("rows", report.rows.len())
        .metric("alpha0", sine.asin())
        .metric("min_z_first", report.rows.first().map_or(f64::NAN, |r| r.min_z))
        .metric("min_z_last", report.rows.last().map_or(f64::NAN, |r| r.min_z))
        .metric("min_z_lowest", fmin(mins)))
}

pub(super) fn invisibility(s: &InvisibilitySection, tol: f64, out: &mut Artifacts) -> Result<ResultLine> {
    const CMD: Command = Command::Invisibility;
    if !(s.separation < PI) {
        bail!("separation {} must be below π", s.separation);
    }
    let m = GraphSurfaceMetric::softplus(s.budget)?;
    let opts = WitnessOptions {
        cells: s.cells,
        heading: s.heading,
        tol,
        ..WitnessOptions::default()
    };
    // one witness per horizon; collect keeps the configured order
    let reports: Vec<_> = s
        .horizons
        .par_iter()
        .map(|&t| invisibility_witness(&m, s.separation, &[t], opts))
        .collect();
    let mut rows = Vec::with_capacity(reports.len());
    let mut holds = true;
    let mut bound = f64::NAN;
    for r in reports {
        match r {
            Ok(rep) => {
                holds &= rep.holds();
                bound = rep.bound;
                rows.extend(rep.rows);
            }
            Err(e) => return solver_failure(CMD, e),
        }
    }

    let mut csv = String::from("horizon,base_angle,far_angle_1,far_angle_2,far_sum,integral,residual\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.3e}",
            r.horizon, r.base_angle, r.far_angles[0], r.far_angles[1], r.far_sum, r.integral, r.residual
        );
    }
    out.write("invisibility.csv", &csv)?;
    let series = [PlotSeries {
        label: "far-angle sum".into(),
        points: rows.iter().map(|r| (r.horizon, r.far_sum)).collect(),
    }];
    out.write(
        "invisibility.svg",
        &svg_plot("Far angles of the witness triangles", "horizon T", "angle sum", &series, Some((bound, "lower bound"))),
    )?;

    let line = if holds {
        ResultLine::pass(CMD)
    } else {
        ResultLine::fail(CMD, "angles-close")
    };
    Ok(line
        .metric("horizons", rows.len())
        .metric("bound", bound)
        .metric("min_far_sum", fmin(rows.iter().map(|r| r.far_sum)))
        .metric("max_abs_integral", fmax(rows.iter().map(|r| r.integral.abs())))
        .metric("curvature_bound", s.budget * s.budget))
}

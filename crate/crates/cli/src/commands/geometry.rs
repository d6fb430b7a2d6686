//! `cusp`, `curvature`, and `smooth`.

use std::fmt::Write as _;

use anyhow::Result;
use cuspforge::curvature::{
    cusp_sectional_curvatures, diagonal_curvatures, plane_curvature_bounds, total_gaussian_curvature,
};
use cuspforge::cusps::{completeness_check, cusp_volume};
use cuspforge::numerics::CompensatedSum;
use cuspforge::profiles::KINK_CURVATURE_FLOOR;
use cuspforge::{smooth_kink, CuspModel, DiagonalMetric3D, GraphSurfaceMetric, Truncation, WarpedCuspMetric};
use rayon::prelude::*;

use super::{build_profile, fmax, fmin, grid};
use crate::config::{Command, CurvatureSection, CuspSection, MetricKind, SmoothSection};
use crate::result::ResultLine;
use crate::run::Artifacts;

pub(super) fn cusp(s: &CuspSection, out: &mut Artifacts) -> Result<ResultLine> {
    let profile = build_profile(&s.profile, s.a)?;
    let truncation = s.truncation.map_or(Truncation::Unbounded, Truncation::At);
    let model = CuspModel::new(s.n, s.cross_section_volume, profile, s.a, truncation)?;
    let volume = cusp_volume(&model)?;
    let complete = completeness_check(&model).complete;

    let end = s.truncation.unwrap_or(s.a + s.span);
    let ts = grid(s.a, end, s.samples);
    let tangential = s.n >= 3;
    let mut csv = String::from("t,K_radial,K_tangential,cumulative_volume\n");
    let mut cumulative = CompensatedSum::new();
    let mut sup_k = f64::NEG_INFINITY;
    for (i, &t) in ts.iter().enumerate() {
        if i > 0 {
            let piece = cusp_volume(&model.restricted(ts[i - 1], Truncation::At(t))?)?;
            cumulative.add(piece.value().unwrap_or(f64::INFINITY));
        }
        let k = cusp_sectional_curvatures(model.profile(), t)?;
        sup_k = sup_k.max(k.radial);
        let _ = write!(csv, "{t:.15e},{:.15e},", k.radial);
        if tangential {
            sup_k = sup_k.max(k.tangential);
            let _ = write!(csv, "{:.15e}", k.tangential);
        }
        let _ = writeln!(csv, ",{:.15e}", cumulative.value());
    }
    out.write("cusp.csv", &csv)?;
    out.write("volume.csv", &volume.to_csv())?;

    let total = volume.value();
    let line = if total.is_none() {
        ResultLine::fail(Command::Cusp, "divergent-volume")
    } else if !(sup_k < 0.0) {
        ResultLine::fail(Command::Cusp, "nonnegative-curvature")
    } else if truncation == Truncation::Unbounded && !complete {
        ResultLine::fail(Command::Cusp, "incomplete")
    } else {
        ResultLine::pass(Command::Cusp)
    };
    Ok(line
        .metric("n", s.n)
        .metric("volume", total.unwrap_or(f64::INFINITY))
        .metric("sampled_volume", cumulative.value())
        .metric("sup_k", sup_k)
        .metric("complete", complete))
}

pub(super) fn curvature(s: &CurvatureSection, out: &mut Artifacts) -> Result<ResultLine> {
    match s.metric {
        MetricKind::Warped => {
            let m = WarpedCuspMetric::new(s.n, build_profile(&s.profile, s.a)?)?;
            let report = plane_curvature_bounds(&m, s.a, s.a + s.span, s.resolution)?;
            out.write("curvature.csv", &report.to_csv())?;
            let (lo, hi) = (report.global_min(), report.global_max());
            let line = if hi < 0.0 {
                ResultLine::pass(Command::Curvature)
            } else {
                ResultLine::fail(Command::Curvature, "nonnegative-curvature")
            };
            Ok(line.metric("metric", "warped").metric("k_min", lo).metric("k_max", hi))
        }
        MetricKind::Diagonal => {
            let m = DiagonalMetric3D::hyperbolic(s.r_max)?;
            // r = 0 is the axis, where the θ direction degenerates
            let rs: Vec<f64> = grid(0.0, s.r_max, s.resolution + 1).into_iter().skip(1).collect();
            let mut csv = String::from("r,K_u_theta,K_u_r,K_theta_r\n");
            let mut values = Vec::with_capacity(3 * rs.len());
            for &r in &rs {
                let k = diagonal_curvatures(&m, r)?;
                let _ = writeln!(csv, "{r:.15e},{:.15e},{:.15e},{:.15e}", k.u_theta, k.u_r, k.theta_r);
                values.extend([k.u_theta, k.u_r, k.theta_r]);
            }
            out.write("curvature.csv", &csv)?;
            let (lo, hi) = (fmin(values.iter().copied()), fmax(values.iter().copied()));
            let line = if hi < 0.0 {
                ResultLine::pass(Command::Curvature)
            } else {
                ResultLine::fail(Command::Curvature, "nonnegative-curvature")
            };
            Ok(line.metric("metric", "diagonal").metric("k_min", lo).metric("k_max", hi))
        }
        MetricKind::Graph => {
            let m = GraphSurfaceMetric::softplus(s.budget)?;
            let totals = s
                .half_widths
                .par_iter()
                .map(|&r| total_gaussian_curvature(&m, r))
                .collect::<Result<Vec<_>, _>>()?;
            let mut csv = String::from("half_width,integral,error,cells\n");
            for (r, t) in s.half_widths.iter().zip(&totals) {
                let _ = writeln!(csv, "{r},{:.15e},{:.3e},{}", t.value, t.error, t.cells);
            }
            out.write("total_curvature.csv", &csv)?;
            let bound = -s.budget * s.budget;
            let within = totals.iter().all(|t| t.value >= bound - t.error && t.value <= t.error);
            let mut order: Vec<(f64, f64)> = s.half_widths.iter().copied().zip(totals.iter().map(|t| t.value)).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let monotone = order.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
            let line = if !within {
                ResultLine::fail(Command::Curvature, "budget-exceeded")
            } else if !monotone {
                ResultLine::fail(Command::Curvature, "not-monotone")
            } else {
                ResultLine::pass(Command::Curvature)
            };
            Ok(line
                .metric("metric", "graph")
                .metric("bound", bound)
                .metric("min_integral", fmin(totals.iter().map(|t| t.value)))
                .metric("max_integral", fmax(totals.iter().map(|t| t.value))))
        }
    }
}

pub(super) fn smooth(s: &SmoothSection, out: &mut Artifacts) -> Result<ResultLine> {
    let h = smooth_kink(s.big_a, s.a)?;
    let patch = &h.segments()[1];
    let reach = 3.0 / s.big_a;
    let mut csv = String::from("t,h,h_dd,ratio\n");
    for t in grid(-reach, reach, s.samples) {
        let j = h.jet(t)?;
        let _ = writeln!(csv, "{t:.15e},{:.15e},{:.15e},{:.15e}", j.value, j.d2, j.d2 / j.value);
    }
    out.write("smooth.csv", &csv)?;
    let mut worst = f64::INFINITY;
    for t in grid(patch.lo, patch.hi, s.samples) {
        let j = h.jet(t)?;
        worst = worst.min(j.d2 / j.value);
    }
    let line = if worst > KINK_CURVATURE_FLOOR {
        ResultLine::pass(Command::Smooth)
    } else {
        ResultLine::fail(Command::Smooth, "not-convex")
    };
    Ok(line
        .metric("half_width", 0.5 * (patch.hi - patch.lo))
        .metric("min_ratio", worst)
        .metric("floor", KINK_CURVATURE_FLOOR))
}

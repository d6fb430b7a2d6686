//! `assemble`, `plan-growth`, and `cgvd`.

use std::fmt::Write as _;

use anyhow::Result;
use cuspforge::assembly::{
    cgvd_diagnostic, completeness_series, growth_truncation_planner, margulis_threshold, mu1_from_env,
    plan_truncations, total_volume, BlockTemplate, CgvdSample, DiameterRule, EdgeKind, GrowthParams, GrowthPlan,
    TruncationOptions,
};
use cuspforge::{make_decay_profile, AssemblyError, ChainModel, DecayMode, GraphPlan};

use super::{fmax, fmin, grid, steps_to};
use crate::config::{AssembleSection, BudgetSpec, CgvdModel, CgvdSection, Command, PlanGrowthSection};
use crate::result::ResultLine;
use crate::run::Artifacts;

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.15e}")).unwrap_or_default()
}

pub(super) fn assemble(s: &AssembleSection, out: &mut Artifacts) -> Result<ResultLine> {
    let graph = GraphPlan::new(s.graph);
    let schedule = s.schedule.resolve(s.graph);
    let block = BlockTemplate::standard(s.graph)?;
    let plan = plan_truncations(
        &graph,
        &schedule,
        &block,
        s.levels,
        TruncationOptions {
            base_depth: None,
            unit_diameter: s.unit_diameter,
        },
    )?;

    let mut csv = String::from("level,scale,inner,outer,chord,diameter_lower\n");
    for l in &plan.levels {
        let _ = writeln!(
            csv,
            "{},{:.15e},{},{:.15e},{},{:.15e}",
            l.level,
            l.scale,
            opt(l.inner),
            l.outer,
            opt(l.chord),
            l.diameter_lower
        );
    }
    out.write("plan.csv", &csv)?;
    let mut csv = String::from("kind,from_level,to_level,coeff_from,coeff_to,relative_mismatch\n");
    for e in &plan.edges {
        let kind = match e.kind {
            EdgeKind::Radial => "radial",
            EdgeKind::Chord => "chord",
        };
        let _ = writeln!(
            csv,
            "{kind},{},{},{:.15e},{:.15e},{:.3e}",
            e.from_level,
            e.to_level,
            e.coeff_from,
            e.coeff_to,
            e.relative_mismatch()
        );
    }
    out.write("edges.csv", &csv)?;

    let base = |line: ResultLine| {
        line.metric("graph", s.graph.name())
            .metric("schedule", schedule.describe())
            .metric("n", s.n)
            .metric("max_matching_error", plan.max_matching_error())
    };
    let inconclusive = |e: &AssemblyError| matches!(e, AssemblyError::Inconclusive { .. });

    let volume = match total_volume(&graph, &schedule, block.volume_upper(s.n)?, s.n) {
        Ok(v) => v,
        Err(e) if inconclusive(&e) => {
            return Ok(base(ResultLine::fail(Command::Assemble, "inconclusive")).metric("series", "volume"))
        }
        Err(e) => return Err(e.into()),
    };
    if !volume.finite() {
        return Ok(base(ResultLine::fail(Command::Assemble, "divergent-volume"))
            .metric("volume_witness", volume.verdict.witness().describe()));
    }
    if !plan.matching_holds() || !plan.chord_constraints_hold() {
        return Ok(base(ResultLine::fail(Command::Assemble, "matching")));
    }
    let rule = if s.unit_diameter {
        DiameterRule::UnitFloor
    } else {
        let l0 = &plan.levels[0];
        DiameterRule::Scaled {
            base: l0.diameter_lower / l0.scale,
        }
    };
    let completeness = match completeness_series(&schedule, rule) {
        Ok(c) => c,
        Err(e) if inconclusive(&e) => {
            return Ok(base(ResultLine::fail(Command::Assemble, "inconclusive")).metric("series", "diameter"))
        }
        Err(e) => return Err(e.into()),
    };
    let line = if completeness.complete {
        ResultLine::pass(Command::Assemble)
    } else {
        ResultLine::fail(Command::Assemble, "incomplete")
    };
    Ok(base(line)
        .metric("volume", volume.verdict.sum().unwrap_or(f64::INFINITY))
        .metric("volume_witness", volume.verdict.witness().describe())
        .metric("complete", completeness.complete))
}

fn infeasible(command: Command, e: &AssemblyError) -> Option<ResultLine> {
    match *e {
        AssemblyError::BudgetInfeasible { r, curvature, budget } => Some(
            ResultLine::fail(command, "budget-infeasible")
                .metric("r", r)
                .metric("curvature", curvature)
                .metric("budget", budget),
        ),
        _ => None,
    }
}

fn run_planner(budget: BudgetSpec, p: &GrowthParams) -> Result<Result<GrowthPlan, AssemblyError>> {
    match growth_truncation_planner(&|r| budget.eval(r), p) {
        Ok(plan) => Ok(Ok(plan)),
        Err(e @ AssemblyError::BudgetInfeasible { .. }) => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

pub(super) fn plan_growth(s: &PlanGrowthSection, out: &mut Artifacts) -> Result<ResultLine> {
    let params = GrowthParams {
        n: s.n,
        blocks: s.blocks,
        schedule: s.schedule.resolve(cuspforge::GraphKind::Line),
        t_min: s.t_min,
        t_cap: s.t_cap,
        t_step: s.t_step,
        verify_step: s.verify_step,
        ..GrowthParams::default()
    };
    let mu1 = mu1_from_env()?;
    let plan = match run_planner(s.budget, &params)? {
        Ok(plan) => plan,
        Err(e) => {
            return Ok(infeasible(Command::PlanGrowth, &e)
                .expect("only infeasibility is passed through")
                .metric("budget_fn", s.budget))
        }
    };
    out.write("plan.conf", &plan.to_config())?;

    let horizon = plan.chain.horizon();
    let rs = grid(params.verify_from, horizon, ((horizon - params.verify_from) / 0.05).ceil() as usize + 1);
    let envelope = plan.chain.curvature_envelope(&rs)?;
    let mut csv = String::from("r,b_p,budget\n");
    for (r, b) in rs.iter().zip(&envelope) {
        let _ = writeln!(csv, "{r:.15e},{b:.15e},{:.15e}", s.budget.eval(*r));
    }
    out.write("envelope.csv", &csv)?;

    let mut line = ResultLine::pass(Command::PlanGrowth)
        .metric("budget_fn", s.budget)
        .metric("blocks", plan.scales.len())
        .metric("horizon", horizon)
        .metric("samples", plan.verification.samples)
        .metric("worst_margin", plan.verification.worst_margin)
        .metric("worst_r", plan.verification.worst_r);
    if mu1.is_some() {
        let b = fmax(envelope.iter().copied());
        line = line.metric("mu_b", margulis_threshold(b, mu1)?);
    }
    Ok(line)
}

pub(super) fn cgvd(s: &CgvdSection, out: &mut Artifacts) -> Result<ResultLine> {
    match s.model {
        CgvdModel::Cusp => {
            let cusp = ChainModel::single_cusp(s.n, 1.0, make_decay_profile(s.a, DecayMode::Exponential)?, s.a)?;
            let rs = steps_to(s.r_step, s.r_max);
            let samples = cgvd_diagnostic(&cusp, &rs, s.width)?;
            out.write("cgvd.csv", &CgvdSample::csv(&samples))?;
            let last = samples.last().map_or(f64::NAN, |x| x.product);
            let line = if last < s.decay_threshold {
                ResultLine::pass(Command::Cgvd)
            } else {
                ResultLine::fail(Command::Cgvd, "no-decay")
            };
            Ok(line
                .metric("model", "cusp")
                .metric("r_last", rs.last().copied().unwrap_or(f64::NAN))
                .metric("product_last", last)
                .metric("threshold", s.decay_threshold))
        }
        CgvdModel::Planner => {
            let plan = match run_planner(s.budget, &GrowthParams::default())? {
                Ok(plan) => plan,
                Err(e) => return Ok(infeasible(Command::Cgvd, &e).expect("only infeasibility is passed through")),
            };
            let necks = plan.chain.neck_radii();
            let samples = cgvd_diagnostic(&plan.chain, &necks, s.width)?;
            out.write("cgvd.csv", &CgvdSample::csv(&samples))?;
            let low = fmin(samples.iter().map(|x| x.product));
            let line = if low > s.floor {
                ResultLine::pass(Command::Cgvd)
            } else {
                ResultLine::fail(Command::Cgvd, "below-floor")
            };
            Ok(line
                .metric("model", "planner")
                .metric("necks", necks.len())
                .metric("product_min", low)
                .metric("floor", s.floor))
        }
    }
}

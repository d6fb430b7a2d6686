use approx::assert_relative_eq;
use proptest::prelude::*;

use cuspforge::assembly::{
    boundary_coefficient, cgvd_diagnostic, cyclic_cover_schedule, displacement_growth_check,
    growth_truncation_planner, margulis_threshold, matching_truncation, plan_truncations, total_volume,
    verify_plan, AssemblyError, BlockTemplate, ChainModel, EdgeKind, GraphKind, GraphPlan, GrowthParams, Lambda,
    ScaleSchedule, TruncationOptions,
};
use cuspforge::ProfileFunction;

const KINDS: [GraphKind; 4] = [GraphKind::Line, GraphKind::Chord, GraphKind::TrivalentTree, GraphKind::F2Cayley];

#[test]
fn shell_counts_match_breadth_first_search() {
    for kind in KINDS {
        let g = GraphPlan::new(kind);
        let bfs = g.bfs_counts(9);
        assert_eq!(bfs[0], 1);
        for (k, c) in bfs.iter().enumerate() {
            assert_eq!(*c as f64, g.count(k as u32), "{} at k = {k}", kind.name());
        }
    }
    assert_eq!(GraphPlan::new(GraphKind::TrivalentTree).count(4), 24.0);
    assert_eq!(GraphPlan::new(GraphKind::F2Cayley).count(3), 36.0);
}

#[test]
fn cyclic_cover_schedule_shape() {
    for (d, m) in [(1, 2), (3, 2), (4, 5), (10, 3)] {
        let s = ScaleSchedule::cyclic_cover(d, m).unwrap();
        let ScaleSchedule::CyclicCover { eps, .. } = s else { unreachable!() };
        assert_relative_eq!((1.0 - eps).powi(d as i32), 1.0 / m as f64, max_relative = 1e-14);
        for k in 0..d {
            assert_relative_eq!(s.scale(k), (1.0 - eps).powi(k as i32 + 1), max_relative = 1e-14);
        }
        for k in d..d + 20 {
            assert_relative_eq!(s.scale(k), 1.0 / (k - d + m + 1) as f64, max_relative = 1e-14);
        }
    }
    assert!(matches!(cyclic_cover_schedule(1, 2), Err(AssemblyError::SideCondition { .. })));
    assert!(ScaleSchedule::cyclic_cover(0, 2).is_err());
}

#[test]
fn matching_examples() {
    let e = std::f64::consts::E;
    assert_relative_eq!(matching_truncation(e, 1.0, 5.0, 0.0).unwrap(), 6.0, max_relative = 1e-15);
    assert!(matches!(matching_truncation(1.0, e, 0.5, 0.0), Err(AssemblyError::Tail { .. })));
    let f = ProfileFunction::unit_exponential(0.0);
    let (su, sv, tv) = (0.25, 0.5, 3.0);
    let tu = matching_truncation(su, sv, tv, 0.0).unwrap();
    assert_relative_eq!(
        boundary_coefficient(&f, tu, su).unwrap(),
        boundary_coefficient(&f, tv, sv).unwrap(),
        max_relative = 1e-14
    );
}

#[test]
fn default_schedules_give_finite_volume() {
    for kind in KINDS {
        let block = BlockTemplate::standard(kind).unwrap();
        for n in 2..=4 {
            let v = total_volume(&GraphPlan::new(kind), &ScaleSchedule::default_for(kind), block.volume_upper(n).unwrap(), n)
                .unwrap();
            assert!(v.finite(), "{} n = {n}", kind.name());
        }
        let c = total_volume(&GraphPlan::new(kind), &ScaleSchedule::constant(), 1.0, 2).unwrap();
        assert!(!c.finite());
    }
}

#[test]
fn chord_plan_port_lengths() {
    let kind = GraphKind::Chord;
    let plan = plan_truncations(
        &GraphPlan::new(kind),
        &ScaleSchedule::default_for(kind),
        &BlockTemplate::standard(kind).unwrap(),
        15,
        TruncationOptions::default(),
    )
    .unwrap();
    assert!(plan.edges.iter().any(|e| e.kind == EdgeKind::Chord));
    for lvl in plan.levels.iter().filter(|l| l.level >= 1) {
        let len = |label: &str| lvl.port_lengths.iter().find(|(l, _)| l == label).unwrap().1;
        let (a, b, c) = (len("A"), len("B"), len("C"));
        assert!(a > 0.0 && b > 0.0);
        assert!(a + b < c && c < 2.0 * (a + b), "level {}: {a} {b} {c}", lvl.level);
    }
}

#[test]
fn unit_diameter_option() {
    let kind = GraphKind::Line;
    let opts = TruncationOptions {
        unit_diameter: true,
        ..TruncationOptions::default()
    };
    let plan = plan_truncations(&GraphPlan::new(kind), &ScaleSchedule::linear(), &BlockTemplate::standard(kind).unwrap(), 30, opts)
        .unwrap();
    assert!(plan.levels.iter().all(|l| l.diameter_lower >= 1.0 - 1e-12));
    assert!(plan.matching_holds());
}

#[test]
fn planner_budgets() {
    let p = GrowthParams::default();
    let plan = growth_truncation_planner(&|r: f64| (2.0 * r).exp(), &p).unwrap();
    let again = verify_plan(&plan.chain, &|r: f64| (2.0 * r).exp(), p.verify_from, p.verify_step).unwrap();
    assert_eq!(again, plan.verification);
    assert!(plan.to_config().starts_with("[plan]\n"));
    assert!(matches!(growth_truncation_planner(&|_| 0.5, &p), Err(AssemblyError::BudgetInfeasible { .. })));
}

#[test]
fn margulis_and_displacement() {
    assert!(matches!(margulis_threshold(4.0, None), Err(AssemblyError::Config(_))));
    assert_relative_eq!(margulis_threshold(4.0, Some(0.2)).unwrap(), 0.05);
    let v = displacement_growth_check(&ScaleSchedule::cyclic_cover(2, 3).unwrap(), 2.0, 100.0).unwrap();
    assert!(v.holds());
    let v = displacement_growth_check(&ScaleSchedule::Lambda(Lambda::Exponential(2.0)), 2.0, 100.0).unwrap();
    assert!(!v.applicable);
}

fn schedule_strategy() -> impl Strategy<Value = ScaleSchedule> {
    prop_oneof![
        (0.3f64..3.0).prop_map(|p| ScaleSchedule::Lambda(Lambda::Power(p))),
        (1.05f64..4.0).prop_map(|b| ScaleSchedule::Lambda(Lambda::Exponential(b))),
        ((1u32..6), (2u32..6)).prop_map(|(d, m)| ScaleSchedule::cyclic_cover(d, m).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_glued_edge_matches(kind in prop::sample::select(KINDS.to_vec()), schedule in schedule_strategy(), extra in prop::option::of(0.0f64..4.0)) {
        let block = BlockTemplate::standard(kind).unwrap();
        let opts = TruncationOptions { base_depth: extra.map(|x| block.tail_knot() + x), unit_diameter: false };
        let plan = plan_truncations(&GraphPlan::new(kind), &schedule, &block, 10, opts).unwrap();
        prop_assert!(plan.max_matching_error() <= 1e-12);
        for e in &plan.edges {
            prop_assert!(e.relative_mismatch() <= 1e-12);
        }
        if kind == GraphKind::Chord {
            prop_assert!(plan.chord_constraints_hold());
        }
    }

    #[test]
    fn cgvd_is_homothety_invariant(sigma in 0.1f64..20.0, n in 2usize..5) {
        let f = cuspforge::make_decay_profile(-1.0, cuspforge::DecayMode::Exponential).unwrap();
        let m = ChainModel::single_cusp(n, 1.0, f, -1.0).unwrap();
        let rs = [0.5, 1.0, 2.5, 4.0, 7.5];
        let a = cgvd_diagnostic(&m, &rs, 1.0).unwrap();
        let srs: Vec<f64> = rs.iter().map(|r| r * sigma).collect();
        let b = cgvd_diagnostic(&m.homothetic(sigma).unwrap(), &srs, sigma).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.product - y.product).abs() <= 1e-9 * x.product);
        }
    }

    #[test]
    fn planner_output_reverifies(factor in 0.5f64..50.0, blocks in 2usize..7) {
        let p = GrowthParams { blocks, ..GrowthParams::default() };
        let budget = move |r: f64| factor * (2.0 * r).exp();
        if let Ok(plan) = growth_truncation_planner(&budget, &p) {
            let v = verify_plan(&plan.chain, &budget, p.verify_from, p.verify_step).unwrap();
            prop_assert!(v.worst_margin > 0.0);
        }
    }
}

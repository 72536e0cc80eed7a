use std::sync::Arc;

use fdlab_core::diagnostics::curvature_r;
use fdlab_core::flow::{run_rescaled_stabilized, FlowParams, StabilizeOptions};
use fdlab_core::spectral::dirichlet_lambda1;
use fdlab_core::stationary::{discrete_residual, solve_stationary, ShootingProblem, StationarySolution};
use fdlab_core::{Error, Field, FieldKind, RadialGrid};

fn ball(n: usize, p: f64, b_frac: f64, intervals: usize) -> (Arc<RadialGrid>, f64, StationarySolution) {
    let g = RadialGrid::build(n, 1.0, intervals, 0.0).unwrap();
    let b = b_frac * dirichlet_lambda1(&g).unwrap();
    let sol = solve_stationary(&ShootingProblem::new(n, p, b, 1.0), &g).unwrap();
    (g, b, sol)
}

#[test]
fn four_ball_state_is_positive_with_small_residual() {
    let (g, b, sol) = ball(4, 3.0, 0.3, 256);
    let v = sol.field.values();
    assert!(v[..g.intervals()].iter().all(|x| *x > 0.0));
    assert_eq!(v[g.intervals()], 0.0);
    assert!(discrete_residual(&sol.field, 3.0, b) < 1e-6);
    assert!(!sol.multiplicity_warning());
}

#[test]
fn curvature_is_one_on_the_stationary_state() {
    let (_, b, sol) = ball(4, 3.0, 0.3, 256);
    let curv = curvature_r(&sol.field, 3.0, b, 1e-6).unwrap();
    assert!(curv.sup_deviation() < 1e-6, "{}", curv.sup_deviation());
}

#[test]
fn interval_state_attracts_nearby_data_under_the_stabilized_flow() {
    let (g, _, sol) = ball(1, 2.0, 0.0, 256);
    let params = FlowParams::new(1, 2.0, 0.0);
    let v0 = Field::new(g.clone(), sol.field.scaled(1.01).into_values(), FieldKind::RescaledV).unwrap();
    let traj = run_rescaled_stabilized(&v0, &params, 15.0, &StabilizeOptions::default()).unwrap();
    let drift = traj
        .last()
        .values()
        .iter()
        .zip(sol.field.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(drift / sol.field.sup() < 1e-3, "{drift}");
}

#[test]
fn profile_is_stable_under_refinement() {
    let (_, _, coarse) = ball(4, 3.0, 0.3, 256);
    let (_, _, fine) = ball(4, 3.0, 0.3, 512);
    let rel = (coarse.alpha_star / fine.alpha_star - 1.0).abs();
    assert!(rel < 1e-3, "{rel}");
}

#[test]
fn critical_problem_without_linear_term_has_no_state() {
    let g = RadialGrid::build(4, 1.0, 128, 0.0).unwrap();
    let res = solve_stationary(&ShootingProblem::new(4, 3.0, 0.0, 1.0), &g);
    assert!(res.is_err());
}

#[test]
fn bracket_that_misses_the_root_is_reported() {
    let g = RadialGrid::build(4, 1.0, 128, 0.0).unwrap();
    let b = 0.3 * dirichlet_lambda1(&g).unwrap();
    let prob = ShootingProblem::new(4, 3.0, b, 1.0).with_bracket(1e3, 2e3);
    assert!(matches!(solve_stationary(&prob, &g), Err(Error::Bracket(_))));
}

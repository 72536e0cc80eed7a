use std::sync::Arc;

use fdlab_core::diagnostics::energy_f;
use fdlab_core::flow::{
    correspondence_check, run_original, run_rescaled, run_rescaled_stabilized, step_original, step_rescaled, FlowParams,
    RunOptions, StabilizeOptions,
};
use fdlab_core::stationary::{solve_stationary, ShootingProblem};
use fdlab_core::{Field, FieldKind, RadialGrid};
use proptest::prelude::*;

fn profile(grid: &Arc<RadialGrid>, kind: FieldKind, a: f64, c: f64) -> Field {
    Field::from_fn(grid.clone(), kind, move |r| a * (1.0 - r * r) * (1.0 + c * r * r))
}

fn sup_diff(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // w(t) = κ u(κ^{1−p} t) solves the same equation, and backward Euler respects this
    // exactly once the step is rescaled by κ^{p−1}.
    #[test]
    fn original_step_is_scale_covariant(kappa in 0.2f64..5.0, a in 0.5f64..3.0, c in 0.0f64..2.0) {
        let g = RadialGrid::build(4, 1.0, 64, 0.0).unwrap();
        let params = FlowParams::critical(4, 2.0).unwrap();
        let u = profile(&g, FieldKind::OriginalU, a, c);
        let dt = 0.01;
        let base = step_original(&u, &params, dt).unwrap();
        let scaled = step_original(&u.scaled(kappa), &params, dt * kappa.powf(params.p - 1.0)).unwrap();
        let err = sup_diff(&scaled, &base.scaled(kappa));
        prop_assert!(err <= 1e-8 * kappa * base.sup(), "err {err:e}");
    }

    #[test]
    fn original_step_is_strictly_positive(a in 0.1f64..10.0, c in 0.0f64..3.0, dt in 1e-4f64..0.1) {
        let g = RadialGrid::build(3, 1.0, 48, 0.3).unwrap();
        let params = FlowParams::critical(3, 1.0).unwrap();
        let u = profile(&g, FieldKind::OriginalU, a, c);
        let next = step_original(&u, &params, dt).unwrap();
        let vals = next.values();
        prop_assert!(vals[..vals.len() - 1].iter().all(|v| *v > 0.0));
        prop_assert_eq!(*vals.last().unwrap(), 0.0);
    }

    #[test]
    fn original_step_preserves_order(a in 0.5f64..5.0, gap in 0.01f64..2.0, dt in 1e-3f64..0.05) {
        let g = RadialGrid::build(4, 1.0, 48, 0.0).unwrap();
        let params = FlowParams::critical(4, 0.0).unwrap();
        let lo = profile(&g, FieldKind::OriginalU, a, 0.5);
        let hi = profile(&g, FieldKind::OriginalU, a + gap, 0.5);
        let (nlo, nhi) = (step_original(&lo, &params, dt).unwrap(), step_original(&hi, &params, dt).unwrap());
        prop_assert!(nlo.values().iter().zip(nhi.values()).all(|(x, y)| x <= y));
    }

    #[test]
    fn rescaled_step_is_strictly_positive(a in 0.5f64..20.0, dt in 1e-3f64..0.05) {
        let g = RadialGrid::build(4, 1.0, 48, 0.0).unwrap();
        let params = FlowParams::critical(4, 3.0).unwrap();
        let v = profile(&g, FieldKind::RescaledV, a, 0.0);
        let next = step_rescaled(&v, &params, dt).unwrap();
        let vals = next.values();
        prop_assert!(vals[..vals.len() - 1].iter().all(|v| *v > 0.0));
    }
}

#[test]
fn critical_mass_is_nonincreasing_until_extinction() {
    let g = RadialGrid::build(4, 1.0, 128, 0.0).unwrap();
    let params = FlowParams::critical(4, 3.0).unwrap();
    let traj = run_original(&profile(&g, FieldKind::OriginalU, 5.0, 1.0), &params, 50.0).unwrap();
    assert!(traj.extinct);
    let t_star = traj.t_star_estimate.unwrap();
    assert!(t_star > 0.0 && t_star < 50.0);
    let m = traj.masses();
    assert!(m.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn rescaled_energy_is_nonincreasing() {
    let g = RadialGrid::build(4, 1.0, 128, 0.0).unwrap();
    let lambda1 = fdlab_core::spectral::dirichlet_lambda1(&g).unwrap();
    let params = FlowParams::critical(4, 0.3 * lambda1).unwrap();
    let opts = StabilizeOptions { record_interval: 0.05, ..StabilizeOptions::default() };
    let traj = run_rescaled_stabilized(&profile(&g, FieldKind::RescaledV, 3.0, 0.0), &params, 4.0, &opts).unwrap();
    let f: Vec<f64> = traj.snapshots.iter().map(|v| energy_f(v, params.p, params.b)).collect();
    // Compare within windows only: the amplitude correction at a window start moves F.
    let starts: Vec<f64> = traj.amplitude_corrections.iter().map(|(t, _)| *t).collect();
    for k in 1..f.len() {
        let (t0, t1) = (traj.times[k - 1], traj.times[k]);
        if starts.iter().any(|s| *s > t0 - 1e-12 && *s <= t1 + 1e-12 && *s > 0.0) {
            continue;
        }
        assert!(f[k] <= f[k - 1] + 1e-9 * f[k - 1].abs(), "F rose at t = {t1}");
    }
}

#[test]
fn rescaled_stationary_state_is_unstable_along_scale_mode_without_stabilizer() {
    let g = RadialGrid::build(4, 1.0, 128, 0.0).unwrap();
    let lambda1 = fdlab_core::spectral::dirichlet_lambda1(&g).unwrap();
    let params = FlowParams::critical(4, 0.3 * lambda1).unwrap();
    let prob = ShootingProblem::new(4, params.p, params.b, 1.0);
    let v_inf = solve_stationary(&prob, &g).unwrap().field;
    let v0 = Field::new(g.clone(), v_inf.scaled(1.01).into_values(), FieldKind::RescaledV).unwrap();
    let opts = RunOptions { record_interval: Some(1.0), record_times: Vec::new() };
    let free = run_rescaled(&v0, &params, 8.0, &opts).unwrap();
    let held = run_rescaled_stabilized(&v0, &params, 8.0, &StabilizeOptions::default()).unwrap();
    let drift_free = sup_diff(free.last(), &v_inf) / v_inf.sup();
    let drift_held = sup_diff(held.last(), &v_inf) / v_inf.sup();
    assert!(drift_free > 0.05, "{drift_free}");
    assert!(drift_held < 1e-3, "{drift_held}");
}

#[test]
fn correspondence_of_empty_and_mismatched_runs() {
    let g = RadialGrid::build(4, 1.0, 32, 0.0).unwrap();
    let params = FlowParams::critical(4, 0.0).unwrap();
    let u = run_original(&profile(&g, FieldKind::OriginalU, 1.0, 0.0), &params, 0.0).unwrap();
    let mut empty = u.clone();
    empty.times.clear();
    empty.snapshots.clear();
    let rep = correspondence_check(&empty, &empty, 1.0, 0.5).unwrap();
    assert!(rep.samples.is_empty());
    // Two original trajectories cannot be compared.
    assert!(correspondence_check(&u, &u, 1.0, 0.5).is_err());
}

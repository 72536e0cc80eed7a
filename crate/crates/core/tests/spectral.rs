use std::sync::Arc;

use fdlab_core::spectral::{
    default_kernel_tol, dirichlet_lambda1, kernel_condition, project_pi, weighted_spectrum, Verdict, WeightedSpectrum,
};
use fdlab_core::stationary::{solve_stationary, ShootingProblem};
use fdlab_core::{Field, FieldKind, RadialGrid};
use proptest::prelude::*;

fn spectrum(intervals: usize) -> (Arc<RadialGrid>, WeightedSpectrum) {
    let g = RadialGrid::build(4, 1.0, intervals, 0.0).unwrap();
    let b = 0.3 * dirichlet_lambda1(&g).unwrap();
    let sol = solve_stationary(&ShootingProblem::new(4, 3.0, b, 1.0), &g).unwrap();
    (g, weighted_spectrum(&sol.field, 3.0, b, 8).unwrap())
}

#[test]
fn first_eigenvalue_is_one_and_mu_is_nondecreasing() {
    let (_, s) = spectrum(256);
    assert!((s.mu[0] - 1.0).abs() < 1e-6, "{}", s.mu[0]);
    assert!(s.mu.windows(2).all(|w| w[1] >= w[0]));
    assert!(s.orthonormality_defect() < 1e-10);
    let v = kernel_condition(&s.mu, s.p_lin, default_kernel_tol(s.p_lin));
    assert_eq!(v.verdict, Verdict::Nondegenerate);
}

#[test]
fn eigenvalues_are_stable_under_refinement() {
    // The error is O((l·h)²), so check all computed modes from N = 512 on.
    let (_, coarse) = spectrum(512);
    let (_, fine) = spectrum(1024);
    for (a, b) in coarse.mu.iter().zip(&fine.mu) {
        assert!((a / b - 1.0).abs() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn verdict_examples() {
    let v = kernel_condition(&[1.0, 2.1, 4.7], 3.0, 0.05);
    assert_eq!(v.verdict, Verdict::Nondegenerate);
    assert!((v.gap - 0.9).abs() < 1e-12);
    assert_eq!(kernel_condition(&[1.0, 3.001], 3.0, 0.05).verdict, Verdict::DegenerateSuspect);
    assert_eq!(kernel_condition(&[1.0, 2.0], 3.0, 0.05).verdict, Verdict::Inconclusive);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_annihilates_low_modes_and_is_idempotent(a in -3.0f64..3.0, k in 0.5f64..6.0, c in -2.0f64..2.0) {
        let (g, s) = (spectrum(128).0, spectrum(128).1);
        let f = Field::from_fn(g.clone(), FieldKind::Generic, move |r| a * (k * r).cos() + c * r * r);
        let pf = project_pi(&f, &s).unwrap();
        for phi in s.phi.iter().take(s.l_count) {
            prop_assert!(g.dot(pf.values(), phi.values()).abs() < 1e-10);
        }
        let ppf = project_pi(&pf, &s).unwrap();
        let diff = pf.values().iter().zip(ppf.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10 * (1.0 + pf.sup()));
    }

    #[test]
    fn projection_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (g, s) = spectrum(64);
        let f = Field::from_fn(g.clone(), FieldKind::Generic, |r| r.cos());
        let h = Field::from_fn(g.clone(), FieldKind::Generic, |r| r * r * r);
        let mix = Field::from_fn(g.clone(), FieldKind::Generic, move |r| a * r.cos() + b * r * r * r);
        let lhs = project_pi(&mix, &s).unwrap();
        let (pf, ph) = (project_pi(&f, &s).unwrap(), project_pi(&h, &s).unwrap());
        for i in 0..g.len() {
            let rhs = a * pf.values()[i] + b * ph.values()[i];
            prop_assert!((lhs.values()[i] - rhs).abs() < 1e-10);
        }
    }
}

#[test]
fn dirichlet_eigenvalue_of_the_interval() {
    let g = RadialGrid::build(1, 1.0, 512, 0.0).unwrap();
    let l1 = dirichlet_lambda1(&g).unwrap();
    assert!((l1 / std::f64::consts::PI.powi(2) - 1.0).abs() < 1e-4);
}

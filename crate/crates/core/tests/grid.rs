use fdlab_core::grid::{ball_volume, laplacian_radial};
use fdlab_core::{Field, FieldKind, RadialGrid};
use proptest::prelude::*;

fn max_interior_error(n: usize, intervals: usize, f: fn(f64) -> f64, lap: impl Fn(f64, usize) -> f64) -> f64 {
    let g = RadialGrid::build(n, 1.0, intervals, 0.0).unwrap();
    let field = Field::from_fn(g.clone(), FieldKind::Generic, f);
    let l = laplacian_radial(&field).unwrap();
    g.nodes()
        .iter()
        .zip(l.values())
        .take(intervals)
        .map(|(r, v)| (v - lap(*r, n)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn laplacian_of_cos_converges_at_second_order() {
    // Δ cos r = −cos r − (n−1) sin r / r, with the r → 0 limit −n.
    let exact = |r: f64, n: usize| {
        if r == 0.0 {
            -(n as f64)
        } else {
            -r.cos() - (n as f64 - 1.0) * r.sin() / r
        }
    };
    for n in [2usize, 3, 4, 5] {
        let coarse = max_interior_error(n, 64, f64::cos, exact);
        let fine = max_interior_error(n, 128, f64::cos, exact);
        assert!(coarse / fine > 3.5, "n = {n}: {coarse:e} -> {fine:e}");
    }
}

#[test]
fn constant_on_unit_four_ball() {
    let g = RadialGrid::build(4, 1.0, 256, 0.0).unwrap();
    let one = Field::from_fn(g.clone(), FieldKind::Generic, |_| 1.0);
    assert!((one.integrate() - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    assert_eq!(Field::zeros(g, FieldKind::Generic).integrate(), 0.0);
}

#[test]
fn interval_is_dirichlet_at_both_ends() {
    let g = RadialGrid::build(1, 2.0, 16, 0.0).unwrap();
    assert!(g.is_dirichlet(0) && g.is_dirichlet(16));
    assert!(!g.is_dirichlet(8));
    assert!(Field::new(g, vec![1.0; 17], FieldKind::RescaledV).is_err());
}

proptest! {
    #[test]
    fn laplacian_of_r_squared_is_exact(n in 2usize..9, intervals in 16usize..200, radius in 0.2f64..5.0, stretch in 0.0f64..2.0) {
        let g = RadialGrid::build(n, radius, intervals, stretch).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let lap = g.laplacian(&f);
        for v in &lap[..intervals] {
            prop_assert!((v - 2.0 * n as f64).abs() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn weights_reproduce_ball_volume(n in 1usize..9, intervals in 16usize..300, radius in 0.1f64..4.0, stretch in 0.0f64..3.0) {
        let g = RadialGrid::build(n, radius, intervals, stretch).unwrap();
        let total: f64 = g.weights().iter().sum();
        prop_assert!((total / ball_volume(n, radius) - 1.0).abs() < 1e-12);
        prop_assert!(g.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn stiffness_is_symmetric_and_nonnegative(seed in any::<u64>(), n in 1usize..7) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = RadialGrid::build(n, 1.0, 40, 0.5).unwrap();
        let f: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fh = g.dirichlet_form(&f, &h);
        prop_assert!((fh - g.dirichlet_form(&h, &f)).abs() <= 1e-12 * (1.0 + fh.abs()));
        let kf = g.stiffness_apply(&f);
        let via_k: f64 = kf.iter().zip(&h).map(|(a, b)| a * b).sum();
        prop_assert!((via_k - fh).abs() <= 1e-10 * (1.0 + fh.abs()));
        prop_assert!(g.dirichlet_energy(&f) >= 0.0);
    }

    #[test]
    fn dot_is_bilinear(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 1usize..6) {
        let g = RadialGrid::build(n, 1.0, 32, 0.0).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| r.sin()).collect();
        let h: Vec<f64> = g.nodes().iter().map(|r| 1.0 + r * r).collect();
        let mix: Vec<f64> = f.iter().zip(&h).map(|(x, y)| a * x + b * y).collect();
        let lhs = g.dot(&mix, &h);
        let rhs = a * g.dot(&f, &h) + b * g.dot(&h, &h);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}

//! Radial stationary states of `Δv + bv + v^p = 0` with zero Dirichlet data, by shooting
//! on the center height followed by a discrete Newton polish on the grid.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind, RadialGrid};
use crate::linalg::SymTridiag;
use crate::ode::{self, Control, OdeOptions, Sample};

/// Horizon, in units of the target radius, beyond which a shot is declared zero-free.
pub const HORIZON_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootingProblem {
    pub n: usize,
    pub p: f64,
    pub b: f64,
    pub radius: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub ode_tol: f64,
    /// Relative width at which the bisection on `alpha` stops.
    pub bisect_tol: f64,
    /// Number of log-spaced probes used to locate sign changes inside the bracket.
    pub scan_points: usize,
}

impl ShootingProblem {
    pub fn new(n: usize, p: f64, b: f64, radius: f64) -> Self {
        ShootingProblem {
            n,
            p,
            b,
            radius,
            alpha_lo: 1e-3,
            alpha_hi: 1e4,
            ode_tol: 1e-11,
            bisect_tol: 1e-13,
            scan_points: 48,
        }
    }

    pub fn with_bracket(mut self, lo: f64, hi: f64) -> Self {
        self.alpha_lo = lo;
        self.alpha_hi = hi;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "dimension must be at least 1"));
        }
        if !(self.p > 1.0) {
            return Err(Error::config("p", format!("exponent must exceed 1, got {}", self.p)));
        }
        if !(self.b >= 0.0) {
            return Err(Error::config("b", format!("must be nonnegative, got {}", self.b)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::config("R", format!("must be positive, got {}", self.radius)));
        }
        if !(self.alpha_lo > 0.0 && self.alpha_hi > self.alpha_lo) {
            return Err(Error::config(
                "alpha_bracket",
                format!("need 0 < lo < hi, got ({}, {})", self.alpha_lo, self.alpha_hi),
            ));
        }
        if !(self.ode_tol > 0.0 && self.bisect_tol > 0.0) {
            return Err(Error::config("ode_tol", "tolerances must be positive"));
        }
        Ok(())
    }

    /// Radius at which the shot from the center must vanish: `R`, or half the interval
    /// length when `n = 1` (the profile is even about the midpoint).
    pub fn target(&self) -> f64 {
        if self.n == 1 {
            0.5 * self.radius
        } else {
            self.radius
        }
    }

    fn source(&self, v: f64) -> f64 {
        v.signum() * v.abs().powf(self.p)
    }
}

/// Outcome of one shot.
#[derive(Debug, Clone)]
pub struct Shot {
    pub alpha: f64,
    pub first_zero: Option<f64>,
    /// Accepted ODE samples of `(v, v')` from the center up to the zero (or horizon).
    pub samples: Vec<Sample<2>>,
}

impl Shot {
    /// `v(s)` by Hermite interpolation; `s` beyond the last sample returns the last value.
    pub fn value_at(&self, s: f64) -> f64 {
        let samples = &self.samples;
        if s <= samples[0].t {
            return samples[0].y[0];
        }
        let last = samples.len() - 1;
        if s >= samples[last].t {
            return samples[last].y[0];
        }
        let k = samples.partition_point(|x| x.t <= s);
        ode::hermite(&samples[k - 1], &samples[k], s)[0]
    }
}

/// Integrate the radial profile ODE from the center with `v(0) = alpha`, `v'(0) = 0`.
pub fn shoot(prob: &ShootingProblem, alpha: f64) -> Result<Shot> {
    prob.validate()?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("center height must be positive, got {alpha}")));
    }
    let n = prob.n as f64;
    let horizon = HORIZON_FACTOR * prob.target();
    let curvature = prob.b * alpha + alpha.powf(prob.p);
    let scale = (prob.b + alpha.powf(prob.p - 1.0)).sqrt().recip();

    // Second-order series start off the removable singularity at the center.
    let (r0, y0) = if prob.n == 1 {
        (0.0, [alpha, 0.0])
    } else {
        let r0 = 1e-4 * scale.min(prob.target());
        (r0, [alpha - curvature * r0 * r0 / (2.0 * n), -curvature * r0 / n])
    };
    let rhs = |r: f64, y: &[f64; 2]| {
        let friction = if prob.n == 1 { 0.0 } else { (n - 1.0) / r * y[1] };
        [y[1], -friction - prob.b * y[0] - prob.source(y[0])]
    };
    let opts = OdeOptions {
        rtol: prob.ode_tol,
        atol: prob.ode_tol * alpha * 1e-2,
        h_init: 1e-2 * scale.min(prob.target()),
        h_max: 0.05 * prob.target(),
        max_steps: 2_000_000,
    };
    let mut bracket = None;
    let mut samples = ode::integrate(rhs, r0, y0, horizon, opts, |a, b| {
        if b.y[0] <= 0.0 {
            bracket = Some((*a, *b));
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if prob.n != 1 {
        samples.insert(0, Sample { t: 0.0, y: [alpha, 0.0], dy: [0.0, -curvature / n] });
    }
    let first_zero = bracket.map(|(a, b)| {
        let (mut lo, mut hi) = (a.t, b.t);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if ode::hermite(&a, &b, mid)[0] > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    });
    if let Some(z) = first_zero {
        // Replace the overshooting sample by the interpolated zero crossing.
        let (a, b) = bracket.expect("zero implies bracket");
        let y = ode::hermite(&a, &b, z);
        let last = samples.len() - 1;
        samples[last] = Sample { t: z, y: [0.0, y[1]], dy: rhs(z, &[0.0, y[1]]) };
    }
    Ok(Shot { alpha, first_zero, samples })
}

/// One stationary solution found inside the bracket.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub alpha: f64,
    pub first_zero: f64,
    pub residual: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub field: Field,
    pub alpha_star: f64,
    /// Discrete residual `max|Δ_h v + bv + v^p| / sup v^p` over unknown nodes.
    pub residual: f64,
    pub energy: f64,
    /// All bracketed solutions; more than one means a multiplicity warning.
    pub candidates: Vec<Candidate>,
}

impl StationarySolution {
    pub fn multiplicity_warning(&self) -> bool {
        self.candidates.len() > 1
    }
}

fn mismatch(prob: &ShootingProblem, alpha: f64) -> Result<f64> {
    Ok(match shoot(prob, alpha)?.first_zero {
        Some(z) => z - prob.target(),
        None => f64::INFINITY,
    })
}

/// Solve for every bracketed stationary state on `grid` and designate the one of least
/// energy.
pub fn solve_stationary(prob: &ShootingProblem, grid: &Arc<RadialGrid>) -> Result<StationarySolution> {
    prob.validate()?;
    if grid.dim() != prob.n || (grid.radius() - prob.radius).abs() > 1e-14 * prob.radius {
        return Err(Error::Contract("grid does not match the shooting problem".into()));
    }
    let roots = bracketed_roots(prob)?;
    if roots.is_empty() {
        return Err(Error::Bracket(format!(
            "no center height in [{:e}, {:e}] puts the first zero at {} (n = {}, p = {}, b = {})",
            prob.alpha_lo,
            prob.alpha_hi,
            prob.target(),
            prob.n,
            prob.p,
            prob.b
        )));
    }
    let mut solutions = Vec::new();
    for alpha in roots {
        let shot = shoot(prob, alpha)?;
        let z = shot.first_zero.ok_or_else(|| Error::Numerical("root shot lost its zero".into()))?;
        let guess = resample(prob, &shot, z, grid);
        let field = polish(grid, prob.p, prob.b, guess)?;
        let residual = discrete_residual(&field, prob.p, prob.b);
        let energy = crate::diagnostics::energy_f(&field, prob.p, prob.b);
        solutions.push((Candidate { alpha, first_zero: z, residual, energy }, field));
    }
    solutions.sort_by(|a, b| a.0.energy.total_cmp(&b.0.energy));
    let candidates: Vec<Candidate> = solutions.iter().map(|s| s.0.clone()).collect();
    let (best, field) = solutions.swap_remove(0);
    Ok(StationarySolution {
        field,
        alpha_star: best.alpha,
        residual: best.residual,
        energy: best.energy,
        candidates,
    })
}

fn bracketed_roots(prob: &ShootingProblem) -> Result<Vec<f64>> {
    let m = prob.scan_points.max(2);
    let (llo, lhi) = (prob.alpha_lo.ln(), prob.alpha_hi.ln());
    let probes: Vec<f64> = (0..m)
        .map(|k| (llo + (lhi - llo) * k as f64 / (m - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = probes.iter().map(|a| mismatch(prob, *a)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for k in 0..m - 1 {
        let (ga, gb) = (values[k], values[k + 1]);
        if ga == 0.0 {
            roots.push(probes[k]);
            continue;
        }
        if ga.signum() == gb.signum() || gb == 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (probes[k].ln(), probes[k + 1].ln());
        let lo_sign = ga.signum();
        while hi - lo > prob.bisect_tol {
            let mid = 0.5 * (lo + hi);
            let g = mismatch(prob, mid.exp())?;
            if g == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if g.signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push((0.5 * (lo + hi)).exp());
    }
    if values[m - 1] == 0.0 {
        roots.push(probes[m - 1]);
    }
    Ok(roots)
}

/// Map the shot onto the grid, stretching the radial variable so the zero lands on the
/// Dirichlet boundary.
fn resample(prob: &ShootingProblem, shot: &Shot, zero: f64, grid: &Arc<RadialGrid>) -> Field {
    let target = prob.target();
    let stretch = zero / target;
    Field::from_fn(grid.clone(), FieldKind::Stationary, |r| {
        let s = if prob.n == 1 { (r - target).abs() } else { r };
        shot.value_at(s * stretch).max(0.0)
    })
}

/// Newton iteration on `K v − bWv − W v^p = 0` over the unknown nodes.
fn polish(grid: &Arc<RadialGrid>, p: f64, b: f64, guess: Field) -> Result<Field> {
    let unknowns = grid.unknowns();
    let w = grid.weights();
    let k = SymTridiag::stiffness(grid);
    let mut v = guess.into_values();
    let mut last = f64::INFINITY;
    for _ in 0..50 {
        let kv = grid.stiffness_apply(&v);
        let g: Vec<f64> = unknowns
            .clone()
            .map(|i| kv[i] - b * w[i] * v[i] - w[i] * v[i].max(0.0).powf(p))
            .collect();
        let sup_vp = v.iter().fold(0.0_f64, |m, x| m.max(x.abs())).powf(p);
        let res = unknowns
            .clone()
            .zip(&g)
            .map(|(i, gi)| (gi / w[i]).abs())
            .fold(0.0, f64::max)
            / sup_vp;
        if res < 1e-13 || (res < 1e-10 && res >= 0.5 * last) {
            break;
        }
        last = res;
        let diag_shift: Vec<f64> = unknowns
            .clone()
            .map(|i| -b * w[i] - p * w[i] * v[i].max(0.0).powf(p - 1.0))
            .collect();
        let jac = SymTridiag::new(
            k.diag.iter().zip(&diag_shift).map(|(a, s)| a + s).collect(),
            k.off.clone(),
        )?;
        let delta = jac.solve(&g)?;
        for (i, d) in unknowns.clone().zip(&delta) {
            v[i] -= d;
        }
    }
    if unknowns.clone().any(|i| !(v[i] > 0.0)) {
        return Err(Error::Numerical("polished stationary state lost positivity".into()));
    }
    Field::new(grid.clone(), v, FieldKind::Stationary)
}

/// `max_i |Δ_h v + bv + v^p| / sup v^p` over unknown nodes.
pub fn discrete_residual(v: &Field, p: f64, b: f64) -> f64 {
    let grid = v.grid();
    let vals = v.values();
    let lap = grid.laplacian(vals);
    let sup_vp = v.sup().powf(p);
    grid.unknowns()
        .map(|i| (lap[i] + b * vals[i] + vals[i].max(0.0).powf(p)).abs())
        .fold(0.0, f64::max)
        / sup_vp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dirichlet_lambda1;

    #[test]
    fn scaling_symmetry_in_one_dimension() {
        let prob = ShootingProblem::new(1, 2.0, 0.0, 1.0);
        let z1 = shoot(&prob, 10.0).unwrap().first_zero.unwrap();
        let z2 = shoot(&prob, 20.0).unwrap().first_zero.unwrap();
        assert!(((z1 / z2) - 2f64.sqrt()).abs() < 1e-3 * 2f64.sqrt());
    }

    #[test]
    fn critical_b0_shot_is_a_bubble() {
        let prob = ShootingProblem::new(4, 3.0, 0.0, 1.0);
        let alpha = 7.0;
        let shot = shoot(&prob, alpha).unwrap();
        assert!(shot.first_zero.is_none());
        let c0 = 8f64.sqrt();
        let lambda = alpha / c0;
        for s in [0.0, 0.05, 0.2, 0.7, 1.0, 3.0] {
            let exact = c0 * lambda / (1.0 + lambda * lambda * s * s);
            assert!((shot.value_at(s) - exact).abs() < 1e-8 * alpha, "s = {s}");
        }
    }

    #[test]
    fn tiny_alpha_follows_linear_mode() {
        let g = RadialGrid::build(4, 1.0, 1024, 0.0).unwrap();
        let lambda1 = dirichlet_lambda1(&g).unwrap();
        let b = 0.3 * lambda1;
        let prob = ShootingProblem::new(4, 3.0, b, 1.0);
        let z = shoot(&prob, 1e-12).unwrap().first_zero.unwrap();
        let expected = (lambda1 / b).sqrt();
        assert!(((z - expected) / expected).abs() < 1e-5, "{z} vs {expected}");
    }

    #[test]
    fn brezis_nirenberg_ball_state() {
        let g = RadialGrid::build(4, 1.0, 256, 0.0).unwrap();
        let b = 0.3 * dirichlet_lambda1(&g).unwrap();
        let prob = ShootingProblem::new(4, 3.0, b, 1.0);
        let sol = solve_stationary(&prob, &g).unwrap();
        assert!(sol.residual < 1e-6);
        assert!(sol.field.values()[..256].iter().all(|v| *v > 0.0));
        assert_eq!(sol.candidates.len(), 1);
    }

    #[test]
    fn pohozaev_obstruction() {
        let g = RadialGrid::build(4, 1.0, 128, 0.0).unwrap();
        let prob = ShootingProblem::new(4, 3.0, 0.0, 1.0);
        assert!(matches!(solve_stationary(&prob, &g), Err(Error::Bracket(_))));
    }

    #[test]
    fn mismatched_bracket() {
        let g = RadialGrid::build(1, 1.0, 128, 0.0).unwrap();
        let prob = ShootingProblem::new(1, 2.0, 0.0, 1.0).with_bracket(1e3, 1e4);
        assert!(matches!(solve_stationary(&prob, &g), Err(Error::Bracket(_))));
    }
}

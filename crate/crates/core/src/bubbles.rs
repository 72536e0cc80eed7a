//! Aubin–Talenti bubbles on the ball: profiles, harmonic corrections, energy quantum,
//! the two-bubble interaction integrals, the elementary inequalities used in the bubble
//! expansion, and a radial one-bubble fit.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sphere_area, Field, FieldKind, RadialGrid};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};

/// Relative tolerance of the interaction quadratures.
pub const INTERACTION_TOL: f64 = 1e-7;

/// A bubble `c0·(λ/(1+λ²|x−a|²))^{(n−2)/2}`. `center` is the distance of `a` from the
/// origin; radial operations require it to be zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bubble {
    pub n: usize,
    pub center: f64,
    pub lambda: f64,
    pub c0: f64,
}

/// `(n(n−2))^{(n−2)/4}`.
pub fn bubble_constant(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0)
}

/// `Y(S^n) = n(n−2)/4·|S^n|^{2/n}`.
pub fn yamabe_sphere(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 2.0) / 4.0 * sphere_area(n).powf(2.0 / nf)
}

/// The energy quantum `Y(S^n)^{n/2} = (n(n−2)/4)^{n/2}·|S^n|`.
pub fn yamabe_energy(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0) / 4.0).powf(nf / 2.0) * sphere_area(n)
}

impl Bubble {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        Self::centered_at(n, 0.0, lambda)
    }

    pub fn centered_at(n: usize, center: f64, lambda: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::config("n", format!("bubbles need n >= 3, got {n}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::config("lambda", format!("must be positive and finite, got {lambda}")));
        }
        if !(center >= 0.0 && center.is_finite()) {
            return Err(Error::config("center", format!("must be a finite distance, got {center}")));
        }
        Ok(Bubble {
            n,
            center,
            lambda,
            c0: bubble_constant(n),
        })
    }

    fn half_exponent(&self) -> f64 {
        (self.n as f64 - 2.0) / 2.0
    }

    /// Value at distance `dist` from the center.
    pub fn eval(&self, dist: f64) -> f64 {
        let l = self.lambda;
        self.c0 * (l / (1.0 + l * l * dist * dist)).powf(self.half_exponent())
    }
}

/// `ξ̄_{0,λ}(r)`; `r` is measured from the bubble center.
pub fn bubble_eval(bub: &Bubble, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    Ok(bub.eval(r))
}

fn require_centered(bub: &Bubble) -> Result<()> {
    if bub.center != 0.0 {
        return Err(Error::Domain(
            "off-center corrections on the ball are not supported".into(),
        ));
    }
    Ok(())
}

fn require_dim(bub: &Bubble, grid: &RadialGrid) -> Result<()> {
    if grid.dim() != bub.n {
        return Err(Error::Contract(format!(
            "bubble dimension {} differs from grid dimension {}",
            bub.n,
            grid.dim()
        )));
    }
    Ok(())
}

/// Harmonic extension of the boundary trace of a centered bubble: the constant `ξ̄(R)`.
pub fn harmonic_correction(bub: &Bubble, grid: &Arc<RadialGrid>) -> Result<Field> {
    require_centered(bub)?;
    require_dim(bub, grid)?;
    let h = bub.eval(grid.radius());
    Field::new(grid.clone(), vec![h; grid.len()], FieldKind::Generic)
}

/// `ξ = ξ̄ − h`, zero on the boundary.
pub fn corrected_bubble(bub: &Bubble, grid: &Arc<RadialGrid>) -> Result<Field> {
    require_centered(bub)?;
    require_dim(bub, grid)?;
    let h = bub.eval(grid.radius());
    let mut values: Vec<f64> = grid.nodes().iter().map(|r| bub.eval(*r) - h).collect();
    let last = values.len() - 1;
    values[last] = 0.0;
    Field::new(grid.clone(), values, FieldKind::Generic)
}

/// `∫_{R^n} ξ̄^{2n/(n−2)}` by adaptive quadrature in the radial variable.
pub fn bubble_mass(bub: &Bubble) -> Result<f64> {
    let n = bub.n;
    let q = 2.0 * n as f64 / (n as f64 - 2.0);
    let l = bub.lambda;
    let area = sphere_area(n - 1);
    let f = |r: f64| bub.eval(r).powf(q) * r.powi(n as i32 - 1) * area;
    let res = integrate_to_infinity(
        f,
        &[0.0, 1.0 / l, 10.0 / l],
        QuadOptions { rel_tol: 1e-13, abs_tol: 0.0, max_intervals: 4000 },
    )?;
    Ok(res.value)
}

/// Scaled profile `λ/(1+λ²d²)` entering the interaction integrals.
fn profile(lambda: f64, d2: f64) -> f64 {
    lambda / (1.0 + lambda * lambda * d2)
}

/// Which interaction integrand to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Interaction {
    /// `g₁^{(n+2)/2} g₂^{(n−2)/2}`.
    I1,
    /// `max(g₁,g₂)²·min(g₁,g₂)^{n−2}`.
    I2,
}

fn interaction_density(kind: Interaction, n: usize, g1: f64, g2: f64) -> f64 {
    let nf = n as f64;
    match kind {
        Interaction::I1 => g1.powf((nf + 2.0) / 2.0) * g2.powf((nf - 2.0) / 2.0),
        Interaction::I2 => {
            let (hi, lo) = if g1 >= g2 { (g1, g2) } else { (g2, g1) };
            hi * hi * lo.powi(n as i32 - 2)
        }
    }
}

fn sorted_points(mut pts: Vec<f64>) -> Vec<f64> {
    pts.retain(|x| x.is_finite() && *x >= 0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    pts
}

fn interaction(kind: Interaction, b1: &Bubble, b2: &Bubble, separation: f64) -> Result<f64> {
    if b1.n != b2.n {
        return Err(Error::Contract("bubbles live in different dimensions".into()));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::Domain(format!("separation must be nonnegative, got {separation}")));
    }
    let n = b1.n;
    let outer = QuadOptions { rel_tol: INTERACTION_TOL, abs_tol: 0.0, max_intervals: 4000 };
    if separation == 0.0 {
        let (l1, l2) = (b1.lambda, b2.lambda);
        let area = sphere_area(n - 1);
        let f = |r: f64| {
            let d2 = r * r;
            interaction_density(kind, n, profile(l1, d2), profile(l2, d2)) * r.powi(n as i32 - 1) * area
        };
        let pts = sorted_points(vec![0.0, 1.0 / l1, 10.0 / l1, 1.0 / l2, 10.0 / l2]);
        return Ok(integrate_to_infinity(f, &pts, QuadOptions { rel_tol: 1e-12, ..outer })?.value);
    }
    // Both integrals are invariant under x ↦ x/separation with λ ↦ λ·separation, so work
    // with unit separation: the first bubble at the origin, the second at e.
    let l1 = b1.lambda * separation;
    let l2 = b2.lambda * separation;
    let shell = sphere_area(n - 2);
    let inner_opts = QuadOptions { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 2000 };
    let failure = std::cell::Cell::new(None::<Error>);
    let radial = |rho: f64| -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let g1 = profile(l1, rho * rho);
        let angular = |theta: f64| {
            let s = (0.5 * theta).sin();
            let d2 = (rho - 1.0) * (rho - 1.0) + 4.0 * rho * s * s;
            interaction_density(kind, n, g1, profile(l2, d2)) * theta.sin().powi(n as i32 - 2)
        };
        let mut pts = vec![0.0, std::f64::consts::PI];
        for k in [1.0, 10.0] {
            let x = k / (2.0 * l2 * rho);
            if x < 1.0 {
                pts.push(2.0 * x.asin());
            }
        }
        let pts = sorted_points(pts);
        match integrate(angular, &pts, inner_opts) {
            Ok(r) => shell * rho.powi(n as i32 - 1) * r.value,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let mut pts = vec![0.0, 1.0 / l1, 10.0 / l1, 0.5, 1.0, 2.0];
    for k in [1.0, 10.0] {
        pts.push(1.0 - k / l2);
        pts.push(1.0 + k / l2);
        pts.push(k / l2);
    }
    let pts = sorted_points(pts);
    let res = integrate_to_infinity(radial, &pts, outer);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(res?.value)
}

/// `I₁ = ∫ (λ₁/(1+λ₁²|x−a₁|²))^{(n+2)/2} (λ₂/(1+λ₂²|x−a₂|²))^{(n−2)/2} dx` with
/// `|a₁ − a₂| = separation`. The integrand is not symmetric,
/// but the integral is: it equals `∫ (−Δξ̄₁) ξ̄₂ / (c0^{(n+2)/(n−2)}·c0)`.
pub fn interaction_i1(b1: &Bubble, b2: &Bubble, separation: f64) -> Result<f64> {
    interaction(Interaction::I1, b1, b2, separation)
}

/// `I₂ = ∫ max(g₁, g₂)² min(g₁, g₂)^{n−2} dx`, symmetric in the two bubbles.
pub fn interaction_i2(b1: &Bubble, b2: &Bubble, separation: f64) -> Result<f64> {
    interaction(Interaction::I2, b1, b2, separation)
}

/// One row of an interaction sweep at unit separation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InteractionSample {
    pub lambda1: f64,
    pub lambda2: f64,
    pub i1: f64,
    pub i2: f64,
    pub ratio: f64,
}

/// Two-bubble regimes, each fixing `λ̃₂` as a function of `λ̃₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum InteractionCase {
    /// `λ̃₂ = λ̃₁/2`: comparable scales, both concentrated.
    A1,
    /// `λ̃₂ = √λ̃₁`: both concentrated, second much flatter.
    A2,
    /// `λ̃₂ = 1/2`: second bubble spread over the separation scale.
    B1,
    /// `λ̃₂ = 1/λ̃₁`: second bubble spread far beyond the separation.
    B2,
}

impl InteractionCase {
    pub const ALL: [InteractionCase; 4] = [Self::A1, Self::A2, Self::B1, Self::B2];

    pub fn lambda2(self, lambda1: f64) -> f64 {
        match self {
            Self::A1 => 0.5 * lambda1,
            Self::A2 => lambda1.sqrt(),
            Self::B1 => 0.5,
            Self::B2 => 1.0 / lambda1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::A1 => "A1",
            Self::A2 => "A2",
            Self::B1 => "B1",
            Self::B2 => "B2",
        }
    }
}

/// `I₁`, `I₂` and `I₁/√I₂` at unit separation for each `λ̃₁`.
pub fn interaction_sweep(n: usize, case: InteractionCase, lambdas: &[f64]) -> Result<Vec<InteractionSample>> {
    use rayon::prelude::*;
    lambdas
        .par_iter()
        .map(|&l1| {
            let l2 = case.lambda2(l1);
            let b1 = Bubble::new(n, l1)?;
            let b2 = Bubble::new(n, l2)?;
            let i1 = interaction_i1(&b1, &b2, 1.0)?;
            let i2 = interaction_i2(&b1, &b2, 1.0)?;
            Ok(InteractionSample { lambda1: l1, lambda2: l2, i1, i2, ratio: i1 / i2.sqrt() })
        })
        .collect()
}

/// Sampled check of `(Σa)^q ≥ Σa^q + q Σ_{k<l} a_k^{q−1} a_l + c Σ_{k<l} max^{4/(n−2)} min²`
/// with `q = 2n/(n−2)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SuperadditivityMargin {
    /// Left side minus the first two sums on the right.
    pub excess: f64,
    /// `Σ_{k<l} max(a_k,a_l)^{4/(n−2)} min(a_k,a_l)²`.
    pub paired: f64,
    /// `excess/paired`, absent when the paired sum vanishes.
    pub margin: Option<f64>,
}

pub fn verify_superadditivity(a: &[f64], n: usize) -> Result<SuperadditivityMargin> {
    if n < 3 {
        return Err(Error::config("n", format!("need n >= 3, got {n}")));
    }
    if a.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(Error::Domain("entries must be finite and nonnegative".into()));
    }
    let nf = n as f64;
    let q = 2.0 * nf / (nf - 2.0);
    let total: f64 = a.iter().sum();
    let mut excess = total.powf(q) - a.iter().map(|x| x.powf(q)).sum::<f64>();
    let mut paired = 0.0;
    for k in 0..a.len() {
        for l in k + 1..a.len() {
            excess -= q * a[k].powf(q - 1.0) * a[l];
            let (hi, lo) = if a[k] >= a[l] { (a[k], a[l]) } else { (a[l], a[k]) };
            paired += hi.powf(4.0 / (nf - 2.0)) * lo * lo;
        }
    }
    let margin = (paired > 0.0).then(|| excess / paired);
    Ok(SuperadditivityMargin { excess, paired, margin })
}

/// Smallest margin over `samples` uniform draws from `[0,1]^m`.
pub fn sample_superadditivity(n: usize, m: usize, samples: usize, rng: &mut impl Rng) -> Result<f64> {
    let mut inf = f64::INFINITY;
    let mut a = vec![0.0; m];
    for _ in 0..samples {
        for x in a.iter_mut() {
            *x = rng.gen::<f64>();
        }
        if let Some(c) = verify_superadditivity(&a, n)?.margin {
            inf = inf.min(c);
        }
    }
    Ok(inf)
}

/// Empirical constants for `(1+ε)^p ≥ 1+ε^p+pε+cε²` and `(1+ε)^p ≥ 1+ε^p+pε^{p−1}+cε`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CalculusLemma {
    pub p: f64,
    pub c_linear: f64,
    pub c_power: f64,
    /// `p(p−1)/2`, the `ε → 0` value of the first quotient.
    pub linear_limit: f64,
    pub samples: usize,
}

/// `((1+ε)^p − 1 − pε)/ε²` without cancellation for small `ε`.
fn binomial_tail(p: f64, eps: f64) -> f64 {
    if eps > 0.25 {
        return ((1.0 + eps).powf(p) - 1.0 - p * eps) / (eps * eps);
    }
    let mut coef = p * (p - 1.0) / 2.0;
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 2..400 {
        let term = coef * pow;
        sum += term;
        if term == 0.0 || term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        coef *= (p - k as f64) / (k as f64 + 1.0);
        pow *= eps;
    }
    sum
}

/// Infima of both quotients over `ε ∈ (0, 1]`: half the samples uniform, half log-spaced
/// down to `1e−8`.
pub fn verify_calculus_lemma(p: f64, samples: usize) -> Result<CalculusLemma> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::Domain(format!("need p > 2, got {p}")));
    }
    if samples < 2 {
        return Err(Error::config("samples", "need at least two samples"));
    }
    let half = samples / 2;
    let uniform = (1..=samples - half).map(|k| k as f64 / (samples - half) as f64);
    let logs = (0..half).map(|k| 10f64.powf(-8.0 * (k as f64 + 1.0) / half as f64));
    let mut c_linear = f64::INFINITY;
    let mut c_power = f64::INFINITY;
    for eps in uniform.chain(logs) {
        let tail = binomial_tail(p, eps);
        c_linear = c_linear.min(tail - eps.powf(p - 2.0));
        let grown = p * eps + tail * eps * eps;
        c_power = c_power.min((grown - eps.powf(p) - p * eps.powf(p - 1.0)) / eps);
    }
    Ok(CalculusLemma {
        p,
        c_linear,
        c_power,
        linear_limit: p * (p - 1.0) / 2.0,
        samples,
    })
}

/// `|a^q + q a^{q−1}(b−a) − b^q|` over
/// `a^{max(0, q−2)}|b−a|^{min(q,2)} + |b−a|^q`, `q = (n+2)/(n−2)`. `None` when `b = a`.
pub fn verify_pointwise_expansion(a: f64, b: f64, n: usize) -> Result<Option<f64>> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::Domain("a and b must be nonnegative".into()));
    }
    if n < 3 {
        return Err(Error::config("n", format!("need n >= 3, got {n}")));
    }
    let nf = n as f64;
    let q = (nf + 2.0) / (nf - 2.0);
    let d = (b - a).abs();
    if d == 0.0 {
        return Ok(None);
    }
    let lhs = (a.powf(q) + q * a.powf(q - 1.0) * (b - a) - b.powf(q)).abs();
    let rhs = a.powf((q - 2.0).max(0.0)) * d.powf(q.min(2.0)) + d.powf(q);
    Ok(Some(lhs / rhs))
}

/// Supremum of [`verify_pointwise_expansion`] over the `(k+1)²` grid on `[0, 2]²`.
pub fn pointwise_sup(n: usize, k: usize) -> Result<f64> {
    let mut sup = 0.0_f64;
    for i in 0..=k {
        let a = 2.0 * i as f64 / k as f64;
        for j in 0..=k {
            let b = 2.0 * j as f64 / k as f64;
            if let Some(r) = verify_pointwise_expansion(a, b, n)? {
                sup = sup.max(r);
            }
        }
    }
    Ok(sup)
}

/// Search box and twist for [`fit_bubble`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// `b` in the norm `(∫|∇u|² − bu²)^{1/2}`.
    pub b: f64,
    /// Bounds on `λ`; `None` picks `1/(2R)` and `1/(4 r₁)`.
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub scan_points: usize,
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            b: 0.0,
            lambda_min: None,
            lambda_max: None,
            scan_points: 64,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleFit {
    pub lambda: f64,
    pub alpha: f64,
    pub residual_norm: f64,
    /// `‖v‖` in the same norm.
    pub v_norm: f64,
    /// Set when the optimum sits on the edge of the `λ` box.
    pub boundary_warning: bool,
}

impl BubbleFit {
    pub fn relative_residual(&self) -> f64 {
        if self.v_norm > 0.0 {
            self.residual_norm / self.v_norm
        } else {
            0.0
        }
    }
}

fn twisted_form(grid: &RadialGrid, b: f64, f: &[f64], g: &[f64]) -> f64 {
    grid.dirichlet_form(f, g) - b * grid.dot(f, g)
}

/// Best `α·ξ_{0,λ}` approximation of `v` in the twisted norm. `α` is solved in closed form
/// for each `λ`; `ln λ` is scanned and then refined by golden section.
pub fn fit_bubble(v: &Field, opts: &FitOptions) -> Result<BubbleFit> {
    let grid = v.grid().clone();
    let n = grid.dim();
    if n < 3 {
        return Err(Error::Contract(format!("bubble fits need n >= 3, got {n}")));
    }
    if v.values().iter().any(|x| *x < 0.0) || *v.values().last().expect("nonempty") != 0.0 {
        return Err(Error::Domain("field must be nonnegative with zero boundary value".into()));
    }
    if opts.scan_points < 3 {
        return Err(Error::config("scan_points", "need at least three scan points"));
    }
    let lo = opts.lambda_min.unwrap_or(0.5 / grid.radius());
    let hi = opts.lambda_max.unwrap_or(0.25 / grid.nodes()[1]);
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::config("lambda_min", format!("empty search box [{lo}, {hi}]")));
    }
    let vv = v.values();
    let v_norm2 = twisted_form(&grid, opts.b, vv, vv);
    if !(v_norm2 > 0.0) {
        return Err(Error::Domain("twisted norm of the field is not positive".into()));
    }
    let profile_at = |ll: f64| -> Result<(f64, f64)> {
        let xi = corrected_bubble(&Bubble::new(n, ll.exp())?, &grid)?;
        let x = xi.values();
        let xx = twisted_form(&grid, opts.b, x, x);
        let vx = twisted_form(&grid, opts.b, vv, x);
        Ok((vx / xx, v_norm2 - vx * vx / xx))
    };
    let (a, z) = (lo.ln(), hi.ln());
    let m = opts.scan_points;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..m {
        let ll = a + (z - a) * k as f64 / (m - 1) as f64;
        let r = profile_at(ll)?.1;
        if r < best.1 {
            best = (k, r);
        }
    }
    let step = (z - a) / (m - 1) as f64;
    let mut left = (a + step * (best.0 as f64 - 1.0)).max(a);
    let mut right = (a + step * (best.0 as f64 + 1.0)).min(z);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = right - golden * (right - left);
    let mut x2 = left + golden * (right - left);
    let mut f1 = profile_at(x1)?.1;
    let mut f2 = profile_at(x2)?.1;
    while right - left > opts.tol {
        if f1 <= f2 {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - golden * (right - left);
            f1 = profile_at(x1)?.1;
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + golden * (right - left);
            f2 = profile_at(x2)?.1;
        }
    }
    let ll = 0.5 * (left + right);
    let (alpha, _) = profile_at(ll)?;
    let lambda = ll.exp();
    let xi = corrected_bubble(&Bubble::new(n, lambda)?, &grid)?;
    let diff: Vec<f64> = vv.iter().zip(xi.values()).map(|(p, q)| p - alpha * q).collect();
    let residual_norm = twisted_form(&grid, opts.b, &diff, &diff).max(0.0).sqrt();
    let edge = 1e-6 * (z - a);
    Ok(BubbleFit {
        lambda,
        alpha,
        residual_norm,
        v_norm: v_norm2.sqrt(),
        boundary_warning: ll - a < edge || z - ll < edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        let b = Bubble::new(4, 5.0).unwrap();
        assert!((bubble_eval(&b, 0.0).unwrap() - 2.0 * 2f64.sqrt() * 5.0).abs() < 1e-12);
        assert!((b.eval(0.2) - b.c0 * 2.5).abs() < 1e-12);
        assert!(bubble_eval(&b, -1.0).is_err());
        assert!((yamabe_energy(4) - 32.0 * PI * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn far_field_asymptotics() {
        for n in [3, 4, 5, 6] {
            let b = Bubble::new(n, 7.0).unwrap();
            let r = 1e3f64 / 7.0;
            let e = (n as f64 - 2.0) / 2.0;
            let asym = b.c0 * 7f64.powf(-e) * r.powf(-2.0 * e);
            assert!((b.eval(r) / asym - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn harmonic_correction_is_boundary_constant() {
        let g = RadialGrid::build(4, 1.0, 64, 0.0).unwrap();
        let b = Bubble::new(4, 10.0).unwrap();
        let h = harmonic_correction(&b, &g).unwrap();
        assert!((h.values()[0] - b.c0 * 10.0 / 101.0).abs() < 1e-14);
        assert!((h.values()[0] - 0.2800).abs() < 1e-4);
        let xi = corrected_bubble(&b, &g).unwrap();
        assert_eq!(*xi.values().last().unwrap(), 0.0);
        assert!(xi.values()[..64].iter().all(|x| *x > 0.0));
        let off = Bubble::centered_at(4, 0.1, 10.0).unwrap();
        assert!(matches!(harmonic_correction(&off, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn superadditivity_worked_example() {
        let m = verify_superadditivity(&[1.0, 1.0], 4).unwrap();
        assert!((m.margin.unwrap() - 10.0).abs() < 1e-12);
        let v = verify_superadditivity(&[1.0, 0.0], 4).unwrap();
        assert!(v.margin.is_none());
        assert_eq!(v.excess, 0.0);
    }

    #[test]
    fn calculus_lemma_cubic() {
        let c = verify_calculus_lemma(3.0, 2000).unwrap();
        assert!((c.c_linear - 3.0).abs() < 1e-12);
        assert!(c.c_power > 0.0);
        assert_eq!(c.linear_limit, 3.0);
    }

    #[test]
    fn pointwise_ratio_n4_and_n6() {
        assert_eq!(verify_pointwise_expansion(1.0, 1.0, 4).unwrap(), None);
        // n = 4: |3ad² + d³| / (a d² + |d|³) ≤ 3.
        let s4 = pointwise_sup(4, 100).unwrap();
        assert!(s4 <= 3.0 + 1e-12 && s4 > 1.0);
        // n = 6: LHS = d², RHS = 2d².
        let s6 = pointwise_sup(6, 50).unwrap();
        assert!((s6 - 0.5).abs() < 1e-12);
    }
}

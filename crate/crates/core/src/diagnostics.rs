//! Monitored quantities along trajectories: `R`, the moments `M_q`, the energy `F`,
//! dissipation, the relative error against a stationary state and decay-rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind};
use crate::linalg::fit_line;

/// Nodes with `v ≤ R_FLOOR·sup v` are excluded from pointwise `R`.
pub const R_FLOOR: f64 = 1e-6;

/// `R = v^{−p}(−Δv − bv)` at the nodes where it is evaluated.
#[derive(Debug, Clone)]
pub struct Curvature {
    /// Values of `R`; entries where `evaluated[i]` is false hold 1.
    pub values: Vec<f64>,
    pub evaluated: Vec<bool>,
    /// `−Δ_h v − bv` at every node (zero at Dirichlet nodes).
    pub operator: Vec<f64>,
}

impl Curvature {
    pub fn extremes(&self) -> Option<(f64, f64)> {
        let mut it = self
            .values
            .iter()
            .zip(&self.evaluated)
            .filter(|(_, e)| **e)
            .map(|(v, _)| *v);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// `max |R − 1|` over evaluated nodes.
    pub fn sup_deviation(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.evaluated)
            .filter(|(_, e)| **e)
            .map(|(v, _)| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_field(&self, v: &Field) -> Result<Field> {
        Field::new(v.grid().clone(), self.values.clone(), FieldKind::Generic)
    }
}

pub fn curvature_r(v: &Field, p: f64, b: f64, floor: f64) -> Result<Curvature> {
    let sup = v.sup();
    if !(sup > 0.0) {
        return Err(Error::Domain("R is undefined for the zero field".into()));
    }
    let grid = v.grid();
    let vals = v.values();
    let lap = grid.laplacian(vals);
    let mut values = vec![1.0; vals.len()];
    let mut evaluated = vec![false; vals.len()];
    let mut operator = vec![0.0; vals.len()];
    for i in grid.unknowns() {
        operator[i] = -lap[i] - b * vals[i];
        if vals[i] > floor * sup {
            values[i] = operator[i] / vals[i].powf(p);
            evaluated[i] = true;
        }
    }
    Ok(Curvature { values, evaluated, operator })
}

/// `M_q = ∫ |R−1|^q v^{p+1}` per `q`, and whether any excluded node had to be dropped
/// because `|R−1|^q v^{p+1}` is not controlled by a nonnegative power of `v` there.
pub fn moments(v: &Field, curv: &Curvature, p: f64, q_list: &[f64]) -> (Vec<(f64, f64)>, bool) {
    let grid = v.grid();
    let vals = v.values();
    let w = grid.weights();
    let mut truncated = false;
    let out = q_list
        .iter()
        .map(|&q| {
            let mut sum = 0.0;
            for i in grid.unknowns() {
                let x = vals[i].max(0.0);
                let term = if curv.evaluated[i] {
                    (curv.values[i] - 1.0).abs().powf(q) * x.powf(p + 1.0)
                } else if x == 0.0 {
                    0.0
                } else {
                    let expo = p + 1.0 - q * p;
                    if expo >= 0.0 {
                        (curv.operator[i] - x.powf(p)).abs().powf(q) * x.powf(expo)
                    } else {
                        truncated = true;
                        0.0
                    }
                };
                sum += w[i] * term;
            }
            (q, sum)
        })
        .collect();
    (out, truncated)
}

/// `F(v) = ∫ |∇v|² − b v² − (2/(p+1)) v^{p+1}`.
pub fn energy_f(v: &Field, p: f64, b: f64) -> f64 {
    let grid = v.grid();
    let vals = v.values();
    let grad = grid.dirichlet_energy(vals);
    let w = grid.weights();
    let mut pot = 0.0;
    for (i, x) in vals.iter().enumerate() {
        pot += w[i] * (b * x * x + 2.0 / (p + 1.0) * x.abs().powf(p + 1.0));
    }
    grad - pot
}

/// `−2p ∫ v^{p−1} |∂_t v|²` with `∂_t v ≈ (next − prev)/dt` and the weight taken at `at`.
pub fn dissipation(prev: &Field, next: &Field, at: &Field, dt: f64, p: f64) -> f64 {
    let grid = at.grid();
    let w = grid.weights();
    let (a, b, c) = (prev.values(), next.values(), at.values());
    -2.0 * p
        * (0..c.len())
            .map(|i| {
                let dv = (b[i] - a[i]) / dt;
                w[i] * c[i].max(0.0).powf(p - 1.0) * dv * dv
            })
            .sum::<f64>()
}

/// `∫ v^{p+1}`.
pub fn mass(v: &Field, p: f64) -> f64 {
    v.lq_power(p + 1.0)
}

/// `max |v/v_∞ − 1|` over unknown nodes with `r ≤ interior_frac·R` (`n ≥ 2`; for `n = 1`
/// the distance to the boundary must be at least `(1 − interior_frac)·R/2`). With
/// `interior_frac = 1` the boundary itself is included through the ratio of one-sided
/// slopes.
pub fn relative_error(v: &Field, v_inf: &Field, interior_frac: f64) -> Result<f64> {
    if !v.same_grid(v_inf) {
        return Err(Error::Contract("fields live on different grids".into()));
    }
    let grid = v.grid();
    let (a, b) = (v.values(), v_inf.values());
    if let Some(i) = grid.unknowns().find(|&i| !(b[i] > 0.0)) {
        return Err(Error::Contract(format!("reference vanishes at interior node {i}")));
    }
    let half = if grid.dim() == 1 { 0.5 * grid.radius() } else { grid.radius() };
    let min_dist = (1.0 - interior_frac) * half;
    let mut worst: f64 = 0.0;
    for i in grid.unknowns() {
        if grid.distance_to_boundary(i) + 1e-14 >= min_dist {
            worst = worst.max((a[i] / b[i] - 1.0).abs());
        }
    }
    if interior_frac >= 1.0 {
        let last = grid.len() - 1;
        worst = worst.max((boundary_slope(v, last) / boundary_slope(v_inf, last) - 1.0).abs());
        if grid.dim() == 1 {
            worst = worst.max((boundary_slope(v, 0) / boundary_slope(v_inf, 0) - 1.0).abs());
        }
    }
    Ok(worst)
}

/// Inward normal derivative at a Dirichlet node from the quadratic through three nodes.
fn boundary_slope(f: &Field, at: usize) -> f64 {
    let x = f.grid().nodes();
    let y = f.values();
    let idx: [usize; 3] = if at == 0 { [0, 1, 2] } else { [at, at - 1, at - 2] };
    let (x0, x1, x2) = (x[idx[0]], x[idx[1]], x[idx[2]]);
    let d = y[idx[0]] * ((x0 - x1) + (x0 - x2)) / ((x0 - x1) * (x0 - x2))
        + y[idx[1]] * (x0 - x2) / ((x1 - x0) * (x1 - x2))
        + y[idx[2]] * (x0 - x1) / ((x2 - x0) * (x2 - x1));
    if at == 0 {
        d
    } else {
        -d
    }
}

/// Per-sample bundle of monitored quantities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub f_val: f64,
    pub moments: Vec<(f64, f64)>,
    pub r_min: f64,
    pub r_max: f64,
    pub mass_crit: f64,
    pub rel_err: Option<f64>,
    pub sup_v: f64,
    pub truncated: bool,
}

impl DiagnosticsRecord {
    pub fn moment(&self, q: f64) -> Option<f64> {
        self.moments.iter().find(|(k, _)| (*k - q).abs() < 1e-12).map(|(_, m)| *m)
    }
}

/// Default moment orders `{1, 2, n/2}`.
pub fn default_moment_orders(n: usize) -> Vec<f64> {
    let mut q = vec![1.0, 2.0];
    let half = n as f64 / 2.0;
    if !q.contains(&half) {
        q.push(half);
    }
    q
}

pub fn record(
    v: &Field,
    t: f64,
    p: f64,
    b: f64,
    q_list: &[f64],
    v_inf: Option<&Field>,
) -> Result<DiagnosticsRecord> {
    let curv = curvature_r(v, p, b, R_FLOOR)?;
    let (moments, truncated) = moments(v, &curv, p, q_list);
    let (r_min, r_max) = curv.extremes().unwrap_or((f64::NAN, f64::NAN));
    let rel_err = match v_inf {
        Some(vi) => Some(relative_error(v, vi, 1.0)?),
        None => None,
    };
    Ok(DiagnosticsRecord {
        t,
        f_val: energy_f(v, p, b),
        moments,
        r_min,
        r_max,
        mass_crit: mass(v, p),
        rel_err,
        sup_v: v.sup(),
        truncated,
    })
}

/// Residual of `∂_t v^{p+1} = −((p+1)/p)(R−1) v^{p+1}` between two samples, using
/// time-centered `R` and `v^{p+1}`; normalized by `sup v^{p+1}`.
pub fn volume_identity_residual(prev: &Field, next: &Field, dt: f64, p: f64, b: f64) -> Result<f64> {
    let c0 = curvature_r(prev, p, b, R_FLOOR)?;
    let c1 = curvature_r(next, p, b, R_FLOOR)?;
    let (a, z) = (prev.values(), next.values());
    let scale = next.sup().powf(p + 1.0);
    let mut worst: f64 = 0.0;
    for i in next.grid().unknowns() {
        if !(c0.evaluated[i] && c1.evaluated[i]) {
            continue;
        }
        let m0 = a[i].powf(p + 1.0);
        let m1 = z[i].powf(p + 1.0);
        let lhs = (m1 - m0) / dt;
        let rhs = -(p + 1.0) / p * 0.5 * ((c0.values[i] - 1.0) * m0 + (c1.values[i] - 1.0) * m1);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst / scale)
}

/// `1 − p·∂_t v / v` at evaluated nodes from a two-sided difference.
pub fn curvature_from_time_derivative(prev: &Field, mid: &Field, next: &Field, dt: f64, p: f64) -> Vec<f64> {
    let (a, m, z) = (prev.values(), mid.values(), next.values());
    (0..m.len())
        .map(|i| {
            if m[i] > 0.0 {
                1.0 - p * (z[i] - a[i]) / (2.0 * dt) / m[i]
            } else {
                f64::NAN
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RateModel {
    Exponential,
    Polynomial,
}

/// Outcome of fitting both decay models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateVerdict {
    pub verdict: RateModel,
    /// `γ` from `log e = log C − γ t`.
    pub gamma: f64,
    /// `θ` from `log e = log C − θ log t`.
    pub theta: f64,
    pub r2_exponential: f64,
    pub r2_polynomial: f64,
    pub rss_exponential: f64,
    pub rss_polynomial: f64,
    /// `rss_exponential / rss_polynomial`.
    pub rss_ratio: f64,
    pub samples: usize,
    pub t_first: f64,
    pub t_last: f64,
}

/// Which part of a series is fitted.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateWindow {
    pub t_min: f64,
    pub t_max: f64,
    /// Keep only the last fraction of the samples that fall in `[t_min, t_max]`.
    pub tail_fraction: f64,
}

impl Default for RateWindow {
    fn default() -> Self {
        RateWindow { t_min: 5.0, t_max: f64::INFINITY, tail_fraction: 0.4 }
    }
}

pub const MIN_RATE_SAMPLES: usize = 10;

pub fn fit_rate(t: &[f64], e: &[f64], window: RateWindow) -> Result<RateVerdict> {
    if t.len() != e.len() {
        return Err(Error::Contract("time and error series differ in length".into()));
    }
    let in_range: Vec<usize> = (0..t.len())
        .filter(|&i| t[i] >= window.t_min && t[i] <= window.t_max)
        .collect();
    let keep = ((in_range.len() as f64) * window.tail_fraction.clamp(0.0, 1.0)).round() as usize;
    let idx = &in_range[in_range.len() - keep.min(in_range.len())..];
    if idx.len() < MIN_RATE_SAMPLES {
        return Err(Error::Fit(format!(
            "need at least {MIN_RATE_SAMPLES} samples in the window, got {}",
            idx.len()
        )));
    }
    if let Some(&i) = idx.iter().find(|&&i| !(e[i] > 0.0) || !(t[i] > 0.0)) {
        return Err(Error::Fit(format!("nonpositive sample at t = {} (e = {})", t[i], e[i])));
    }
    let ts: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let lt: Vec<f64> = ts.iter().map(|x| x.ln()).collect();
    let le: Vec<f64> = idx.iter().map(|&i| e[i].ln()).collect();
    let (ae, se, r2e) = fit_line(&ts, &le)?;
    let (ap, sp, r2p) = fit_line(&lt, &le)?;
    let rss = |x: &[f64], a: f64, s: f64| -> f64 {
        x.iter().zip(&le).map(|(xi, yi)| (yi - a - s * xi).powi(2)).sum()
    };
    let rss_e = rss(&ts, ae, se);
    let rss_p = rss(&lt, ap, sp);
    let verdict = if rss_e <= rss_p { RateModel::Exponential } else { RateModel::Polynomial };
    Ok(RateVerdict {
        verdict,
        gamma: -se,
        theta: -sp,
        r2_exponential: r2e,
        r2_polynomial: r2p,
        rss_exponential: rss_e,
        rss_polynomial: rss_p,
        rss_ratio: if rss_p > 0.0 { rss_e / rss_p } else if rss_e > 0.0 { f64::INFINITY } else { 1.0 },
        samples: idx.len(),
        t_first: ts[0],
        t_last: ts[ts.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    #[test]
    fn zero_field_energy() {
        let g = RadialGrid::build(4, 1.0, 64, 0.0).unwrap();
        assert_eq!(energy_f(&Field::zeros(g, FieldKind::Generic), 3.0, 1.0), 0.0);
    }

    #[test]
    fn synthetic_rates() {
        let t: Vec<f64> = (0..=90).map(|k| 5.0 + 0.5 * k as f64).collect();
        let e: Vec<f64> = t.iter().map(|x| 3.0 * (-0.7 * x).exp()).collect();
        let all = RateWindow { t_min: 0.0, t_max: f64::INFINITY, tail_fraction: 1.0 };
        let v = fit_rate(&t, &e, all).unwrap();
        assert_eq!(v.verdict, RateModel::Exponential);
        assert!((v.gamma - 0.7).abs() < 1e-3);

        let e: Vec<f64> = t.iter().map(|x| 2.0 * x.powf(-1.5)).collect();
        let v = fit_rate(&t, &e, all).unwrap();
        assert_eq!(v.verdict, RateModel::Polynomial);
        assert!((v.theta - 1.5).abs() < 1e-3);
    }

    #[test]
    fn rate_fit_rejects_nonpositive_and_short() {
        let t: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let mut e = vec![1.0; 20];
        e[19] = 0.0;
        let all = RateWindow { t_min: 0.0, t_max: f64::INFINITY, tail_fraction: 1.0 };
        assert!(matches!(fit_rate(&t, &e, all), Err(Error::Fit(_))));
        assert!(matches!(fit_rate(&t[..5], &e[..5], all), Err(Error::Fit(_))));
    }

    #[test]
    fn relative_error_of_scaled_field() {
        let g = RadialGrid::build(3, 1.0, 64, 0.0).unwrap();
        let v = Field::from_fn(g, FieldKind::Stationary, |r| (1.0 - r * r) * (1.0 + r));
        assert!(relative_error(&v, &v, 1.0).unwrap() < 1e-15);
        let e = relative_error(&v.scaled(1.05), &v, 1.0).unwrap();
        assert!((e - 0.05).abs() < 1e-12);
    }
}

//! Extinction-time fits and the change of variables between the two flows.

use serde::{Deserialize, Serialize};

use super::{FlowKind, FlowParams, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind};

/// Minimum number of samples in the extinction fit window.
pub const MIN_FIT_SAMPLES: usize = 4;

/// Fit `(∫u^{p+1})^{(p−1)/(p+1)} ≈ a − c·t` over the last half of the samples (at least
/// four) and return the root `a/c`. For critical `p` the exponent equals `2/n`.
pub fn fit_extinction(times: &[f64], masses: &[f64], p: f64) -> Result<f64> {
    if times.len() != masses.len() {
        return Err(Error::Contract("times and masses differ in length".into()));
    }
    if times.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_SAMPLES} samples, got {}",
            times.len()
        )));
    }
    let expo = (p - 1.0) / (p + 1.0);
    let count = (times.len() / 2).max(MIN_FIT_SAMPLES);
    let start = times.len() - count;
    let t = &times[start..];
    let y: Vec<f64> = masses[start..].iter().map(|m| m.max(0.0).powf(expo)).collect();
    let (a, slope, _) = crate::linalg::fit_line(t, &y)?;
    let c = -slope;
    if !(c > 0.0) {
        return Err(Error::Fit(format!("mass is not decaying in the fit window (c = {c:e})")));
    }
    if y.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Fit("mass tail is not monotone".into()));
    }
    Ok(a / c)
}

/// Extinction-time estimate from the mass tail of an original-flow trajectory.
pub fn estimate_extinction_time(traj: &Trajectory) -> Result<f64> {
    if traj.kind != FlowKind::Original {
        return Err(Error::Contract("extinction fits need an original-flow trajectory".into()));
    }
    fit_extinction(&traj.times, &traj.masses(), traj.params.p)
}

/// Rescaled time `p/(p−1)·ln(T*/(T*−τ))`.
pub fn rescaled_time(tau: f64, t_star: f64, p: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau < t_star) {
        return Err(Error::Domain(format!("need 0 <= tau < T*, got tau = {tau}, T* = {t_star}")));
    }
    Ok(p / (p - 1.0) * (t_star / (t_star - tau)).ln())
}

/// Inverse of [`rescaled_time`].
pub fn original_time(t: f64, t_star: f64, p: f64) -> f64 {
    t_star * -(-(p - 1.0) / p * t).exp_m1()
}

/// `v = (p/((p−1)(T*−τ)))^{1/(p−1)} u(τ)` with its rescaled time. For critical `p` this is
/// `((n+2)/(4(T*−τ)))^{(n−2)/4} u`.
pub fn rescale_to_v(u: &Field, tau: f64, t_star: f64, params: &FlowParams) -> Result<(Field, f64)> {
    let t = rescaled_time(tau, t_star, params.p)?;
    let p = params.p;
    let factor = (p / ((p - 1.0) * (t_star - tau))).powf(1.0 / (p - 1.0));
    let v = Field::new(u.grid().clone(), u.scaled(factor).into_values(), FieldKind::RescaledV)?;
    Ok((v, t))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    /// `(t, max_i |a_i − b_i| / sup |b|)` at each matched rescaled time.
    pub samples: Vec<(f64, f64)>,
    pub max_discrepancy: f64,
}

/// Compare rescaled snapshots of `traj_u` with `traj_v` at matched rescaled times. Only
/// original snapshots with `τ ≤ tau_max_frac·T*` inside the span of `traj_v` are used;
/// `traj_v` is interpolated linearly in time.
pub fn correspondence_check(
    traj_u: &Trajectory,
    traj_v: &Trajectory,
    t_star: f64,
    tau_max_frac: f64,
) -> Result<CorrespondenceReport> {
    if traj_u.is_empty() || traj_v.is_empty() {
        return Ok(CorrespondenceReport::default());
    }
    if traj_u.kind != FlowKind::Original || traj_v.kind != FlowKind::Rescaled {
        return Err(Error::Contract("expected an original and a rescaled trajectory".into()));
    }
    let (a, b) = (&traj_u.params, &traj_v.params);
    if a.n != b.n || a.p != b.p || a.b != b.b {
        return Err(Error::Contract("trajectories were run with different (n, p, b)".into()));
    }
    if !traj_u.snapshots[0].same_grid(&traj_v.snapshots[0]) {
        return Err(Error::Contract("trajectories live on different grids".into()));
    }
    let t_last = *traj_v.times.last().expect("nonempty");
    let mut report = CorrespondenceReport::default();
    for (tau, u) in traj_u.times.iter().zip(&traj_u.snapshots) {
        if *tau > tau_max_frac * t_star || *tau >= t_star {
            continue;
        }
        let (mapped, t) = rescale_to_v(u, *tau, t_star, a)?;
        if t > t_last * (1.0 + 1e-12) {
            continue;
        }
        let reference = interpolate(traj_v, t);
        let sup = reference.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let diff = mapped
            .values()
            .iter()
            .zip(&reference)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let d = if sup > 0.0 { diff / sup } else { diff };
        report.max_discrepancy = report.max_discrepancy.max(d);
        report.samples.push((t, d));
    }
    Ok(report)
}

fn interpolate(traj: &Trajectory, t: f64) -> Vec<f64> {
    let k = traj.times.partition_point(|x| *x < t);
    if k == 0 {
        return traj.snapshots[0].values().to_vec();
    }
    if k >= traj.times.len() {
        return traj.last().values().to_vec();
    }
    let (t0, t1) = (traj.times[k - 1], traj.times[k]);
    let s = (t - t0) / (t1 - t0);
    traj.snapshots[k - 1]
        .values()
        .iter()
        .zip(traj.snapshots[k].values())
        .map(|(a, b)| a + s * (b - a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    #[test]
    fn synthetic_power_law() {
        let t = [0.5, 0.6, 0.7, 0.8, 0.9];
        let m: Vec<f64> = t.iter().map(|x: &f64| (1.0 - x).powi(2)).collect();
        let est = fit_extinction(&t, &m, 3.0).unwrap();
        assert!((est - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_mass_fails() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert!(matches!(fit_extinction(&t, &[1.0; 5], 3.0), Err(Error::Fit(_))));
        assert!(matches!(fit_extinction(&t[..3], &[1.0; 3], 3.0), Err(Error::Fit(_))));
    }

    #[test]
    fn rescaling_factors() {
        let g = RadialGrid::build(4, 1.0, 32, 0.0).unwrap();
        let u = Field::from_fn(g, FieldKind::OriginalU, |r| 1.0 - r * r);
        let params = FlowParams::critical(4, 0.0).unwrap();
        let (v, t) = rescale_to_v(&u, 0.0, 1.0, &params).unwrap();
        assert_eq!(t, 0.0);
        assert!((v.values()[0] - 1.5f64.sqrt()).abs() < 1e-15);

        let sub = FlowParams::new(1, 2.0, 0.0);
        let g1 = RadialGrid::build(1, 1.0, 32, 0.0).unwrap();
        let u1 = Field::from_fn(g1, FieldKind::OriginalU, |x| x * (1.0 - x));
        let tau = 1.0 - (-1.0f64).exp();
        let (v1, t1) = rescale_to_v(&u1, tau, 1.0, &sub).unwrap();
        assert!((t1 - 2.0).abs() < 1e-12);
        let i = 16;
        let factor = v1.values()[i] / u1.values()[i];
        assert!((factor - 2.0 * std::f64::consts::E).abs() < 1e-12);

        assert!(matches!(rescale_to_v(&u1, 1.0, 1.0, &sub), Err(Error::Domain(_))));
    }

    #[test]
    fn rescaled_time_is_monotone_and_inverts() {
        let mut last = -1.0;
        for k in 0..100 {
            let tau = k as f64 / 100.0;
            let t = rescaled_time(tau, 1.0, 3.0).unwrap();
            assert!(t > last);
            last = t;
            assert!((original_time(t, 1.0, 3.0) - tau).abs() < 1e-13);
        }
    }
}

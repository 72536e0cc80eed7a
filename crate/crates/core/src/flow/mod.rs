//! Time integration of the original flow `∂_t u^p = Δu + bu` and the rescaled flow
//! `∂_t v^p = Δv + bv + v^p`.
//!
//! Both use backward Euler in the mass variable `u^p`. The nonlinear system is solved by
//! damped Newton in `u` itself, with a symmetric tridiagonal Jacobian.

mod extinction;
mod shooting;

pub use extinction::{
    correspondence_check, estimate_extinction_time, fit_extinction, rescale_to_v, rescaled_time,
    original_time, CorrespondenceReport,
};
pub use shooting::{run_rescaled_stabilized, StabilizeOptions};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind, RadialGrid};
use crate::linalg::SymTridiag;
use crate::spectral::dirichlet_lambda1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    Original,
    Rescaled,
}

impl FlowKind {
    fn source(self) -> f64 {
        match self {
            FlowKind::Original => 0.0,
            FlowKind::Rescaled => 1.0,
        }
    }

    fn field_kind(self) -> FieldKind {
        match self {
            FlowKind::Original => FieldKind::OriginalU,
            FlowKind::Rescaled => FieldKind::RescaledV,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowParams {
    pub n: usize,
    pub p: f64,
    pub b: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Newton stops when `max_i |G_i/w_i|·dt` falls below this fraction of `sup u^p`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Extinction is declared when `∫u^{p+1}` drops below this fraction of its initial value.
    pub mass_floor: f64,
    /// Largest relative drop of `∫u^{p+1}` accepted in one step of the original flow.
    pub max_mass_drop: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            n: 4,
            p: 3.0,
            b: 0.0,
            dt_init: 1e-3,
            dt_min: 1e-12,
            dt_max: 0.05,
            newton_tol: 1e-11,
            newton_max_iter: 25,
            mass_floor: 1e-8,
            max_mass_drop: 0.1,
        }
    }
}

/// `(n+2)/(n−2)`.
pub fn critical_exponent(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::config("n", format!("critical exponent needs n >= 3, got {n}")));
    }
    Ok((n as f64 + 2.0) / (n as f64 - 2.0))
}

impl FlowParams {
    pub fn new(n: usize, p: f64, b: f64) -> Self {
        FlowParams { n, p, b, ..FlowParams::default() }
    }

    pub fn critical(n: usize, b: f64) -> Result<Self> {
        Ok(FlowParams::new(n, critical_exponent(n)?, b))
    }

    pub fn is_critical(&self) -> bool {
        critical_exponent(self.n).map(|pc| pc == self.p).unwrap_or(false)
    }

    /// Check every invariant against `grid`, naming the offending field.
    pub fn validate(&self, grid: &RadialGrid) -> Result<()> {
        if self.n != grid.dim() {
            return Err(Error::config("n", format!("{} does not match grid dimension {}", self.n, grid.dim())));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::config("p", format!("exponent must exceed 1, got {}", self.p)));
        }
        if !(self.b >= 0.0) {
            return Err(Error::config("b", format!("must be nonnegative, got {}", self.b)));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::config(
                "dt_init",
                format!(
                    "need 0 < dt_min <= dt_init <= dt_max, got {} / {} / {}",
                    self.dt_min, self.dt_init, self.dt_max
                ),
            ));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::config("newton_tol", "must be positive"));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::config("newton_max_iter", "must be positive"));
        }
        if !(self.mass_floor > 0.0 && self.mass_floor < 1.0) {
            return Err(Error::config("mass_floor", "must lie in (0, 1)"));
        }
        if !(self.max_mass_drop > 0.0 && self.max_mass_drop < 1.0) {
            return Err(Error::config("max_mass_drop", "must lie in (0, 1)"));
        }
        let lambda1 = dirichlet_lambda1(grid)?;
        if !(self.b < lambda1) {
            return Err(Error::config("b", format!("must be below lambda_1 = {lambda1}, got {}", self.b)));
        }
        Ok(())
    }
}

/// Sampled solution path.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: FlowKind,
    pub params: FlowParams,
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub extinct: bool,
    pub t_star_estimate: Option<f64>,
    pub steps: usize,
    /// Amplitude factors applied at window starts by the stabilized rescaled runner.
    pub amplitude_corrections: Vec<(f64, f64)>,
}

impl Trajectory {
    fn start(kind: FlowKind, params: &FlowParams, u0: Field) -> Self {
        Trajectory {
            kind,
            params: params.clone(),
            times: vec![0.0],
            snapshots: vec![u0],
            extinct: false,
            t_star_estimate: None,
            steps: 0,
            amplitude_corrections: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory holds at least one snapshot")
    }

    /// `∫ u^{p+1}` per snapshot.
    pub fn masses(&self) -> Vec<f64> {
        let q = self.params.p + 1.0;
        self.snapshots.iter().map(|f| f.lq_power(q)).collect()
    }

    fn push(&mut self, t: f64, f: Field) {
        if let Some(&last) = self.times.last() {
            debug_assert!(t > last);
        }
        self.times.push(t);
        self.snapshots.push(f);
    }
}

/// Newton iterations and outcome of one backward Euler step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub field: Field,
    pub iterations: usize,
    pub residual: f64,
}

fn check_state(u: &Field, params: &FlowParams) -> Result<()> {
    if u.grid().dim() != params.n {
        return Err(Error::Contract("field dimension differs from flow parameters".into()));
    }
    if let Some(i) = u.values().iter().position(|v| *v < 0.0) {
        return Err(Error::Contract(format!("state must be nonnegative; node {i} is negative")));
    }
    let last = u.grid().len() - 1;
    if u.values()[last] != 0.0 || (u.grid().dim() == 1 && u.values()[0] != 0.0) {
        return Err(Error::Contract("state must vanish on the boundary".into()));
    }
    Ok(())
}

/// `x^e`, using integer powers when the exponent is integral.
pub(crate) fn power(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// One backward Euler step with source coefficient `s` (0 original, 1 rescaled).
fn be_step(u: &Field, params: &FlowParams, dt: f64, kind: FlowKind) -> Result<StepOutcome> {
    let grid = u.grid().clone();
    let unknowns = grid.unknowns();
    let w: Vec<f64> = grid.weights()[unknowns.clone()].to_vec();
    let k = SymTridiag::stiffness(&grid);
    let (p, b, s) = (params.p, params.b, kind.source());
    let old: Vec<f64> = u.values()[unknowns.clone()].to_vec();
    let mass_old: Vec<f64> = old.iter().map(|x| power(*x, p)).collect();
    let scale_old = mass_old.iter().fold(0.0_f64, |m, x| m.max(*x));
    if scale_old == 0.0 {
        return Ok(StepOutcome { field: u.clone(), iterations: 0, residual: 0.0 });
    }

    let residual_of = |x: &[f64]| -> (Vec<f64>, f64) {
        let kx = k.apply(x);
        let mut g = Vec::with_capacity(x.len());
        let mut worst: f64 = 0.0;
        let mut scale = scale_old;
        for i in 0..x.len() {
            let xp = power(x[i], p);
            scale = scale.max(xp);
            let gi = w[i] * (xp - mass_old[i]) / dt + kx[i] - b * w[i] * x[i] - s * w[i] * xp;
            worst = worst.max((gi / w[i]).abs());
            g.push(gi);
        }
        (g, worst * dt / scale)
    };

    let mut x = old.clone();
    let (mut g, mut res) = residual_of(&x);
    let mut iterations = 0;
    while res > params.newton_tol {
        if iterations >= params.newton_max_iter || !res.is_finite() {
            return Err(Error::StepRejected { iterations, residual: res });
        }
        iterations += 1;
        let mut jac = k.clone();
        for i in 0..x.len() {
            jac.diag[i] += w[i] * (p * power(x[i], p - 1.0) * (1.0 / dt - s) - b);
        }
        let delta = jac.solve(&g)?;
        let mut theta = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| (a - theta * d).max(0.0)).collect();
            let (gt, rt) = residual_of(&trial);
            if rt < res || theta < 1e-3 {
                x = trial;
                g = gt;
                res = rt;
                break;
            }
            theta *= 0.5;
        }
    }
    let mut values = vec![0.0; grid.len()];
    values[unknowns].copy_from_slice(&x);
    Ok(StepOutcome {
        field: Field::new(grid, values, kind.field_kind())?,
        iterations,
        residual: res,
    })
}

/// One backward Euler step of the original flow.
pub fn step_original(u: &Field, params: &FlowParams, dt: f64) -> Result<Field> {
    step(u, params, dt, FlowKind::Original).map(|o| o.field)
}

/// One backward Euler step of the rescaled flow.
pub fn step_rescaled(v: &Field, params: &FlowParams, dt: f64) -> Result<Field> {
    step(v, params, dt, FlowKind::Rescaled).map(|o| o.field)
}

/// Checked step returning Newton statistics.
pub fn step(u: &Field, params: &FlowParams, dt: f64, kind: FlowKind) -> Result<StepOutcome> {
    check_state(u, params)?;
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    if dt < params.dt_min {
        return Err(Error::Integration { t: f64::NAN, reason: format!("dt = {dt} below dt_min") });
    }
    if kind == FlowKind::Rescaled && dt >= 1.0 {
        return Err(Error::Domain("rescaled steps need dt < 1 for a definite Jacobian".into()));
    }
    be_step(u, params, dt, kind)
}

/// Sampling controls for the adaptive runners.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunOptions {
    /// Record every accepted step when absent; otherwise at multiples of this interval.
    pub record_interval: Option<f64>,
    /// Times that are always hit exactly and recorded.
    pub record_times: Vec<f64>,
}

/// Adaptive integration of the original flow until `t_end` or extinction.
pub fn run_original(u0: &Field, params: &FlowParams, t_end: f64) -> Result<Trajectory> {
    run_original_with(u0, params, t_end, &RunOptions::default())
}

pub fn run_original_with(u0: &Field, params: &FlowParams, t_end: f64, opts: &RunOptions) -> Result<Trajectory> {
    let mut traj = run_adaptive(u0, params, t_end, opts, FlowKind::Original)?;
    if traj.extinct {
        traj.t_star_estimate = Some(estimate_extinction_time(&traj)?);
    }
    Ok(traj)
}

/// Adaptive integration of the rescaled flow without amplitude control. The scale mode
/// is unstable, so long runs drift toward collapse or blow-up; see
/// [`run_rescaled_stabilized`].
pub fn run_rescaled(v0: &Field, params: &FlowParams, t_end: f64, opts: &RunOptions) -> Result<Trajectory> {
    run_adaptive(v0, params, t_end, opts, FlowKind::Rescaled)
}

fn run_adaptive(
    u0: &Field,
    params: &FlowParams,
    t_end: f64,
    opts: &RunOptions,
    kind: FlowKind,
) -> Result<Trajectory> {
    params.validate(u0.grid())?;
    check_state(u0, params)?;
    if !(t_end >= 0.0) {
        return Err(Error::Domain(format!("t_end must be nonnegative, got {t_end}")));
    }
    let start = Field::new(u0.grid().clone(), u0.values().to_vec(), kind.field_kind())?;
    let m0 = start.lq_power(params.p + 1.0);
    if kind == FlowKind::Original && m0 == 0.0 {
        return Err(Error::Domain("initial data is identically zero".into()));
    }
    let mut traj = Trajectory::start(kind, params, start);
    let dt_cap = if kind == FlowKind::Rescaled { params.dt_max.min(0.5) } else { params.dt_max };

    let mut forced: Vec<f64> = opts.record_times.iter().copied().filter(|t| *t > 0.0 && *t <= t_end).collect();
    forced.sort_by(f64::total_cmp);
    forced.dedup();
    let mut next_interval = opts.record_interval.map(|h| h.min(t_end.max(f64::MIN_POSITIVE)));

    let mut t = 0.0;
    let mut dt = params.dt_init.min(dt_cap);
    let mut u = traj.snapshots[0].clone();
    let mut m = m0;
    while t < t_end * (1.0 - 1e-15) {
        let mut target = t_end;
        if let Some(&f) = forced.iter().find(|f| **f > t * (1.0 + 1e-15)) {
            target = target.min(f);
        }
        if let Some(ti) = next_interval {
            target = target.min(ti);
        }
        let mut dt_try = dt.min(dt_cap);
        let truncated = t + dt_try >= target;
        if truncated {
            dt_try = target - t;
        }
        let attempt = if dt_try < params.dt_min && !truncated {
            return Err(Error::Integration { t, reason: format!("step size {dt_try:e} below dt_min") });
        } else {
            be_step(&u, params, dt_try.max(f64::MIN_POSITIVE), kind)
        };
        let outcome = match attempt {
            Ok(o) => o,
            Err(Error::StepRejected { .. }) | Err(Error::Numerical(_)) => {
                dt = 0.5 * dt_try;
                if dt < params.dt_min {
                    return Err(Error::Integration { t, reason: "Newton failed at the minimum step".into() });
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let m_new = outcome.field.lq_power(params.p + 1.0);
        if kind == FlowKind::Original && m_new < (1.0 - params.max_mass_drop) * m {
            dt = 0.5 * dt_try;
            if dt < params.dt_min {
                return Err(Error::Integration { t, reason: "mass-drop cap forces dt below dt_min".into() });
            }
            continue;
        }
        if kind == FlowKind::Rescaled && !m_new.is_finite() {
            return Err(Error::Integration { t, reason: "rescaled solution blew up".into() });
        }
        t = if truncated { target } else { t + dt_try };
        u = outcome.field;
        m = m_new;
        traj.steps += 1;
        if !truncated {
            if outcome.iterations <= 2 {
                dt = dt_try * 1.5;
            } else if outcome.iterations >= 6 {
                dt = dt_try * 0.7;
            }
        }
        let at_interval = next_interval.is_some_and(|ti| t >= ti * (1.0 - 1e-14));
        if at_interval {
            let h = opts.record_interval.expect("interval set");
            next_interval = Some((t / h + 1.0).round() * h);
        }
        let at_forced = forced.iter().any(|f| (*f - t).abs() <= 1e-14 * t.max(1.0));
        let extinct = kind == FlowKind::Original && m < params.mass_floor * m0;
        if opts.record_interval.is_none() || at_interval || at_forced || extinct || t >= t_end * (1.0 - 1e-15) {
            traj.push(t, u.clone());
        }
        if extinct {
            traj.extinct = true;
            break;
        }
    }
    Ok(traj)
}

/// Separable profile `((p−1)T*/p)^{1/(p−1)} v_∞` whose original flow goes extinct at `T*`.
pub fn separable_initial(v_inf: &Field, p: f64, t_star: f64) -> Result<Field> {
    if !(t_star > 0.0) {
        return Err(Error::Domain(format!("T* must be positive, got {t_star}")));
    }
    let c = ((p - 1.0) * t_star / p).powf(1.0 / (p - 1.0));
    Field::new(v_inf.grid().clone(), v_inf.scaled(c).into_values(), FieldKind::OriginalU)
}

/// Build a field of the given kind from nodal values, zeroing Dirichlet nodes.
pub fn field_from_values(grid: &Arc<RadialGrid>, mut values: Vec<f64>, kind: FieldKind) -> Result<Field> {
    for (i, v) in values.iter_mut().enumerate() {
        if grid.is_dirichlet(i) {
            *v = 0.0;
        }
    }
    Field::new(grid.clone(), values, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(grid: &Arc<RadialGrid>) -> Field {
        Field::from_fn(grid.clone(), FieldKind::OriginalU, |r| (1.0 - r * r) * (1.0 + 2.0 * r))
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = RadialGrid::build(4, 1.0, 64, 0.0).unwrap();
        let params = FlowParams::critical(4, 1.0).unwrap();
        let z = Field::zeros(g, FieldKind::OriginalU);
        let out = step_original(&z, &params, 0.01).unwrap();
        assert!(out.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn step_keeps_sign_and_boundary() {
        let g = RadialGrid::build(4, 1.0, 128, 0.0).unwrap();
        let params = FlowParams::critical(4, 2.0).unwrap();
        let u = bump(&g);
        let out = step_original(&u, &params, 0.05).unwrap();
        assert!(out.values().iter().all(|v| *v >= 0.0));
        assert_eq!(*out.values().last().unwrap(), 0.0);
        assert!(out.values()[..128].iter().all(|v| *v > 0.0));
    }

    #[test]
    fn rejects_b_above_lambda1() {
        let g = RadialGrid::build(4, 1.0, 64, 0.0).unwrap();
        let params = FlowParams::critical(4, 20.0).unwrap();
        match params.validate(&g) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn t_end_zero_gives_single_snapshot() {
        let g = RadialGrid::build(4, 1.0, 64, 0.0).unwrap();
        let params = FlowParams::critical(4, 1.0).unwrap();
        let traj = run_original(&bump(&g), &params, 0.0).unwrap();
        assert_eq!(traj.len(), 1);
        assert!(!traj.extinct);
    }

    #[test]
    fn record_times_are_hit_exactly() {
        let g = RadialGrid::build(3, 1.0, 64, 0.0).unwrap();
        let params = FlowParams::critical(3, 0.0).unwrap();
        let opts = RunOptions { record_interval: Some(0.1), record_times: vec![0.123] };
        let traj = run_original_with(&bump(&g), &params, 0.3, &opts).unwrap();
        assert!(traj.times.iter().any(|t| (*t - 0.123).abs() < 1e-15));
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert!((traj.times.last().unwrap() - 0.3).abs() < 1e-12);
    }
}

//! Long rescaled runs held on the stable manifold of the scale mode.
//!
//! The linearization of the rescaled flow at a stationary state grows along `v_∞` at rate
//! `(p−1)/p`, which is the footprint of an inexact extinction time. Each window therefore
//! starts by rescaling the current state by a factor `c` chosen so that the fixed-step
//! trajectory from `c·v` neither collapses nor blows up over a longer look-ahead horizon.

use serde::{Deserialize, Serialize};

use super::{be_step, FlowKind, FlowParams, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilizeOptions {
    /// Fixed backward Euler step.
    pub dt: f64,
    /// Rescaled time advanced per amplitude correction.
    pub window: f64,
    /// Look-ahead used to classify a trial amplitude.
    pub horizon: f64,
    pub record_interval: f64,
    pub max_iterations: usize,
    /// Initial half-width of the bracket on `ln c`.
    pub initial_spread: f64,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        StabilizeOptions {
            dt: 0.02,
            window: 5.0,
            horizon: 12.0,
            record_interval: 0.1,
            max_iterations: 80,
            initial_spread: 1e-3,
        }
    }
}

impl StabilizeOptions {
    fn validate(&self, params: &FlowParams) -> Result<()> {
        if !(self.dt > 0.0 && self.dt < 1.0 && self.dt >= params.dt_min) {
            return Err(Error::config("dt", format!("fixed step must lie in [dt_min, 1), got {}", self.dt)));
        }
        if !(self.window > 0.0) {
            return Err(Error::config("window", "must be positive"));
        }
        if !(self.horizon >= self.window) {
            return Err(Error::config("horizon", "must be at least the window length"));
        }
        if !(self.record_interval > 0.0) {
            return Err(Error::config("record_interval", "must be positive"));
        }
        if !(self.initial_spread > 0.0) {
            return Err(Error::config("initial_spread", "must be positive"));
        }
        Ok(())
    }
}

/// Log-mass slope over the last unit of the look-ahead; `±∞` for blow-up and collapse.
fn trend(v: &Field, params: &FlowParams, dt: f64, steps: usize) -> f64 {
    let q = params.p + 1.0;
    let m0 = v.lq_power(q);
    let sup0 = v.sup();
    let tail = ((1.0 / dt).round() as usize).clamp(1, steps);
    let mut state = v.clone();
    let mut history = Vec::with_capacity(steps + 1);
    history.push(m0);
    for _ in 0..steps {
        state = match be_step(&state, params, dt, FlowKind::Rescaled) {
            Ok(o) => o.field,
            Err(_) => return f64::INFINITY,
        };
        let m = state.lq_power(q);
        if !m.is_finite() || state.sup() > 1e4 * sup0 {
            return f64::INFINITY;
        }
        if m < 1e-8 * m0 {
            return f64::NEG_INFINITY;
        }
        history.push(m);
    }
    let last = history[steps];
    let earlier = history[steps - tail];
    (last / earlier).ln() / (tail as f64 * dt)
}

/// Find `ln c` with zero look-ahead trend by a bracketed Illinois iteration.
fn balance(v: &Field, params: &FlowParams, opts: &StabilizeOptions, t: f64) -> Result<f64> {
    let steps = (opts.horizon / opts.dt).round().max(1.0) as usize;
    let eval = |lc: f64| trend(&v.scaled(lc.exp()), params, opts.dt, steps);
    let f0 = eval(0.0);
    if f0 == 0.0 {
        return Ok(0.0);
    }
    let dir = if f0 > 0.0 { -1.0 } else { 1.0 };
    let (mut a, mut fa) = (0.0, f0);
    let mut spread = opts.initial_spread;
    let (mut b, mut fb);
    loop {
        b = dir * spread;
        fb = eval(b);
        if fb.signum() != fa.signum() {
            break;
        }
        a = b;
        fa = fb;
        spread *= 8.0;
        if spread > 8.0 {
            return Err(Error::Integration {
                t,
                reason: "no amplitude balances collapse against blow-up".into(),
            });
        }
    }
    if a > b {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut side = 0i8;
    for _ in 0..opts.max_iterations {
        if b - a < 1e-14 {
            break;
        }
        let x = if fa.is_finite() && fb.is_finite() {
            let x = b - fb * (b - a) / (fb - fa);
            if x > a && x < b {
                x
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fx = eval(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 && fb.is_finite() {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 && fa.is_finite() {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Rescaled run to `t_end` with fixed steps and an amplitude correction at each window
/// start. The corrections are kept in [`Trajectory::amplitude_corrections`].
pub fn run_rescaled_stabilized(
    v0: &Field,
    params: &FlowParams,
    t_end: f64,
    opts: &StabilizeOptions,
) -> Result<Trajectory> {
    params.validate(v0.grid())?;
    super::check_state(v0, params)?;
    opts.validate(params)?;
    if !(t_end >= 0.0) {
        return Err(Error::Domain(format!("t_end must be nonnegative, got {t_end}")));
    }
    let start = Field::new(v0.grid().clone(), v0.values().to_vec(), FieldKind::RescaledV)?;
    if start.sup() == 0.0 {
        return Err(Error::Domain("initial data is identically zero".into()));
    }
    let mut traj = Trajectory::start(FlowKind::Rescaled, params, start);
    let mut v = traj.snapshots[0].clone();
    let mut t = 0.0;
    let steps_per_record = (opts.record_interval / opts.dt).round().max(1.0) as usize;
    let mut step_index = 0usize;
    while t < t_end - 0.5 * opts.dt {
        let lc = balance(&v, params, opts, t)?;
        let c = lc.exp();
        v = v.scaled(c);
        traj.amplitude_corrections.push((t, c));
        *traj.snapshots.last_mut().expect("nonempty") = v.clone();

        let span = opts.window.min(t_end - t);
        let steps = (span / opts.dt).round().max(1.0) as usize;
        for k in 0..steps {
            let outcome = be_step(&v, params, opts.dt, FlowKind::Rescaled).map_err(|e| Error::Integration {
                t,
                reason: format!("fixed step failed: {e}"),
            })?;
            v = outcome.field;
            step_index += 1;
            traj.steps += 1;
            t = step_index as f64 * opts.dt;
            let due = step_index.is_multiple_of(steps_per_record) || k + 1 == steps;
            if due && traj.times.last().is_none_or(|last| t > *last) {
                traj.push(t, v.clone());
            }
        }
    }
    Ok(traj)
}

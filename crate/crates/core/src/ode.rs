//! Dormand–Prince 5(4) integrator with step-size control and a per-step stop hook.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            h_init: 1e-4,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted point of the trajectory, with the derivative for Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct Sample<const D: usize> {
    pub t: f64,
    pub y: [f64; D],
    pub dy: [f64; D],
}

/// Cubic Hermite interpolant between two accepted samples.
pub fn hermite<const D: usize>(a: &Sample<D>, b: &Sample<D>, t: f64) -> [f64; D] {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = h00 * a.y[i] + h10 * h * a.dy[i] + h01 * b.y[i] + h11 * h * b.dy[i];
    }
    out
}

/// What the stop hook wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` toward `t_end`, calling `hook` after every accepted
/// step with the previous and new samples. Returns all accepted samples.
pub fn integrate<const D: usize>(
    f: impl Fn(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: OdeOptions,
    mut hook: impl FnMut(&Sample<D>, &Sample<D>) -> Control,
) -> Result<Vec<Sample<D>>> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y);
    let mut samples = vec![Sample { t, y, dy: k0 }];
    let mut h = opts.h_init.min(opts.h_max).min((t_end - t0).abs()) * dir;
    let mut steps = 0;
    while (t_end - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::Numerical(format!("ODE step budget exhausted at t = {t}")));
        }
        steps += 1;
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let mut k = [[0.0; D]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..D {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            for i in 0..D {
                y_new[i] += h * A[6][j] * kj[i];
            }
        }
        let mut err = 0.0;
        for i in 0..D {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (h * e / sc).powi(2);
        }
        let err = (err / D as f64).sqrt();
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Numerical(format!("ODE solution became non-finite near t = {t}")));
            }
            continue;
        }
        let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        if err <= 1.0 {
            let prev = *samples.last().expect("at least the initial sample");
            t += h;
            y = y_new;
            k0 = k[6];
            let next = Sample { t, y, dy: k0 };
            samples.push(next);
            if hook(&prev, &next) == Control::Stop {
                break;
            }
            h = (h * factor).abs().min(opts.h_max) * dir;
        } else {
            h *= factor.min(1.0);
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Numerical(format!("ODE step size underflow at t = {t}")));
            }
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let opts = OdeOptions::default();
        let s = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            2.0 * std::f64::consts::PI,
            opts,
            |_, _| Control::Continue,
        )
        .unwrap();
        let last = s.last().unwrap();
        assert!((last.y[0] - 1.0).abs() < 1e-9);
        assert!(last.y[1].abs() < 1e-9);
    }

    #[test]
    fn stop_hook_and_hermite() {
        let mut crossing = None;
        let s = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            10.0,
            OdeOptions::default(),
            |a, b| {
                if b.y[0] <= 0.0 {
                    crossing = Some((*a, *b));
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        )
        .unwrap();
        let (a, b) = crossing.unwrap();
        assert!(s.last().unwrap().t < 2.0);
        let mid = 0.5 * (a.t + b.t);
        assert!((hermite(&a, &b, mid)[0] - mid.cos()).abs() < 1e-8);
    }

    #[test]
    fn exponential_growth_backward() {
        let s = integrate(
            |_, y: &[f64; 1]| [y[0]],
            1.0,
            [1.0],
            0.0,
            OdeOptions::default(),
            |_, _| Control::Continue,
        )
        .unwrap();
        assert!((s.last().unwrap().y[0] - (-1.0f64).exp()).abs() < 1e-10);
    }
}

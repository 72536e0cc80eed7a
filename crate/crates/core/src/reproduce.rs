//! End-to-end runners for the acceptance criteria, grouped into named suites. Each
//! runner reports measured values next to its thresholds.

use std::fmt;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bubbles::{
    bubble_mass, fit_bubble, interaction_sweep, pointwise_sup, sample_superadditivity, verify_calculus_lemma,
    yamabe_energy, Bubble, FitOptions, InteractionCase, InteractionSample,
};
use crate::config::{InitialData, RunConfig, Thresholds};
use crate::diagnostics::{
    curvature_r, dissipation, energy_f, fit_rate, record, DiagnosticsRecord, RateModel, RateWindow, R_FLOOR,
};
use crate::error::{Error, Result};
use crate::flow::{
    run_original, run_original_with, run_rescaled_stabilized, separable_initial, step, step_rescaled, FlowKind,
    FlowParams, RunOptions, StabilizeOptions, Trajectory,
};
use crate::grid::{Field, FieldKind, RadialGrid};
use crate::spectral::{dirichlet_lambda1, kernel_condition, project_pi, weighted_spectrum, Verdict, DEFAULT_MODES};
use crate::stationary::{solve_stationary, ShootingProblem, StationarySolution};

/// One measured quantity against its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub target: String,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            target: format!("< {limit:.3e}"),
            pass: measured < limit,
        }
    }

    pub fn above(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            target: format!("> {limit:.3e}"),
            pass: measured > limit,
        }
    }

    pub fn within(name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            target: format!("in [{lo}, {hi}]"),
            pass: measured >= lo && measured <= hi,
        }
    }

    pub fn holds(name: &str, ok: bool, target: &str) -> Self {
        Check {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            target: target.into(),
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} [{:>2}] {}:", self.id, self.title)?;
        for (k, c) in self.checks.iter().enumerate() {
            let sep = if k == 0 { " " } else { "; " };
            let mark = if c.pass { "" } else { " !" };
            write!(f, "{sep}{} = {:.6e} ({}){mark}", c.name, c.measured, c.target)?;
        }
        write!(f, " [{:.1} s]", self.seconds)
    }
}

/// Named groups of criteria for `fdlab reproduce`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ExtinctionOracle,
    Dissipation,
    MomentsDecay,
    SpectrumMu1,
    RateDichotomy,
    BubbleMass,
    InteractionRatio,
    BlowupEnergy,
    Inequalities,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::ExtinctionOracle,
        Suite::Dissipation,
        Suite::MomentsDecay,
        Suite::SpectrumMu1,
        Suite::RateDichotomy,
        Suite::BubbleMass,
        Suite::InteractionRatio,
        Suite::BlowupEnergy,
        Suite::Inequalities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ExtinctionOracle => "extinction-oracle",
            Suite::Dissipation => "dissipation",
            Suite::MomentsDecay => "moments-decay",
            Suite::SpectrumMu1 => "spectrum-mu1",
            Suite::RateDichotomy => "rate-dichotomy",
            Suite::BubbleMass => "bubble-mass",
            Suite::InteractionRatio => "interaction-ratio",
            Suite::BlowupEnergy => "blowup-energy",
            Suite::Inequalities => "inequalities",
        }
    }

    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::ExtinctionOracle => &[1, 2],
            Suite::Dissipation => &[3],
            Suite::MomentsDecay => &[4, 5],
            Suite::SpectrumMu1 => &[6, 7],
            Suite::RateDichotomy => &[8],
            Suite::BubbleMass => &[9],
            Suite::InteractionRatio => &[10],
            Suite::BlowupEnergy => &[11],
            Suite::Inequalities => &[12],
        }
    }

    pub fn names() -> Vec<&'static str> {
        Suite::ALL.iter().map(|s| s.name()).collect()
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|s| s.name() == name).ok_or_else(|| {
            Error::config("suite", format!("unknown suite `{name}`; expected one of: {}", Suite::names().join(", ")))
        })
    }
}

/// Ball setup shared by the rescaled criteria: `n = 4`, `R = 1`, `b = 0.3·λ₁`.
pub struct BallSetup {
    pub grid: Arc<RadialGrid>,
    pub params: FlowParams,
    pub stationary: StationarySolution,
}

pub const BALL_INTERVALS: usize = 256;
pub const BALL_B_FRACTION: f64 = 0.3;

impl BallSetup {
    pub fn build() -> Result<Self> {
        let grid = RadialGrid::build(4, 1.0, BALL_INTERVALS, 0.0)?;
        let b = BALL_B_FRACTION * dirichlet_lambda1(&grid)?;
        let params = FlowParams::critical(4, b)?;
        let stationary = solve_stationary(&ShootingProblem::new(4, params.p, b, 1.0), &grid)?;
        Ok(BallSetup { grid, params, stationary })
    }

    /// Smooth even initial data `10(1−r²)`.
    pub fn initial(&self) -> Field {
        Field::from_fn(self.grid.clone(), FieldKind::RescaledV, |r| 10.0 * (1.0 - r * r))
    }
}

/// The generic rescaled run to `t = 40` with diagnostics at every record.
pub struct GenericRun {
    pub setup: BallSetup,
    pub trajectory: Trajectory,
    pub records: Vec<DiagnosticsRecord>,
}

pub const GENERIC_T_END: f64 = 40.0;

impl GenericRun {
    pub fn compute() -> Result<Self> {
        let setup = BallSetup::build()?;
        let v0 = setup.initial();
        let trajectory = run_rescaled_stabilized(&v0, &setup.params, GENERIC_T_END, &StabilizeOptions::default())?;
        let v_inf = &setup.stationary.field;
        let records = trajectory
            .times
            .par_iter()
            .zip(&trajectory.snapshots)
            .map(|(t, v)| record(v, *t, setup.params.p, setup.params.b, &[1.0, 2.0], Some(v_inf)))
            .collect::<Result<Vec<_>>>()?;
        Ok(GenericRun { setup, trajectory, records })
    }

    fn at(&self, t: f64) -> Result<&DiagnosticsRecord> {
        self.records
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .filter(|r| (r.t - t).abs() < 1e-9)
            .ok_or_else(|| Error::Contract(format!("no diagnostics record at t = {t}")))
    }
}

/// Shared state for a batch of criteria.
pub struct Context {
    pub thresholds: Thresholds,
    pub seed: u64,
    generic: OnceLock<std::result::Result<GenericRun, String>>,
}

impl Context {
    pub fn new(thresholds: Thresholds, seed: u64) -> Self {
        Context { thresholds, seed, generic: OnceLock::new() }
    }

    pub fn from_config(cfg: &RunConfig) -> Self {
        Self::new(cfg.thresholds.clone(), cfg.seed)
    }

    pub fn generic(&self) -> Result<&GenericRun> {
        self.generic
            .get_or_init(|| GenericRun::compute().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Numerical(format!("generic run failed: {e}")))
    }
}

impl Default for Context {
    fn default() -> Self {
        Context::new(Thresholds::default(), 0)
    }
}

fn report(id: u8, title: &str, start: Instant, checks: Vec<Check>, notes: Vec<String>) -> CriterionReport {
    CriterionReport {
        id,
        title: title.into(),
        checks,
        notes,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Run one criterion by number.
pub fn run_criterion(id: u8, ctx: &Context) -> Result<CriterionReport> {
    match id {
        1 => separable_extinction(ctx),
        2 => mass_upper_bound(ctx),
        3 => energy_dissipation(ctx),
        4 => moment_decay(ctx),
        5 => curvature_lower_bound(ctx),
        6 => stationary_fixed_point(ctx),
        7 => spectrum(ctx),
        8 => rate_dichotomy(ctx),
        9 => bubble_energy(ctx),
        10 => interaction_ratio(ctx),
        11 => blowup_energy(ctx),
        12 => inequalities(ctx),
        _ => Err(Error::config("criterion", format!("no criterion {id}"))),
    }
}

/// Run criteria in parallel; reports come back in the order given. A runner error becomes
/// a failing report carrying the message.
pub fn run_criteria(ids: &[u8], ctx: &Context) -> Vec<CriterionReport> {
    ids.par_iter()
        .map(|&id| {
            let start = Instant::now();
            run_criterion(id, ctx).unwrap_or_else(|e| {
                report(id, "runner error", start, vec![Check::holds("completed", false, "no error")], vec![e.to_string()])
            })
        })
        .collect()
}

pub fn run_suite(suite: Suite, ctx: &Context) -> Vec<CriterionReport> {
    run_criteria(suite.criteria(), ctx)
}

/// Criterion 1: separable subcritical solution on the interval.
pub fn separable_extinction(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let (p, t_star) = (2.0, 1.0);
    let grid = RadialGrid::build(1, 1.0, 512, 0.0)?;
    let v_inf = solve_stationary(&ShootingProblem::new(1, p, 0.0, 1.0), &grid)?.field;
    let u0 = separable_initial(&v_inf, p, t_star)?;
    let params = FlowParams { dt_max: 1e-3, max_mass_drop: 0.02, ..FlowParams::new(1, p, 0.0) };
    let opts = RunOptions { record_interval: None, record_times: vec![0.5] };
    let traj = run_original_with(&u0, &params, 10.0, &opts)?;
    let estimate = traj
        .t_star_estimate
        .ok_or_else(|| Error::Numerical("run did not reach extinction".into()))?;
    let k = traj
        .times
        .iter()
        .position(|t| (t - 0.5).abs() < 1e-12)
        .ok_or_else(|| Error::Contract("t = 0.5 was not recorded".into()))?;
    let exact = u0.scaled(0.5);
    let err = traj.snapshots[k]
        .values()
        .iter()
        .zip(exact.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / exact.sup();
    let elapsed = start.elapsed().as_secs_f64();
    Ok(report(
        1,
        "separable extinction oracle (n=1, p=2)",
        start,
        vec![
            Check::below("|T*_est - 1|", (estimate - t_star).abs() / t_star, thr.extinction_t_star_rel),
            Check::below("nodewise rel err at t=0.5", err, thr.extinction_nodewise_rel),
            Check::below("runtime s", elapsed, thr.extinction_runtime_s),
        ],
        vec![format!("T*_est = {estimate}"), format!("{} steps", traj.steps)],
    ))
}

/// Initial data of the critical original-flow run.
pub fn mass_bound_initial(grid: &Arc<RadialGrid>) -> Field {
    Field::from_fn(grid.clone(), FieldKind::OriginalU, |r| {
        let s = r * r;
        3.0 * (1.0 - s) * (1.0 + s + 2.0 * (5.0 * s).cos()).abs()
    })
}

/// Criterion 2: `∫u^{2n/(n−2)}(t) ≤ (1 − t/T̂)^{n/2} ∫u₀^{2n/(n−2)}`.
pub fn mass_upper_bound(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let grid = RadialGrid::build(4, 1.0, BALL_INTERVALS, 0.0)?;
    let b = BALL_B_FRACTION * dirichlet_lambda1(&grid)?;
    let params = FlowParams::critical(4, b)?;
    let u0 = mass_bound_initial(&grid);
    let traj = run_original(&u0, &params, 100.0)?;
    let t_hat = traj
        .t_star_estimate
        .ok_or_else(|| Error::Numerical("run did not reach extinction".into()))?;
    let masses = traj.masses();
    let m0 = masses[0];
    let half_n = params.n as f64 / 2.0;
    let mut worst = 0.0_f64;
    let mut checked = 0usize;
    for (t, m) in traj.times.iter().zip(&masses) {
        if *t > thr.mass_bound_t_fraction * t_hat {
            continue;
        }
        let bound = (1.0 - t / t_hat).powf(half_n) * m0;
        worst = worst.max(m / bound - 1.0);
        checked += 1;
    }
    let monotone = masses.windows(2).all(|w| w[1] <= w[0]);
    Ok(report(
        2,
        "mass upper bound (n=4, b=0.3 lambda_1)",
        start,
        vec![
            Check::below("max mass/bound - 1", worst, thr.mass_bound_slack),
            Check::holds("mass nonincreasing", monotone, "true"),
        ],
        vec![format!("T_hat = {t_hat}"), format!("{checked} snapshots checked")],
    ))
}

/// Mismatch `Σ |ΔF/dt − D|·dt` over `span` with fixed steps `dt` from `v0`.
pub fn dissipation_mismatch(v0: &Field, params: &FlowParams, dt: f64, span: f64) -> Result<f64> {
    let steps = (span / dt).round() as usize;
    let mut v = v0.clone();
    let mut f_prev = energy_f(&v, params.p, params.b);
    let mut total = 0.0;
    for _ in 0..steps {
        let next = step(&v, params, dt, FlowKind::Rescaled)?.field;
        let f_next = energy_f(&next, params.p, params.b);
        let rate = (f_next - f_prev) / dt;
        let d = dissipation(&v, &next, &next, dt, params.p);
        total += (rate - d).abs() * dt;
        v = next;
        f_prev = f_next;
    }
    Ok(total)
}

pub const DISSIPATION_STEPS: [f64; 3] = [0.02, 0.01, 0.005];

/// Criterion 3: first-order consistency of the discrete energy identity.
pub fn energy_dissipation(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let setup = BallSetup::build()?;
    let mut v = setup.initial();
    for _ in 0..1000 {
        v = step_rescaled(&v, &setup.params, 1e-3)?;
    }
    let mismatch = DISSIPATION_STEPS
        .par_iter()
        .map(|dt| dissipation_mismatch(&v, &setup.params, *dt, 0.4))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for k in 1..mismatch.len() {
        checks.push(Check::within(
            &format!("ratio dt={}/dt={}", DISSIPATION_STEPS[k], DISSIPATION_STEPS[k - 1]),
            mismatch[k] / mismatch[k - 1],
            thr.dissipation_ratio_min,
            thr.dissipation_ratio_max,
        ));
    }
    Ok(report(
        3,
        "energy dissipation identity",
        start,
        checks,
        vec![format!("mismatch {mismatch:?}")],
    ))
}

/// Criterion 4: decay of `M₂` and of `sup|R−1|`.
pub fn moment_decay(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let run = ctx.generic()?;
    let m1 = run.at(1.0)?.moment(2.0).unwrap_or(f64::NAN);
    let m40 = run.at(GENERIC_T_END)?.moment(2.0).unwrap_or(f64::NAN);
    let last = run.trajectory.last();
    let curv = curvature_r(last, run.setup.params.p, run.setup.params.b, R_FLOOR)?;
    Ok(report(
        4,
        "moment decay (n=4, b=0.3 lambda_1, t=40)",
        start,
        vec![
            Check::below("M2(40)/M2(1)", m40 / m1, thr.moments_m2_factor),
            Check::below("sup|R-1| at t=40", curv.sup_deviation(), thr.moments_r_sup),
        ],
        vec![format!("M2(1) = {m1:e}, M2(40) = {m40:e}")],
    ))
}

/// Criterion 5: `R` stays bounded below along the generic run.
pub fn curvature_lower_bound(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let run = ctx.generic()?;
    let finite = run.records.iter().all(|r| r.r_min.is_finite());
    let r_min = run.records.iter().map(|r| r.r_min).fold(f64::INFINITY, f64::min);
    Ok(report(
        5,
        "R lower bound along the generic run",
        start,
        vec![
            Check::above("min_t R_min", r_min, thr.r_lower_bound),
            Check::holds("R_min finite at every record", finite, "true"),
        ],
        vec![format!("{} records", run.records.len())],
    ))
}

/// Criterion 6: the stationary state is a fixed point of the discrete rescaled flow.
pub fn stationary_fixed_point(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let setup = BallSetup::build()?;
    let v_inf = &setup.stationary.field;
    let mut v = Field::new(setup.grid.clone(), v_inf.values().to_vec(), FieldKind::RescaledV)?;
    let dt: f64 = 0.05;
    let mut drift = 0.0_f64;
    for _ in 0..(10.0 / dt).round() as usize {
        v = step_rescaled(&v, &setup.params, dt)?;
        let d = v.values().iter().zip(v_inf.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        drift = drift.max(d);
    }
    let curv = curvature_r(v_inf, setup.params.p, setup.params.b, R_FLOOR)?;
    Ok(report(
        6,
        "stationary fixed point",
        start,
        vec![
            Check::below("residual", setup.stationary.residual, thr.stationary_residual),
            Check::below("sup drift over 10 time units", drift, thr.stationary_drift),
            Check::below("sup|R-1| on v_inf", curv.sup_deviation(), thr.stationary_curvature),
        ],
        vec![format!("alpha* = {}", setup.stationary.alpha_star)],
    ))
}

/// Criterion 7: weighted spectrum at the stationary state.
pub fn spectrum(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let setup = BallSetup::build()?;
    let v_inf = &setup.stationary.field;
    let spec = weighted_spectrum(v_inf, setup.params.p, setup.params.b, DEFAULT_MODES)?;
    let probe = Field::from_fn(setup.grid.clone(), FieldKind::Generic, |r| (1.0 - r * r) * (3.0 * r).cos());
    let once = project_pi(&probe, &spec)?;
    let twice = project_pi(&once, &spec)?;
    let idem = once.values().iter().zip(twice.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        / once.sup();
    Ok(report(
        7,
        "weighted spectrum at v_inf",
        start,
        vec![
            Check::below("|mu_1 - 1|", (spec.mu[0] - 1.0).abs(), thr.spectrum_mu1),
            Check::below("1 - cos(phi_1, v_inf)", 1.0 - spec.cosine_with_first(v_inf).abs(), thr.spectrum_cosine),
            Check::below("orthonormality defect", spec.orthonormality_defect(), thr.spectrum_orthonormality),
            Check::below("Pi idempotence defect", idem, thr.spectrum_idempotence),
        ],
        vec![format!("mu = {:?}", &spec.mu[..4.min(spec.mu.len())]), format!("L = {}", spec.l_count)],
    ))
}

/// Synthetic series used to check that the rate fitter recovers planted parameters.
pub fn synthetic_series(model: RateModel, rate: f64) -> (Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = (0..=200).map(|k| 5.0 + 0.25 * k as f64).collect();
    let e = t
        .iter()
        .map(|x| match model {
            RateModel::Exponential => 0.7 * (-rate * x).exp(),
            RateModel::Polynomial => 2.0 * x.powf(-rate),
        })
        .collect();
    (t, e)
}

/// Criterion 8 and 8a.
pub fn rate_dichotomy(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let run = ctx.generic()?;
    let spec = weighted_spectrum(&run.setup.stationary.field, run.setup.params.p, run.setup.params.b, DEFAULT_MODES)?;
    let p_lin = spec.p_lin;
    let verdict = kernel_condition(&spec.mu, p_lin, thr.rate_gap_fraction * p_lin);
    let (t, e): (Vec<f64>, Vec<f64>) = run
        .records
        .iter()
        .filter_map(|r| r.rel_err.map(|e| (r.t, e)))
        .unzip();
    let window = RateWindow { t_min: 10.0, t_max: GENERIC_T_END, tail_fraction: 1.0 };
    let fit = fit_rate(&t, &e, window)?;
    let (gamma, theta) = (0.37, 1.7);
    let (ts, es) = synthetic_series(RateModel::Exponential, gamma);
    let exp_fit = fit_rate(&ts, &es, RateWindow::default())?;
    let (ts, es) = synthetic_series(RateModel::Polynomial, theta);
    let pol_fit = fit_rate(&ts, &es, RateWindow::default())?;
    Ok(report(
        8,
        "rate dichotomy on the nondegenerate ball",
        start,
        vec![
            Check::holds("kernel verdict NONDEGENERATE", verdict.verdict == Verdict::Nondegenerate, "NONDEGENERATE"),
            Check::above("spectral gap / p", verdict.gap / p_lin, thr.rate_gap_fraction),
            Check::holds("fit verdict EXPONENTIAL", fit.verdict == RateModel::Exponential, "EXPONENTIAL"),
            Check::above("log-linear R^2", fit.r2_exponential, thr.rate_r2),
            Check::holds("8a planted exponential verdict", exp_fit.verdict == RateModel::Exponential, "EXPONENTIAL"),
            Check::below("8a |gamma - 0.37|", (exp_fit.gamma - gamma).abs(), thr.rate_synthetic),
            Check::holds("8a planted polynomial verdict", pol_fit.verdict == RateModel::Polynomial, "POLYNOMIAL"),
            Check::below("8a |theta - 1.7|", (pol_fit.theta - theta).abs(), thr.rate_synthetic),
        ],
        vec![format!("gamma = {}", fit.gamma)],
    ))
}

/// Criterion 9: bubble energy quantum and its scale invariance.
pub fn bubble_energy(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let target = 32.0 * std::f64::consts::PI.powi(2) / 3.0;
    let m1 = bubble_mass(&Bubble::new(4, 1.0)?)?;
    let m100 = bubble_mass(&Bubble::new(4, 100.0)?)?;
    Ok(report(
        9,
        "bubble mass (n=4)",
        start,
        vec![
            Check::below("|mass/(32 pi^2/3) - 1|", (m1 / target - 1.0).abs(), thr.bubble_mass_rel),
            Check::below("|mass(100)/mass(1) - 1|", (m100 / m1 - 1.0).abs(), thr.bubble_scale_rel),
        ],
        vec![format!("mass = {m1}, Y(S^4)^2 = {}", yamabe_energy(4))],
    ))
}

pub const SWEEP_LAMBDAS: [f64; 3] = [10.0, 100.0, 1000.0];

fn sweep_checks(samples: &[InteractionSample], case: InteractionCase, drop: f64) -> Vec<Check> {
    let decreasing = samples.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let first = samples.first().map_or(f64::NAN, |s| s.ratio);
    let last = samples.last().map_or(f64::NAN, |s| s.ratio);
    vec![
        Check::holds(&format!("{} strictly decreasing", case.name()), decreasing, "true"),
        Check::below(&format!("{} final/first", case.name()), last / first, drop),
    ]
}

/// Criterion 10: `I₁/√I₂` along the four regimes.
pub fn interaction_ratio(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let n = thr.interaction_dim;
    let mut checks = Vec::new();
    let mut notes = vec![format!("n = {n}")];
    for case in InteractionCase::ALL {
        let samples = interaction_sweep(n, case, &SWEEP_LAMBDAS)?;
        checks.extend(sweep_checks(&samples, case, thr.interaction_drop));
        notes.push(format!(
            "{}: {:?}",
            case.name(),
            samples.iter().map(|s| s.ratio).collect::<Vec<_>>()
        ));
    }
    Ok(report(10, &format!("interaction ratio I1/sqrt(I2), n={n}"), start, checks, notes))
}

/// Initial data of the blow-up run: corrected bubble plus a multiple of the first mode.
pub const BLOWUP_LAMBDA0: f64 = 1.5;
pub const BLOWUP_EPSILON: f64 = 0.5;
pub const BLOWUP_INTERVALS: usize = 512;
pub const BLOWUP_T_END: f64 = 60.0;
/// Largest `λ·h` accepted as resolved.
pub const BLOWUP_RESOLUTION: f64 = 0.1;

/// One sample of the blow-up series.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupSample {
    pub t: f64,
    pub sup_v: f64,
    pub energy: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub relative_residual: f64,
    pub boundary_warning: bool,
}

/// Stabilized `b = 0` run with bubble fits every `fit_every` time units, stopped early when
/// the fitted bubble is no longer resolved by the grid.
pub fn blowup_series(
    n: usize,
    intervals: usize,
    initial: &InitialData,
    t_end: f64,
    fit_every: f64,
) -> Result<(Trajectory, Vec<BlowupSample>)> {
    let cfg = RunConfig {
        grid: crate::config::GridConfig { n, radius: 1.0, intervals, stretch: 0.0 },
        initial: initial.clone(),
        ..RunConfig::default()
    };
    let (grid, params) = cfg.resolve()?;
    let v0 = cfg.initial_field(&grid, &params, FieldKind::RescaledV)?;
    let opts = StabilizeOptions { record_interval: fit_every, ..StabilizeOptions::default() };
    let traj = run_rescaled_stabilized(&v0, &params, t_end, &opts)?;
    let h = grid.radius() / intervals as f64;
    let fits = traj
        .snapshots
        .par_iter()
        .map(|v| fit_bubble(v, &FitOptions::default()))
        .collect::<Result<Vec<_>>>()?;
    let mut series = Vec::new();
    for ((t, v), fit) in traj.times.iter().zip(&traj.snapshots).zip(fits) {
        series.push(BlowupSample {
            t: *t,
            sup_v: v.sup(),
            energy: energy_f(v, params.p, params.b),
            lambda: fit.lambda,
            alpha: fit.alpha,
            relative_residual: fit.relative_residual(),
            boundary_warning: fit.boundary_warning,
        });
        if fit.lambda * h > BLOWUP_RESOLUTION {
            break;
        }
    }
    Ok((traj, series))
}

/// Criterion 11: energy level of a single bubble.
pub fn blowup_energy(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let initial = InitialData::BubblePlusFloor { lambda: BLOWUP_LAMBDA0, epsilon: BLOWUP_EPSILON };
    let (_, series) = blowup_series(4, BLOWUP_INTERVALS, &initial, BLOWUP_T_END, 5.0)?;
    let first = series.first().ok_or_else(|| Error::Numerical("empty blow-up series".into()))?;
    let last = series.last().expect("nonempty");
    let target = 2.0 / 4.0 * yamabe_energy(4);
    Ok(report(
        11,
        "blow-up energy level (n=4, b=0)",
        start,
        vec![
            Check::below("|F/(16 pi^2/3) - 1|", (last.energy / target - 1.0).abs(), thr.blowup_energy_rel),
            Check::below("fit residual/|v|", last.relative_residual, thr.blowup_residual),
            Check::above("lambda growth", last.lambda / first.lambda, thr.blowup_lambda_growth),
            Check::holds("no fit on the search-box edge", !last.boundary_warning, "true"),
        ],
        vec![format!(
            "t = {}, F = {}, lambda {} -> {}",
            last.t, last.energy, first.lambda, last.lambda
        )],
    ))
}

/// Criterion 12: the sampled inequalities.
pub fn inequalities(ctx: &Context) -> Result<CriterionReport> {
    let thr = &ctx.thresholds;
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for n in [4usize, 5] {
        for m in [2usize, 3] {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ ((n as u64) << 8) ^ m as u64);
            let c = sample_superadditivity(n, m, thr.inequality_samples, &mut rng)?;
            checks.push(Check::above(&format!("superadditivity inf margin n={n} m={m}"), c, 0.0));
        }
    }
    let cubic = verify_calculus_lemma(3.0, 100_000)?;
    checks.push(Check::below("|c_linear(p=3) - 3|", (cubic.c_linear - 3.0).abs(), 1e-12));
    checks.push(Check::above("c_power(p=3)", cubic.c_power, 0.0));
    let mid = verify_calculus_lemma(2.5, 100_000)?;
    checks.push(Check::above("c_linear(p=2.5)", mid.c_linear, 0.0));
    checks.push(Check::above("c_power(p=2.5)", mid.c_power, 0.0));
    for n in [4usize, 5, 6] {
        let coarse = pointwise_sup(n, 200)?;
        let fine = pointwise_sup(n, 400)?;
        let change = (fine / coarse).max(coarse / fine);
        checks.push(Check::holds(&format!("pointwise sup finite n={n}"), fine.is_finite(), "finite"));
        checks.push(Check::below(&format!("pointwise sup change n={n}"), change, thr.pointwise_stability));
        notes.push(format!("n={n}: sup {coarse} -> {fine}"));
    }
    Ok(report(12, "inequality verifiers", start, checks, notes))
}

//! JSON run configuration. Every numeric field is checked at load time and errors name
//! the offending field.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bubbles::{corrected_bubble, Bubble, FitOptions, InteractionCase};
use crate::error::{Error, Result};
use crate::flow::{critical_exponent, field_from_values, FlowParams, StabilizeOptions};
use crate::grid::{Field, FieldKind, RadialGrid};
use crate::spectral::{dirichlet_lambda1, dirichlet_mode1};
use crate::stationary::{solve_stationary, ShootingProblem};

/// Version of the configuration and manifest layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Original,
    Rescaled,
    Stationary,
    Spectrum,
    BubblesSweep,
    FitRate,
    BlowupDemo,
    VerifyInequalities,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub radius: f64,
    pub intervals: usize,
    pub stretch: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 4, radius: 1.0, intervals: 256, stretch: 0.0 }
    }
}

/// Initial data for flow runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `c·v_∞` for the stationary state with the run's `(p, b)`.
    StationaryMultiple { c: f64 },
    /// Corrected bubble `ξ_{0,λ}` plus `ε` times the first Dirichlet eigenfunction (unit sup).
    BubblePlusFloor { lambda: f64, epsilon: f64 },
    /// `A(1−s²)(1+c·s²)` with `s = r/R` (for `n = 1`, `s = 2x/R − 1`).
    Profile { amplitude: f64, quadratic: f64 },
    /// Nodal values from a CSV file with a `value` column, one row per node.
    Csv { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Profile { amplitude: 10.0, quadratic: 0.0 }
    }
}

/// Pass/fail thresholds and experiment knobs of the reproduction suites.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub extinction_t_star_rel: f64,
    pub extinction_nodewise_rel: f64,
    pub extinction_runtime_s: f64,
    pub mass_bound_slack: f64,
    pub mass_bound_t_fraction: f64,
    pub dissipation_ratio_min: f64,
    pub dissipation_ratio_max: f64,
    pub moments_m2_factor: f64,
    pub moments_r_sup: f64,
    pub r_lower_bound: f64,
    pub stationary_residual: f64,
    pub stationary_drift: f64,
    pub stationary_curvature: f64,
    pub spectrum_mu1: f64,
    pub spectrum_cosine: f64,
    pub spectrum_orthonormality: f64,
    pub spectrum_idempotence: f64,
    pub rate_gap_fraction: f64,
    pub rate_r2: f64,
    pub rate_synthetic: f64,
    pub bubble_mass_rel: f64,
    pub bubble_scale_rel: f64,
    pub interaction_drop: f64,
    /// Dimension of the interaction sweeps.
    pub interaction_dim: usize,
    pub blowup_energy_rel: f64,
    pub blowup_residual: f64,
    pub blowup_lambda_growth: f64,
    pub inequality_samples: usize,
    pub pointwise_stability: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            extinction_t_star_rel: 0.01,
            extinction_nodewise_rel: 0.005,
            extinction_runtime_s: 30.0,
            mass_bound_slack: 0.02,
            mass_bound_t_fraction: 0.9,
            dissipation_ratio_min: 0.4,
            dissipation_ratio_max: 0.6,
            moments_m2_factor: 0.01,
            moments_r_sup: 0.05,
            r_lower_bound: -10.0,
            stationary_residual: 1e-6,
            stationary_drift: 1e-5,
            stationary_curvature: 1e-5,
            spectrum_mu1: 1e-6,
            spectrum_cosine: 1e-8,
            spectrum_orthonormality: 1e-8,
            spectrum_idempotence: 1e-10,
            rate_gap_fraction: 0.05,
            rate_r2: 0.99,
            rate_synthetic: 1e-3,
            bubble_mass_rel: 1e-3,
            bubble_scale_rel: 1e-10,
            interaction_drop: 0.1,
            interaction_dim: 6,
            blowup_energy_rel: 0.1,
            blowup_residual: 0.1,
            blowup_lambda_growth: 10.0,
            inequality_samples: 10_000,
            pointwise_stability: 2.0,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("extinction_t_star_rel", self.extinction_t_star_rel),
            ("extinction_nodewise_rel", self.extinction_nodewise_rel),
            ("extinction_runtime_s", self.extinction_runtime_s),
            ("mass_bound_slack", self.mass_bound_slack),
            ("mass_bound_t_fraction", self.mass_bound_t_fraction),
            ("dissipation_ratio_max", self.dissipation_ratio_max),
            ("moments_m2_factor", self.moments_m2_factor),
            ("moments_r_sup", self.moments_r_sup),
            ("stationary_residual", self.stationary_residual),
            ("stationary_drift", self.stationary_drift),
            ("stationary_curvature", self.stationary_curvature),
            ("spectrum_mu1", self.spectrum_mu1),
            ("spectrum_cosine", self.spectrum_cosine),
            ("spectrum_orthonormality", self.spectrum_orthonormality),
            ("spectrum_idempotence", self.spectrum_idempotence),
            ("rate_gap_fraction", self.rate_gap_fraction),
            ("rate_r2", self.rate_r2),
            ("rate_synthetic", self.rate_synthetic),
            ("bubble_mass_rel", self.bubble_mass_rel),
            ("bubble_scale_rel", self.bubble_scale_rel),
            ("interaction_drop", self.interaction_drop),
            ("blowup_energy_rel", self.blowup_energy_rel),
            ("blowup_residual", self.blowup_residual),
            ("blowup_lambda_growth", self.blowup_lambda_growth),
            ("pointwise_stability", self.pointwise_stability),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::config(format!("thresholds.{name}"), format!("must be positive, got {x}")));
            }
        }
        if !(self.dissipation_ratio_min >= 0.0 && self.dissipation_ratio_min < self.dissipation_ratio_max) {
            return Err(Error::config(
                "thresholds.dissipation_ratio_min",
                "must be nonnegative and below dissipation_ratio_max",
            ));
        }
        if self.mass_bound_t_fraction > 1.0 {
            return Err(Error::config("thresholds.mass_bound_t_fraction", "must not exceed 1"));
        }
        if self.interaction_dim < 3 {
            return Err(Error::config("thresholds.interaction_dim", "must be at least 3"));
        }
        if self.inequality_samples == 0 {
            return Err(Error::config("thresholds.inequality_samples", "must be positive"));
        }
        Ok(())
    }
}

/// Time-stepping controls; `n`, `p` and `b` come from the enclosing config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub mass_floor: f64,
    pub max_mass_drop: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        let d = FlowParams::default();
        StepConfig {
            dt_init: d.dt_init,
            dt_min: d.dt_min,
            dt_max: d.dt_max,
            newton_tol: d.newton_tol,
            newton_max_iter: d.newton_max_iter,
            mass_floor: d.mass_floor,
            max_mass_drop: d.max_mass_drop,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub grid: GridConfig,
    /// Diffusion exponent; the critical value `(n+2)/(n−2)` when absent.
    pub p: Option<f64>,
    pub b: f64,
    /// When set, `b` is this fraction of the discrete `λ₁` instead.
    pub b_over_lambda1: Option<f64>,
    pub step: StepConfig,
    pub initial: InitialData,
    pub t_end: f64,
    /// Sampling interval of trajectory output.
    pub record_interval: f64,
    /// Hold rescaled runs on the stable manifold of the scale mode.
    pub stabilize: bool,
    pub stabilizer: StabilizeOptions,
    /// Report the relative error against the stationary state in diagnostics.
    pub compare_stationary: bool,
    pub moment_orders: Option<Vec<f64>>,
    pub modes: usize,
    /// `λ̃₁` values of the interaction sweep.
    pub sweep_lambdas: Vec<f64>,
    pub sweep_cases: Vec<InteractionCase>,
    /// Series for `fit-rate`: a CSV with `t` and `e` columns.
    pub input: Option<PathBuf>,
    pub rate_t_min: f64,
    pub rate_t_max: Option<f64>,
    pub rate_tail_fraction: f64,
    pub fit: FitOptions,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            experiment: ExperimentKind::Rescaled,
            grid: GridConfig::default(),
            p: None,
            b: 0.0,
            b_over_lambda1: None,
            step: StepConfig::default(),
            initial: InitialData::default(),
            t_end: 10.0,
            record_interval: 0.1,
            stabilize: true,
            stabilizer: StabilizeOptions::default(),
            compare_stationary: false,
            moment_orders: None,
            modes: crate::spectral::DEFAULT_MODES,
            sweep_lambdas: vec![10.0, 100.0, 1000.0],
            sweep_cases: InteractionCase::ALL.to_vec(),
            input: None,
            rate_t_min: 5.0,
            rate_t_max: None,
            rate_tail_fraction: 0.4,
            fit: FitOptions::default(),
            seed: 0,
            thresholds: Thresholds::default(),
        }
    }
}

impl RunConfig {
    pub fn for_experiment(experiment: ExperimentKind) -> Self {
        RunConfig { experiment, ..RunConfig::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks that need no grid; [`RunConfig::resolve`] performs the rest.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        let g = &self.grid;
        if g.n == 0 {
            return Err(Error::config("grid.n", "dimension must be at least 1"));
        }
        if !(g.radius > 0.0 && g.radius.is_finite()) {
            return Err(Error::config("grid.radius", format!("must be positive, got {}", g.radius)));
        }
        if g.intervals < crate::grid::MIN_INTERVALS {
            return Err(Error::config(
                "grid.intervals",
                format!("need at least {}, got {}", crate::grid::MIN_INTERVALS, g.intervals),
            ));
        }
        if !(g.stretch >= 0.0 && g.stretch.is_finite()) {
            return Err(Error::config("grid.stretch", "must be finite and nonnegative"));
        }
        if let Some(p) = self.p {
            if !(p > 1.0 && p.is_finite()) {
                return Err(Error::config("p", format!("exponent must exceed 1, got {p}")));
            }
        } else if g.n < 3 {
            return Err(Error::config("p", "no critical exponent for n < 3; set p explicitly"));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::config("b", format!("must be finite and nonnegative, got {}", self.b)));
        }
        if let Some(f) = self.b_over_lambda1 {
            if self.b != 0.0 {
                return Err(Error::config("b_over_lambda1", "set either b or b_over_lambda1, not both"));
            }
            if !(0.0..1.0).contains(&f) {
                return Err(Error::config("b_over_lambda1", format!("must lie in [0, 1), got {f}")));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", "must be finite and nonnegative"));
        }
        if !(self.record_interval > 0.0) {
            return Err(Error::config("record_interval", "must be positive"));
        }
        if self.modes == 0 {
            return Err(Error::config("modes", "must be positive"));
        }
        if self.sweep_lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::config("sweep_lambdas", "entries must be positive"));
        }
        if !(self.rate_tail_fraction > 0.0 && self.rate_tail_fraction <= 1.0) {
            return Err(Error::config("rate_tail_fraction", "must lie in (0, 1]"));
        }
        if let Some(t) = self.rate_t_max {
            if !(t > self.rate_t_min) {
                return Err(Error::config("rate_t_max", "must exceed rate_t_min"));
            }
        }
        if let Some(q) = &self.moment_orders {
            if q.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::config("moment_orders", "orders must be positive"));
            }
        }
        match &self.initial {
            InitialData::StationaryMultiple { c } if !(*c > 0.0 && c.is_finite()) => {
                return Err(Error::config("initial.c", "must be positive"));
            }
            InitialData::BubblePlusFloor { lambda, epsilon } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::config("initial.lambda", "must be positive"));
                }
                if !(*epsilon >= 0.0 && epsilon.is_finite()) {
                    return Err(Error::config("initial.epsilon", "must be nonnegative"));
                }
            }
            InitialData::Profile { amplitude, quadratic } => {
                if !(*amplitude > 0.0 && amplitude.is_finite()) {
                    return Err(Error::config("initial.amplitude", "must be positive"));
                }
                if !(*quadratic > -1.0 && quadratic.is_finite()) {
                    return Err(Error::config("initial.quadratic", "must exceed -1 to keep the profile positive"));
                }
            }
            _ => {}
        }
        self.thresholds.validate()
    }

    /// Build the grid and the flow parameters, checking `b < λ₁` and the stepping bounds.
    pub fn resolve(&self) -> Result<(Arc<RadialGrid>, FlowParams)> {
        self.validate()?;
        let g = &self.grid;
        let grid = RadialGrid::build(g.n, g.radius, g.intervals, g.stretch)?;
        let p = match self.p {
            Some(p) => p,
            None => critical_exponent(g.n)?,
        };
        let b = match self.b_over_lambda1 {
            Some(f) => f * dirichlet_lambda1(&grid)?,
            None => self.b,
        };
        let s = &self.step;
        let params = FlowParams {
            n: g.n,
            p,
            b,
            dt_init: s.dt_init,
            dt_min: s.dt_min,
            dt_max: s.dt_max,
            newton_tol: s.newton_tol,
            newton_max_iter: s.newton_max_iter,
            mass_floor: s.mass_floor,
            max_mass_drop: s.max_mass_drop,
        };
        params.validate(&grid)?;
        Ok((grid, params))
    }

    /// Initial field for a flow run of the given kind.
    pub fn initial_field(&self, grid: &Arc<RadialGrid>, params: &FlowParams, kind: FieldKind) -> Result<Field> {
        let values = match &self.initial {
            InitialData::StationaryMultiple { c } => {
                let prob = ShootingProblem::new(params.n, params.p, params.b, grid.radius());
                solve_stationary(&prob, grid)?.field.scaled(*c).into_values()
            }
            InitialData::BubblePlusFloor { lambda, epsilon } => {
                let xi = corrected_bubble(&Bubble::new(params.n, *lambda)?, grid)?;
                let (_, phi) = dirichlet_mode1(grid)?;
                xi.values().iter().zip(phi.values()).map(|(a, b)| a + epsilon * b).collect()
            }
            InitialData::Profile { amplitude, quadratic } => {
                let radius = grid.radius();
                let one_d = grid.dim() == 1;
                grid.nodes()
                    .iter()
                    .map(|r| {
                        let s = if one_d { 2.0 * r / radius - 1.0 } else { r / radius };
                        amplitude * (1.0 - s * s) * (1.0 + quadratic * s * s)
                    })
                    .collect()
            }
            InitialData::Csv { path } => {
                let values = crate::io::read_column(path, "value")?;
                if values.len() != grid.len() {
                    return Err(Error::config(
                        "initial.path",
                        format!("{} values for {} nodes", values.len(), grid.len()),
                    ));
                }
                values
            }
        };
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::config("initial", "initial data must be finite and nonnegative"));
        }
        field_from_values(grid, values, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back.grid.intervals, 256);
        assert_eq!(back.thresholds.interaction_dim, 6);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = r#"{"experiment": "rescaled", "grid": {"radius": -1.0}}"#;
        match RunConfig::from_json(bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "grid.radius"),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = RunConfig { b: 100.0, ..RunConfig::default() };
        match cfg.resolve() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "b"),
            other => panic!("unexpected {other:?}"),
        }
        let unknown = r#"{"experiment": "rescaled", "grid": {"nodes": 3}}"#;
        assert!(matches!(RunConfig::from_json(unknown), Err(Error::Json(_))));
    }
}

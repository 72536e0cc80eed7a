//! Experiment orchestration behind the `fdlab` binary: one function per experiment kind,
//! each writing CSV tables and a manifest into an output directory.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::bubbles::{
    bubble_mass, pointwise_sup, sample_superadditivity, verify_calculus_lemma, yamabe_energy, Bubble,
    InteractionCase, interaction_sweep,
};
use crate::config::{ExperimentKind, InitialData, RunConfig};
use crate::diagnostics::{default_moment_orders, fit_rate, record, RateWindow};
use crate::error::{Error, Result};
use crate::flow::{run_original_with, run_rescaled, run_rescaled_stabilized, RunOptions, StabilizeOptions, Trajectory};
use crate::grid::FieldKind;
use crate::io::{num, read_column, write_csv, Manifest};
use crate::reproduce::{blowup_series, run_criteria, Context, CriterionReport, Suite};
use crate::spectral::{default_kernel_tol, dirichlet_lambda1, weighted_spectrum};
use crate::stationary::{solve_stationary, ShootingProblem};

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Original => "original",
            ExperimentKind::Rescaled => "rescaled",
            ExperimentKind::Stationary => "stationary",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::BubblesSweep => "bubbles-sweep",
            ExperimentKind::FitRate => "fit-rate",
            ExperimentKind::BlowupDemo => "blowup-demo",
            ExperimentKind::VerifyInequalities => "verify-inequalities",
        }
    }

    /// Defaults that make a config of this kind runnable as is.
    pub fn default_config(self) -> RunConfig {
        let mut cfg = RunConfig::for_experiment(self);
        match self {
            ExperimentKind::Original => {
                cfg.b_over_lambda1 = Some(0.3);
                cfg.t_end = 100.0;
                cfg.record_interval = 0.01;
            }
            ExperimentKind::Rescaled | ExperimentKind::Stationary | ExperimentKind::Spectrum => {
                cfg.b_over_lambda1 = Some(0.3);
                cfg.compare_stationary = true;
            }
            ExperimentKind::BlowupDemo => {
                cfg.grid.intervals = 512;
                cfg.initial = InitialData::BubblePlusFloor { lambda: 1.5, epsilon: 0.5 };
                cfg.t_end = 60.0;
                cfg.record_interval = 1.0;
            }
            _ => {}
        }
        cfg
    }
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (t, f) in traj.times.iter().zip(&traj.snapshots) {
        for (r, v) in f.grid().nodes().iter().zip(f.values()) {
            rows.push(vec![num(*t), num(*r), num(*v)]);
        }
    }
    rows
}

/// Run the experiment named by `cfg.experiment`, writing into `out`.
pub fn run_experiment(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    ensure_dir(out)?;
    let mut manifest = Manifest::new(cfg.experiment.name(), cfg.seed, serde_json::to_value(cfg)?);
    let (outputs, summary) = match cfg.experiment {
        ExperimentKind::Original => original(cfg, out)?,
        ExperimentKind::Rescaled => rescaled(cfg, out)?,
        ExperimentKind::Stationary => stationary(cfg, out)?,
        ExperimentKind::Spectrum => spectrum(cfg, out)?,
        ExperimentKind::BubblesSweep => bubbles_sweep(cfg, out)?,
        ExperimentKind::FitRate => rate(cfg)?,
        ExperimentKind::BlowupDemo => blowup(cfg, out)?,
        ExperimentKind::VerifyInequalities => inequalities(cfg, out)?,
    };
    manifest.outputs = outputs
        .iter()
        .map(|p| p.file_name().map(PathBuf::from).unwrap_or_else(|| p.clone()))
        .collect();
    manifest.summary = summary;
    manifest.write(out)?;
    Ok(manifest)
}

type Outcome = (Vec<PathBuf>, serde_json::Value);

fn original(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (grid, params) = cfg.resolve()?;
    let u0 = cfg.initial_field(&grid, &params, FieldKind::OriginalU)?;
    let opts = RunOptions { record_interval: Some(cfg.record_interval), record_times: Vec::new() };
    let traj = run_original_with(&u0, &params, cfg.t_end, &opts)?;
    let traj_path = out.join("trajectory.csv");
    write_csv(&traj_path, &["t", "r", "u"], trajectory_rows(&traj))?;
    let masses = traj.masses();
    let diag_path = out.join("diagnostics.csv");
    write_csv(
        &diag_path,
        &["t", "mass", "sup_u"],
        traj.times
            .iter()
            .zip(&masses)
            .zip(&traj.snapshots)
            .map(|((t, m), u)| vec![num(*t), num(*m), num(u.sup())]),
    )?;
    let summary = json!({
        "n": params.n, "p": params.p, "b": params.b,
        "extinct": traj.extinct,
        "t_star_estimate": traj.t_star_estimate,
        "steps": traj.steps,
        "snapshots": traj.len(),
        "initial_mass": masses[0],
    });
    Ok((vec![traj_path, diag_path], summary))
}

fn rescaled(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (grid, params) = cfg.resolve()?;
    let v0 = cfg.initial_field(&grid, &params, FieldKind::RescaledV)?;
    let traj = if cfg.stabilize {
        let opts = StabilizeOptions { record_interval: cfg.record_interval, ..cfg.stabilizer.clone() };
        run_rescaled_stabilized(&v0, &params, cfg.t_end, &opts)?
    } else {
        let opts = RunOptions { record_interval: Some(cfg.record_interval), record_times: Vec::new() };
        run_rescaled(&v0, &params, cfg.t_end, &opts)?
    };
    let v_inf = if cfg.compare_stationary {
        let prob = ShootingProblem::new(params.n, params.p, params.b, grid.radius());
        Some(solve_stationary(&prob, &grid)?.field)
    } else {
        None
    };
    let orders = cfg.moment_orders.clone().unwrap_or_else(|| default_moment_orders(params.n));
    let records = traj
        .times
        .iter()
        .zip(&traj.snapshots)
        .map(|(t, v)| record(v, *t, params.p, params.b, &orders, v_inf.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    if records.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Numerical("diagnostics times are not strictly increasing".into()));
    }
    let traj_path = out.join("trajectory.csv");
    write_csv(&traj_path, &["t", "r", "v"], trajectory_rows(&traj))?;
    let mut header: Vec<String> = vec!["t".into(), "F".into()];
    header.extend(orders.iter().map(|q| format!("M_{q}")));
    header.extend(["R_min", "R_max", "mass", "rel_err", "sup_v", "truncated"].map(String::from));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let diag_path = out.join("diagnostics.csv");
    write_csv(
        &diag_path,
        &header_refs,
        records.iter().map(|r| {
            let mut row = vec![num(r.t), num(r.f_val)];
            row.extend(r.moments.iter().map(|(_, m)| num(*m)));
            row.extend([
                num(r.r_min),
                num(r.r_max),
                num(r.mass_crit),
                r.rel_err.map(num).unwrap_or_default(),
                num(r.sup_v),
                r.truncated.to_string(),
            ]);
            row
        }),
    )?;
    let last = records.last().expect("trajectory is nonempty");
    let summary = json!({
        "n": params.n, "p": params.p, "b": params.b,
        "stabilized": cfg.stabilize,
        "amplitude_corrections": traj.amplitude_corrections,
        "steps": traj.steps,
        "final": last,
        "min_r_min": records.iter().map(|r| r.r_min).fold(f64::INFINITY, f64::min),
    });
    Ok((vec![traj_path, diag_path], summary))
}

fn stationary(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (grid, params) = cfg.resolve()?;
    let prob = ShootingProblem::new(params.n, params.p, params.b, grid.radius());
    let sol = solve_stationary(&prob, &grid)?;
    let path = out.join("stationary.csv");
    write_csv(
        &path,
        &["r", "v"],
        grid.nodes().iter().zip(sol.field.values()).map(|(r, v)| vec![num(*r), num(*v)]),
    )?;
    let summary = json!({
        "n": params.n, "p": params.p, "b": params.b,
        "alpha_star": sol.alpha_star,
        "residual": sol.residual,
        "energy": sol.energy,
        "candidates": sol.candidates,
        "multiplicity_warning": sol.multiplicity_warning(),
    });
    Ok((vec![path], summary))
}

fn spectrum(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (grid, params) = cfg.resolve()?;
    let prob = ShootingProblem::new(params.n, params.p, params.b, grid.radius());
    let sol = solve_stationary(&prob, &grid)?;
    let spec = weighted_spectrum(&sol.field, params.p, params.b, cfg.modes)?;
    let verdict = spec.kernel_condition(default_kernel_tol(spec.p_lin));
    let mu_path = out.join("spectrum.csv");
    write_csv(
        &mu_path,
        &["l", "mu"],
        spec.mu.iter().enumerate().map(|(l, m)| vec![(l + 1).to_string(), num(*m)]),
    )?;
    let mut header = vec!["r".to_string()];
    header.extend((1..=spec.phi.len()).map(|l| format!("phi_{l}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let phi_path = out.join("eigenfunctions.csv");
    write_csv(
        &phi_path,
        &header_refs,
        grid.nodes().iter().enumerate().map(|(i, r)| {
            let mut row = vec![num(*r)];
            row.extend(spec.phi.iter().map(|f| num(f.values()[i])));
            row
        }),
    )?;
    let summary = json!({
        "n": params.n, "p": params.p, "b": params.b,
        "lambda1": dirichlet_lambda1(&grid)?,
        "mu": spec.mu,
        "l_count": spec.l_count,
        "kernel": verdict,
        "orthonormality_defect": spec.orthonormality_defect(),
    });
    Ok((vec![mu_path, phi_path], summary))
}

fn bubbles_sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let n = cfg.grid.n;
    let mut rows = Vec::new();
    let mut ratios = serde_json::Map::new();
    for case in &cfg.sweep_cases {
        let samples = interaction_sweep(n, *case, &cfg.sweep_lambdas)?;
        ratios.insert(case.name().into(), json!(samples.iter().map(|s| s.ratio).collect::<Vec<_>>()));
        for s in samples {
            rows.push(vec![
                case.name().to_string(),
                num(s.lambda1),
                num(s.lambda2),
                num(s.i1),
                num(s.i2),
                num(s.ratio),
            ]);
        }
    }
    let path = out.join("interaction.csv");
    write_csv(&path, &["case", "lambda1", "lambda2", "I1", "I2", "ratio"], rows)?;
    let summary = json!({
        "n": n,
        "bubble_mass": bubble_mass(&Bubble::new(n, 1.0)?)?,
        "yamabe_energy": yamabe_energy(n),
        "ratios": ratios,
    });
    Ok((vec![path], summary))
}

fn rate(cfg: &RunConfig) -> Result<Outcome> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::config("input", "fit-rate needs a CSV with `t` and `e` columns"))?;
    let t = read_column(input, "t")?;
    let e = read_column(input, "e")?;
    let window = RateWindow {
        t_min: cfg.rate_t_min,
        t_max: cfg.rate_t_max.unwrap_or(f64::INFINITY),
        tail_fraction: cfg.rate_tail_fraction,
    };
    let verdict = fit_rate(&t, &e, window)?;
    Ok((Vec::new(), serde_json::to_value(verdict)?))
}

fn blowup(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    if cfg.b != 0.0 || cfg.b_over_lambda1.unwrap_or(0.0) != 0.0 {
        return Err(Error::config("b", "the blow-up demo runs with b = 0"));
    }
    if cfg.p.is_some() {
        return Err(Error::config("p", "the blow-up demo uses the critical exponent"));
    }
    let (_, series) = blowup_series(cfg.grid.n, cfg.grid.intervals, &cfg.initial, cfg.t_end, cfg.record_interval)?;
    let path = out.join("blowup.csv");
    write_csv(
        &path,
        &["t", "sup_v", "F", "lambda", "alpha", "relative_residual", "boundary_warning"],
        series.iter().map(|s| {
            vec![
                num(s.t),
                num(s.sup_v),
                num(s.energy),
                num(s.lambda),
                num(s.alpha),
                num(s.relative_residual),
                s.boundary_warning.to_string(),
            ]
        }),
    )?;
    let first = series.first().ok_or_else(|| Error::Numerical("empty blow-up series".into()))?;
    let last = series.last().expect("nonempty");
    let summary = json!({
        "n": cfg.grid.n,
        "sup_v_growth": last.sup_v / first.sup_v,
        "lambda_growth": last.lambda / first.lambda,
        "energy_target": 2.0 / cfg.grid.n as f64 * yamabe_energy(cfg.grid.n),
        "fits": series,
    });
    Ok((vec![path], summary))
}

fn inequalities(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let samples = cfg.thresholds.inequality_samples;
    let mut rows = Vec::new();
    for n in [4usize, 5] {
        for m in [2usize, 3] {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((n as u64) << 8) ^ m as u64);
            let c = sample_superadditivity(n, m, samples, &mut rng)?;
            rows.push(vec!["superadditivity".into(), n.to_string(), m.to_string(), num(c)]);
        }
    }
    for p in [3.0, 2.5] {
        let c = verify_calculus_lemma(p, 100_000)?;
        rows.push(vec!["calculus-linear".into(), String::new(), num(p), num(c.c_linear)]);
        rows.push(vec!["calculus-power".into(), String::new(), num(p), num(c.c_power)]);
    }
    for n in [4usize, 5, 6] {
        for k in [200usize, 400] {
            rows.push(vec!["pointwise-sup".into(), n.to_string(), k.to_string(), num(pointwise_sup(n, k)?)]);
        }
    }
    let path = out.join("inequalities.csv");
    let checks: Vec<_> = rows
        .iter()
        .map(|r| json!({"check": r[0], "n": r[1].parse::<usize>().ok(), "parameter": r[2].parse::<f64>().ok(), "value": r[3].parse::<f64>().ok()}))
        .collect();
    write_csv(&path, &["check", "n", "parameter", "value"], rows)?;
    let summary = json!({
        "checks": checks,
        "superadditivity_samples": samples,
        "sampling": "uniform [0,1]^m; calculus lemma on 1e5 points in (0,1]; pointwise grid on [0,2]^2",
    });
    Ok((vec![path], summary))
}

/// `InteractionCase` names accepted on the command line.
pub fn parse_case(name: &str) -> Result<InteractionCase> {
    InteractionCase::ALL
        .into_iter()
        .find(|c| c.name().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::config("case", format!("unknown case `{name}`")))
}

/// Run one suite (or `all`) and write `reproduce.csv` plus a manifest. Returns the reports.
pub fn run_reproduce(target: &str, cfg: &RunConfig, out: &Path) -> Result<(Manifest, Vec<CriterionReport>)> {
    cfg.thresholds.validate()?;
    let ids: Vec<u8> = if target == "all" {
        Suite::ALL.iter().flat_map(|s| s.criteria().iter().copied()).collect()
    } else {
        Suite::from_name(target)?.criteria().to_vec()
    };
    ensure_dir(out)?;
    let ctx = Context::from_config(cfg);
    let reports = run_criteria(&ids, &ctx);
    let path = out.join("reproduce.csv");
    write_csv(
        &path,
        &["criterion", "title", "check", "measured", "target", "pass"],
        reports.iter().flat_map(|r| {
            r.checks.iter().map(move |c| {
                vec![
                    r.id.to_string(),
                    r.title.clone(),
                    c.name.clone(),
                    num(c.measured),
                    c.target.clone(),
                    c.pass.to_string(),
                ]
            })
        }),
    )?;
    let mut manifest = Manifest::new(&format!("reproduce {target}"), cfg.seed, serde_json::to_value(&cfg.thresholds)?);
    manifest.outputs = vec![PathBuf::from("reproduce.csv")];
    manifest.summary = json!({
        "passed": reports.iter().filter(|r| r.passed()).count(),
        "total": reports.len(),
        "criteria": reports,
    });
    manifest.write(out)?;
    Ok((manifest, reports))
}

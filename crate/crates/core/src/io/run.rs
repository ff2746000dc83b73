use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::config::{DampingConfig, DsConfig, ScenarioConfig};
use super::report::{emit_report, ReportTolerances, TrajectoryReport};
use super::svg::render_svg;
use super::table::{load_demo_csv, write_plot_csv, write_trajectory_csv};
use crate::batch;
use crate::error::{Error, Result};
use crate::mat;
use crate::nominal::{make_demo_field_ds, make_tangent_linear_ds, NominalDs};
use crate::policy::{build_springs, VsdsPolicy};
use crate::sampling::{sample_via_points, ViaPointSequence};
use crate::sim::{
    critical_damping, half_step_discrepancy, simulate, InertiaTensor, SimSettings, VsdsController,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;

/// Largest accepted final-state disagreement with the half-step rerun, rad.
pub const DT_CHECK_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Overrides `output.dir`.
    pub out_dir: Option<PathBuf>,
    /// Overrides the config seed.
    pub seed: Option<u64>,
    /// Rerun every start at `dt / 2` and compare final states.
    pub dt_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run: usize,
    pub q_init: [f64; 4],
    pub omega_init: [f64; 3],
    pub trajectory_csv: String,
    #[serde(flatten)]
    pub metrics: TrajectoryReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_step_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub n_via: usize,
    pub delta: f64,
    pub seed: u64,
    pub via_spacing_cv: f64,
    pub damping: [[f64; 3]; 3],
    pub all_converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_check_passed: Option<bool>,
    pub runs: Vec<RunReport>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub report: ScenarioReport,
}

pub fn build_nominal(cfg: &ScenarioConfig) -> Result<Box<dyn NominalDs>> {
    match &cfg.ds {
        DsConfig::TangentLinear { gain } => Ok(Box::new(make_tangent_linear_ds(
            mat::from_rows(gain),
            cfg.goal()?,
        )?)),
        DsConfig::DemoField { path, gain } => {
            let samples = load_demo_csv(cfg.resolve(path))?;
            Ok(Box::new(make_demo_field_ds(samples, *gain)?))
        }
    }
}

/// Via-points for the scenario's nominal plan from `q0`.
pub fn sample_via(cfg: &ScenarioConfig) -> Result<ViaPointSequence> {
    let ds = build_nominal(cfg)?;
    sample_via_points(
        ds.as_ref(),
        &cfg.q0()?,
        &cfg.goal()?,
        cfg.n_via,
        cfg.dt,
        cfg.eps_sample,
    )
}

pub fn compile_policy(cfg: &ScenarioConfig) -> Result<VsdsPolicy> {
    let via = sample_via(cfg)?;
    build_springs(&via, &cfg.stiffness.scaled(cfg.stiffness_scale), cfg.delta)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Compiles the policy, runs every start in closed loop and writes per-run trajectory and
/// plot CSVs (and SVGs), `policy.json` and `report.json` into the output directory.
pub fn run_command(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let out_dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let policy = compile_policy(cfg)?;
    let plant = InertiaTensor::new(mat::from_rows(&cfg.inertia))?;
    let damping: Matrix3<f64> = match &cfg.damping {
        DampingConfig::Critical => critical_damping(&policy, &plant),
        DampingConfig::Matrix(d) => mat::from_rows(d),
    };
    let controller = VsdsController {
        policy: &policy,
        damping,
    };
    let settings = SimSettings {
        dt: cfg.dt,
        t_max: cfg.t_max,
        eps_stop: cfg.eps_stop,
        omega_stop: cfg.omega_stop,
        early_stop: true,
    };
    let starts = cfg.initial_states(seed)?;

    let results = batch::map(&starts, |(q, w)| -> Result<_> {
        let traj = simulate(&controller, &plant, q, w, &settings, &cfg.disturbances)?;
        let check = if opts.dt_check {
            Some(half_step_discrepancy(
                &controller,
                &plant,
                q,
                w,
                &settings,
                &cfg.disturbances,
                &traj,
            )?)
        } else {
            None
        };
        Ok((traj, check))
    });

    write_text(&out_dir.join("policy.json"), &policy.to_json()?)?;
    let tol = ReportTolerances {
        eps_stop: cfg.eps_stop,
        omega_stop: cfg.omega_stop,
    };
    let mut runs = Vec::with_capacity(starts.len());
    for (k, (result, (q, w))) in results.into_iter().zip(&starts).enumerate() {
        let (traj, check) = result?;
        let stem = format!("{}_run{:02}", cfg.name, k);
        let csv_name = format!("{stem}.csv");
        write_trajectory_csv(&traj.samples, out_dir.join(&csv_name))?;
        write_plot_csv(
            &traj.samples,
            &policy.goal(),
            out_dir.join(format!("{stem}_plot.csv")),
        )?;
        if cfg.output.svg {
            write_text(
                &out_dir.join(format!("{stem}.svg")),
                &render_svg(&traj.samples),
            )?;
        }
        runs.push(RunReport {
            run: k,
            q_init: q.to_array(),
            omega_init: (*w).into(),
            trajectory_csv: csv_name,
            metrics: emit_report(&traj.samples, policy.via_points(), &tol)?,
            half_step_discrepancy: check,
        });
    }

    let all_converged = runs.iter().all(|r| r.metrics.converged);
    let report = ScenarioReport {
        scenario: cfg.name.clone(),
        n_via: policy.n(),
        delta: policy.delta(),
        seed,
        via_spacing_cv: policy.via_points().spacing_cv(),
        damping: mat::to_rows(&damping),
        all_converged,
        dt_check_passed: opts.dt_check.then(|| {
            runs.iter()
                .all(|r| r.half_step_discrepancy.is_some_and(|d| d <= DT_CHECK_TOL))
        }),
        runs,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Parse {
        context: "report".into(),
        message: e.to_string(),
    })?;
    write_text(&out_dir.join("report.json"), &(json + "\n"))?;

    Ok(RunOutcome {
        exit_code: if all_converged {
            EXIT_OK
        } else {
            EXIT_NON_CONVERGENCE
        },
        out_dir,
        report,
    })
}

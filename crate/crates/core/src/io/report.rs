use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::ViaPointSequence;
use crate::sim::{TrajectorySample, DEFAULT_EPS_STOP, DEFAULT_OMEGA_STOP};

/// Rows with identical orientation and zero velocity needed to call a stretch a hold.
const MIN_HOLD_ROWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportTolerances {
    pub eps_stop: f64,
    pub omega_stop: f64,
}

impl Default for ReportTolerances {
    fn default() -> Self {
        Self {
            eps_stop: DEFAULT_EPS_STOP,
            omega_stop: DEFAULT_OMEGA_STOP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldWindowReport {
    pub t_start: f64,
    pub t_end: f64,
    /// `‖τ_vs‖` on the first held row.
    pub tau_vs_start: f64,
    /// Range of `‖τ_vs(t)‖ / ‖τ_vs(t_start)‖` over the window; absent when the start
    /// torque is zero.
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub samples: usize,
    pub duration: f64,
    /// Last row within `eps_stop` of the goal and below `omega_stop`.
    pub converged: bool,
    /// Start of the final stretch that stays converged.
    pub convergence_time: Option<f64>,
    pub final_dist: f64,
    pub final_omega: f64,
    pub max_tau_vs: f64,
    /// Largest per-row distance to the via-point chain.
    pub max_path_deviation: f64,
    pub hold_windows: Vec<HoldWindowReport>,
}

fn norm(v: &[f64; 3]) -> f64 {
    Vector3::from(*v).norm()
}

/// Summary metrics. Uses only what a trajectory CSV stores, so the same report can be
/// rebuilt from the file.
pub fn emit_report(
    samples: &[TrajectorySample],
    via: &ViaPointSequence,
    tol: &ReportTolerances,
) -> Result<TrajectoryReport> {
    let last = samples
        .last()
        .ok_or(Error::EmptyTrajectory { min: 1, got: 0 })?;
    let at_goal =
        |s: &TrajectorySample| s.dist_goal <= tol.eps_stop && norm(&s.omega) <= tol.omega_stop;
    let converged = at_goal(last);
    let convergence_time = if converged {
        let first = samples
            .iter()
            .rposition(|s| !at_goal(s))
            .map_or(0, |k| k + 1);
        Some(samples[first].t)
    } else {
        None
    };
    let max_tau_vs = samples.iter().map(|s| norm(&s.tau_vs)).fold(0.0, f64::max);
    let max_path_deviation = samples
        .iter()
        .map(|s| via.chain_distance(&s.q))
        .fold(0.0, f64::max);

    let hold_windows = detect_hold_windows(samples)
        .into_iter()
        .map(|(a, b)| {
            let window = &samples[a..=b];
            let tau0 = norm(&window[0].tau_vs);
            let ratios = (tau0 > 0.0).then(|| {
                window
                    .iter()
                    .map(|s| norm(&s.tau_vs) / tau0)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        (lo.min(r), hi.max(r))
                    })
            });
            HoldWindowReport {
                t_start: window[0].t,
                t_end: window[window.len() - 1].t,
                tau_vs_start: tau0,
                ratio_min: ratios.map(|r| r.0),
                ratio_max: ratios.map(|r| r.1),
            }
        })
        .collect();

    Ok(TrajectoryReport {
        samples: samples.len(),
        duration: last.t,
        converged,
        convergence_time,
        final_dist: last.dist_goal,
        final_omega: norm(&last.omega),
        max_tau_vs,
        max_path_deviation,
        hold_windows,
    })
}

/// Inclusive row ranges where the orientation is frozen and the velocity is exactly zero.
pub fn detect_hold_windows(samples: &[TrajectorySample]) -> Vec<(usize, usize)> {
    let still = |s: &TrajectorySample| s.omega == [0.0; 3];
    let mut out = Vec::new();
    let mut k = 0;
    while k < samples.len() {
        if !still(&samples[k]) {
            k += 1;
            continue;
        }
        let mut end = k;
        while end + 1 < samples.len()
            && still(&samples[end + 1])
            && samples[end + 1].q == samples[k].q
        {
            end += 1;
        }
        if end + 1 - k >= MIN_HOLD_ROWS {
            out.push((k, end));
        }
        k = end + 1;
    }
    out
}

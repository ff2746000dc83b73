//! Via-point extraction: roll the nominal plan out to the goal, then resample the
//! rollout into `N` arc-equidistant attractors.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nominal::NominalDs;
use crate::quaternion::{
    distance, exp_map, hemisphere_align, integrate_quaternion, log_map, TangentVector,
    UnitQuaternion,
};

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// `N + 1` via-points `q_l[0..=N]`: the (aligned) start, `N - 1` resampled interior points,
/// and the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViaPointSequence {
    pub points: Vec<UnitQuaternion>,
    /// `Log_{q*}(q_l[i])`.
    pub zetas: Vec<TangentVector>,
    /// Nominal velocity at each via-point. Kept for inspection, not used by the policy.
    pub omegas: Vec<TangentVector>,
    pub goal: UnitQuaternion,
    /// `l[i] = d(q_l[i], q_l[i-1])` for `i = 1..=N`, stored at index `i - 1`.
    pub spacings: Vec<f64>,
    /// Longest single rollout step, `≈ dt · max‖ω‖`.
    pub max_step: f64,
    /// Total rollout length including the closing segment to the goal.
    pub path_length: f64,
    /// Rollout step and stop radius the sequence was sampled with.
    pub dt: f64,
    pub eps: f64,
}

impl ViaPointSequence {
    /// Number of springs `N`.
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    pub fn mean_spacing(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.spacings.len() as f64
    }

    /// Rotation angle from `q` to the nearest point of the piecewise-geodesic chain through
    /// the via-points. Sign-invariant in `q`.
    pub fn chain_distance(&self, q: &UnitQuaternion) -> f64 {
        self.points
            .windows(2)
            .map(|w| segment_distance(&w[0], &w[1], q))
            .fold(f64::INFINITY, f64::min)
    }

    /// Population standard deviation of the spacings over their mean.
    pub fn spacing_cv(&self) -> f64 {
        let mean = self.mean_spacing();
        let var = self
            .spacings
            .iter()
            .map(|l| (l - mean) * (l - mean))
            .sum::<f64>()
            / self.spacings.len() as f64;
        var.sqrt() / mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    pub n: usize,
    pub dt: f64,
    pub eps: f64,
    pub max_steps: usize,
}

impl SamplingOptions {
    pub fn new(n: usize, dt: f64, eps: f64) -> Self {
        Self {
            n,
            dt,
            eps,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

pub fn sample_via_points(
    ds: &dyn NominalDs,
    q0: &UnitQuaternion,
    q_goal: &UnitQuaternion,
    n: usize,
    dt: f64,
    eps: f64,
) -> Result<ViaPointSequence> {
    sample_via_points_with(ds, q0, q_goal, &SamplingOptions::new(n, dt, eps))
}

pub fn sample_via_points_with(
    ds: &dyn NominalDs,
    q0: &UnitQuaternion,
    q_goal: &UnitQuaternion,
    opts: &SamplingOptions,
) -> Result<ViaPointSequence> {
    let SamplingOptions {
        n,
        dt,
        eps,
        max_steps,
    } = *opts;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need N >= 2 via-points, got {n}"
        )));
    }
    if !(dt > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt and eps must be positive (dt = {dt}, eps = {eps})"
        )));
    }
    let goal = *q_goal;
    let start = hemisphere_align(&goal, q0);
    if distance(&start, &goal) <= eps {
        return Err(Error::Degenerate(format!(
            "start is within eps = {eps} of the goal"
        )));
    }

    // Rollout until inside the eps-ball; the goal closes the path.
    let mut path = vec![start];
    let mut q = start;
    let mut steps = 0;
    while distance(&q, &goal) > eps {
        if steps >= max_steps {
            return Err(Error::NonConvergence {
                steps,
                distance: distance(&q, &goal),
            });
        }
        q = integrate_quaternion(&q, &ds.eval(&q), dt)?;
        path.push(q);
        steps += 1;
    }
    path.push(goal);

    let mut path_length = 0.0;
    let mut max_step: f64 = 0.0;
    let closing = path.len() - 2;
    for (i, w) in path.windows(2).enumerate() {
        let d = distance(&w[1], &w[0]);
        path_length += d;
        if i < closing {
            max_step = max_step.max(d);
        }
    }
    if path_length < n as f64 * 1e-6 {
        return Err(Error::Degenerate(format!(
            "path length {path_length} rad is too short for {n} via-points"
        )));
    }
    let spacing = path_length / n as f64;

    let interior = resample(&path, spacing, n - 1)?;

    let mut points = Vec::with_capacity(n + 1);
    points.push(start);
    points.extend(interior);
    points.push(goal);

    let zetas = points
        .iter()
        .map(|p| log_map(&goal, p))
        .collect::<Result<Vec<_>>>()?;
    let mut omegas: Vec<_> = points[..n].iter().map(|p| ds.eval(p)).collect();
    omegas.push(Vector3::zeros());
    let spacings = points.windows(2).map(|w| distance(&w[1], &w[0])).collect();

    Ok(ViaPointSequence {
        points,
        zetas,
        omegas,
        goal,
        spacings,
        max_step,
        path_length,
        dt,
        eps,
    })
}

/// Distance from `q` to the short great-circle arc `a → b`, computed by projecting onto the
/// arc's plane in ℝ⁴.
fn segment_distance(a: &UnitQuaternion, b: &UnitQuaternion, q: &UnitQuaternion) -> f64 {
    let q = hemisphere_align(a, q);
    let b = hemisphere_align(a, b);
    let (av, bv, qv) = (a.to_array(), b.to_array(), q.to_array());
    let ab = a.dot(&b);
    let mut e = [0.0; 4];
    for k in 0..4 {
        e[k] = bv[k] - ab * av[k];
    }
    let en = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    if en < 1e-15 {
        return distance(a, &q);
    }
    e.iter_mut().for_each(|x| *x /= en);
    let dot4 = |x: &[f64; 4], y: &[f64; 4]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let span = dot4(&bv, &e).atan2(ab);
    let phi = dot4(&qv, &e).atan2(dot4(&qv, &av)).clamp(0.0, span);
    let (s, c) = phi.sin_cos();
    let p = UnitQuaternion::from_parts_unchecked(
        c * av[0] + s * e[0],
        Vector3::new(
            c * av[1] + s * e[1],
            c * av[2] + s * e[2],
            c * av[3] + s * e[3],
        ),
    );
    distance(&p, &q)
}

/// Walks the polyline of geodesic segments and emits a point every time the geodesic
/// distance from the previous emission reaches `spacing`. The crossing is located on the
/// segment itself so emissions do not inherit the rollout step as overshoot.
fn resample(path: &[UnitQuaternion], spacing: f64, count: usize) -> Result<Vec<UnitQuaternion>> {
    let mut out = Vec::with_capacity(count);
    let mut last = path[0];
    'segments: for w in path.windows(2) {
        let mut a = w[0];
        let b = w[1];
        while distance(&b, &last) >= spacing {
            if out.len() == count {
                break 'segments;
            }
            let p = crossing(&a, &b, &last, spacing)?;
            out.push(p);
            last = p;
            a = p;
        }
    }
    if out.len() < count {
        return Err(Error::Degenerate(format!(
            "resampling produced {} interior via-points, expected {count}",
            out.len()
        )));
    }
    Ok(out)
}

/// Point on the geodesic `a → b` at distance `target` from `anchor`, with
/// `d(a, anchor) < target ≤ d(b, anchor)`.
fn crossing(
    a: &UnitQuaternion,
    b: &UnitQuaternion,
    anchor: &UnitQuaternion,
    target: f64,
) -> Result<UnitQuaternion> {
    let dir = log_map(a, b)?;
    let at = |t: f64| exp_map(a, &(dir * t));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if distance(&at(mid)?, anchor) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(hi)
}

//! Nominal first-order motion plans `ω_d = f(q)` on S³.
//!
//! Two families ship with the crate: a linear field in the tangent space at the goal,
//! and a replay field built from a recorded quaternion trajectory.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::quaternion::{distance, integrate_quaternion, log_map, TangentVector, UnitQuaternion};

/// A first-order dynamical system on the unit sphere with a single equilibrium at `goal`.
pub trait NominalDs: Send + Sync {
    /// Desired angular velocity (rad/s, world frame) at orientation `q`.
    fn eval(&self, q: &UnitQuaternion) -> TangentVector;

    fn goal(&self) -> UnitQuaternion;

    fn family(&self) -> &'static str;
}

/// Largest admissible real part of an eigenvalue of the tangent-linear gain.
pub const HURWITZ_MARGIN: f64 = -1e-6;

/// `ω_d = A_g · Log_{q*}(q)` with `A_g` Hurwitz.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentLinearDs {
    gain: Matrix3<f64>,
    goal: UnitQuaternion,
}

impl TangentLinearDs {
    pub fn new(gain: Matrix3<f64>, goal: UnitQuaternion) -> Result<Self> {
        if gain.iter().any(|x| !x.is_finite()) {
            return Err(Error::Stability(
                "gain matrix has non-finite entries".into(),
            ));
        }
        let max_re = gain
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(max_re < HURWITZ_MARGIN) {
            return Err(Error::Stability(format!(
                "largest eigenvalue real part is {max_re}"
            )));
        }
        Ok(Self { gain, goal })
    }

    pub fn gain(&self) -> &Matrix3<f64> {
        &self.gain
    }
}

impl NominalDs for TangentLinearDs {
    fn eval(&self, q: &UnitQuaternion) -> TangentVector {
        // -q* is the goal orientation too; treat the antipodal branch as the equilibrium.
        match log_map(&self.goal, q) {
            Ok(z) => self.gain * z,
            Err(_) => Vector3::zeros(),
        }
    }

    fn goal(&self) -> UnitQuaternion {
        self.goal
    }

    fn family(&self) -> &'static str {
        "tangent_linear"
    }
}

pub fn make_tangent_linear_ds(gain: Matrix3<f64>, goal: UnitQuaternion) -> Result<TangentLinearDs> {
    TangentLinearDs::new(gain, goal)
}

/// Replays a demonstration: the recorded velocity of the nearest sample plus
/// `gain · Log_q(q_nearest)` pulling back onto the recorded path.
///
/// Only piecewise continuous: the nearest-sample switch is a jump.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoFieldDs {
    orientations: Vec<UnitQuaternion>,
    velocities: Vec<TangentVector>,
    gain: f64,
}

impl DemoFieldDs {
    pub fn new(samples: Vec<(UnitQuaternion, TangentVector)>, gain: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::EmptyTrajectory {
                min: 2,
                got: samples.len(),
            });
        }
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "attraction gain must be positive, got {gain}"
            )));
        }
        for (i, w) in samples.windows(2).enumerate() {
            let dot = w[0].0.dot(&w[1].0);
            if dot <= 0.0 {
                return Err(Error::Alignment { index: i, dot });
            }
        }
        let last = samples.last().unwrap().1;
        if last.norm() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "final demonstration sample must be at rest, got |w| = {}",
                last.norm()
            )));
        }
        let (orientations, velocities) = samples.into_iter().unzip();
        Ok(Self {
            orientations,
            velocities,
            gain,
        })
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    pub fn orientations(&self) -> &[UnitQuaternion] {
        &self.orientations
    }

    /// Index of the closest sample by geodesic distance; ties go to the lowest index.
    pub fn nearest(&self, q: &UnitQuaternion) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, s) in self.orientations.iter().enumerate() {
            let d = distance(s, q);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

impl NominalDs for DemoFieldDs {
    fn eval(&self, q: &UnitQuaternion) -> TangentVector {
        let i = self.nearest(q);
        let pull = log_map(q, &self.orientations[i]).unwrap_or_else(|_| Vector3::zeros());
        self.velocities[i] + pull * self.gain
    }

    fn goal(&self) -> UnitQuaternion {
        *self.orientations.last().unwrap()
    }

    fn family(&self) -> &'static str {
        "demo_field"
    }
}

pub fn make_demo_field_ds(
    traj: Vec<(UnitQuaternion, TangentVector)>,
    gain: f64,
) -> Result<DemoFieldDs> {
    DemoFieldDs::new(traj, gain)
}

pub fn eval_nominal(ds: &dyn NominalDs, q: &UnitQuaternion) -> TangentVector {
    ds.eval(q)
}

/// Open-loop forward-Euler rollout of `ds` on S³, `steps + 1` samples including `q0`.
pub fn rollout(
    ds: &dyn NominalDs,
    q0: &UnitQuaternion,
    dt: f64,
    steps: usize,
) -> Result<Vec<UnitQuaternion>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut q = *q0;
    out.push(q);
    for _ in 0..steps {
        q = integrate_quaternion(&q, &ds.eval(&q), dt)?;
        out.push(q);
    }
    Ok(out)
}

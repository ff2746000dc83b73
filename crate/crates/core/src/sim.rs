//! Closed-loop simulation of a rotational rigid body driven by a torque controller.
//!
//! The plant integrates Euler's equations with a semi-implicit step: world-frame angular
//! momentum is updated from the applied torque first, then the orientation is advanced with
//! the resulting angular velocity. Torque-free motion therefore conserves `‖I_b ω‖` up to
//! rounding.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat;
use crate::nominal::NominalDs;
use crate::policy::VsdsPolicy;
use crate::quaternion::{
    distance, hemisphere_align, integrate_quaternion, log_map, TangentVector, UnitQuaternion,
};

pub const DEFAULT_DT: f64 = 0.002;
pub const DEFAULT_EPS_STOP: f64 = 0.02;
pub const DEFAULT_OMEGA_STOP: f64 = 0.05;
/// Damping ratio used by [`critical_damping`].
pub const DAMPING_RATIO: f64 = 0.7;

/// Body-frame inertia, symmetric positive-definite (kg·m²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaTensor {
    inertia: Matrix3<f64>,
    inverse: Matrix3<f64>,
}

impl InertiaTensor {
    pub fn new(inertia: Matrix3<f64>) -> Result<Self> {
        if !mat::is_spd(&inertia, 1e-12) {
            return Err(Error::Validation(
                "inertia must be symmetric positive-definite".into(),
            ));
        }
        let inverse = inertia
            .try_inverse()
            .ok_or_else(|| Error::Validation("inertia is singular".into()))?;
        Ok(Self { inertia, inverse })
    }

    pub fn isotropic(i: f64) -> Result<Self> {
        Self::new(Matrix3::identity() * i)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.inertia
    }

    pub fn mean_eigenvalue(&self) -> f64 {
        self.inertia.trace() / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    pub q: UnitQuaternion,
    /// Body-frame angular velocity, rad/s.
    pub omega: TangentVector,
    pub t: f64,
}

impl RigidBodyState {
    pub fn at_rest(q: UnitQuaternion) -> Self {
        Self {
            q,
            omega: Vector3::zeros(),
            t: 0.0,
        }
    }

    pub fn world_omega(&self) -> TangentVector {
        self.q.rotate(&self.omega)
    }
}

/// Advances the plant by `dt` under a world-frame torque.
pub fn dynamics_step(
    state: &RigidBodyState,
    torque: &TangentVector,
    inertia: &InertiaTensor,
    dt: f64,
) -> Result<RigidBodyState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let r = state.q.to_rotation_matrix();
    let momentum = r * (inertia.inertia * state.omega) + torque * dt;
    let omega_world = r * (inertia.inverse * (r.transpose() * momentum));
    let q = integrate_quaternion(&state.q, &omega_world, dt)?;
    let omega = inertia.inverse * (q.to_rotation_matrix().transpose() * momentum);
    Ok(RigidBodyState {
        q,
        omega,
        t: state.t + dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    /// Freeze the orientation and zero the velocity.
    Hold,
    /// Short torque pulse added to the command.
    Impulse,
    ConstantTorque,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceEvent {
    pub kind: DisturbanceKind,
    pub t_start: f64,
    pub t_end: f64,
    /// World-frame torque (N·m), required for impulse and constant-torque events.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque: Option<[f64; 3]>,
}

impl DisturbanceEvent {
    pub fn hold(t_start: f64, t_end: f64) -> Self {
        Self {
            kind: DisturbanceKind::Hold,
            t_start,
            t_end,
            torque: None,
        }
    }

    pub fn impulse(t_start: f64, t_end: f64, torque: Vector3<f64>) -> Self {
        Self {
            kind: DisturbanceKind::Impulse,
            t_start,
            t_end,
            torque: Some(torque.into()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start < self.t_end) || !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(Error::Validation(format!(
                "disturbance window [{}, {}] is empty",
                self.t_start, self.t_end
            )));
        }
        match (self.kind, self.torque) {
            (DisturbanceKind::Hold, Some(_)) => {
                Err(Error::Validation("hold disturbances take no torque".into()))
            }
            (DisturbanceKind::Impulse | DisturbanceKind::ConstantTorque, None) => Err(
                Error::Validation("torque disturbances need a torque vector".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn active(&self, t: f64) -> bool {
        self.t_start <= t && t < self.t_end
    }
}

/// One control tick's output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    /// Stiffness part of the command (`τ_vs` for VSDS).
    pub field: TangentVector,
    /// Full control torque.
    pub torque: TangentVector,
    /// 1-based index of the dominant spring, 0 when not applicable.
    pub dominant: usize,
}

pub trait Controller: Sync {
    fn goal(&self) -> UnitQuaternion;

    /// `omega` is the world-frame angular velocity.
    fn command(&self, t: f64, q: &UnitQuaternion, omega: &TangentVector) -> Result<Command>;
}

/// The VSDS law `τ = τ_vs(q) − D ω`. State-indexed: `t` is ignored.
pub struct VsdsController<'a> {
    pub policy: &'a VsdsPolicy,
    pub damping: Matrix3<f64>,
}

impl Controller for VsdsController<'_> {
    fn goal(&self) -> UnitQuaternion {
        self.policy.goal()
    }

    fn command(&self, _t: f64, q: &UnitQuaternion, omega: &TangentVector) -> Result<Command> {
        let f = self.policy.evaluate(q)?;
        Ok(Command {
            field: f.torque,
            torque: f.torque - self.damping * omega,
            dominant: f.dominant,
        })
    }
}

/// Time-indexed PD tracking of an open-loop reference: `τ = K Log_q(q_ref(t)) − D ω`.
pub struct TimeIndexedPd {
    reference: Vec<UnitQuaternion>,
    reference_dt: f64,
    stiffness: Matrix3<f64>,
    damping: Matrix3<f64>,
}

impl TimeIndexedPd {
    /// Integrates `ds` open-loop from `q0` until `horizon` to build the reference.
    pub fn from_nominal(
        ds: &dyn NominalDs,
        q0: &UnitQuaternion,
        dt: f64,
        horizon: f64,
        stiffness: Matrix3<f64>,
        damping: Matrix3<f64>,
    ) -> Result<Self> {
        let steps = (horizon / dt).ceil() as usize;
        let q0 = hemisphere_align(&ds.goal(), q0);
        let reference = crate::nominal::rollout(ds, &q0, dt, steps)?;
        Ok(Self {
            reference,
            reference_dt: dt,
            stiffness,
            damping,
        })
    }

    pub fn reference_at(&self, t: f64) -> UnitQuaternion {
        let k = (t / self.reference_dt).round().max(0.0) as usize;
        self.reference[k.min(self.reference.len() - 1)]
    }
}

impl Controller for TimeIndexedPd {
    fn goal(&self) -> UnitQuaternion {
        *self.reference.last().unwrap()
    }

    fn command(&self, t: f64, q: &UnitQuaternion, omega: &TangentVector) -> Result<Command> {
        let field = self.stiffness * log_map(q, &self.reference_at(t))?;
        Ok(Command {
            field,
            torque: field - self.damping * omega,
            dominant: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: UnitQuaternion,
    /// World-frame angular velocity.
    pub omega: [f64; 3],
    pub tau_vs: [f64; 3],
    pub tau: [f64; 3],
    pub spring_idx: usize,
    pub dist_goal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub dt: f64,
    pub converged: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub dt: f64,
    pub t_max: f64,
    pub eps_stop: f64,
    pub omega_stop: f64,
    /// Stop as soon as the goal is reached; otherwise run to `t_max`.
    pub early_stop: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_max: 30.0,
            eps_stop: DEFAULT_EPS_STOP,
            omega_stop: DEFAULT_OMEGA_STOP,
            early_stop: true,
        }
    }
}

/// `D = 2 ζ √(k̄ ī) I₃` with `k̄` the mean longitudinal spring stiffness and `ī` the mean
/// principal inertia.
pub fn critical_damping(policy: &VsdsPolicy, plant: &InertiaTensor) -> Matrix3<f64> {
    let d = 2.0
        * DAMPING_RATIO
        * (policy.mean_longitudinal_stiffness() * plant.mean_eigenvalue()).sqrt();
    Matrix3::identity() * d
}

/// Closed-loop rollout. One row per control tick at `t = k·dt`; the stop test runs after
/// recording, so a start at rest on the goal yields a single row.
pub fn simulate(
    controller: &dyn Controller,
    plant: &InertiaTensor,
    q_init: &UnitQuaternion,
    omega_init: &TangentVector,
    settings: &SimSettings,
    disturbances: &[DisturbanceEvent],
) -> Result<Trajectory> {
    let SimSettings {
        dt,
        t_max,
        eps_stop,
        omega_stop,
        early_stop,
    } = *settings;
    if !(dt > 0.0) || !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t_max > 0 (dt = {dt}, t_max = {t_max})"
        )));
    }
    for d in disturbances {
        d.validate()?;
    }
    let goal = controller.goal();
    let mut state = RigidBodyState {
        q: hemisphere_align(&goal, q_init),
        omega: *omega_init,
        t: 0.0,
    };
    let max_ticks = (t_max / dt + 1e-9).floor() as usize;
    let mut samples = Vec::with_capacity(max_ticks.min(1 << 20) + 1);
    let mut held: Option<UnitQuaternion> = None;
    let mut converged = false;

    for k in 0..=max_ticks {
        let t = k as f64 * dt;
        state.t = t;
        let holding = disturbances
            .iter()
            .any(|d| d.kind == DisturbanceKind::Hold && d.active(t));
        if holding {
            let q = *held.get_or_insert(state.q);
            state.q = q;
            state.omega = Vector3::zeros();
        } else {
            held = None;
        }

        let cmd = controller.command(t, &state.q, &state.world_omega())?;
        let dist_goal = distance(&state.q, &goal);
        samples.push(TrajectorySample {
            t,
            q: state.q,
            omega: state.world_omega().into(),
            tau_vs: cmd.field.into(),
            tau: cmd.torque.into(),
            spring_idx: cmd.dominant,
            dist_goal,
        });

        if early_stop && !holding && dist_goal <= eps_stop && state.omega.norm() <= omega_stop {
            converged = true;
            break;
        }
        if k == max_ticks {
            break;
        }
        if !holding {
            let mut applied = cmd.torque;
            for d in disturbances.iter().filter(|d| d.active(t)) {
                if let Some(tq) = d.torque {
                    applied += Vector3::from(tq);
                }
            }
            state = dynamics_step(&state, &applied, plant, dt)?;
        }
    }

    if !early_stop {
        let last = samples.last().unwrap();
        converged = last.dist_goal <= eps_stop && Vector3::from(last.omega).norm() <= omega_stop;
    }
    Ok(Trajectory {
        samples,
        dt,
        converged,
    })
}

/// VSDS closed loop with the given damping.
#[allow(clippy::too_many_arguments)]
pub fn run_scenario(
    policy: &VsdsPolicy,
    plant: &InertiaTensor,
    damping: &Matrix3<f64>,
    q_init: &UnitQuaternion,
    omega_init: &TangentVector,
    settings: &SimSettings,
    disturbances: &[DisturbanceEvent],
) -> Result<Trajectory> {
    let controller = VsdsController {
        policy,
        damping: *damping,
    };
    simulate(
        &controller,
        plant,
        q_init,
        omega_init,
        settings,
        disturbances,
    )
}

/// Reruns `traj`'s scenario at half the step for the same simulated duration and returns
/// the distance between the two final orientations.
#[allow(clippy::too_many_arguments)]
pub fn half_step_discrepancy(
    controller: &dyn Controller,
    plant: &InertiaTensor,
    q_init: &UnitQuaternion,
    omega_init: &TangentVector,
    settings: &SimSettings,
    disturbances: &[DisturbanceEvent],
    traj: &Trajectory,
) -> Result<f64> {
    let fine = SimSettings {
        dt: settings.dt / 2.0,
        t_max: traj.duration().max(settings.dt / 2.0),
        early_stop: false,
        ..*settings
    };
    let rerun = simulate(controller, plant, q_init, omega_init, &fine, disturbances)?;
    let a = traj.last().unwrap().q;
    let b = rerun.last().unwrap().q;
    Ok(distance(&a, &hemisphere_align(&a, &b)))
}

/// `u = Jᵀ [F; τ]` for a 6×n end-effector Jacobian.
pub fn joint_torque_map(
    jacobian: &DMatrix<f64>,
    force: &Vector3<f64>,
    torque: &TangentVector,
) -> Result<DVector<f64>> {
    if jacobian.nrows() != 6 {
        return Err(Error::Dimension(format!(
            "jacobian must have 6 rows, got {}",
            jacobian.nrows()
        )));
    }
    let wrench = Vector6::new(force.x, force.y, force.z, torque.x, torque.y, torque.z);
    Ok(jacobian.transpose() * DVector::from_column_slice(wrench.as_slice()))
}

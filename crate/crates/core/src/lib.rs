//! Orientation control with variable stiffness dynamical systems (VSDS).
//!
//! A first-order motion plan on the unit-quaternion sphere is rolled out and resampled into
//! equidistant via-points. Each via-point anchors a local rotational spring whose stiffness
//! follows a user profile; normalized Gaussian kernels blend the springs into a state-indexed
//! torque field. [`sim`] closes the loop around a rigid-body rotational plant.
//!
//! ```
//! # fn main() -> vsds::Result<()> {
//! use nalgebra::{Matrix3, Vector3};
//! use vsds::nominal::make_tangent_linear_ds;
//! use vsds::sim::{critical_damping, run_scenario, InertiaTensor, SimSettings};
//! use vsds::{build_springs, sample_via_points, StiffnessProfile, UnitQuaternion};
//!
//! let goal = UnitQuaternion::identity();
//! let q0 = UnitQuaternion::from_rotation_vector(&Vector3::new(1.2, -0.6, 0.4));
//! let ds = make_tangent_linear_ds(-Matrix3::identity(), goal)?;
//! let via = sample_via_points(&ds, &q0, &goal, 30, 0.002, 0.05)?;
//! let policy = build_springs(&via, &StiffnessProfile::constant(150.0), 0.25)?;
//! let plant = InertiaTensor::isotropic(0.01)?;
//! let damping = critical_damping(&policy, &plant);
//! let traj = run_scenario(&policy, &plant, &damping, &q0, &Vector3::zeros(), &SimSettings::default(), &[])?;
//! assert!(traj.converged);
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod error;
pub mod frame;
pub mod io;
pub mod mat;
pub mod nominal;
pub mod policy;
pub mod quaternion;
pub mod sampling;
pub mod sim;
pub mod stiffness;

pub use error::{Error, Result};
pub use nominal::{DemoFieldDs, NominalDs, TangentLinearDs};
pub use policy::{build_springs, control_torque, vsds_torque, LocalSpring, VsdsPolicy};
pub use quaternion::{TangentVector, UnitQuaternion};
pub use sampling::{sample_via_points, ViaPointSequence};
pub use stiffness::StiffnessProfile;

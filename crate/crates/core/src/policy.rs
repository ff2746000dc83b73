//! The compiled variable-stiffness torque field.
//!
//! Each via-point `q_l[i]` (`i = 1..=N`) carries a local spring with stiffness
//! `A_i = Q_i K_i Q_iᵀ`, where `Q_i` is a frame aligned with the local motion direction and
//! `K_i` the desired stiffness at path parameter `s_i = i / N`. Springs are blended by
//! normalized Gaussian kernels centered at the midpoints `mean(q_l[i-1], q_l[i])` with width
//! `σ_i = δ · l_i`:
//!
//! ```text
//! τ_vs(q) = Σ_i w̃_i(q) · A_i · Log_q(q_l[i])
//! w_i(q)  = exp(-‖Log_{c_i}(q)‖² / (2 σ_i²)),   w̃_i = w_i / Σ_j w_j
//! ```
//!
//! The spring error `Log_q(q_l[i]) = -Log_{q_l[i]}(q)` points from the current orientation to
//! the attractor, so positive-definite `A_i` restore toward the via-point.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::build_motion_frame;
use crate::mat::{self, row_major};
use crate::quaternion::{geodesic_midpoint, log_map, log_norm, TangentVector, UnitQuaternion};
use crate::sampling::ViaPointSequence;
use crate::stiffness::StiffnessProfile;

/// Kernel width over via-point spacing. Kernel distances are half rotation angles, so at
/// `δ = 0.25` a neighbouring kernel weighs `e⁻²` at a spring's own center.
pub const DEFAULT_DELTA: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSpring {
    /// 1-based via-point index.
    pub index: usize,
    pub attractor: UnitQuaternion,
    /// `A_i`, N·m/rad.
    #[serde(with = "row_major")]
    pub stiffness: Matrix3<f64>,
    /// `Q_i`, columns are the stiffness eigendirections (first = motion direction).
    #[serde(with = "row_major")]
    pub frame: Matrix3<f64>,
    /// `K_o(s_i)` before the frame rotation.
    #[serde(with = "row_major")]
    pub profile_stiffness: Matrix3<f64>,
    pub center: UnitQuaternion,
    /// Kernel width, rad.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VsdsPolicy {
    goal: UnitQuaternion,
    delta: f64,
    via: ViaPointSequence,
    springs: Vec<LocalSpring>,
}

/// Torque field value with the index (1-based) of the spring carrying the largest weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub torque: TangentVector,
    pub dominant: usize,
}

impl VsdsPolicy {
    pub fn goal(&self) -> UnitQuaternion {
        self.goal
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.springs.len()
    }

    pub fn springs(&self) -> &[LocalSpring] {
        &self.springs
    }

    pub fn via_points(&self) -> &ViaPointSequence {
        &self.via
    }

    /// Mean stiffness along the motion direction, `mean_i K_i[0,0]`.
    pub fn mean_longitudinal_stiffness(&self) -> f64 {
        self.springs
            .iter()
            .map(|s| s.profile_stiffness[(0, 0)])
            .sum::<f64>()
            / self.springs.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse {
            context: "policy".into(),
            message: e.to_string(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: VsdsPolicy = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: format!("policy (line {}, column {})", e.line(), e.column()),
            message: e.to_string(),
        })?;
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let n = self.springs.len();
        if n < 2 {
            return Err(Error::Validation(format!(
                "policy needs N >= 2 springs, got {n}"
            )));
        }
        if self.via.points.len() != n + 1 || self.via.spacings.len() != n {
            return Err(Error::Validation(
                "via-point sequence does not match the spring count".into(),
            ));
        }
        for s in &self.springs {
            if !(s.sigma > 0.0) || !mat::is_spd(&s.stiffness, 1e-9) {
                return Err(Error::Validation(format!(
                    "spring {} is malformed",
                    s.index
                )));
            }
        }
        Ok(())
    }

    /// Unnormalized log-weights `-‖Log_{c_i}(q)‖² / (2σ_i²)`.
    pub fn kernel_exponents(&self, q: &UnitQuaternion) -> Vec<f64> {
        self.springs
            .iter()
            .map(|s| {
                let r = log_norm(&s.center, q);
                -(r * r) / (2.0 * s.sigma * s.sigma)
            })
            .collect()
    }

    /// Normalized kernel weights `w̃`, computed with max-exponent shifting so they stay
    /// finite however far `q` is from every center.
    pub fn kernel_weights(&self, q: &UnitQuaternion) -> Vec<f64> {
        let mut w = self.kernel_exponents(q);
        let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        w.iter_mut().for_each(|e| *e = (*e - m).exp());
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|e| *e /= total);
        w
    }

    pub fn evaluate(&self, q: &UnitQuaternion) -> Result<FieldSample> {
        let w = self.kernel_weights(q);
        let mut torque = Vector3::zeros();
        let mut dominant = 0;
        for (i, (s, wi)) in self.springs.iter().zip(&w).enumerate() {
            let err = log_map(q, &s.attractor)?;
            torque += (s.stiffness * err) * *wi;
            if *wi > w[dominant] {
                dominant = i;
            }
        }
        Ok(FieldSample {
            torque,
            dominant: dominant + 1,
        })
    }

    pub fn torque(&self, q: &UnitQuaternion) -> Result<TangentVector> {
        self.evaluate(q).map(|f| f.torque)
    }
}

/// Compiles springs from a via-point sequence.
pub fn build_springs(
    via: &ViaPointSequence,
    profile: &StiffnessProfile,
    delta: f64,
) -> Result<VsdsPolicy> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    profile.validate()?;
    let n = via.n();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need N >= 2 via-points, got {n}"
        )));
    }

    let mut springs: Vec<LocalSpring> = Vec::with_capacity(n);
    for i in 1..=n {
        let k = profile.eval(i as f64 / n as f64);
        // zeta vanishes at the goal; the last spring inherits its predecessor's frame.
        let frame = match build_motion_frame(&via.zetas[i]) {
            Ok(q) => q,
            Err(Error::ZeroDirection) if i == n => springs[i - 2].frame,
            Err(e) => return Err(e),
        };
        let a = frame * k * frame.transpose();
        let a = (a + a.transpose()) * 0.5;
        let l = via.spacings[i - 1];
        if !(l > 0.0) {
            return Err(Error::Degenerate(format!(
                "via-points {} and {i} coincide",
                i - 1
            )));
        }
        springs.push(LocalSpring {
            index: i,
            attractor: via.points[i],
            stiffness: a,
            frame,
            profile_stiffness: k,
            center: geodesic_midpoint(&via.points[i - 1], &via.points[i])?,
            sigma: delta * l,
        });
    }
    Ok(VsdsPolicy {
        goal: via.goal,
        delta,
        via: via.clone(),
        springs,
    })
}

pub fn kernel_weights(policy: &VsdsPolicy, q: &UnitQuaternion) -> Vec<f64> {
    policy.kernel_weights(q)
}

pub fn vsds_torque(policy: &VsdsPolicy, q: &UnitQuaternion) -> Result<TangentVector> {
    policy.torque(q)
}

/// `τ = τ_vs(q) − D ω`, all in the world frame.
pub fn control_torque(
    policy: &VsdsPolicy,
    q: &UnitQuaternion,
    omega: &TangentVector,
    damping: &Matrix3<f64>,
) -> Result<TangentVector> {
    Ok(policy.torque(q)? - damping * omega)
}

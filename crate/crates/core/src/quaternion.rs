//! Unit quaternions on S³ and the Lie-group maps used throughout the crate.
//!
//! Conventions:
//! - Hamilton product, scalar part first: `q = ν + u`.
//! - `Exp_b(ζ) = exp(ζ) * b` with `exp(ζ) = cos‖ζ‖ + sin‖ζ‖ ζ/‖ζ‖`.
//! - `Log_b(q) = log(q * conj(b))`, so `Exp_b(Log_b(q)) = q` whenever `‖Log_b(q)‖ < π`.
//!
//! Tangent vectors therefore carry *half* the rotation angle: a rotation by θ about
//! axis `n` has `Log = (θ/2) n`. The distance `d` doubles this back to the rotation angle.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element of the tangent space ℝ³. Log outputs (rad), angular velocities (rad/s) and
/// torques (N·m) all share this carrier.
pub type TangentVector = Vector3<f64>;

/// Tolerance on `|ν + 1|` and `‖u‖` used to detect the antipodal branch.
pub const ANTIPODAL_TOL: f64 = 1e-9;

/// Orientation on the unit sphere S³. Always unit norm.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct UnitQuaternion {
    w: f64,
    v: Vector3<f64>,
}

impl fmt::Debug for UnitQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "UnitQuaternion({}, [{}, {}, {}])",
            self.w, self.v.x, self.v.y, self.v.z
        )
    }
}

impl UnitQuaternion {
    pub fn identity() -> Self {
        Self {
            w: 1.0,
            v: Vector3::zeros(),
        }
    }

    /// Normalizes `(w, x, y, z)`. Fails on a (near) zero quaternion or non-finite input.
    pub fn new_normalize(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "cannot normalize quaternion ({w}, {x}, {y}, {z})"
            )));
        }
        Ok(Self {
            w: w / n,
            v: Vector3::new(x / n, y / n, z / n),
        })
    }

    /// Like [`new_normalize`](Self::new_normalize), but values already unit to 1e-12 are
    /// kept bit-for-bit so serialized quaternions round-trip exactly.
    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        let n2: f64 = a.iter().map(|c| c * c).sum();
        if (n2 - 1.0).abs() < 1e-12 {
            return Ok(Self {
                w: a[0],
                v: Vector3::new(a[1], a[2], a[3]),
            });
        }
        Self::new_normalize(a[0], a[1], a[2], a[3])
    }

    /// Rotation by `angle` radians about `axis`. A zero axis yields the identity.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::identity();
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Self::from_parts_unchecked(c, axis * (s / n))
    }

    /// Rotation vector `θ n` (full angle).
    pub fn from_rotation_vector(rv: &Vector3<f64>) -> Self {
        Self::from_axis_angle(rv, rv.norm())
    }

    /// Builds from parts and renormalizes to absorb rounding drift.
    pub(crate) fn from_parts_unchecked(w: f64, v: Vector3<f64>) -> Self {
        let n = (w * w + v.norm_squared()).sqrt();
        Self { w: w / n, v: v / n }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.v
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.v.x, self.v.y, self.v.z]
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.v.norm_squared()).sqrt()
    }

    /// Euclidean inner product in ℝ⁴.
    pub fn dot(&self, other: &Self) -> f64 {
        self.w * other.w + self.v.dot(&other.v)
    }

    pub fn conjugate(&self) -> Self {
        Self {
            w: self.w,
            v: -self.v,
        }
    }

    /// Rotation matrix mapping body-frame vectors to the world frame.
    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.v.x, self.v.y, self.v.z);
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    pub fn rotate(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.to_rotation_matrix() * p
    }

    fn is_antipodal_identity(&self) -> bool {
        (self.w + 1.0).abs() <= ANTIPODAL_TOL && self.v.norm() <= ANTIPODAL_TOL
    }
}

impl TryFrom<[f64; 4]> for UnitQuaternion {
    type Error = String;

    fn try_from(a: [f64; 4]) -> std::result::Result<Self, Self::Error> {
        Self::from_array(a).map_err(|e| e.to_string())
    }
}

impl From<UnitQuaternion> for [f64; 4] {
    fn from(q: UnitQuaternion) -> Self {
        q.to_array()
    }
}

impl Neg for UnitQuaternion {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            w: -self.w,
            v: -self.v,
        }
    }
}

impl Mul for UnitQuaternion {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        multiply(&self, &rhs)
    }
}

/// Hamilton product `q1 * q2`, renormalized.
pub fn multiply(q1: &UnitQuaternion, q2: &UnitQuaternion) -> UnitQuaternion {
    let w = q1.w * q2.w - q1.v.dot(&q2.v);
    let v = q2.v * q1.w + q1.v * q2.w + q1.v.cross(&q2.v);
    UnitQuaternion::from_parts_unchecked(w, v)
}

pub fn conjugate(q: &UnitQuaternion) -> UnitQuaternion {
    q.conjugate()
}

/// `‖Log_base(q)‖`, total on S³: the antipodal limit evaluates to π.
pub fn log_norm(base: &UnitQuaternion, q: &UnitQuaternion) -> f64 {
    let rel = multiply(q, &base.conjugate());
    rel.v.norm().atan2(rel.w)
}

/// `Log_base(q)`: tangent vector at `base` pointing to `q`, with `‖ζ‖ = arccos(ν) < π`
/// for the relative quaternion `q * conj(base) = ν + u`.
pub fn log_map(base: &UnitQuaternion, q: &UnitQuaternion) -> Result<TangentVector> {
    let rel = multiply(q, &base.conjugate());
    if rel.is_antipodal_identity() {
        return Err(Error::Antipodal);
    }
    Ok(log_of_relative(&rel))
}

fn log_of_relative(rel: &UnitQuaternion) -> TangentVector {
    let un = rel.v.norm();
    if un == 0.0 {
        return Vector3::zeros();
    }
    // atan2 is arccos(ν) on the unit sphere but keeps full precision near ν = ±1.
    rel.v * (un.atan2(rel.w) / un)
}

/// `Exp_base(ζ) = exp(ζ) * base`, defined for `‖ζ‖ < π`.
pub fn exp_map(base: &UnitQuaternion, zeta: &TangentVector) -> Result<UnitQuaternion> {
    let n = zeta.norm();
    if !(n < PI) {
        return Err(Error::Domain(format!("exp_map needs |zeta| < pi, got {n}")));
    }
    if n == 0.0 {
        return Ok(*base);
    }
    let (s, c) = n.sin_cos();
    let e = UnitQuaternion::from_parts_unchecked(c, zeta * (s / n));
    Ok(multiply(&e, base))
}

/// Geodesic distance: `2π` on the antipodal branch, `2‖Log_{q1}(q2)‖` otherwise.
pub fn distance(q1: &UnitQuaternion, q2: &UnitQuaternion) -> f64 {
    let rel = multiply(q1, &q2.conjugate());
    if rel.is_antipodal_identity() {
        return 2.0 * PI;
    }
    2.0 * rel.v.norm().atan2(rel.w)
}

/// Returns `q` if `⟨prev, q⟩ ≥ 0`, otherwise `-q`.
pub fn hemisphere_align(prev: &UnitQuaternion, q: &UnitQuaternion) -> UnitQuaternion {
    if prev.dot(q) < 0.0 {
        -*q
    } else {
        *q
    }
}

/// Flips samples in place so every adjacent pair has a non-negative dot product.
pub fn align_sequence(qs: &mut [UnitQuaternion]) {
    for i in 1..qs.len() {
        qs[i] = hemisphere_align(&qs[i - 1], &qs[i]);
    }
}

/// Two-point Riemannian mean: `Exp_{q1}(½ Log_{q1}(q2))`.
pub fn geodesic_midpoint(q1: &UnitQuaternion, q2: &UnitQuaternion) -> Result<UnitQuaternion> {
    if distance(q1, q2) >= 2.0 * PI - 1e-6 {
        return Err(Error::Antipodal);
    }
    let half = log_map(q1, q2)? * 0.5;
    exp_map(q1, &half)
}

/// One kinematic step `exp((dt/2) ω) * q`: rotates `q` by `‖ω‖ dt` about `ω` (world frame).
pub fn integrate_quaternion(
    q: &UnitQuaternion,
    omega: &TangentVector,
    dt: f64,
) -> Result<UnitQuaternion> {
    let angle = omega.norm() * dt.abs();
    if !(angle < PI) {
        return Err(Error::Domain(format!(
            "integration step angle {angle} rad is not below pi"
        )));
    }
    exp_map(q, &(omega * (0.5 * dt)))
}

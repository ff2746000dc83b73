//! Small linear-algebra helpers and row-major serde adapters for 3×3 matrices.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

pub fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

pub fn from_rows(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::new(
        r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
    )
}

/// Largest absolute asymmetry `|m_ij - m_ji|`.
pub fn asymmetry(m: &Matrix3<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(m: &Matrix3<f64>) -> Vector3<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev = SymmetricEigen::new(sym).eigenvalues;
    ev.as_mut_slice().sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Symmetric within `tol` and strictly positive definite.
pub fn is_spd(m: &Matrix3<f64>, tol: f64) -> bool {
    m.iter().all(|x| x.is_finite()) && asymmetry(m) <= tol && sym_eigenvalues(m)[0] > 0.0
}

/// `#[serde(with = "crate::mat::row_major")]` for `Matrix3<f64>`.
pub mod row_major {
    use nalgebra::Matrix3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix3<f64>, s: S) -> Result<S::Ok, S::Error> {
        super::to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix3<f64>, D::Error> {
        let rows = <[[f64; 3]; 3]>::deserialize(d)?;
        Ok(super::from_rows(&rows))
    }
}

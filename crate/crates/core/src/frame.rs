use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Orthonormal frame whose first column is the unit motion direction.
///
/// The other two columns come from Gram-Schmidt on the two canonical axes least parallel
/// to the direction (ties broken by axis index), in that order. For stiffness matrices that
/// are isotropic in the transverse plane the choice does not matter; for fully anisotropic
/// ones it fixes the transverse eigendirections.
pub fn build_motion_frame(direction: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let n = direction.norm();
    if !(n > 1e-9) {
        return Err(Error::ZeroDirection);
    }
    let e1 = direction / n;

    let mut axes = [0usize, 1, 2];
    axes.sort_by(|&a, &b| e1[a].abs().total_cmp(&e1[b].abs()));

    let e2 = orthogonalize(&unit(axes[0]), &[e1]);
    let e3 = orthogonalize(&unit(axes[1]), &[e1, e2]);
    Ok(Matrix3::from_columns(&[e1, e2, e3]))
}

fn unit(axis: usize) -> Vector3<f64> {
    let mut v = Vector3::zeros();
    v[axis] = 1.0;
    v
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
fn orthogonalize(seed: &Vector3<f64>, basis: &[Vector3<f64>]) -> Vector3<f64> {
    let mut v = *seed;
    for _ in 0..2 {
        for b in basis {
            v -= b * b.dot(&v);
        }
    }
    v.normalize()
}

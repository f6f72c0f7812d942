use nalgebra::Matrix3;

use super::angular::Vec3;
use crate::error::{LabError, LabResult};

/// Landau diffusion matrix `a(z) = 2 pi K |z|^{-1} (I - z z^T / |z|^2)`.
pub fn landau_matrix(z: &Vec3, k_const: f64) -> LabResult<Matrix3<f64>> {
    let r = z.norm();
    if r == 0.0 {
        return Err(LabError::Singularity("a(z) is singular at z = 0".into()));
    }
    let zh = z / r;
    Ok((Matrix3::identity() - zh * zh.transpose()) * (2.0 * std::f64::consts::PI * k_const / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn examples() {
        let a = landau_matrix(&Vec3::new(1.0, 0.0, 0.0), 1.0).unwrap();
        let e = Matrix3::from_diagonal(&Vec3::new(0.0, 1.0, 1.0)) * (2.0 * PI);
        assert!((a - e).norm() < 1e-14);
        let z = Vec3::new(0.3, -2.0, 0.7);
        let a = landau_matrix(&z, 1.5).unwrap();
        assert!((a * z).norm() < 1e-13);
        assert!((a.trace() - 4.0 * PI * 1.5 / z.norm()).abs() < 1e-13);
        assert!((a - a.transpose()).norm() == 0.0);
        assert!(landau_matrix(&Vec3::zeros(), 1.0).is_err());
    }
}

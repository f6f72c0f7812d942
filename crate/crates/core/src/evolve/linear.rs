//! `e^{-tM}` through the symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, LabResult};
use crate::grid::DistributionField;
use crate::spectral::LinearOperatorMatrix;

/// Eigenpairs of a symmetric operator matrix, reused for every time.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
    grid: crate::grid::VelocityGrid,
}

impl LinearPropagator {
    pub fn new(m: &LinearOperatorMatrix) -> Self {
        let e = m.matrix().clone().symmetric_eigen();
        Self {
            vectors: e.eigenvectors,
            values: e.eigenvalues,
            grid: *m.grid(),
        }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// Spectral radius of the operator.
    pub fn spectral_radius(&self) -> f64 {
        self.values.amax()
    }

    /// `phi(M) x` for a scalar function of the eigenvalues.
    pub fn apply_fn(&self, x: &[f64], phi: impl Fn(f64) -> f64) -> Vec<f64> {
        let c = self.vectors.tr_mul(&DVector::from_column_slice(x));
        let c = DVector::from_iterator(
            c.len(),
            c.iter().zip(self.values.iter()).map(|(a, &l)| a * phi(l)),
        );
        (&self.vectors * c).as_slice().to_vec()
    }

    /// `e^{-tM} f`.
    pub fn evolve(&self, f: &DistributionField, t: f64) -> LabResult<DistributionField> {
        self.grid.same_as(f.grid())?;
        if !(t >= 0.0) {
            return Err(LabError::param("t", format!("{t} must be nonnegative")));
        }
        f.like(self.apply_fn(f.values(), |l| (-t * l).exp()))
    }
}

/// `f(t) = e^{-tM} f0`. Builds the eigendecomposition on every call; use
/// [`LinearPropagator`] to evaluate several times.
pub fn evolve_linear(
    m: &LinearOperatorMatrix,
    f0: &DistributionField,
    t: f64,
) -> LabResult<DistributionField> {
    LinearPropagator::new(m).evolve(f0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{FieldRole, VelocityGrid};
    use crate::kernel::KernelParams;
    use crate::operators::OperatorKind;

    fn toy() -> LinearOperatorMatrix {
        let g = VelocityGrid::new(3.0, 8).unwrap();
        let n = g.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let d = i.abs_diff(j);
            match d {
                0 => 2.0 + (i % 5) as f64,
                1 => -0.7,
                _ => 0.0,
            }
        });
        let kind = OperatorKind::Boltzmann(KernelParams::coulomb(1e-2).unwrap());
        LinearOperatorMatrix::from_matrix(g, kind, m).unwrap()
    }

    #[test]
    fn semigroup_and_identity() {
        let m = toy();
        let p = LinearPropagator::new(&m);
        let f = DistributionField::from_fn(*m.grid(), FieldRole::Perturbation, |v| {
            (v[0] - v[1] * v[2]) * (-v.norm_squared() / 4.0).exp()
        });
        let a = p.evolve(&p.evolve(&f, 0.3).unwrap(), 0.45).unwrap();
        let b = p.evolve(&f, 0.75).unwrap();
        let d = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-10 * f.values().iter().fold(0.0f64, |m, x| m.max(x.abs())));
        let z = p.evolve(&f, 0.0).unwrap();
        let d = z
            .values()
            .iter()
            .zip(f.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);
        assert!(p.evolve(&f, -1.0).is_err());
    }

    #[test]
    fn matches_taylor_series_for_small_time() {
        let m = toy();
        let p = LinearPropagator::new(&m);
        let x: Vec<f64> = (0..m.grid().len())
            .map(|i| ((i * 37) % 11) as f64 - 5.0)
            .collect();
        let t = 1e-4;
        let mx = m.matrix() * DVector::from_column_slice(&x);
        let mmx = m.matrix() * &mx;
        let y = p.apply_fn(&x, |l| (-t * l).exp());
        for i in 0..x.len() {
            let taylor = x[i] - t * mx[i] + 0.5 * t * t * mmx[i];
            assert!((y[i] - taylor).abs() < 1e-8, "{i}");
        }
    }
}

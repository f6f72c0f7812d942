//! Spectral gap on the microscopic subspace.

use nalgebra::DMatrix;
use serde::Serialize;

use super::basis::ProjectionBasis;
use super::matrix::LinearOperatorMatrix;
use crate::error::{LabError, LabResult};
use crate::kernel::polynomial_weight;

/// Result of [`spectral_gap`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapEstimate {
    /// `min <M f, f> / |f|^2_{L^2_{gamma/2}}` over `f` orthogonal to the
    /// collision invariants.
    pub gap: f64,
    /// The same minimum in the unweighted lattice norm.
    pub unweighted: f64,
    /// Largest `|M e_k| / |M|` over the five invariants.
    pub null_residual: f64,
}

/// Smallest eigenvalue of `A = W^{-1/2} M W^{-1/2}`, `W = diag <v>^gamma`,
/// on the complement of `U = span W^{-1/2} e_k`.
///
/// The complement is isolated by a rank-five shift: with `Q` an orthonormal
/// basis of `U` and `P = I - Q Q^T`, the matrix `P A P + s Q Q^T` has the
/// spectrum of `A` on the complement plus `s` five times, and `s` is taken
/// above every eigenvalue of `A`.
pub fn spectral_gap(
    m: &LinearOperatorMatrix,
    basis: &ProjectionBasis,
    gamma: f64,
) -> LabResult<GapEstimate> {
    m.grid().same_as(basis.grid())?;
    let grid = *m.grid();
    let nn = grid.len();
    let nodes = grid.nodes();
    let inv_sqrt_w: Vec<f64> = nodes
        .iter()
        .map(|v| polynomial_weight(-0.5 * gamma, v))
        .collect();
    let (unweighted, norm) = restricted_extremes(m.matrix().clone(), basis, &vec![1.0; nn]);
    let a = DMatrix::from_fn(nn, nn, |i, j| {
        inv_sqrt_w[i] * m.matrix()[(i, j)] * inv_sqrt_w[j]
    });
    let (gap, _) = restricted_extremes(a, basis, &inv_sqrt_w);

    let mut null_residual = 0.0f64;
    for e in basis.fields() {
        let me = m.apply(e)?;
        null_residual = null_residual.max(me.l2_norm() / (norm * e.l2_norm()));
    }
    if !(gap > 0.0) {
        return Err(LabError::Numerical(format!(
            "non-positive spectral gap {gap:e}; refine the lattice or check the assembly"
        )));
    }
    Ok(GapEstimate {
        gap,
        unweighted,
        null_residual,
    })
}

/// Smallest eigenvalue on the complement, and the largest magnitude over
/// the complement together with the null block.
fn restricted_extremes(mut a: DMatrix<f64>, basis: &ProjectionBasis, scale: &[f64]) -> (f64, f64) {
    let nn = a.nrows();
    let u = DMatrix::from_fn(nn, 5, |i, k| basis.fields()[k].values()[i] * scale[i]);
    let q = u.qr().q();
    // Gershgorin bound on the spectrum of A
    let bound = (0..nn)
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let shift = 2.0 * bound + 1.0;
    let aq = &a * &q;
    let qaq = q.transpose() * &aq;
    let null_block = qaq.clone().symmetric_eigenvalues().amax();
    // P A P = A - Q (Q^T A) - (A Q) Q^T + Q (Q^T A Q) Q^T
    a -= &q * aq.transpose();
    a -= &aq * q.transpose();
    a += &q * (qaq + DMatrix::identity(5, 5) * shift) * q.transpose();
    let mut e: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|x, y| x.total_cmp(y));
    e.truncate(nn - 5);
    let top = e.iter().fold(null_block, |m, x| m.max(x.abs()));
    (e[0], top)
}

//! Landau operator in flux-divergence form.
//!
//! `Q^L(g, h) = div U` with
//! `U(v_i) = sum_{j != i} a(v_i - v_j) [g_j (grad h)_i - (grad g)_j h_i] h^3`.
//! Gradients use fourth-order differences relative to the Maxwellian,
//! one-sided on the two outermost layers; the divergence is centred with
//! the flux extended by zero. The scatter scheme with an
//! [`OperatorKind::Landau`](super::OperatorKind) plan is the conservative
//! discretization; this form is an independent cross-check.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bilinear::SQRT_MU_FLOOR;
use crate::error::LabResult;
use crate::grid::{maxwellian, DistributionField, FieldRole, VelocityGrid};
use crate::par;

/// Which discretization of the Landau operator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum LandauScheme {
    /// Grazing limit of the conservative scatter scheme.
    #[default]
    GrazingLimit,
    /// Flux-divergence form with fourth-order differences.
    FluxDivergence,
}

/// Fourth-order derivative of `f` along `axis`.
pub fn gradient4(grid: &VelocityGrid, f: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n();
    let inv = 1.0 / (12.0 * grid.spacing());
    let stride = [n * n, n, 1][axis];
    let mut out = vec![0.0; f.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let k = grid.unravel(idx)[axis];
        let at = |d: isize| f[(idx as isize + d * stride as isize) as usize];
        *o = inv
            * if k >= 2 && k + 2 < n {
                at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)
            } else if k == 0 {
                -25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)
            } else if k == 1 {
                -3.0 * at(-1) - 10.0 * at(0) + 18.0 * at(1) - 6.0 * at(2) + at(3)
            } else if k == n - 1 {
                25.0 * at(0) - 48.0 * at(-1) + 36.0 * at(-2) - 16.0 * at(-3) + 3.0 * at(-4)
            } else {
                3.0 * at(1) + 10.0 * at(0) - 18.0 * at(-1) + 6.0 * at(-2) - at(-3)
            };
    }
    out
}

/// Centred fourth-order difference with the flux extended by zero outside
/// the box. Its column sums vanish, so mass is conserved to round-off.
fn divergence4(grid: &VelocityGrid, u: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n() as isize;
    let inv = 1.0 / (12.0 * grid.spacing());
    let stride = [n * n, n, 1][axis];
    (0..u.len())
        .map(|idx| {
            let k = grid.unravel(idx)[axis] as isize;
            let at = |d: isize| {
                if k + d < 0 || k + d >= n {
                    0.0
                } else {
                    u[(idx as isize + d * stride) as usize]
                }
            };
            inv * (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2))
        })
        .collect()
}

/// Gradient written as `grad f = -v f + mu grad(f / mu)`, with the
/// difference stencil applied to `f / mu`. Exact for `mu` times a quartic,
/// which makes the Maxwellian an exact equilibrium of the flux.
fn gradient(grid: &VelocityGrid, f: &[f64]) -> [Vec<f64>; 3] {
    let mu = maxwellian(grid);
    let ratio: Vec<f64> = f.iter().zip(mu.values()).map(|(a, m)| a / m).collect();
    let mut out = [
        gradient4(grid, &ratio, 0),
        gradient4(grid, &ratio, 1),
        gradient4(grid, &ratio, 2),
    ];
    for (a, da) in out.iter_mut().enumerate() {
        for (i, d) in da.iter_mut().enumerate() {
            *d = -grid.node(i)[a] * f[i] + mu.values()[i] * *d;
        }
    }
    out
}

/// The flux `U(v_i)` at every node, component-major.
pub fn landau_flux(
    g: &DistributionField,
    h: &DistributionField,
    k_const: f64,
) -> LabResult<[Vec<f64>; 3]> {
    g.grid().same_as(h.grid())?;
    let grid = *g.grid();
    let (gv, hv) = (g.values(), h.values());
    let dg = gradient(&grid, gv);
    let dh = gradient(&grid, hv);
    let nodes = grid.nodes();
    let scale = 2.0 * PI * k_const * grid.cell_volume();
    let flux: Vec<[f64; 3]> = par::map_indexed(grid.len(), |i| {
        let vi = nodes[i];
        let dhi = [dh[0][i], dh[1][i], dh[2][i]];
        let mut u = [0.0; 3];
        for j in 0..grid.len() {
            if j == i {
                continue;
            }
            let z = vi - nodes[j];
            let r2 = z.norm_squared();
            let r = r2.sqrt();
            let x = [
                gv[j] * dhi[0] - dg[0][j] * hv[i],
                gv[j] * dhi[1] - dg[1][j] * hv[i],
                gv[j] * dhi[2] - dg[2][j] * hv[i],
            ];
            // a(z) x = 2 pi K |z|^{-1} (x - z (z . x) / |z|^2)
            let zx = (z[0] * x[0] + z[1] * x[1] + z[2] * x[2]) / r2;
            for a in 0..3 {
                u[a] += (x[a] - z[a] * zx) / r;
            }
        }
        [u[0] * scale, u[1] * scale, u[2] * scale]
    });
    let mut out = [
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
    ];
    for (i, u) in flux.iter().enumerate() {
        for a in 0..3 {
            out[a][i] = u[a];
        }
    }
    Ok(out)
}

/// `Q^L(g, h)` in flux-divergence form.
pub fn landau_bilinear(
    g: &DistributionField,
    h: &DistributionField,
    k_const: f64,
) -> LabResult<DistributionField> {
    let grid = *g.grid();
    let u = landau_flux(g, h, k_const)?;
    let mut div = vec![0.0; grid.len()];
    for (a, ua) in u.iter().enumerate() {
        for (d, x) in div.iter_mut().zip(divergence4(&grid, ua, a)) {
            *d += x;
        }
    }
    DistributionField::new(grid, div, FieldRole::Density)
}

/// `Gamma^L(g, h) = mu^{-1/2} Q^L(mu^{1/2} g, mu^{1/2} h)` in flux form.
pub fn gamma_landau(
    g: &DistributionField,
    h: &DistributionField,
    k_const: f64,
) -> LabResult<DistributionField> {
    g.grid().same_as(h.grid())?;
    let sm: Vec<f64> = maxwellian(g.grid())
        .values()
        .iter()
        .map(|x| x.sqrt())
        .collect();
    let gg = g.like(g.values().iter().zip(&sm).map(|(a, b)| a * b).collect())?;
    let hh = h.like(h.values().iter().zip(&sm).map(|(a, b)| a * b).collect())?;
    let q = landau_bilinear(&gg, &hh, k_const)?;
    let vals = q
        .values()
        .iter()
        .zip(&sm)
        .map(|(x, s)| if *s > SQRT_MU_FLOOR { x / s } else { 0.0 })
        .collect();
    DistributionField::new(*g.grid(), vals, FieldRole::Perturbation)
}

/// Boolean mask of nodes at least two layers from every face, where the
/// centred stencils apply.
pub fn interior_mask(grid: &VelocityGrid) -> Vec<bool> {
    let n = grid.n();
    (0..grid.len())
        .map(|i| grid.unravel(i).iter().all(|&k| k >= 2 && k + 2 < n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Vec3;

    #[test]
    fn gradient_is_fourth_order_exact() {
        let grid = VelocityGrid::new(3.0, 8).unwrap();
        let f = DistributionField::from_fn(grid, FieldRole::Basis, |v| {
            v[0].powi(4) - 2.0 * v[0] * v[1] + v[2].powi(3)
        });
        let d = gradient4(&grid, f.values(), 0);
        for (i, x) in d.iter().enumerate() {
            let v = grid.node(i);
            assert!((x - (4.0 * v[0].powi(3) - 2.0 * v[1])).abs() < 1e-11);
        }
    }

    #[test]
    fn maxwellian_is_an_equilibrium() {
        let grid = VelocityGrid::new(5.0, 12).unwrap();
        let mu = maxwellian(&grid);
        let q = landau_bilinear(&mu, &mu, 1.0).unwrap();
        let shifted = DistributionField::from_fn(grid, FieldRole::Density, |v| {
            crate::grid::maxwellian_at(&(v - Vec3::new(0.5, -0.3, 0.2))) * (1.0 + 0.2 * v[2])
        });
        let scale = landau_bilinear(&shifted, &shifted, 1.0).unwrap().l2_norm();
        assert!(q.l2_norm() <= 1e-4 * scale, "{} vs {scale}", q.l2_norm());
    }

    #[test]
    fn mass_is_conserved_up_to_the_tail() {
        let grid = VelocityGrid::new(6.5, 14).unwrap();
        let g = DistributionField::from_fn(grid, FieldRole::Density, |v| {
            crate::grid::maxwellian_at(&(v - Vec3::new(0.4, 0.0, -0.2))) * (1.0 + 0.3 * v[0] * v[1])
        });
        let q = landau_bilinear(&g, &g, 1.0).unwrap();
        let scale: f64 = q.values().iter().map(|x| x.abs()).sum::<f64>() * grid.cell_volume();
        assert!(
            q.integral().abs() <= 1e-6 * scale,
            "{} vs {scale}",
            q.integral()
        );
    }
}

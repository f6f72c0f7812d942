//! Real spherical harmonics on radial shells and the angular multiplier
//! `W^eps((-Delta_{S^2})^{1/2})`.

use std::f64::consts::PI;

use super::interp::{keys_eval, trilinear_eval};
use super::{DistributionField, VelocityGrid};
use crate::error::{LabError, LabResult};
use crate::kernel::{CharacteristicWeight, Vec3};
use crate::quad::gauss_legendre;

/// Index of `(l, m)` in a flat table, `m in -l..=l`.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Real orthonormal spherical harmonics up to `l_max` at a unit vector.
pub fn real_harmonics(l_max: usize, dir: &Vec3) -> Vec<f64> {
    let x = dir[2].clamp(-1.0, 1.0);
    let sx = (1.0 - x * x).max(0.0).sqrt();
    let phi = dir[1].atan2(dir[0]);
    let nl = l_max + 1;
    // normalised associated Legendre functions p[l][m]
    let mut p = vec![vec![0.0; nl]; nl];
    p[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..nl {
        let mf = m as f64;
        p[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sx * p[m - 1][m - 1];
    }
    for m in 0..nl {
        if m + 1 < nl {
            p[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * x * p[m][m];
        }
        for l in m + 2..nl {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lp = lf - 1.0;
            let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - p[l - 2][m] / a_prev);
        }
    }
    let mut out = vec![0.0; nl * nl];
    for l in 0..nl {
        out[l * l + l] = p[l][0];
        for m in 1..=l {
            let mf = m as f64;
            out[l * l + l + m] = std::f64::consts::SQRT_2 * p[l][m] * (mf * phi).cos();
            out[l * l + l - m] = std::f64::consts::SQRT_2 * p[l][m] * (mf * phi).sin();
        }
    }
    out
}

/// Shell radii, angular nodes and the harmonic table used to expand a field
/// shell by shell.
#[derive(Debug, Clone)]
pub struct SphericalHarmonicPlan {
    l_max: usize,
    radii: Vec<f64>,
    dirs: Vec<Vec3>,
    weights: Vec<f64>,
    table: Vec<Vec<f64>>,
}

impl SphericalHarmonicPlan {
    /// Plan with the minimal angular grid for `l_max` and `n_shells` radii
    /// at Gauss–Legendre points of `(0, r_max]`.
    pub fn new(l_max: usize, n_shells: usize, r_max: f64) -> LabResult<Self> {
        Self::with_resolution(l_max, n_shells, r_max, l_max + 1, 2 * l_max + 1)
    }

    /// Default plan for a grid: `l_max = 8`, shells out to the farthest node.
    pub fn for_grid(grid: &VelocityGrid) -> LabResult<Self> {
        let r = 3f64.sqrt() * (grid.half_width() - 0.5 * grid.spacing());
        Self::new(8, 2 * grid.n(), r)
    }

    pub fn with_resolution(
        l_max: usize,
        n_shells: usize,
        r_max: f64,
        n_theta: usize,
        n_phi: usize,
    ) -> LabResult<Self> {
        if n_theta < l_max + 1 || n_phi < 2 * l_max + 1 {
            return Err(LabError::param(
                "l_max",
                format!(
                    "l_max = {l_max} needs at least {} x {} angular nodes",
                    l_max + 1,
                    2 * l_max + 1
                ),
            ));
        }
        if n_shells == 0 || !(r_max > 0.0) {
            return Err(LabError::param(
                "n_shells",
                "need at least one shell and r_max > 0",
            ));
        }
        let (z, wz) = gauss_legendre(n_theta);
        let mut dirs = Vec::new();
        let mut weights = Vec::new();
        for (zi, wi) in z.iter().zip(&wz) {
            let rho = (1.0 - zi * zi).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                dirs.push(Vec3::new(rho * phi.cos(), rho * phi.sin(), *zi));
                weights.push(wi * 2.0 * PI / n_phi as f64);
            }
        }
        let (x, _) = gauss_legendre(n_shells);
        let radii = x.iter().map(|xi| 0.5 * r_max * (xi + 1.0)).collect();
        let table = dirs.iter().map(|d| real_harmonics(l_max, d)).collect();
        Ok(Self {
            l_max,
            radii,
            dirs,
            weights,
            table,
        })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.dirs
    }

    pub fn n_coeffs(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    /// Harmonic coefficients of values sampled at the angular nodes.
    pub fn analyze(&self, samples: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.n_coeffs()];
        for ((y, w), s) in self.table.iter().zip(&self.weights).zip(samples) {
            for (ck, yk) in c.iter_mut().zip(y) {
                *ck += w * s * yk;
            }
        }
        c
    }

    /// Values at the angular nodes of a harmonic expansion.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.table
            .iter()
            .map(|y| y.iter().zip(coeffs).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Discrete Gram matrix of the harmonics on the angular grid.
    pub fn gram_defect(&self) -> f64 {
        let k = self.n_coeffs();
        let mut worst = 0.0f64;
        for a in 0..k {
            for b in 0..k {
                let s: f64 = self
                    .table
                    .iter()
                    .zip(&self.weights)
                    .map(|(y, w)| w * y[a] * y[b])
                    .sum();
                let e = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - e).abs());
            }
        }
        worst
    }
}

/// `W^eps((-Delta_{S^2})^{1/2}) f`: per shell, expand in `Y_l^m`, scale by
/// `W^eps(sqrt(l(l+1)))`, and map back to the lattice.
///
/// Shell samples come from Keys cubic interpolation, falling back to
/// trilinear with zero extension in the outermost cells. Lattice values are
/// rebuilt by evaluating the scaled expansion exactly in angle and
/// linearly in radius between neighbouring shells.
pub fn apply_anisotropic_weight(
    f: &DistributionField,
    weight: &CharacteristicWeight,
    plan: &SphericalHarmonicPlan,
) -> LabResult<DistributionField> {
    apply_angular_multiplier(f, plan, |l| {
        weight.eval_radial(((l * (l + 1)) as f64).sqrt())
    })
}

/// Generic angular multiplier `m(l)` acting on each harmonic degree.
pub fn apply_angular_multiplier(
    f: &DistributionField,
    plan: &SphericalHarmonicPlan,
    m: impl Fn(usize) -> f64,
) -> LabResult<DistributionField> {
    let scale: Vec<f64> = (0..=plan.l_max)
        .flat_map(|l| std::iter::repeat_n(m(l), 2 * l + 1))
        .collect();
    let shells: Vec<Vec<f64>> = plan
        .radii
        .iter()
        .map(|&r| {
            let samples: Vec<f64> = plan
                .dirs
                .iter()
                .map(|d| {
                    let p = d * r;
                    keys_eval(f, &p).unwrap_or_else(|| trilinear_eval(f, &p))
                })
                .collect();
            let mut c = plan.analyze(&samples);
            for (ck, s) in c.iter_mut().zip(&scale) {
                *ck *= s;
            }
            c
        })
        .collect();
    let g = f.grid();
    let radii = &plan.radii;
    let values = (0..g.len())
        .map(|idx| {
            let v = g.node(idx);
            let r = v.norm();
            if r == 0.0 {
                return shells[0][0] * (1.0 / (4.0 * PI)).sqrt();
            }
            let y = real_harmonics(plan.l_max, &(v / r));
            let eval = |k: usize| -> f64 { y.iter().zip(&shells[k]).map(|(a, b)| a * b).sum() };
            let last = radii.len() - 1;
            if r <= radii[0] {
                eval(0)
            } else if r >= radii[last] {
                eval(last)
            } else {
                let k = radii.partition_point(|&x| x <= r) - 1;
                let t = (r - radii[k]) / (radii[k + 1] - radii[k]);
                (1.0 - t) * eval(k) + t * eval(k + 1)
            }
        })
        .collect();
    f.like(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FieldRole;

    #[test]
    fn orthonormal_on_angular_grid() {
        let plan = SphericalHarmonicPlan::new(8, 4, 5.0).unwrap();
        assert!(plan.gram_defect() < 1e-10);
        assert!(SphericalHarmonicPlan::with_resolution(8, 4, 5.0, 6, 17).is_err());
    }

    #[test]
    fn known_low_order_values() {
        let d = Vec3::new(0.36, -0.48, 0.8);
        let y = real_harmonics(2, &d);
        let c0 = (1.0 / (4.0 * PI)).sqrt();
        assert!((y[0] - c0).abs() < 1e-15);
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        assert!((y[2].abs() - c1 * 0.8).abs() < 1e-14);
        assert!((y[3].abs() - c1 * 0.36).abs() < 1e-14);
        assert!((y[1].abs() - c1 * 0.48).abs() < 1e-14);
        let c20 = (5.0 / (16.0 * PI)).sqrt();
        assert!((y[6] - c20 * (3.0 * 0.64 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn band_limited_roundtrip() {
        let plan = SphericalHarmonicPlan::new(6, 2, 3.0).unwrap();
        let coeffs: Vec<f64> = (0..plan.n_coeffs())
            .map(|k| ((k * 7 % 11) as f64 - 5.0) / 3.0)
            .collect();
        let vals = plan.synthesize(&coeffs);
        let back = plan.analyze(&vals);
        for (a, b) in back.iter().zip(&coeffs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_and_dipole_fields() {
        let g = VelocityGrid::new(6.0, 24).unwrap();
        let plan = SphericalHarmonicPlan::for_grid(&g).unwrap();
        let w = CharacteristicWeight::new(1e-2).unwrap();
        let radial = DistributionField::from_fn(g, FieldRole::Perturbation, |v| {
            (-0.5 * v.norm_squared()).exp()
        });
        let out = apply_anisotropic_weight(&radial, &w, &plan).unwrap();
        let mut diff = radial.clone();
        for (d, o) in diff.values_mut().iter_mut().zip(out.values()) {
            *d -= o;
        }
        assert!(diff.l2_norm() < 0.05 * radial.l2_norm());

        let dip = DistributionField::from_fn(g, FieldRole::Perturbation, |v| {
            v[2] * (-0.5 * v.norm_squared()).exp()
        });
        let out = apply_anisotropic_weight(&dip, &w, &plan).unwrap();
        let expect = w.eval_radial(2f64.sqrt());
        let mut diff = dip.clone();
        for (d, o) in diff.values_mut().iter_mut().zip(out.values()) {
            *d = expect * *d - o;
        }
        assert!(diff.l2_norm() < 0.1 * expect * dip.l2_norm());
    }
}

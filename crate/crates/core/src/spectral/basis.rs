//! Null space of the linearized operators and the macro-micro split.

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::grid::{maxwellian, DistributionField, FieldRole, VelocityGrid};

/// Discretely orthonormal basis of `span{mu^{1/2}, v mu^{1/2}, |v|^2 mu^{1/2}}`.
#[derive(Debug, Clone)]
pub struct ProjectionBasis {
    grid: VelocityGrid,
    fields: Vec<DistributionField>,
    /// Row `k`: coordinates of `e_k` in the raw family
    /// `(1, v1, v2, v3, |v|^2) mu^{1/2}`.
    to_raw: Matrix5<f64>,
}

/// Macroscopic coordinates: `Pf = (a + b.v + c|v|^2) mu^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    pub a: f64,
    pub b: [f64; 3],
    pub c: f64,
}

impl MacroState {
    /// The continuum formulas
    /// `a = int (5/2 - |v|^2/2) mu^{1/2} f`, `b = int v mu^{1/2} f`,
    /// `c = int (|v|^2/6 - 1/2) mu^{1/2} f`, summed on the lattice.
    pub fn from_moments(f: &DistributionField) -> Self {
        let sm: Vec<f64> = maxwellian(f.grid())
            .values()
            .iter()
            .map(|x| x.sqrt())
            .collect();
        let grid = f.grid();
        let mut m = [0.0; 5];
        for (i, (x, s)) in f.values().iter().zip(&sm).enumerate() {
            let v = grid.node(i);
            let r2 = v.norm_squared();
            let w = x * s;
            m[0] += (2.5 - 0.5 * r2) * w;
            m[1] += v[0] * w;
            m[2] += v[1] * w;
            m[3] += v[2] * w;
            m[4] += (r2 / 6.0 - 0.5) * w;
        }
        let h3 = grid.cell_volume();
        Self {
            a: m[0] * h3,
            b: [m[1] * h3, m[2] * h3, m[3] * h3],
            c: m[4] * h3,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.c.is_finite() && self.b.iter().all(|x| x.is_finite())
    }
}

impl ProjectionBasis {
    /// Orthonormalizes `{1, v1, v2, v3, (|v|^2 - 3)/6^{1/2}} mu^{1/2}` in the
    /// lattice inner product by modified Gram–Schmidt, applied twice.
    pub fn new(grid: &VelocityGrid) -> LabResult<Self> {
        let sm: Vec<f64> = maxwellian(grid).values().iter().map(|x| x.sqrt()).collect();
        let nodes = grid.nodes();
        let raw = |k: usize| -> Vec<f64> {
            nodes
                .iter()
                .zip(&sm)
                .map(|(v, s)| {
                    s * match k {
                        0 => 1.0,
                        1..=3 => v[k - 1],
                        _ => v.norm_squared(),
                    }
                })
                .collect()
        };
        let h3 = grid.cell_volume();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * h3;
        // start from the continuum-orthonormal combination
        let s6 = 6f64.sqrt();
        let mut coef = Matrix5::<f64>::identity();
        coef[(4, 0)] = -3.0 / s6;
        coef[(4, 4)] = 1.0 / s6;
        let raws: Vec<Vec<f64>> = (0..5).map(raw).collect();
        let combine = |c: &Vector5<f64>| -> Vec<f64> {
            let mut out = vec![0.0; grid.len()];
            for (k, r) in raws.iter().enumerate() {
                if c[k] != 0.0 {
                    for (o, x) in out.iter_mut().zip(r) {
                        *o += c[k] * x;
                    }
                }
            }
            out
        };
        let mut vecs: Vec<Vec<f64>> = (0..5).map(|k| combine(&coef.row(k).transpose())).collect();
        for _ in 0..2 {
            for k in 0..5 {
                for j in 0..k {
                    let p = dot(&vecs[k], &vecs[j]);
                    let (head, tail) = vecs.split_at_mut(k);
                    for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                        *x -= p * y;
                    }
                    let row_j = coef.row(j).into_owned();
                    let mut row_k = coef.row_mut(k);
                    row_k -= row_j * p;
                }
                let nrm = dot(&vecs[k], &vecs[k]).sqrt();
                if !(nrm > 1e-8) {
                    return Err(LabError::Resource(
                        "lattice too coarse to resolve the collision invariants".into(),
                    ));
                }
                for x in vecs[k].iter_mut() {
                    *x /= nrm;
                }
                let mut row_k = coef.row_mut(k);
                row_k /= nrm;
            }
        }
        let fields = vecs
            .into_iter()
            .map(|v| DistributionField::new(*grid, v, FieldRole::Basis))
            .collect::<LabResult<Vec<_>>>()?;
        Ok(Self {
            grid: *grid,
            fields,
            to_raw: coef,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn fields(&self) -> &[DistributionField] {
        &self.fields
    }

    /// Largest entry of `G - I` for the discrete Gram matrix `G`.
    pub fn gram_error(&self) -> f64 {
        let mut e = 0.0f64;
        for i in 0..5 {
            for j in 0..5 {
                let g = self.fields[i].inner(&self.fields[j]).expect("same grid");
                let target = if i == j { 1.0 } else { 0.0 };
                e = e.max((g - target).abs());
            }
        }
        e
    }

    /// Coordinates `<f, e_k>`.
    pub fn coordinates(&self, f: &DistributionField) -> LabResult<[f64; 5]> {
        self.grid.same_as(f.grid())?;
        let mut c = [0.0; 5];
        for (k, e) in self.fields.iter().enumerate() {
            c[k] = e.inner(f)?;
        }
        Ok(c)
    }
}

/// `(Pf, (a, b, c))` with `P` the discrete orthogonal projection onto the
/// null space. The macroscopic coordinates are those of `Pf` itself, so
/// they agree with [`MacroState::from_moments`] up to lattice error.
pub fn project_null(
    basis: &ProjectionBasis,
    f: &DistributionField,
) -> LabResult<(DistributionField, MacroState)> {
    let c = basis.coordinates(f)?;
    let mut out = vec![0.0; f.values().len()];
    for (k, e) in basis.fields.iter().enumerate() {
        for (o, x) in out.iter_mut().zip(e.values()) {
            *o += c[k] * x;
        }
    }
    let raw = basis.to_raw.transpose() * Vector5::from(c);
    let state = MacroState {
        a: raw[0],
        b: [raw[1], raw[2], raw[3]],
        c: raw[4],
    };
    Ok((f.like(out)?, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Vec3;

    fn grid() -> VelocityGrid {
        VelocityGrid::new(6.0, 16).unwrap()
    }

    fn sqrt_mu(v: &Vec3) -> f64 {
        (-v.norm_squared() / 4.0).exp() / (2.0 * std::f64::consts::PI).powf(0.75)
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = ProjectionBasis::new(&grid()).unwrap();
        assert!(b.gram_error() < 1e-10, "{}", b.gram_error());
    }

    #[test]
    fn macro_states_of_simple_fields() {
        let g = grid();
        let b = ProjectionBasis::new(&g).unwrap();
        let f = DistributionField::from_fn(g, FieldRole::Perturbation, sqrt_mu);
        let (p, m) = project_null(&b, &f).unwrap();
        assert!((m.a - 1.0).abs() < 1e-10 && m.c.abs() < 1e-10 && m.b[0].abs() < 1e-10);
        let d = p
            .values()
            .iter()
            .zip(f.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);
        let f = DistributionField::from_fn(g, FieldRole::Perturbation, |v| v[0] * sqrt_mu(v));
        let (_, m) = project_null(&b, &f).unwrap();
        assert!((m.b[0] - 1.0).abs() < 1e-10 && m.b[1].abs() < 1e-10 && m.a.abs() < 1e-10);
        // v1^2 mu^{1/2}: Gaussian moments 1 and 5 give (a, c) = (0, 1/3)
        let f =
            DistributionField::from_fn(g, FieldRole::Perturbation, |v| v[0] * v[0] * sqrt_mu(v));
        let (_, m) = project_null(&b, &f).unwrap();
        assert!(m.a.abs() < 1e-6 && (m.c - 1.0 / 3.0).abs() < 1e-6, "{m:?}");
        let cont = MacroState::from_moments(&f);
        assert!(
            cont.a.abs() < 1e-6 && (cont.c - 1.0 / 3.0).abs() < 1e-6,
            "{cont:?}"
        );
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let g = grid();
        let b = ProjectionBasis::new(&g).unwrap();
        let f = DistributionField::from_fn(g, FieldRole::Perturbation, |v| {
            (1.0 + v[0] * v[1] - v[2].powi(3)) * (-v.norm_squared() / 3.0).exp()
        });
        let (p, _) = project_null(&b, &f).unwrap();
        let (pp, _) = project_null(&b, &p).unwrap();
        let scale = p.l2_norm();
        let d = pp
            .values()
            .iter()
            .zip(p.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-10 * scale);
        let micro = f
            .like(
                f.values()
                    .iter()
                    .zip(p.values())
                    .map(|(x, y)| x - y)
                    .collect(),
            )
            .unwrap();
        assert!(p.inner(&micro).unwrap().abs() < 1e-10 * scale * micro.l2_norm());
    }
}

//! Thirteen-moment basis and its Gram matrix.

use nalgebra::DMatrix;

use crate::error::{LabError, LabResult};
use crate::grid::{maxwellian, DistributionField, FieldRole, VelocityGrid};

/// Exponents `(a1, a2, a3)` of one term `c v1^a1 v2^a2 v3^a3`.
type Monomial = ([u32; 3], f64);

/// The polynomial factor `p_k` of `e_k = p_k mu^{1/2}`, `k = 1..13`.
fn polynomial(k: usize) -> Vec<Monomial> {
    let axis = |i: usize, p: u32| {
        let mut a = [0; 3];
        a[i] = p;
        a
    };
    match k {
        1 => vec![([0, 0, 0], 1.0)],
        2..=4 => vec![(axis(k - 2, 1), 1.0)],
        5..=7 => vec![(axis(k - 5, 2), 1.0)],
        8 => vec![([1, 1, 0], 1.0)],
        9 => vec![([0, 1, 1], 1.0)],
        10 => vec![([1, 0, 1], 1.0)],
        11..=13 => {
            let i = k - 11;
            (0..3)
                .map(|j| {
                    let mut a = axis(j, 2);
                    a[i] += 1;
                    (a, 1.0)
                })
                .collect()
        }
        _ => unreachable!("thirteen basis functions"),
    }
}

fn double_factorial_odd(a: u32) -> f64 {
    // (a - 1)!! for even a
    (1..a).step_by(2).map(f64::from).product()
}

/// `int v^alpha mu dv = prod (alpha_i - 1)!!`, zero if any exponent is odd.
pub fn gaussian_moment(alpha: [u32; 3]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        0.0
    } else {
        alpha.iter().map(|&a| double_factorial_odd(a)).product()
    }
}

/// `a_ij = int p_i p_j mu`, by expanding the product symbolically.
pub fn analytic_gram() -> DMatrix<f64> {
    DMatrix::from_fn(13, 13, |i, j| {
        let mut s = 0.0;
        for (a, ca) in polynomial(i + 1) {
            for (b, cb) in polynomial(j + 1) {
                s += ca * cb * gaussian_moment([a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
            }
        }
        s
    })
}

/// `e_1 = mu^{1/2}`, `e_{2..4} = v_i mu^{1/2}`, `e_{5..7} = v_i^2 mu^{1/2}`,
/// `e_8, e_9, e_10 = v1 v2, v2 v3, v3 v1` times `mu^{1/2}`, and
/// `e_{11..13} = |v|^2 v_i mu^{1/2}`.
#[derive(Debug, Clone)]
pub struct ThirteenMomentBasis {
    fields: Vec<DistributionField>,
}

impl ThirteenMomentBasis {
    pub fn new(grid: &VelocityGrid) -> Self {
        let sm: Vec<f64> = maxwellian(grid).values().iter().map(|x| x.sqrt()).collect();
        let fields = (1..=13)
            .map(|k| {
                let terms = polynomial(k);
                let vals = grid
                    .nodes()
                    .iter()
                    .zip(&sm)
                    .map(|(v, s)| {
                        let p: f64 = terms
                            .iter()
                            .map(|(a, c)| {
                                c * v[0].powi(a[0] as i32)
                                    * v[1].powi(a[1] as i32)
                                    * v[2].powi(a[2] as i32)
                            })
                            .sum();
                        p * s
                    })
                    .collect();
                DistributionField::new(*grid, vals, FieldRole::Basis).expect("lattice-sized")
            })
            .collect();
        Self { fields }
    }

    pub fn fields(&self) -> &[DistributionField] {
        &self.fields
    }
}

/// Discrete Gram matrix `a_ij = <e_i, e_j>`. Fails when the lattice is too
/// coarse for `A` to be numerically positive definite.
pub fn gram_matrix(basis: &ThirteenMomentBasis) -> LabResult<DMatrix<f64>> {
    let f = &basis.fields;
    let mut a = DMatrix::zeros(13, 13);
    for i in 0..13 {
        for j in i..13 {
            let x = f[i].inner(&f[j])?;
            a[(i, j)] = x;
            a[(j, i)] = x;
        }
    }
    let eig = a.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| {
        (l.min(x), h.max(x.abs()))
    });
    if !(lo > 1e-10 * hi) {
        return Err(LabError::Resource(format!(
            "Gram matrix is not positive definite (smallest eigenvalue {lo:e}); refine the lattice"
        )));
    }
    Ok(a)
}

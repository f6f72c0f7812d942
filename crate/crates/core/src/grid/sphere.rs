//! Quadrature rules on the unit sphere.

use std::f64::consts::PI;

use crate::error::{LabError, LabResult};
use crate::kernel::Vec3;
use crate::quad::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereBackend {
    /// Gauss–Legendre in `cos(theta)` times a uniform azimuth grid.
    ProductGauss,
    /// Octahedrally symmetric Lebedev sets (degrees 3, 5, 7, 9, 11).
    Lebedev,
}

/// Nodes and positive weights on `S^2`, exact for polynomials up to `degree`.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl SphereQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

pub const LEBEDEV_DEGREES: [usize; 5] = [3, 5, 7, 9, 11];

/// Builds a rule exact to at least `degree`.
pub fn build_sphere_quadrature(
    degree: usize,
    backend: SphereBackend,
) -> LabResult<SphereQuadrature> {
    match backend {
        SphereBackend::ProductGauss => {
            if degree == 0 || degree > 127 {
                return Err(LabError::UnsupportedOrder(degree));
            }
            Ok(product_rule(degree))
        }
        SphereBackend::Lebedev => lebedev(degree),
    }
}

fn product_rule(degree: usize) -> SphereQuadrature {
    let n_theta = degree / 2 + 1;
    let n_phi = degree + 1;
    let (z, wz) = gauss_legendre(n_theta);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (zi, wi) in z.iter().zip(&wz) {
        let rho = (1.0 - zi * zi).sqrt();
        for k in 0..n_phi {
            let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
            nodes.push(Vec3::new(rho * phi.cos(), rho * phi.sin(), *zi));
            weights.push(wi * 2.0 * PI / n_phi as f64);
        }
    }
    SphereQuadrature {
        nodes,
        weights,
        degree: (2 * n_theta - 1).min(n_phi - 1),
    }
}

struct Builder {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

impl Builder {
    fn push_orbit(&mut self, base: [f64; 3], w: f64) {
        // all signed permutations of `base`, without duplicates
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut seen: Vec<[f64; 3]> = Vec::new();
        for p in perms {
            for signs in 0..8 {
                let mut v = [0.0; 3];
                for k in 0..3 {
                    let s = if signs >> k & 1 == 1 { -1.0 } else { 1.0 };
                    v[k] = s * base[p[k]];
                }
                if !seen.iter().any(|q| q == &v) {
                    seen.push(v);
                }
            }
        }
        for v in seen {
            self.nodes.push(Vec3::new(v[0], v[1], v[2]));
            self.weights.push(4.0 * PI * w);
        }
    }
}

fn lebedev(degree: usize) -> LabResult<SphereQuadrature> {
    let mut b = Builder {
        nodes: Vec::new(),
        weights: Vec::new(),
    };
    let c = 1.0 / 3f64.sqrt();
    let e = std::f64::consts::FRAC_1_SQRT_2;
    let exact = match degree {
        0..=3 => {
            b.push_orbit([1.0, 0.0, 0.0], 1.0 / 6.0);
            3
        }
        4..=5 => {
            b.push_orbit([1.0, 0.0, 0.0], 1.0 / 15.0);
            b.push_orbit([c, c, c], 3.0 / 40.0);
            5
        }
        6..=7 => {
            b.push_orbit([1.0, 0.0, 0.0], 1.0 / 21.0);
            b.push_orbit([e, e, 0.0], 4.0 / 105.0);
            b.push_orbit([c, c, c], 9.0 / 280.0);
            7
        }
        8..=9 => {
            b.push_orbit([1.0, 0.0, 0.0], 1.0 / 105.0);
            b.push_orbit([c, c, c], 9.0 / 280.0);
            let p = 0.888_073_833_977_115_f64;
            let q = (1.0 - p * p).sqrt();
            b.push_orbit([p, q, 0.0], 1.0 / 35.0);
            9
        }
        10..=11 => {
            b.push_orbit([1.0, 0.0, 0.0], 4.0 / 315.0);
            b.push_orbit([e, e, 0.0], 64.0 / 2835.0);
            b.push_orbit([c, c, c], 27.0 / 1280.0);
            let l = 1.0 / 11f64.sqrt();
            let m = 3.0 / 11f64.sqrt();
            b.push_orbit([l, l, m], 14641.0 / 725_760.0);
            11
        }
        _ => return Err(LabError::UnsupportedOrder(degree)),
    };
    Ok(SphereQuadrature {
        nodes: b.nodes,
        weights: b.weights,
        degree: exact,
    })
}

/// `int_{S^2} x^a y^b z^c dsigma`.
pub fn sphere_monomial(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    let dfact = |k: i64| -> f64 {
        let mut r = 1.0;
        let mut j = k;
        while j > 1 {
            r *= j as f64;
            j -= 2;
        }
        r
    };
    4.0 * PI * dfact(a as i64 - 1) * dfact(b as i64 - 1) * dfact(c as i64 - 1)
        / dfact((a + b + c) as i64 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(q: &SphereQuadrature) {
        let total: f64 = q.weights.iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        for v in &q.nodes {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
        let d = q.degree as u32;
        for a in 0..=d {
            for b in 0..=d - a {
                for c in 0..=d - a - b {
                    let num = q.integrate(|v| {
                        v[0].powi(a as i32) * v[1].powi(b as i32) * v[2].powi(c as i32)
                    });
                    let ex = sphere_monomial(a, b, c);
                    assert!(
                        (num - ex).abs() < 1e-10,
                        "deg {d}: x^{a} y^{b} z^{c}: {num} vs {ex}"
                    );
                }
            }
        }
    }

    #[test]
    fn lebedev_sets() {
        for (deg, npts) in [(3, 6), (5, 14), (7, 26), (9, 38), (11, 50)] {
            let q = build_sphere_quadrature(deg, SphereBackend::Lebedev).unwrap();
            assert_eq!(q.len(), npts);
            assert_eq!(q.degree, deg);
            check(&q);
        }
        assert!(matches!(
            build_sphere_quadrature(13, SphereBackend::Lebedev),
            Err(LabError::UnsupportedOrder(13))
        ));
    }

    #[test]
    fn product_rules() {
        for deg in [1, 4, 7, 12, 15] {
            let q = build_sphere_quadrature(deg, SphereBackend::ProductGauss).unwrap();
            assert!(q.degree >= deg);
            check(&q);
        }
        let q = build_sphere_quadrature(7, SphereBackend::ProductGauss).unwrap();
        assert!((q.integrate(|v| v[2] * v[2]) - 4.0 * PI / 3.0).abs() < 1e-10);
        assert!(q.integrate(|v| v[2]).abs() < 1e-14);
        assert!(build_sphere_quadrature(0, SphereBackend::ProductGauss).is_err());
    }
}

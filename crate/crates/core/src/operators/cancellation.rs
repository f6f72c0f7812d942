//! The cancellation identity in correlation form.
//!
//! With the correlation `C(w) = int g(v - w) h(v) dv`, both sides of
//!
//! `int B^{eps,-3,delta} g_* (h' - h) = int S^eps_delta(v - v_*) g_* h`
//!
//! are integrals of `C` alone:
//!
//! `lhs = int_{|u| >= delta} |u|^{-3} int b^eps [C(u + d) - C(u)] dsigma du`,
//! `rhs = int J^eps(z) C(delta z) dz`,
//!
//! with `d = v' - v` the velocity jump. The left side is a product rule in
//! `(|u|, u/|u|, t, phi)`; the right side is a radial rule in
//! `s = (1 - |z|^2)^{1/2}` against an unrelated sphere rule. The correlation
//! itself is a lattice sum, separable when both inputs are products.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use super::quadrature::antisymmetric_frame;
use crate::error::{LabError, LabResult};
use crate::grid::{build_sphere_quadrature, SphereBackend, VelocityGrid};
use crate::kernel::{j_radial_by_gap, KernelParams, Vec3};
use crate::par;
use crate::quad::gauss_legendre_on;

/// A function on velocity space.
#[derive(Clone, Copy)]
pub enum Profile<'a> {
    /// `f(v) = f_1(v_1) f_2(v_2) f_3(v_3)`.
    Product([&'a (dyn Fn(f64) -> f64 + Sync); 3]),
    General(&'a (dyn Fn(&Vec3) -> f64 + Sync)),
}

impl Profile<'_> {
    pub fn eval(&self, v: &Vec3) -> f64 {
        match self {
            Profile::Product(f) => f[0](v[0]) * f[1](v[1]) * f[2](v[2]),
            Profile::General(f) => f(v),
        }
    }
}

/// Resolution of the two quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationQuadrature {
    /// Gauss–Legendre nodes per radial panel of `|u|`.
    pub radial_nodes: usize,
    /// Outer radius of the `|u|` integral.
    pub radius: f64,
    /// Polynomial degree of the product sphere rule for `u/|u|`.
    pub sphere_degree: usize,
    /// Gauss–Legendre nodes per panel of `ln t`.
    pub angle_nodes: usize,
    /// Uniform azimuth nodes (even).
    pub azimuths: usize,
    /// Gauss–Legendre nodes per panel of the right-hand radial rule.
    pub rhs_nodes: usize,
    /// Degree of the Lebedev rule used on the right-hand side.
    pub rhs_sphere_degree: usize,
    /// Below this `t` the azimuthal average is replaced by its
    /// second-order expansion, integrated exactly in `t`.
    pub taylor_below: f64,
}

impl Default for CancellationQuadrature {
    fn default() -> Self {
        Self {
            radial_nodes: 12,
            radius: 12.0,
            sphere_degree: 19,
            angle_nodes: 8,
            azimuths: 32,
            rhs_nodes: 16,
            rhs_sphere_degree: 11,
            taylor_below: 1e-4,
        }
    }
}

/// `C(w) = h^3 sum_m g(v_m - w) h(v_m)` over the lattice nodes.
struct Correlation<'a> {
    grid: VelocityGrid,
    g: Profile<'a>,
    /// `h` at the nodes: per axis for products, flat otherwise.
    h_axis: Option<[Vec<f64>; 3]>,
    h_nodes: Vec<f64>,
}

impl<'a> Correlation<'a> {
    fn new(grid: &VelocityGrid, g: Profile<'a>, h: Profile<'a>) -> Self {
        let n = grid.n();
        let xs: Vec<f64> = (0..n).map(|k| grid.coord(k)).collect();
        match (g, h) {
            (Profile::Product(_), Profile::Product(hf)) => Self {
                grid: *grid,
                g,
                h_axis: Some([0, 1, 2].map(|a| xs.iter().map(|x| hf[a](*x)).collect())),
                h_nodes: Vec::new(),
            },
            _ => Self {
                grid: *grid,
                g,
                h_axis: None,
                h_nodes: grid.nodes().iter().map(|v| h.eval(v)).collect(),
            },
        }
    }

    fn eval(&self, w: &Vec3) -> f64 {
        let grid = &self.grid;
        let hs = grid.spacing();
        match (&self.g, &self.h_axis) {
            (Profile::Product(gf), Some(ha)) => {
                let mut c = 1.0;
                for a in 0..3 {
                    let s: f64 = ha[a]
                        .iter()
                        .enumerate()
                        .map(|(k, hk)| gf[a](grid.coord(k) - w[a]) * hk)
                        .sum();
                    c *= hs * s;
                }
                c
            }
            _ => {
                let s: f64 = self
                    .h_nodes
                    .iter()
                    .enumerate()
                    .map(|(m, hm)| self.g.eval(&(grid.node(m) - w)) * hm)
                    .sum();
                s * grid.cell_volume()
            }
        }
    }
}

/// Panel breakpoints: one per decade between `lo` and `hi`.
fn decades(lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    let mut x = 10f64.powf(lo.log10().floor() + 1.0);
    while x < hi * (1.0 - 1e-12) {
        if x > lo * (1.0 + 1e-12) {
            b.push(x);
        }
        x *= 10.0;
    }
    b.push(hi);
    b
}

fn check(params: &KernelParams, delta: f64) -> LabResult<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(LabError::param("delta", format!("{delta} not in (0, 1]")));
    }
    if params.gamma != -3.0 {
        return Err(LabError::param(
            "gamma",
            format!(
                "the identity is stated for gamma = -3, got {}",
                params.gamma
            ),
        ));
    }
    Ok(())
}

/// Left side: `int_{|u| >= delta} |u|^{-3} int b^eps [C(u + d) - C(u)]`.
fn lhs(
    params: &KernelParams,
    corr: &Correlation,
    delta: f64,
    q: &CancellationQuadrature,
) -> LabResult<f64> {
    let t_hi = FRAC_1_SQRT_2.min(params.t_max());
    let eps = params.epsilon;
    if eps >= t_hi {
        return Ok(0.0);
    }
    let t_cut = eps.max(q.taylor_below.min(t_hi));
    let pref = 4.0 / params.log_inv_eps();
    // b sin(theta) dtheta dphi = 4 |ln eps|^{-1} t^{-2} d(ln t) dphi
    let mut tn = Vec::new();
    for w in decades(t_cut, t_hi).windows(2) {
        for (s, ws) in gauss_legendre_on(q.angle_nodes, w[0].ln(), w[1].ln()) {
            let t = s.exp();
            tn.push((t, pref * ws / (t * t)));
        }
    }
    // with d = a uhat + b e(phi), a = -r t^2, b^2 = r^2 t^2 (1 - t^2), the
    // azimuthal mean of C(u + d) - C(u) is
    // a C_u + a^2 C_uu / 2 + b^2 (lap C - C_uu) / 4 up to O(t^4)
    let log_span = (t_cut / eps).ln();
    let sq_span = 0.5 * (t_cut * t_cut - eps * eps);
    let half = q.azimuths / 2;
    let dphi = 2.0 * PI / q.azimuths as f64;
    let trig: Vec<(f64, f64)> = (0..half)
        .map(|k| {
            let phi = dphi * (k as f64 + 0.5);
            (phi.cos(), phi.sin())
        })
        .collect();
    let mut rb = vec![delta];
    rb.extend(
        [1.0, 3.0, 6.0, q.radius]
            .iter()
            .filter(|&&r| r > delta && r <= q.radius),
    );
    let mut radial = Vec::new();
    for w in rb.windows(2) {
        radial.extend(gauss_legendre_on(q.radial_nodes, w[0], w[1]));
    }
    let sphere = build_sphere_quadrature(q.sphere_degree, SphereBackend::ProductGauss)?;
    let ns = sphere.len();
    let parts = par::map_indexed(radial.len() * ns, |idx| {
        let (r, wr) = radial[idx / ns];
        let dir = sphere.nodes[idx % ns];
        let u = dir * r;
        let (uh, e1, e2) = antisymmetric_frame([dir[0], dir[1], dir[2]]);
        let uh = Vec3::from(uh);
        let (e1, e2) = (Vec3::from(e1), Vec3::from(e2));
        let c0 = corr.eval(&u);
        let mut acc = 0.0;
        if log_span > 0.0 {
            let step = 2e-3;
            let second = |e: &Vec3| {
                (corr.eval(&(u + e * step)) + corr.eval(&(u - e * step)) - 2.0 * c0) / (step * step)
            };
            let c_u = (corr.eval(&(u + uh * step)) - corr.eval(&(u - uh * step))) / (2.0 * step);
            let c_uu = second(&uh);
            let c_perp = second(&e1) + second(&e2);
            let r2 = r * r;
            acc += 2.0
                * PI
                * pref
                * (log_span * (-r * c_u + 0.25 * r2 * c_perp)
                    + sq_span * (0.5 * r2 * c_uu - 0.25 * r2 * c_perp));
        }
        for &(t, wt) in &tn {
            let along = -r * t * t;
            let across = r * t * (1.0 - t * t).sqrt();
            let mut s = 0.0;
            for &(c, sn) in &trig {
                // phi and phi + pi together
                let e = e1 * c + e2 * sn;
                let base = u + uh * along;
                s += corr.eval(&(base + e * across)) + corr.eval(&(base - e * across)) - 2.0 * c0;
            }
            acc += wt * s * dphi;
        }
        // |u|^{-3} du = r^{-1} dr domega
        acc * wr / r * sphere.weights[idx % ns]
    });
    Ok(parts.iter().sum())
}

/// Right side: `int J^eps(z) C(delta z) dz`.
fn rhs(
    params: &KernelParams,
    corr: &Correlation,
    delta: f64,
    q: &CancellationQuadrature,
) -> LabResult<f64> {
    let t_hi = FRAC_1_SQRT_2.min(params.t_max());
    let eps = params.epsilon;
    if eps >= t_hi {
        return Ok(0.0);
    }
    let sphere = build_sphere_quadrature(q.rhs_sphere_degree, SphereBackend::Lebedev)?;
    // z = r omega with s = (1 - r^2)^{1/2}: r^2 dr = r s ds, s in [0, t_hi]
    let mut nodes = gauss_legendre_on(q.rhs_nodes, 0.0, eps);
    for w in decades(eps, t_hi).windows(2) {
        for (x, wx) in gauss_legendre_on(q.rhs_nodes, w[0].ln(), w[1].ln()) {
            let s = x.exp();
            nodes.push((s, wx * s));
        }
    }
    let parts = par::map_indexed(nodes.len(), |k| {
        let (s, ws) = nodes[k];
        let r = (1.0 - s * s).sqrt();
        let j = j_radial_by_gap(params, s);
        let shell = sphere.integrate(|w| corr.eval(&(w * (delta * r))));
        ws * r * s * j * shell
    });
    Ok(parts.iter().sum())
}

/// Both sides of the cancellation identity for `B^{eps,-3,delta}`, with
/// the correlation of `g` and `h` summed over the nodes of `grid`.
pub fn cancellation_identity(
    params: &KernelParams,
    grid: &VelocityGrid,
    g: Profile,
    h: Profile,
    delta: f64,
    quad: &CancellationQuadrature,
) -> LabResult<(f64, f64)> {
    check(params, delta)?;
    if quad.azimuths < 2 || !quad.azimuths.is_multiple_of(2) {
        return Err(LabError::param("azimuths", "must be even and >= 2"));
    }
    let corr = Correlation::new(grid, g, h);
    Ok((
        lhs(params, &corr, delta, quad)?,
        rhs(params, &corr, delta, quad)?,
    ))
}

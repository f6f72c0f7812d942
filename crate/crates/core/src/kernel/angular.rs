//! Angular function, kinetic kernel, collision map and the closed-form
//! angular moments of `b^eps`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Vector3;

use super::KernelParams;
use crate::error::{LabError, LabResult};
use crate::quad;

pub type Vec3 = Vector3<f64>;

/// `b^eps(cos theta) = |ln eps|^{-1} sin^{-4}(theta/2)` on its support.
pub fn angular_b(params: &KernelParams, theta: f64) -> f64 {
    angular_b_of_t(params, (0.5 * theta).sin())
}

/// The same function parameterised by `t = sin(theta/2)`.
pub fn angular_b_of_t(params: &KernelParams, t: f64) -> f64 {
    if t < params.epsilon || t > params.t_max() + 1e-15 {
        return 0.0;
    }
    let t2 = t * t;
    1.0 / (params.log_inv_eps() * t2 * t2)
}

/// `B^{eps,gamma,eta}(u, sigma)`.
pub fn kinetic_kernel(params: &KernelParams, u: &Vec3, sigma: &Vec3) -> LabResult<f64> {
    let sn = sigma.norm();
    if (sn - 1.0).abs() > 1e-12 {
        return Err(LabError::Domain(format!(
            "sigma is not a unit vector (|sigma| = {sn})"
        )));
    }
    let r = u.norm();
    if r == 0.0 {
        if params.eta > 0.0 {
            return Ok(0.0);
        }
        return Err(LabError::Singularity(
            "relative velocity vanishes with eta = 0".into(),
        ));
    }
    if r < params.eta {
        return Ok(0.0);
    }
    let cos_theta = (u.dot(sigma) / r).clamp(-1.0, 1.0);
    let t = (0.5 * (1.0 - cos_theta)).max(0.0).sqrt();
    Ok(r.powf(params.gamma) * angular_b_of_t(params, t))
}

/// Post-collision velocities in the sigma representation.
pub fn post_collision(v: &Vec3, v_star: &Vec3, sigma: &Vec3) -> (Vec3, Vec3) {
    let center = 0.5 * (v + v_star);
    let half = 0.5 * (v - v_star).norm();
    (center + half * sigma, center - half * sigma)
}

fn require_lemma_range(params: &KernelParams) -> LabResult<()> {
    if params.epsilon > 0.25 {
        return Err(LabError::Domain(format!(
            "closed-form angular integrals need eps <= 1/4 (got {})",
            params.epsilon
        )));
    }
    if !params.symmetrized {
        return Err(LabError::Domain(
            "closed-form angular integrals assume the symmetrized kernel".into(),
        ));
    }
    Ok(())
}

/// Closed form of `int_{S^2} b^eps sin^k(theta/2) dsigma`, k in {0, 1, 2}.
pub fn angular_moment(params: &KernelParams, k: u32) -> LabResult<f64> {
    require_lemma_range(params)?;
    let eps = params.epsilon;
    let l = params.log_inv_eps();
    match k {
        0 => Ok(4.0 * PI / l * (1.0 / (eps * eps) - 2.0)),
        1 => Ok(8.0 * PI / l * (1.0 / eps - SQRT_2)),
        2 => Ok(8.0 * PI / l * (l - 0.5 * 2f64.ln())),
        _ => Err(LabError::Domain(format!(
            "moment order {k} not in {{0, 1, 2}}"
        ))),
    }
}

/// The same moment by adaptive quadrature in theta.
pub fn angular_moment_quadrature(params: &KernelParams, k: u32) -> LabResult<f64> {
    let theta_lo = 2.0 * params.epsilon.asin();
    let theta_hi = 2.0 * params.t_max().min(1.0).asin();
    let f = |theta: f64| {
        let s = (0.5 * theta).sin();
        angular_b(params, theta) * s.powi(k as i32) * theta.sin()
    };
    let breaks = log_breaks(theta_lo, theta_hi);
    Ok(2.0 * PI * quad::integrate_pieces(f, &breaks, 0.0, 1e-12)?)
}

/// `lambda_1^eps = int_0^pi b^eps (1 - cos theta) sin theta dtheta`, closed form.
pub fn lambda1(params: &KernelParams) -> LabResult<f64> {
    require_lemma_range(params)?;
    let l = params.log_inv_eps();
    Ok(8.0 / l * (l - 0.5 * 2f64.ln()))
}

/// `lambda_1^eps` by adaptive quadrature in theta.
pub fn lambda1_quadrature(params: &KernelParams) -> LabResult<f64> {
    let theta_lo = 2.0 * params.epsilon.asin();
    let theta_hi = 2.0 * params.t_max().min(1.0).asin();
    let f = |theta: f64| angular_b(params, theta) * 2.0 * (0.5 * theta).sin().powi(2) * theta.sin();
    quad::integrate_pieces(f, &log_breaks(theta_lo, theta_hi), 0.0, 1e-12)
}

/// Geometric breakpoints between `lo > 0` and `hi`, one per factor of 4.
pub(crate) fn log_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    let mut x = lo;
    while x * 4.0 < hi {
        x *= 4.0;
        b.push(x);
    }
    b.push(hi);
    b
}

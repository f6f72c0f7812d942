//! The cancellation kernel `J^eps` and its rescaling `S^eps_delta`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::angular::{log_breaks, Vec3};
use super::KernelParams;
use crate::error::{LabError, LabResult};
use crate::quad;

/// Lower end of the `t = sin(theta/2)` range contributing to `J^eps` at
/// radius `r`, or `None` when the angular interval is empty.
fn t_range(params: &KernelParams, r: f64) -> Option<(f64, f64)> {
    if r > 1.0 || r <= 0.0 {
        return None;
    }
    // theta runs from 2 acos(r), clamped to [0, pi/2], up to pi/2.
    let t_hi = FRAC_1_SQRT_2.min(params.t_max());
    let t_lo = (1.0 - r * r).max(0.0).sqrt().max(params.epsilon);
    (t_lo < t_hi).then_some((t_lo, t_hi))
}

/// `J^eps` as a function of `|z|`, by adaptive quadrature in `t`.
pub fn j_radial(params: &KernelParams, r: f64) -> LabResult<f64> {
    match t_range(params, r) {
        None => Ok(0.0),
        Some((lo, hi)) => j_on_range(params, r, lo, hi),
    }
}

fn j_on_range(params: &KernelParams, r: f64, lo: f64, hi: f64) -> LabResult<f64> {
    // b^eps sin(theta) dtheta = |ln eps|^{-1} t^{-4} * 4t dt
    let inner = quad::integrate_pieces(
        |t: f64| 4.0 / (t * t * t),
        &log_breaks(lo, hi),
        1e-12,
        1e-13,
    )?;
    Ok(2.0 * PI / (r * r * r) * inner / params.log_inv_eps())
}

/// Closed form of [`j_radial`], used as an independent check.
pub fn j_radial_closed(params: &KernelParams, r: f64) -> f64 {
    match t_range(params, r) {
        None => 0.0,
        Some((lo, hi)) => {
            2.0 * PI / (r * r * r) * 2.0 * (1.0 / (lo * lo) - 1.0 / (hi * hi))
                / params.log_inv_eps()
        }
    }
}

/// Closed form of `J^eps` at `|z| = (1 - s^2)^{1/2}`, taking the lower
/// angular limit from `s` itself so that it stays exact as `|z| -> 1`.
pub fn j_radial_by_gap(params: &KernelParams, s: f64) -> f64 {
    if !(0.0..1.0).contains(&s) {
        return 0.0;
    }
    let hi = FRAC_1_SQRT_2.min(params.t_max());
    let lo = s.max(params.epsilon);
    if lo >= hi {
        return 0.0;
    }
    let r = (1.0 - s * s).sqrt();
    2.0 * PI / (r * r * r) * 2.0 * (1.0 / (lo * lo) - 1.0 / (hi * hi)) / params.log_inv_eps()
}

/// `S^eps_delta(z) = delta^{-3} J^eps(z / delta)`.
pub fn cancellation_kernel(params: &KernelParams, z: &Vec3, delta: f64) -> LabResult<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(LabError::param("delta", format!("{delta} not in (0, 1]")));
    }
    Ok(j_radial(params, z.norm() / delta)? / (delta * delta * delta))
}

/// `|J^eps|_{L^1}` by radial quadrature of `4 pi r^2 J^eps(r)`.
///
/// The radius is parameterised by `s = (1 - r^2)^{1/2}`, which resolves the
/// `1/(1 - r)` growth of `J^eps` near the unit sphere. The slab
/// `1 - r^2 < eps^2`, where the full angular range contributes, is added
/// separately.
pub fn j_l1_norm(params: &KernelParams) -> LabResult<f64> {
    let hi = FRAC_1_SQRT_2.min(params.t_max());
    let lo = params.epsilon;
    if lo >= hi {
        return Ok(0.0);
    }
    // dr = -s ds / r
    let f = |s: f64| {
        let r = (1.0 - s * s).sqrt();
        4.0 * PI * r * s * j_on_range(params, r, s, hi).unwrap_or(f64::NAN)
    };
    let mut v = quad::integrate_pieces(f, &log_breaks(lo, hi), 1e-13, 1e-12)?;
    let g = |s: f64| {
        let r = (1.0 - s * s).sqrt();
        4.0 * PI * r * s * j_on_range(params, r, lo, hi).unwrap_or(f64::NAN)
    };
    v += quad::integrate(g, 0.0, lo, 1e-14, 1e-12)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LabError::Numerical("inner J quadrature failed".into()))
    }
}

/// `-8 pi^2 int_0^{pi/2} b^eps ln cos(theta/2) sin(theta) dtheta`.
pub fn j_l1_norm_angular(params: &KernelParams) -> LabResult<f64> {
    let hi = FRAC_1_SQRT_2.min(params.t_max());
    let lo = params.epsilon;
    if lo >= hi {
        return Ok(0.0);
    }
    // with t = sin(theta/2): ln cos(theta/2) = ln(1 - t^2) / 2
    let f = |t: f64| -(-t * t).ln_1p() / (t * t * t);
    let v = quad::integrate_pieces(f, &log_breaks(lo, hi), 1e-13, 1e-13)?;
    Ok(16.0 * PI * PI * v / params.log_inv_eps())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_form_agrees_away_from_the_sphere() {
        let p = KernelParams::coulomb(1e-3).unwrap();
        for s in [0.5f64, 0.1, 0.01, 2e-3] {
            let r = (1.0 - s * s).sqrt();
            let (a, b) = (j_radial_by_gap(&p, s), j_radial_closed(&p, r));
            assert!((a - b).abs() < 1e-9 * b, "s={s}: {a} vs {b}");
        }
        // inside the slab the lower limit is eps
        let slab = j_radial_by_gap(&p, 1e-5);
        assert!((slab - j_radial_by_gap(&p, 0.0)).abs() < 1e-9 * slab);
        assert_eq!(j_radial_by_gap(&p, 0.9), 0.0);
    }

    #[test]
    fn support() {
        let p = KernelParams::coulomb(1e-2).unwrap();
        assert_eq!(
            cancellation_kernel(&p, &Vec3::new(1.5, 0.0, 0.0), 1.0).unwrap(),
            0.0
        );
        assert_eq!(
            cancellation_kernel(&p, &Vec3::new(0.0, 0.3, 0.0), 0.5).unwrap(),
            0.0
        );
        assert_eq!(j_radial(&p, 0.7).unwrap(), 0.0);
        assert!(j_radial(&p, 0.9).unwrap() > 0.0);
        assert!(j_radial(&p, 1.0).unwrap() > 0.0);
        assert_eq!(j_radial(&p, 1.0 + 1e-12).unwrap(), 0.0);
        assert!(cancellation_kernel(&p, &Vec3::zeros(), 0.0).is_err());
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let p = KernelParams::coulomb(1e-3).unwrap();
        for i in 0..50 {
            let r = 0.7 + 0.3 * i as f64 / 49.0;
            let a = j_radial(&p, r).unwrap();
            let b = j_radial_closed(&p, r);
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-10), "r={r}");
        }
    }

    #[test]
    fn rescaling() {
        let p = KernelParams::coulomb(1e-2).unwrap();
        let z = Vec3::new(0.2, 0.25, 0.1);
        let s = cancellation_kernel(&p, &z, 0.4).unwrap();
        assert!((s - j_radial(&p, z.norm() / 0.4).unwrap() / 0.064).abs() < 1e-12 * s);
    }

    #[test]
    fn l1_norm_two_ways() {
        for eps in [1e-1, 1e-3, 1e-6] {
            let p = KernelParams::coulomb(eps).unwrap();
            let a = j_l1_norm(&p).unwrap();
            let b = j_l1_norm_angular(&p).unwrap();
            assert!((a - b).abs() < 1e-6 * b, "eps={eps}: {a} vs {b}");
            assert!(b < 1.1 * 16.0 * PI * PI);
        }
    }
}

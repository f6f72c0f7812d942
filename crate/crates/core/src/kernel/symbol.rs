use std::f64::consts::PI;

use super::angular::log_breaks;
use super::KernelParams;
use crate::error::LabResult;
use crate::quad;

/// Frequency symbol `A^eps(xi) = int b^eps min{|xi|^2 sin^2(theta/2), 1} dsigma`.
pub fn symbol_a(params: &KernelParams, xi: f64) -> LabResult<f64> {
    let xi = xi.abs();
    if xi == 0.0 {
        return Ok(0.0);
    }
    let lo = params.epsilon;
    let hi = params.t_max();
    if lo >= hi {
        return Ok(0.0);
    }
    let mut breaks = log_breaks(lo, hi);
    let knee = 1.0 / xi;
    if knee > lo && knee < hi {
        breaks.push(knee);
        breaks.sort_by(f64::total_cmp);
    }
    // dsigma = 4t dt dphi, b = |ln eps|^{-1} t^{-4}
    let f = |t: f64| (xi * xi * t * t).min(1.0) / (t * t * t);
    let v = quad::integrate_pieces(f, &breaks, 0.0, 1e-12)?;
    Ok(8.0 * PI * v / params.log_inv_eps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{angular_moment, CharacteristicWeight};

    #[test]
    fn examples() {
        let p = KernelParams::coulomb(1e-2).unwrap();
        assert_eq!(symbol_a(&p, 0.0).unwrap(), 0.0);
        let m2 = angular_moment(&p, 2).unwrap();
        for xi in [0.1, 0.3, 0.5] {
            let a = symbol_a(&p, xi).unwrap();
            assert!((a - xi * xi * m2).abs() < 1e-10 * a);
        }
        let m0 = angular_moment(&p, 0).unwrap();
        let a = symbol_a(&p, 2.0 / 1e-2).unwrap();
        assert!(a > 0.5 * m0 && a < 2.0 * m0);
    }

    #[test]
    fn equivalent_to_weight_squared() {
        let (mut lo, mut hi) = (f64::MAX, 0.0f64);
        for eps in [1e-1, 1e-2, 1e-4, 1e-6] {
            let p = KernelParams::coulomb(eps).unwrap();
            let w = CharacteristicWeight::new(eps).unwrap();
            let mut xi = 1e-2;
            while xi < 100.0 / eps {
                let a = symbol_a(&p, xi).unwrap();
                let d = if xi <= 2.0 {
                    xi * xi
                } else {
                    w.eval_radial(xi).powi(2)
                };
                lo = lo.min(a / d);
                hi = hi.max(a / d);
                xi *= 1.3;
            }
        }
        assert!(lo > 1.0 && hi < 40.0, "bracket [{lo}, {hi}]");
    }
}

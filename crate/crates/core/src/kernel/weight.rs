//! Polynomial weights and the anisotropic characteristic weight `W^eps`.

use super::angular::Vec3;
use super::bump::bump_profile;
use crate::error::{LabError, LabResult};

/// Japanese bracket `<v> = (1 + |v|^2)^{1/2}`.
pub fn bracket(v: &Vec3) -> f64 {
    (1.0 + v.norm_squared()).sqrt()
}

/// `W_l(v) = <v>^l`.
pub fn polynomial_weight(l: f64, v: &Vec3) -> f64 {
    bracket(v).powf(l)
}

/// `W^eps(y)`: equal to `<y>` at low frequency, saturating at
/// `|ln eps|^{-1/2} eps^{-1}` above `|y| ~ 1/eps`, with a logarithmic
/// correction in the intermediate band.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicWeight {
    epsilon: f64,
    log_inv_eps: f64,
}

impl CharacteristicWeight {
    pub fn new(epsilon: f64) -> LabResult<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(LabError::param(
                "epsilon",
                format!("{epsilon} not in (0, 1)"),
            ));
        }
        Ok(Self {
            epsilon,
            log_inv_eps: -epsilon.ln(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// High-frequency plateau `|ln eps|^{-1/2} eps^{-1}`.
    pub fn plateau(&self) -> f64 {
        1.0 / (self.log_inv_eps.sqrt() * self.epsilon)
    }

    pub fn eval(&self, y: &Vec3) -> f64 {
        self.eval_radial(y.norm())
    }

    /// The weight depends only on `|y|`.
    pub fn eval_radial(&self, r: f64) -> f64 {
        let br = (1.0 + r * r).sqrt();
        let low = bump_profile(r);
        let high = bump_profile(self.epsilon * r);
        let mut w = br * low;
        let band = high - low;
        if band > 0.0 {
            let l = self.log_inv_eps;
            let s = (1.0 - r.ln() / l + 1.0 / l).max(0.0).sqrt();
            w += br * s * band;
        }
        if high < 1.0 {
            w += self.plateau() * (1.0 - high);
        }
        w
    }

    /// `min{<y>, plateau}`, the envelope the weight is compared against.
    pub fn envelope(&self, r: f64) -> f64 {
        (1.0 + r * r).sqrt().min(self.plateau())
    }

    /// Slack for `W^eps <= (1 + delta) min{<y>, plateau}`.
    ///
    /// The logarithmic factor can reach `(1 + 1/|ln eps|)^{1/2}` just above
    /// `|y| = 1`, and the bump transition near `|y| = 1/eps` overshoots the
    /// plateau by about 5.5 percent.
    pub fn upper_slack(&self) -> f64 {
        (1.0 + 1.0 / self.log_inv_eps).sqrt().max(1.06) - 1.0
    }

    /// Constant `c` with `W^eps(y) >= c phi(eps y) |ln eps|^{-1/2} <y>`.
    ///
    /// Just above `|y| = 1/eps` the logarithmic factor drops below
    /// `|ln eps|^{-1/2}` before the plateau term has switched on; the
    /// minimum ratio over that band is about 0.954.
    pub fn lower_constant(&self) -> f64 {
        0.95
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        let w = CharacteristicWeight::new(1e-2).unwrap();
        assert_eq!(w.eval(&Vec3::zeros()), 1.0);
        let far = Vec3::new(5.0 / 1e-2, 0.0, 0.0);
        let expect = 1.0 / ((100f64).ln().sqrt() * 1e-2);
        assert!((w.eval(&far) - expect).abs() < 1e-12 * expect);
        let v = Vec3::new(0.0, 2.0, 0.0);
        assert!((polynomial_weight(-3.0, &v) - 5f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn low_frequency_is_bracket() {
        let w = CharacteristicWeight::new(1e-3).unwrap();
        for i in 0..100 {
            let r = i as f64 / 100.0;
            assert!((w.eval_radial(r) - (1.0 + r * r).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn bounds_hold_with_documented_slack() {
        for eps in [1e-1, 1e-2, 1e-4, 1e-8] {
            let w = CharacteristicWeight::new(eps).unwrap();
            let l = -f64::ln(eps);
            let mut r = 1e-3;
            while r < 20.0 / eps {
                let val = w.eval_radial(r);
                assert!(val <= (1.0 + w.upper_slack()) * w.envelope(r) * (1.0 + 1e-12));
                let lb = bump_profile(eps * r) * (1.0 + r * r).sqrt() / l.sqrt();
                assert!(val >= w.lower_constant() * lb);
                r *= 1.0005;
            }
        }
    }
}

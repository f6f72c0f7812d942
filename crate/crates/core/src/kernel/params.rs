use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Parameters fixing one instance of the cutoff Rutherford kernel
/// `|u|^gamma 1_{|u| >= eta} b^eps(cos theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub eta: f64,
    pub k_const: f64,
    pub symmetrized: bool,
}

impl KernelParams {
    pub fn new(
        epsilon: f64,
        gamma: f64,
        eta: f64,
        k_const: f64,
        symmetrized: bool,
    ) -> LabResult<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(LabError::param(
                "epsilon",
                format!("{epsilon} not in (0, 1)"),
            ));
        }
        if !(-3.0..=0.0).contains(&gamma) {
            return Err(LabError::param("gamma", format!("{gamma} not in [-3, 0]")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(LabError::param("eta", format!("{eta} must be >= 0")));
        }
        if !(k_const > 0.0 && k_const.is_finite()) {
            return Err(LabError::param("k_const", format!("{k_const} must be > 0")));
        }
        Ok(Self {
            epsilon,
            gamma,
            eta,
            k_const,
            symmetrized,
        })
    }

    /// Coulomb case: gamma = -3, no truncation, K = 1, symmetrized support.
    pub fn coulomb(epsilon: f64) -> LabResult<Self> {
        Self::new(epsilon, -3.0, 0.0, 1.0, true)
    }

    pub fn with_eta(mut self, eta: f64) -> LabResult<Self> {
        self.eta = eta;
        Self::new(
            self.epsilon,
            self.gamma,
            eta,
            self.k_const,
            self.symmetrized,
        )
    }

    pub fn with_gamma(self, gamma: f64) -> LabResult<Self> {
        Self::new(
            self.epsilon,
            gamma,
            self.eta,
            self.k_const,
            self.symmetrized,
        )
    }

    /// `|ln eps|`, the Coulomb logarithm surrogate.
    pub fn log_inv_eps(&self) -> f64 {
        -self.epsilon.ln()
    }

    /// Largest admissible `sin(theta/2)`.
    pub fn t_max(&self) -> f64 {
        if self.symmetrized {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(KernelParams::new(0.0, -3.0, 0.0, 1.0, true).is_err());
        assert!(KernelParams::new(1.0, -3.0, 0.0, 1.0, true).is_err());
        assert!(KernelParams::new(0.1, -3.5, 0.0, 1.0, true).is_err());
        assert!(KernelParams::new(0.1, 0.5, 0.0, 1.0, true).is_err());
        assert!(KernelParams::new(0.1, -3.0, -1.0, 1.0, true).is_err());
        assert!(KernelParams::new(0.1, -3.0, 0.0, 0.0, true).is_err());
        assert!(KernelParams::coulomb(0.1).is_ok());
    }
}

//! Smooth radial bump and the dyadic partition of unity built from it.

/// `exp(-1/x)` for `x > 0`, zero otherwise.
fn seed(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Radial profile: equal to 1 on `[0, 1]`, 0 on `[4/3, inf)` and smooth,
/// strictly decreasing in between.
pub fn bump_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 4.0 / 3.0 {
        0.0
    } else {
        let a = seed(4.0 / 3.0 - r);
        let b = seed(r - 1.0);
        a / (a + b)
    }
}

/// Dyadic partition `phi(x) + sum_j psi(2^{-j} x) = 1` with
/// `psi(x) = phi(x/2) - phi(x)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BumpPartition;

impl BumpPartition {
    pub fn phi(&self, r: f64) -> f64 {
        bump_profile(r)
    }

    /// Annular piece, supported in `3/4 <= r <= 8/3`.
    pub fn psi(&self, r: f64) -> f64 {
        bump_profile(0.5 * r) - bump_profile(r)
    }

    /// `phi_j(r) = psi(2^{-j} r)` for `j >= 0`, and `phi_{-1} = phi`.
    pub fn dyadic(&self, j: i32, r: f64) -> f64 {
        if j < 0 {
            self.phi(r)
        } else {
            self.psi(r * 0.5f64.powi(j))
        }
    }

    /// `phi(r) + sum_{j=0}^{big_j} psi(2^{-j} r)`.
    pub fn partial_sum(&self, big_j: u32, r: f64) -> f64 {
        (0..=big_j as i32).fold(self.phi(r), |acc, j| acc + self.dyadic(j, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shape() {
        assert_eq!(bump_profile(0.0), 1.0);
        assert_eq!(bump_profile(1.0), 1.0);
        assert_eq!(bump_profile(4.0 / 3.0), 0.0);
        let mut prev = 1.0;
        for i in 30..170 {
            let r = 1.0 + i as f64 / 600.0;
            let v = bump_profile(r);
            assert!(v < prev && v > 0.0, "r = {r}");
            prev = v;
        }
    }

    #[test]
    fn psi_support_and_range() {
        let b = BumpPartition;
        for i in 0..4000 {
            let r = i as f64 * 0.001;
            let v = b.psi(r);
            assert!((0.0..=1.0).contains(&v));
            if !(0.75..=8.0 / 3.0).contains(&r) {
                assert_eq!(v, 0.0, "r = {r}");
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let b = BumpPartition;
        for i in 0..5000 {
            let r = i as f64 * 0.01;
            assert!((b.partial_sum(6, r) - 1.0).abs() < 1e-12, "r = {r}");
        }
    }
}

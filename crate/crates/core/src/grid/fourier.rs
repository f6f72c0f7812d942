//! Discrete Fourier multipliers on the periodised lattice.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::DistributionField;
use crate::error::{LabError, LabResult};
use crate::kernel::{CharacteristicWeight, Vec3};

/// Applies `m(D)` for a real, even symbol `m(xi)` on the dual lattice
/// `xi in (pi/L) {-n/2, ..., n/2 - 1}^3`.
pub fn apply_fourier_multiplier(
    f: &DistributionField,
    symbol: impl Fn(&Vec3) -> f64,
) -> LabResult<DistributionField> {
    let g = *f.grid();
    let n = g.n();
    let mut data: Vec<Complex64> = f.values().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fft3(&mut data, n, |buf| fwd.process(buf));
    let step = PI / g.half_width();
    let freq = |m: usize| -> f64 {
        let k = if m < n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        };
        k as f64 * step
    };
    for (idx, c) in data.iter_mut().enumerate() {
        let [a, b, d] = g.unravel(idx);
        *c *= symbol(&Vec3::new(freq(a), freq(b), freq(d)));
    }
    fft3(&mut data, n, |buf| inv.process(buf));
    let scale = 1.0 / (n * n * n) as f64;
    let re_norm: f64 = data.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    let im_norm: f64 = data.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    if im_norm > 1e-10 * re_norm.max(1e-300) && im_norm * scale > 1e-14 {
        return Err(LabError::Numerical(format!(
            "multiplier output has imaginary residue {:e}",
            im_norm / re_norm.max(1e-300)
        )));
    }
    f.like(data.iter().map(|c| c.re * scale).collect())
}

/// `W^eps(D) f`.
pub fn apply_fourier_weight(
    f: &DistributionField,
    weight: &CharacteristicWeight,
) -> LabResult<DistributionField> {
    apply_fourier_multiplier(f, |xi| weight.eval(xi))
}

/// In-place 3-D transform of a row-major `n^3` array by 1-D passes.
fn fft3(data: &mut [Complex64], n: usize, mut pass: impl FnMut(&mut [Complex64])) {
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    // last axis: contiguous rows
    for row in data.chunks_mut(n) {
        pass(row);
    }
    // middle axis
    for a in 0..n {
        for c in 0..n {
            for b in 0..n {
                line[b] = data[(a * n + b) * n + c];
            }
            pass(&mut line);
            for b in 0..n {
                data[(a * n + b) * n + c] = line[b];
            }
        }
    }
    // first axis
    for b in 0..n {
        for c in 0..n {
            for a in 0..n {
                line[a] = data[(a * n + b) * n + c];
            }
            pass(&mut line);
            for a in 0..n {
                data[(a * n + b) * n + c] = line[a];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{FieldRole, VelocityGrid};

    #[test]
    fn constant_and_single_mode() {
        let g = VelocityGrid::new(6.0, 16).unwrap();
        let w = CharacteristicWeight::new(1e-2).unwrap();
        let c = DistributionField::from_fn(g, FieldRole::Perturbation, |_| 2.5);
        let out = apply_fourier_weight(&c, &w).unwrap();
        assert!(out.values().iter().all(|&x| (x - 2.5).abs() < 1e-12));

        let xi0 = Vec3::new(3.0, -2.0, 1.0) * (PI / 6.0);
        let f = DistributionField::from_fn(g, FieldRole::Perturbation, |v| xi0.dot(v).cos());
        let out = apply_fourier_weight(&f, &w).unwrap();
        let expect = w.eval(&xi0);
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - expect * b).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_roundtrip() {
        let g = VelocityGrid::new(4.0, 8).unwrap();
        let f = DistributionField::from_fn(g, FieldRole::Perturbation, |v| {
            (v[0] * 1.3).sin() + v[1] * v[2]
        });
        let out = apply_fourier_multiplier(&f, |_| 1.0).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }
}

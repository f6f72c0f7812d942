use serde::Serialize;

use super::fourier::apply_fourier_weight;
use super::harmonics::{apply_anisotropic_weight, SphericalHarmonicPlan};
use super::DistributionField;
use crate::error::LabResult;
use crate::kernel::{polynomial_weight, CharacteristicWeight};

/// `|f|_{L^2_l} = (sum <v>^{2l} f^2 h^3)^{1/2}`.
pub fn weighted_l2_norm(f: &DistributionField, l: f64) -> f64 {
    let g = f.grid();
    let s: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let w = polynomial_weight(l, &g.node(i));
            w * w * x * x
        })
        .sum();
    (s * g.cell_volume()).sqrt()
}

/// The three pieces of `|f|_{eps,l}` and their combination.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TripleNorm {
    /// `|W^eps((-Delta_{S^2})^{1/2}) W_l f|`
    pub anisotropic: f64,
    /// `|W^eps(D) W_l f|`
    pub fourier: f64,
    /// `|W^eps W_l f|`
    pub phase: f64,
    pub total: f64,
}

pub fn triple_norm(
    f: &DistributionField,
    weight: &CharacteristicWeight,
    l: f64,
    plan: &SphericalHarmonicPlan,
) -> LabResult<TripleNorm> {
    let wl = f.map(|v, x| polynomial_weight(l, v) * x);
    let anisotropic = apply_anisotropic_weight(&wl, weight, plan)?.l2_norm();
    let fourier = apply_fourier_weight(&wl, weight)?.l2_norm();
    let phase = wl.map(|v, x| weight.eval(v) * x).l2_norm();
    Ok(TripleNorm {
        anisotropic,
        fourier,
        phase,
        total: (anisotropic * anisotropic + fourier * fourier + phase * phase).sqrt(),
    })
}

//! Sampled estimate of the coercivity constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::matrix::LinearOperatorMatrix;
use crate::error::{LabError, LabResult};
use crate::grid::{
    triple_norm, weighted_l2_norm, DistributionField, FieldRole, SphericalHarmonicPlan, TripleNorm,
    VelocityGrid,
};
use crate::kernel::{CharacteristicWeight, Vec3};

/// Epsilon used for the anisotropic weight of the Landau endpoint. At this
/// value the weight equals `<y>` to within a few parts per thousand on
/// every lattice frequency.
pub const LANDAU_WEIGHT_EPSILON: f64 = 1e-300;

const HERMITE_DEGREE: usize = 6;
const RANDOM_FIELDS: usize = 32;
const RANDOM_DEGREE: usize = 4;

/// Probabilists' Hermite polynomial `He_k(x)`.
fn hermite(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return a;
    }
    for j in 1..k {
        let c = x * b - j as f64 * a;
        a = b;
        b = c;
    }
    b
}

fn multi_indices(max_degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                out.push([a, b, d - a - b]);
            }
        }
    }
    out
}

fn hermite3(alpha: &[usize; 3], v: &Vec3) -> f64 {
    hermite(alpha[0], v[0]) * hermite(alpha[1], v[1]) * hermite(alpha[2], v[2])
}

/// Test functions for the coercivity quotient: `He_a He_b He_c mu^{1/2}` with
/// `a + b + c <= 6`, then seeded random Hermite combinations of degree four
/// under a shifted, rescaled Gaussian envelope.
#[derive(Debug, Clone)]
pub struct CoercivityFamily {
    labels: Vec<String>,
    fields: Vec<DistributionField>,
}

impl CoercivityFamily {
    pub fn new(grid: &VelocityGrid, seed: u64) -> Self {
        let norm = (2.0 * std::f64::consts::PI).powf(-0.75);
        let mut labels = Vec::new();
        let mut fields = Vec::new();
        for alpha in multi_indices(HERMITE_DEGREE) {
            labels.push(format!("hermite{}{}{}", alpha[0], alpha[1], alpha[2]));
            fields.push(DistributionField::from_fn(
                *grid,
                FieldRole::Perturbation,
                |v| hermite3(&alpha, v) * norm * (-v.norm_squared() / 4.0).exp(),
            ));
        }
        let low = multi_indices(RANDOM_DEGREE);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..RANDOM_FIELDS {
            let coef: Vec<f64> = low
                .iter()
                .map(|a| {
                    let z: f64 = rng.sample(StandardNormal);
                    z / (1 + a.iter().sum::<usize>()) as f64
                })
                .collect();
            let centre = Vec3::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            );
            let width: f64 = rng.gen_range(0.8..1.2);
            labels.push(format!("random{k}"));
            fields.push(DistributionField::from_fn(
                *grid,
                FieldRole::Perturbation,
                |v| {
                    let p: f64 = low.iter().zip(&coef).map(|(a, c)| c * hermite3(a, v)).sum();
                    let d = (v - centre) / width;
                    p * (-d.norm_squared() / 4.0).exp()
                },
            ));
        }
        Self { labels, fields }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[DistributionField] {
        &self.fields
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Result of [`coercivity_constant`].
#[derive(Debug, Clone, Serialize)]
pub struct CoercivityEstimate {
    pub nu0: f64,
    pub minimizer: String,
    /// Pieces of `|f|_{eps,l}` at the minimizer.
    pub norm: TripleNorm,
    /// `<M f, f>` at the minimizer, normalized so that the triple norm is one.
    pub dissipation: f64,
}

/// `(<M f, f> + |f|^2_{L^2_l}) / |f|^2_{eps,l}` for one field.
pub fn coercivity_quotient(
    m: &LinearOperatorMatrix,
    f: &DistributionField,
    l: f64,
    harmonics: &SphericalHarmonicPlan,
) -> LabResult<(f64, f64, TripleNorm)> {
    let weight = weight_for(m)?;
    let q = m.quadratic_form(f)?;
    let w = weighted_l2_norm(f, l);
    let t = triple_norm(f, &weight, l, harmonics)?;
    let d2 = t.total * t.total;
    if !(d2 > 0.0) {
        return Err(LabError::Domain(
            "zero field in the coercivity quotient".into(),
        ));
    }
    Ok(((q + w * w) / d2, q / d2, t))
}

fn weight_for(m: &LinearOperatorMatrix) -> LabResult<CharacteristicWeight> {
    let eps = if m.kind().is_landau() {
        LANDAU_WEIGHT_EPSILON
    } else {
        m.kind().params().epsilon
    };
    CharacteristicWeight::new(eps)
}

/// Estimate of `nu_0`: the minimum of [`coercivity_quotient`] over the
/// family.
pub fn coercivity_constant(
    m: &LinearOperatorMatrix,
    l: f64,
    harmonics: &SphericalHarmonicPlan,
    family: &CoercivityFamily,
) -> LabResult<CoercivityEstimate> {
    if family.is_empty() {
        return Err(LabError::param("family", "no test functions"));
    }
    let mut best: Option<CoercivityEstimate> = None;
    for (f, label) in family.fields.iter().zip(&family.labels) {
        let (r, q, t) = coercivity_quotient(m, f, l, harmonics)?;
        if best.as_ref().is_none_or(|b| r < b.nu0) {
            best = Some(CoercivityEstimate {
                nu0: r,
                minimizer: label.clone(),
                norm: t,
                dissipation: q,
            });
        }
    }
    let best = best.expect("nonempty family");
    if !(best.nu0 > 0.0) {
        return Err(LabError::Numerical(format!(
            "non-positive coercivity estimate {:e} at {}",
            best.nu0, best.minimizer
        )));
    }
    Ok(best)
}

//! Space-homogeneous perturbation equation `f' + M f = Gamma(f, f)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::linear::LinearPropagator;
use crate::error::{LabError, LabResult};
use crate::grid::{maxwellian, DistributionField, VelocityGrid};
use crate::operators::{gamma_bilinear, CollisionPlan, CollisionQuadrature, OperatorKind};
use crate::spectral::{project_null, LinearOperatorMatrix, ProjectionBasis};

/// Explicit RK4, or fourth-order Lawson exponential RK built on `e^{-hM}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rk4,
    Exponential,
}

impl std::str::FromStr for Scheme {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "exponential" => Ok(Scheme::Exponential),
            _ => Err(LabError::param(
                "scheme",
                format!("`{s}` is not rk4 or exponential"),
            )),
        }
    }
}

/// Largest `dt * rho(M)` accepted by the explicit scheme.
pub const RK4_CFL: f64 = 1.5;

/// Relative moment tolerance an initial datum must meet.
pub const INITIAL_MOMENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Record a monitor sample every `cadence` steps.
    pub cadence: usize,
    pub kind: OperatorKind,
    pub grid: VelocityGrid,
    pub quadrature: CollisionQuadrature,
    /// Small-data threshold on the lattice `L^2` norm of `f0`.
    pub max_initial_norm: f64,
}

impl EvolutionConfig {
    pub fn new(grid: VelocityGrid, kind: OperatorKind) -> Self {
        Self {
            dt: 0.1,
            t_end: 5.0,
            scheme: Scheme::Exponential,
            cadence: 1,
            kind,
            grid,
            quadrature: CollisionQuadrature::default(),
            max_initial_norm: 0.5,
        }
    }

    pub fn validate(&self) -> LabResult<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(LabError::param(
                "dt",
                format!("{} must be positive", self.dt),
            ));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(LabError::param(
                "t_end",
                format!("{} must be nonnegative", self.t_end),
            ));
        }
        if self.cadence == 0 {
            return Err(LabError::param("cadence", "must be at least 1"));
        }
        if !(self.max_initial_norm > 0.0) {
            return Err(LabError::param("max_initial_norm", "must be positive"));
        }
        self.quadrature.validate()
    }
}

/// One monitor sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sample {
    pub t: f64,
    pub norm: f64,
    /// `|(I - P) f|`.
    pub micro_norm: f64,
    /// Largest relative drift of the five moments of `F = mu + mu^{1/2} f`.
    pub moment_drift: f64,
    /// `min F` over the lattice.
    pub min_density: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: DistributionField,
    pub max_moment_drift: f64,
    /// Largest `|f(t)| / min_{s <= t} |f(s)| - 1`.
    pub norm_excess: f64,
    pub min_density: f64,
}

/// Moments `int phi mu^{1/2} f` for `phi = 1, v, |v|^2`, and the scales
/// `int |phi| mu` they are measured against.
struct Moments {
    weights: [Vec<f64>; 5],
    scales: [f64; 5],
}

impl Moments {
    fn new(grid: &VelocityGrid) -> Self {
        let mu = maxwellian(grid);
        let h3 = grid.cell_volume();
        let nodes = grid.nodes();
        let phi = |k: usize, v: &crate::kernel::Vec3| match k {
            0 => 1.0,
            1..=3 => v[k - 1],
            _ => v.norm_squared(),
        };
        let weights = std::array::from_fn(|k| {
            nodes
                .iter()
                .zip(mu.values())
                .map(|(v, m)| phi(k, v) * m.sqrt() * h3)
                .collect()
        });
        let scales = std::array::from_fn(|k| {
            nodes
                .iter()
                .zip(mu.values())
                .map(|(v, m)| phi(k, v).abs() * m * h3)
                .sum()
        });
        Self { weights, scales }
    }

    fn of(&self, f: &[f64]) -> [f64; 5] {
        std::array::from_fn(|k| self.weights[k].iter().zip(f).map(|(w, x)| w * x).sum())
    }

    fn drift(&self, a: &[f64; 5], b: &[f64; 5]) -> f64 {
        (0..5).fold(0.0f64, |m, k| m.max((a[k] - b[k]).abs() / self.scales[k]))
    }
}

/// Integrates `f' + M f = Gamma(f, f)` from `f0` to `cfg.t_end`.
///
/// `m` must be the linearized matrix of `cfg.kind` on `cfg.grid`. The
/// initial datum must have vanishing mass, momentum and energy and a norm
/// below `cfg.max_initial_norm`.
pub fn evolve_nonlinear(
    cfg: &EvolutionConfig,
    m: &LinearOperatorMatrix,
    f0: &DistributionField,
) -> LabResult<Trajectory> {
    cfg.validate()?;
    cfg.grid.same_as(m.grid())?;
    cfg.grid.same_as(f0.grid())?;
    if m.kind() != &cfg.kind {
        return Err(LabError::param(
            "kind",
            "matrix was assembled for a different operator",
        ));
    }
    let norm0 = f0.l2_norm();
    if norm0 > cfg.max_initial_norm {
        return Err(LabError::param(
            "f0",
            format!(
                "norm {norm0:e} exceeds the small-data threshold {:e}",
                cfg.max_initial_norm
            ),
        ));
    }
    let moments = Moments::new(&cfg.grid);
    let m0 = moments.of(f0.values());
    if moments.drift(&m0, &[0.0; 5]) > INITIAL_MOMENT_TOLERANCE {
        return Err(LabError::param(
            "f0",
            "mass, momentum and energy of the perturbation must vanish",
        ));
    }

    let prop = LinearPropagator::new(m);
    let rho = prop.spectral_radius();
    if cfg.scheme == Scheme::Rk4 && cfg.dt * rho > RK4_CFL {
        return Err(LabError::param(
            "dt",
            format!(
                "CFL violation: dt = {:e} exceeds {RK4_CFL}/rho(M) = {:e}",
                cfg.dt,
                RK4_CFL / rho
            ),
        ));
    }
    let plan = CollisionPlan::new(&cfg.grid, cfg.kind, &cfg.quadrature)?;
    let basis = ProjectionBasis::new(&cfg.grid)?;
    let mu = maxwellian(&cfg.grid);

    let steps = ((cfg.t_end / cfg.dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 {
        cfg.t_end / steps as f64
    } else {
        0.0
    };

    let nonlinear = |x: &[f64]| -> LabResult<Vec<f64>> {
        let f = f0.like(x.to_vec())?;
        Ok(gamma_bilinear(&plan, &f, &f)?.into_values())
    };
    let linear = |x: &[f64]| -> Vec<f64> {
        (m.matrix() * DVector::from_column_slice(x))
            .as_slice()
            .to_vec()
    };
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };

    let sample = |t: f64, x: &[f64]| -> LabResult<Sample> {
        let f = f0.like(x.to_vec())?;
        let (p, _) = project_null(&basis, &f)?;
        let micro = f.like(x.iter().zip(p.values()).map(|(a, b)| a - b).collect())?;
        let min_density = mu
            .values()
            .iter()
            .zip(x)
            .map(|(m, y)| m + m.sqrt() * y)
            .fold(f64::INFINITY, f64::min);
        Ok(Sample {
            t,
            norm: f.l2_norm(),
            micro_norm: micro.l2_norm(),
            moment_drift: moments.drift(&moments.of(x), &m0),
            min_density,
        })
    };

    let mut u = f0.values().to_vec();
    let mut samples = vec![sample(0.0, &u)?];
    let mut running_min = norm0;
    let mut norm_excess = 0.0f64;
    let mut max_drift = samples[0].moment_drift;
    let mut min_density = samples[0].min_density;
    let mut prev_norm = norm0;

    for step in 1..=steps {
        u = match cfg.scheme {
            Scheme::Rk4 => {
                let rhs = |x: &[f64]| -> LabResult<Vec<f64>> {
                    let n = nonlinear(x)?;
                    Ok(n.iter().zip(linear(x)).map(|(a, b)| a - b).collect())
                };
                let k1 = rhs(&u)?;
                let k2 = rhs(&axpy(&u, 0.5 * h, &k1))?;
                let k3 = rhs(&axpy(&u, 0.5 * h, &k2))?;
                let k4 = rhs(&axpy(&u, h, &k3))?;
                (0..u.len())
                    .map(|i| u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect()
            }
            Scheme::Exponential => {
                let half = |x: &[f64]| prop.apply_fn(x, |l| (-0.5 * h * l).exp());
                let full = |x: &[f64]| prop.apply_fn(x, |l| (-h * l).exp());
                let a = half(&u);
                let k1 = nonlinear(&u)?;
                let k2 = nonlinear(&axpy(&a, 0.5 * h, &half(&k1)))?;
                let k3 = nonlinear(&axpy(&a, 0.5 * h, &k2))?;
                let eu = half(&a);
                let k4 = nonlinear(&axpy(&eu, h, &half(&k3)))?;
                let ek1 = full(&k1);
                let k23 = half(&axpy(&k2, 1.0, &k3));
                (0..u.len())
                    .map(|i| eu[i] + h / 6.0 * (ek1[i] + 2.0 * k23[i] + k4[i]))
                    .collect()
            }
        };
        let t = step as f64 * h;
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt() * cfg.grid.cell_volume().sqrt();
        if !norm.is_finite() || (norm > 2.0 * prev_norm && norm > 1e-300) {
            return Err(LabError::Numerical(format!(
                "blow-up at t = {t}: norm grew from {prev_norm:e} to {norm:e} in one step"
            )));
        }
        prev_norm = norm;
        running_min = running_min.min(norm);
        if running_min > 0.0 {
            norm_excess = norm_excess.max(norm / running_min - 1.0);
        }
        if step % cfg.cadence == 0 || step == steps {
            let s = sample(t, &u)?;
            max_drift = max_drift.max(s.moment_drift);
            min_density = min_density.min(s.min_density);
            samples.push(s);
        }
    }
    Ok(Trajectory {
        samples,
        final_state: f0.like(u)?,
        max_moment_drift: max_drift,
        norm_excess,
        min_density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FieldRole;
    use crate::kernel::KernelParams;
    use crate::operators::linearized_matrix;

    fn setup() -> (EvolutionConfig, LinearOperatorMatrix) {
        let g = VelocityGrid::new(4.5, 8).unwrap();
        let kind = OperatorKind::Boltzmann(KernelParams::coulomb(1e-2).unwrap());
        let cfg = EvolutionConfig::new(g, kind);
        let plan = CollisionPlan::new(&g, kind, &cfg.quadrature).unwrap();
        let m =
            LinearOperatorMatrix::from_matrix(g, kind, linearized_matrix(&plan).unwrap()).unwrap();
        (cfg, m)
    }

    fn perturbation(cfg: &EvolutionConfig, amp: f64) -> DistributionField {
        let basis = ProjectionBasis::new(&cfg.grid).unwrap();
        let f = DistributionField::from_fn(cfg.grid, FieldRole::Perturbation, |v| {
            amp * (v[0] * v[0] - 1.0) * v[1] * (-v.norm_squared() / 4.0).exp()
        });
        let (p, _) = project_null(&basis, &f).unwrap();
        f.like(
            f.values()
                .iter()
                .zip(p.values())
                .map(|(a, b)| a - b)
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_is_an_equilibrium() {
        let (mut cfg, m) = setup();
        cfg.t_end = 0.2;
        let f0 = DistributionField::zeros(cfg.grid, FieldRole::Perturbation);
        let tr = evolve_nonlinear(&cfg, &m, &f0).unwrap();
        assert!(tr.final_state.values().iter().all(|&x| x == 0.0));
        assert_eq!(tr.samples.len(), 3);
    }

    #[test]
    fn preconditions_are_enforced() {
        let (mut cfg, m) = setup();
        let big = perturbation(&cfg, 1e3);
        assert!(matches!(
            evolve_nonlinear(&cfg, &m, &big),
            Err(LabError::InvalidParameter { name: "f0", .. })
        ));
        let massive = DistributionField::from_fn(cfg.grid, FieldRole::Perturbation, |v| {
            1e-3 * (-v.norm_squared() / 4.0).exp()
        });
        assert!(matches!(
            evolve_nonlinear(&cfg, &m, &massive),
            Err(LabError::InvalidParameter { name: "f0", .. })
        ));
        cfg.scheme = Scheme::Rk4;
        cfg.dt = 10.0;
        assert!(matches!(
            evolve_nonlinear(&cfg, &m, &perturbation(&cfg, 1e-2)),
            Err(LabError::InvalidParameter { name: "dt", .. })
        ));
    }

    #[test]
    fn schemes_agree_and_conserve() {
        let (mut cfg, m) = setup();
        // rho(M) is of order 1e3, so the explicit scheme is run briefly
        let rho = LinearPropagator::new(&m).spectral_radius();
        cfg.dt = 0.5 / rho;
        cfg.t_end = 5.0 * cfg.dt;
        let f0 = perturbation(&cfg, 0.05);
        cfg.scheme = Scheme::Rk4;
        let a = evolve_nonlinear(&cfg, &m, &f0).unwrap();
        cfg.scheme = Scheme::Exponential;
        let b = evolve_nonlinear(&cfg, &m, &f0).unwrap();
        let d = a
            .final_state
            .values()
            .iter()
            .zip(b.final_state.values())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let s = a
            .final_state
            .values()
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        assert!(d < 1e-4 * s, "{d} vs {s}");
        assert!(a.max_moment_drift < 1e-10 && b.max_moment_drift < 1e-10);
        assert!(b.samples.last().unwrap().norm < f0.l2_norm());
    }
}

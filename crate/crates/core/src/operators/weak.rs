//! Weak forms `<Q(g, h), f>` in three evaluation modes, and the pairing of
//! the Boltzmann–Landau difference against a weighted test function.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::bilinear::{gamma_bilinear, weak_form};
use super::quadrature::{
    antisymmetric_frame, grazing_fits, sigma_fits, CollisionPlan, CollisionQuadrature, OperatorKind,
};
use crate::error::{LabError, LabResult};
use crate::grid::interp::{keys_eval, trilinear_eval};
use crate::grid::{DistributionField, FieldRole, VelocityGrid};
use crate::kernel::{polynomial_weight, post_collision, Vec3};
use crate::par;

/// How a weak form is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeakFormMode {
    /// `h^3 sum_m Q(g, h)_m f_m` with `Q` from the scatter scheme.
    GridField,
    /// Sum over lattice pairs and the plan's deviation nodes of
    /// `B g_* h (f' - f)`, with `f'` interpolated off the lattice.
    Direct8D,
    /// Importance sampling of `(v, v_*, sigma)` with stratified angles;
    /// needs `eta > 0`.
    MonteCarlo { seed: u64, samples: usize },
}

/// A weak-form evaluation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakFormSpec {
    pub kind: OperatorKind,
    /// Expected roles of `(g, h, f)`.
    pub roles: [FieldRole; 3],
    pub quadrature: CollisionQuadrature,
    pub mode: WeakFormMode,
}

impl WeakFormSpec {
    pub fn new(kind: OperatorKind, mode: WeakFormMode) -> Self {
        Self {
            kind,
            roles: [
                FieldRole::Density,
                FieldRole::Density,
                FieldRole::Perturbation,
            ],
            quadrature: CollisionQuadrature::default(),
            mode,
        }
    }

    pub fn with_roles(mut self, roles: [FieldRole; 3]) -> Self {
        self.roles = roles;
        self
    }

    fn validate(&self, fields: [&DistributionField; 3]) -> LabResult<()> {
        for (f, r) in fields.iter().zip(self.roles) {
            if f.role() != r {
                return Err(LabError::Domain(format!(
                    "field role {:?} where {r:?} was declared",
                    f.role()
                )));
            }
            fields[0].grid().same_as(f.grid())?;
        }
        if let WeakFormMode::MonteCarlo { samples, .. } = self.mode {
            if samples == 0 {
                return Err(LabError::param("samples", "must be positive"));
            }
            if self.kind.is_landau() {
                return Err(LabError::Domain(
                    "Monte-Carlo mode samples the Boltzmann kernel only".into(),
                ));
            }
            if self.kind.params().eta <= 0.0 {
                return Err(LabError::param(
                    "eta",
                    "Monte-Carlo mode needs eta > 0 to keep the variance finite",
                ));
            }
        }
        Ok(())
    }

    fn check_plan(&self, plan: &CollisionPlan) -> LabResult<()> {
        if plan.kind() != &self.kind || plan.quadrature() != &self.quadrature {
            return Err(LabError::Domain(
                "collision plan was built for another operator".into(),
            ));
        }
        Ok(())
    }

    /// Evaluates `<Q(g, h), f>` from lattice fields. Off-lattice values are
    /// Keys-interpolated (trilinear next to the faces). The plan must match
    /// `kind` and the quadrature.
    pub fn evaluate(
        &self,
        plan: &CollisionPlan,
        g: &DistributionField,
        h: &DistributionField,
        f: &DistributionField,
    ) -> LabResult<f64> {
        self.validate([g, h, f])?;
        self.check_plan(plan)?;
        plan.grid().same_as(g.grid())?;
        self.dispatch(
            plan,
            [g, h, f],
            [Point::Field(g), Point::Field(h), Point::Field(f)],
        )
    }

    /// Evaluates `<Q(g, h), f>` for functions given in closed form. The
    /// lattice modes sample `g` and `h` at the nodes; `Direct8D` then
    /// evaluates `f` exactly at the post-collision points and Monte Carlo
    /// evaluates all three exactly.
    pub fn evaluate_functions(
        &self,
        plan: &CollisionPlan,
        g: &(dyn Fn(&Vec3) -> f64 + Sync),
        h: &(dyn Fn(&Vec3) -> f64 + Sync),
        f: &(dyn Fn(&Vec3) -> f64 + Sync),
    ) -> LabResult<f64> {
        self.check_plan(plan)?;
        let grid = *plan.grid();
        let fields = [g, h, f]
            .iter()
            .zip(self.roles)
            .map(|(fun, role)| DistributionField::from_fn(grid, role, fun))
            .collect::<Vec<_>>();
        self.validate([&fields[0], &fields[1], &fields[2]])?;
        self.dispatch(
            plan,
            [&fields[0], &fields[1], &fields[2]],
            [Point::Exact(g), Point::Exact(h), Point::Exact(f)],
        )
    }

    fn dispatch(
        &self,
        plan: &CollisionPlan,
        fields: [&DistributionField; 3],
        exact: [Point; 3],
    ) -> LabResult<f64> {
        let [g, h, f] = fields;
        match self.mode {
            WeakFormMode::GridField => weak_form(plan, g, h, f),
            WeakFormMode::Direct8D => Ok(direct(plan, g, h, f, &exact[2])),
            WeakFormMode::MonteCarlo { seed, samples } => {
                Ok(monte_carlo(&self.kind, g.grid(), &exact, seed, samples))
            }
        }
    }
}

/// Off-lattice evaluation of one input.
enum Point<'a> {
    Field(&'a DistributionField),
    Exact(&'a (dyn Fn(&Vec3) -> f64 + Sync)),
}

impl Point<'_> {
    fn at(&self, p: &Vec3) -> f64 {
        match self {
            Point::Field(f) => keys_eval(f, p).unwrap_or_else(|| trilinear_eval(f, p)),
            Point::Exact(f) => f(p),
        }
    }
}

fn shifted(vals: &[f64], n: usize, idx: [usize; 3], o: [i64; 3]) -> f64 {
    let mut k = [0usize; 3];
    for a in 0..3 {
        let x = idx[a] as i64 + o[a];
        if x < 0 || x >= n as i64 {
            return 0.0;
        }
        k[a] = x as usize;
    }
    vals[(k[0] * n + k[1]) * n + k[2]]
}

/// Centred first and second differences of a lattice field at a node, in
/// lattice units.
fn lattice_derivatives(vals: &[f64], n: usize, xi: [usize; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let at = |o: [i64; 3]| shifted(vals, n, xi, o);
    let fi = at([0; 3]);
    let mut grad = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for a in 0..3 {
        let mut p = [0i64; 3];
        p[a] = 1;
        let mut m = [0i64; 3];
        m[a] = -1;
        grad[a] = 0.5 * (at(p) - at(m));
        hess[a][a] = at(p) - 2.0 * fi + at(m);
        for b in a + 1..3 {
            let mut s = [[0i64; 3]; 4];
            for (k, (sa, sb)) in [(1, 1), (1, -1), (-1, 1), (-1, -1)].iter().enumerate() {
                s[k][a] = *sa;
                s[k][b] = *sb;
            }
            let c = 0.25 * (at(s[0]) - at(s[1]) - at(s[2]) + at(s[3]));
            hess[a][b] = c;
            hess[b][a] = c;
        }
    }
    (grad, hess)
}

/// Pairwise weak form over lattice pairs and the plan's admissible
/// deviation nodes, with `f'` from `fp`. The grazing part uses centred differences of the
/// lattice field, or directional differences of the exact function.
fn direct(
    plan: &CollisionPlan,
    g: &DistributionField,
    h: &DistributionField,
    f: &DistributionField,
    fp: &Point,
) -> f64 {
    let grid = *plan.grid();
    let n = grid.n();
    let hs = grid.spacing();
    let (gv, hv, fv) = (g.values(), h.values(), f.values());
    let (u_coeff, landau_coeff) = plan.coefficients();
    let parts = par::map_indexed(grid.len(), |i| {
        if hv[i] == 0.0 {
            return 0.0;
        }
        let xi = grid.unravel(i);
        let vi = grid.node(i);
        let fi = fp.at(&vi);
        let (grad, hess) = match fp {
            Point::Field(_) => lattice_derivatives(fv, n, xi),
            Point::Exact(_) => ([0.0; 3], [[0.0; 3]; 3]),
        };
        let step = 1e-3;
        let mut acc = 0.0;
        for j in 0..grid.len() {
            if j == i || gv[j] == 0.0 {
                continue;
            }
            let xj = grid.unravel(j);
            let entry = plan.entry(xi, xj);
            let amp = gv[j] * hv[i];
            if u_coeff != 0.0 {
                for s in &plan.sigma[entry.sigma.clone()] {
                    if !sigma_fits(n, xi, xj, s) {
                        continue;
                    }
                    let p = vi + Vec3::from(s.d) * hs;
                    acc += amp * s.w * u_coeff * (fp.at(&p) - fi);
                }
            }
            if landau_coeff == 0.0 || entry.grazing.is_empty() || !grazing_fits(n, xi, xj) {
                continue;
            }
            let uh = Vec3::from(entry.uhat);
            let r = entry.r;
            for az in &plan.grazing[entry.grazing.clone()] {
                let q = match fp {
                    Point::Field(_) => {
                        let mut q = 0.0;
                        for a in 0..3 {
                            q -= r * grad[a] * entry.uhat[a];
                            for b in 0..3 {
                                q += 0.5 * r * r * az.e[a] * hess[a][b] * az.e[b];
                            }
                        }
                        q
                    }
                    Point::Exact(_) => {
                        // same expansion in physical units: -r h f_u + (r h)^2 / 2 f_ee
                        let e = Vec3::from(az.e);
                        let d1 =
                            (fp.at(&(vi + uh * step)) - fp.at(&(vi - uh * step))) / (2.0 * step);
                        let d2 = (fp.at(&(vi + e * step)) + fp.at(&(vi - e * step)) - 2.0 * fi)
                            / (step * step);
                        -r * hs * d1 + 0.5 * r * r * hs * hs * d2
                    }
                };
                acc += amp * az.w * landau_coeff * q;
            }
        }
        acc
    });
    parts.iter().sum::<f64>() * grid.cell_volume()
}

const ANGLE_STRATA: usize = 64;

/// Standard deviation of the Gaussian proposal for `v` and `v_*`.
const PROPOSAL_SD: f64 = std::f64::consts::SQRT_2;

/// `int B g_* h (f' - f)` over the box by importance sampling: `v` and
/// `v_*` are drawn from a wide Gaussian (samples outside the box count as
/// zero), `ln t` is stratified into equal slices of `[ln eps, ln t_max]`,
/// and each azimuth is paired with its opposite so that the first-order
/// part of `f' - f` cancels within a sample.
fn monte_carlo(
    kind: &OperatorKind,
    grid: &VelocityGrid,
    fun: &[Point; 3],
    seed: u64,
    samples: usize,
) -> f64 {
    let p = kind.params();
    let half = grid.half_width();
    let eps = p.epsilon;
    let t_hi = p.t_max();
    if eps >= t_hi {
        return 0.0;
    }
    let log_span = (t_hi / eps).ln();
    let slice = log_span / ANGLE_STRATA as f64;
    let normal = Normal::new(0.0, PROPOSAL_SD).expect("valid proposal");
    let norm3 = (2.0 * PI * PROPOSAL_SD * PROPOSAL_SD).powf(1.5);
    let density = |x: &Vec3| (-x.norm_squared() / (2.0 * PROPOSAL_SD * PROPOSAL_SD)).exp() / norm3;
    let inside = |x: &Vec3| x.iter().all(|c| c.abs() <= half);
    let parts = par::map_indexed(ANGLE_STRATA, |k| {
        let count = samples / ANGLE_STRATA + usize::from(k < samples % ANGLE_STRATA);
        if count == 0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut acc = 0.0;
        for _ in 0..count {
            let v = Vec3::from_fn(|_, _| normal.sample(&mut rng));
            let vs = Vec3::from_fn(|_, _| normal.sample(&mut rng));
            let t = eps * ((k as f64 + rng.gen::<f64>()) * slice).exp();
            let phi = 2.0 * PI * rng.gen::<f64>();
            let u = v - vs;
            let r = u.norm();
            if r < p.eta || r == 0.0 || !inside(&v) || !inside(&vs) {
                continue;
            }
            let (uh, e1, e2) = antisymmetric_frame([u[0], u[1], u[2]]);
            let cos_t = 1.0 - 2.0 * t * t;
            let sin_t = 2.0 * t * (1.0 - t * t).sqrt();
            let e = Vec3::from(e1) * phi.cos() + Vec3::from(e2) * phi.sin();
            let fv = fun[2].at(&v);
            let mut jump = 0.0;
            for sgn in [1.0, -1.0] {
                let sigma = Vec3::from(uh) * cos_t + e * (sgn * sin_t);
                let (vp, _) = post_collision(&v, &vs, &sigma);
                jump += 0.5 * (fun[2].at(&vp) - fv);
            }
            // b sin(theta) dtheta dphi = 4 |ln eps|^{-1} t^{-2} d(ln t) dphi
            let angular = 4.0 / (p.log_inv_eps() * t * t) * slice * 2.0 * PI;
            acc += r.powf(p.gamma) * angular * fun[0].at(&vs) * fun[1].at(&v) * jump
                / (density(&v) * density(&vs));
        }
        acc / count as f64
    });
    parts.iter().sum()
}

/// `<W_l (Gamma^L - Gamma^eps)(g, h), f>` with both conjugated operators
/// evaluated by their scatter plans.
pub fn operator_difference(
    landau: &CollisionPlan,
    boltzmann: &CollisionPlan,
    g: &DistributionField,
    h: &DistributionField,
    f: &DistributionField,
    l: f64,
) -> LabResult<f64> {
    if !landau.kind().is_landau() || boltzmann.kind().is_landau() {
        return Err(LabError::Domain(
            "operator_difference takes a Landau plan and a Boltzmann plan".into(),
        ));
    }
    landau.grid().same_as(boltzmann.grid())?;
    landau.grid().same_as(f.grid())?;
    let a = gamma_bilinear(landau, g, h)?;
    let b = gamma_bilinear(boltzmann, g, h)?;
    let grid = landau.grid();
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .zip(f.values())
        .enumerate()
        .map(|(m, ((x, y), z))| polynomial_weight(l, &grid.node(m)) * (x - y) * z)
        .sum();
    Ok(sum * grid.cell_volume())
}

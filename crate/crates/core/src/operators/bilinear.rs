//! Bilinear collision operators, their Maxwellian conjugates, the remainder
//! `I` and the dissipation functional `N`.

use super::quadrature::CollisionPlan;
use super::scatter::{gather_sum, scatter};
use crate::error::LabResult;
use crate::grid::{maxwellian, DistributionField, FieldRole};

/// Nodes where `mu^{1/2}` is below this are treated as vacuum by the
/// conjugated operators.
pub const SQRT_MU_FLOOR: f64 = 1e-300;

fn check(plan: &CollisionPlan, fields: &[&DistributionField]) -> LabResult<()> {
    for f in fields {
        plan.grid().same_as(f.grid())?;
    }
    Ok(())
}

/// `sqrt(mu)` on the plan's lattice.
pub fn sqrt_maxwellian(plan: &CollisionPlan) -> Vec<f64> {
    maxwellian(plan.grid())
        .values()
        .iter()
        .map(|x| x.sqrt())
        .collect()
}

fn raw_collision(plan: &CollisionPlan, g: &[f64], h: &[f64]) -> Vec<f64> {
    scatter(plan, g, h, |buf, _, _, m, a, _, dw| buf[m] += a * dw)
}

/// `Q(g, h)` for the operator described by `plan` (Boltzmann with cutoff,
/// or its grazing limit).
///
/// Each collision of the pair `(v_i, v_j)` moves the mass
/// `h^6 B g_j h_i` out of cell `i` and spreads it around `v_i + d`; the
/// value at node `m` is the resulting rate of change of density.
pub fn collision_bilinear(
    plan: &CollisionPlan,
    g: &DistributionField,
    h: &DistributionField,
) -> LabResult<DistributionField> {
    check(plan, &[g, h])?;
    DistributionField::new(
        *plan.grid(),
        raw_collision(plan, g.values(), h.values()),
        FieldRole::Density,
    )
}

/// `Gamma(g, h) = mu^{-1/2} Q(mu^{1/2} g, mu^{1/2} h)`.
pub fn gamma_bilinear(
    plan: &CollisionPlan,
    g: &DistributionField,
    h: &DistributionField,
) -> LabResult<DistributionField> {
    check(plan, &[g, h])?;
    let sm = sqrt_maxwellian(plan);
    DistributionField::new(
        *plan.grid(),
        gamma_raw(plan, &sm, g.values(), h.values()),
        FieldRole::Perturbation,
    )
}

pub(crate) fn gamma_raw(plan: &CollisionPlan, sm: &[f64], g: &[f64], h: &[f64]) -> Vec<f64> {
    let gg: Vec<f64> = g.iter().zip(sm).map(|(a, b)| a * b).collect();
    let hh: Vec<f64> = h.iter().zip(sm).map(|(a, b)| a * b).collect();
    let mut q = raw_collision(plan, &gg, &hh);
    for (x, s) in q.iter_mut().zip(sm) {
        *x = if *s > SQRT_MU_FLOOR { *x / s } else { 0.0 };
    }
    q
}

/// Discrete counterpart of the linearization `-Gamma(mu^{1/2}, f) - Gamma(f, mu^{1/2})`
/// of the scatter scheme. The symmetric Dirichlet-form operator in
/// [`super::linearized`] is the one used for spectra; this composition is
/// kept as a cross-check.
pub fn linearized_by_composition(
    plan: &CollisionPlan,
    f: &DistributionField,
) -> LabResult<DistributionField> {
    check(plan, &[f])?;
    let sm = sqrt_maxwellian(plan);
    let a = gamma_raw(plan, &sm, &sm, f.values());
    let b = gamma_raw(plan, &sm, f.values(), &sm);
    f.like(a.iter().zip(&b).map(|(x, y)| -x - y).collect())
}

/// `I(g, h)`, defined so that `Gamma(g, h) = Q(mu^{1/2} g, h) + I(g, h)`
/// holds node by node: each scattered contribution landing on `m` carries
/// the factor `(mu_i mu_j / mu_m)^{1/2} - mu_j^{1/2}`.
pub fn remainder_i(
    plan: &CollisionPlan,
    g: &DistributionField,
    h: &DistributionField,
) -> LabResult<DistributionField> {
    check(plan, &[g, h])?;
    let sm = sqrt_maxwellian(plan);
    let out = scatter(plan, g.values(), h.values(), |buf, i, j, m, a, w, _| {
        if sm[m] > SQRT_MU_FLOOR {
            buf[m] += a * w * (sm[i] * sm[j] / sm[m] - sm[j]);
        }
    });
    DistributionField::new(*plan.grid(), out, FieldRole::Perturbation)
}

/// `N(g, h) = sum W g_j^2 (I h(v_i + d) - h_i)^2`.
pub fn dissipation(
    plan: &CollisionPlan,
    g: &DistributionField,
    h: &DistributionField,
) -> LabResult<f64> {
    check(plan, &[g, h])?;
    let g2: Vec<f64> = g.values().iter().map(|x| x * x).collect();
    let hv = h.values();
    let ones = vec![1.0; hv.len()];
    let sum = gather_sum(plan, &g2, &ones, |_, j, w, list, _| {
        let dh: f64 = list.iter().map(|(m, c)| c * hv[*m]).sum();
        w * g2[j] * dh * dh
    });
    Ok(sum * plan.grid().cell_volume())
}

/// `<Q(g, h), f>` evaluated directly in weak form on the lattice.
pub fn weak_form(
    plan: &CollisionPlan,
    g: &DistributionField,
    h: &DistributionField,
    f: &DistributionField,
) -> LabResult<f64> {
    check(plan, &[g, h, f])?;
    let (gv, hv, fv) = (g.values(), h.values(), f.values());
    let q = scatter(plan, gv, hv, |buf, _, _, m, a, _, dw| {
        buf[m] += a * dw * fv[m]
    });
    Ok(q.iter().sum::<f64>() * plan.grid().cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VelocityGrid;
    use crate::kernel::KernelParams;
    use crate::operators::{CollisionQuadrature, OperatorKind};

    fn small_plan(eps: f64) -> CollisionPlan {
        let g = VelocityGrid::new(5.0, 8).unwrap();
        let p = KernelParams::coulomb(eps).unwrap();
        CollisionPlan::new(
            &g,
            OperatorKind::Boltzmann(p),
            &CollisionQuadrature::default(),
        )
        .unwrap()
    }

    fn bump(plan: &CollisionPlan, shift: f64) -> DistributionField {
        DistributionField::from_fn(*plan.grid(), FieldRole::Density, |v| {
            (1.0 + 0.3 * v[0] - 0.2 * v[1] * v[2])
                * (-(v - crate::kernel::Vec3::new(shift, 0.0, 0.1)).norm_squared() / 2.0).exp()
        })
    }

    #[test]
    fn conservation_on_small_grid() {
        for eps in [1e-2, 1e-6] {
            let plan = small_plan(eps);
            let g = bump(&plan, 0.3);
            let q = collision_bilinear(&plan, &g, &g).unwrap();
            let scale = q.l2_norm() * g.l2_norm();
            for phi in [
                Box::new(|_: &crate::kernel::Vec3| 1.0) as Box<dyn Fn(&crate::kernel::Vec3) -> f64>,
                Box::new(|v: &crate::kernel::Vec3| v[0]),
                Box::new(|v: &crate::kernel::Vec3| v[2]),
                Box::new(|v: &crate::kernel::Vec3| v.norm_squared()),
            ] {
                let m = q.moment(phi);
                assert!(
                    m.abs() < 1e-12 * scale,
                    "eps={eps} moment {m} scale {scale}"
                );
            }
        }
    }

    #[test]
    fn identity_gamma_equals_q_plus_remainder() {
        let plan = small_plan(1e-2);
        let g = bump(&plan, 0.2).with_role(FieldRole::Perturbation);
        let h = bump(&plan, -0.4).with_role(FieldRole::Perturbation);
        let gam = gamma_bilinear(&plan, &g, &h).unwrap();
        let sm = sqrt_maxwellian(&plan);
        let sg = g
            .like(g.values().iter().zip(&sm).map(|(a, b)| a * b).collect())
            .unwrap();
        let q = collision_bilinear(&plan, &sg, &h).unwrap();
        let r = remainder_i(&plan, &g, &h).unwrap();
        let mut diff = 0.0f64;
        for k in 0..gam.values().len() {
            diff = diff.max((gam.values()[k] - q.values()[k] - r.values()[k]).abs());
        }
        let scale = gam.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(diff <= 1e-10 * scale, "{diff} vs {scale}");
    }

    #[test]
    fn weak_form_matches_field_pairing() {
        let plan = small_plan(1e-5);
        let g = bump(&plan, 0.2);
        let h = bump(&plan, -0.3);
        let f = DistributionField::from_fn(*plan.grid(), FieldRole::Basis, |v| {
            (v[0] * 0.7).sin() + v[1] * v[1] * 0.1
        });
        let q = collision_bilinear(&plan, &g, &h).unwrap();
        let a = q.inner(&f).unwrap();
        let b = weak_form(&plan, &g, &h, &f).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1e-300));
    }

    #[test]
    fn momentum_transfer_matches_angular_moment() {
        // <Q(g,h), v_1> = -A_2 sum_{i != j} |u|^gamma u_1 g_j h_i h^6 with
        // A_2 the k = 2 angular moment, for data far from the box faces
        let grid = VelocityGrid::new(6.0, 12).unwrap();
        let p = KernelParams::coulomb(1e-2).unwrap();
        let plan = CollisionPlan::new(
            &grid,
            OperatorKind::Boltzmann(p),
            &CollisionQuadrature::default(),
        )
        .unwrap();
        let g = DistributionField::from_fn(grid, FieldRole::Density, |v| {
            (-(v - crate::kernel::Vec3::new(0.6, 0.0, 0.0)).norm_squared()).exp()
        });
        let h = DistributionField::from_fn(grid, FieldRole::Density, |v| {
            (-(v + crate::kernel::Vec3::new(0.6, 0.0, 0.0)).norm_squared()).exp()
        });
        let q = collision_bilinear(&plan, &g, &h).unwrap();
        let lhs = q.moment(|v| v[0]);
        let a2 = crate::kernel::angular_moment(&p, 2).unwrap();
        let vol = grid.cell_volume();
        let mut rhs = 0.0;
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                if i != j {
                    let u = grid.node(i) - grid.node(j);
                    rhs -=
                        a2 * u.norm().powi(-3) * u[0] * g.values()[j] * h.values()[i] * vol * vol;
                }
            }
        }
        assert!((lhs - rhs).abs() < 1e-3 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn dissipation_vanishes_on_constants() {
        let plan = small_plan(1e-3);
        let g = bump(&plan, 0.0);
        let c = DistributionField::from_fn(*plan.grid(), FieldRole::Basis, |_| 2.0);
        assert!(dissipation(&plan, &g, &c).unwrap().abs() < 1e-20);
        let h = bump(&plan, 0.5);
        assert!(dissipation(&plan, &g, &h).unwrap() > 0.0);
    }
}

use proptest::prelude::*;

use grazing_core::grid::interp::{corrected_trilinear_eval, keys_eval, trilinear_eval};
use grazing_core::grid::{
    apply_fourier_multiplier, maxwellian_at, weighted_l2_norm, DistributionField, FieldRole,
    VelocityGrid,
};
use grazing_core::kernel::{CharacteristicWeight, KernelParams, Vec3};
use grazing_core::operators::{
    collision_bilinear, CollisionPlan, CollisionQuadrature, OperatorKind,
};
use grazing_core::spectral::{project_null, ProjectionBasis};

fn grid() -> VelocityGrid {
    VelocityGrid::new(4.0, 8).unwrap()
}

fn random_field(g: VelocityGrid, values: Vec<f64>) -> DistributionField {
    DistributionField::new(g, values, FieldRole::Perturbation).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 512)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fourier_multiplier_round_trip(v in values(), eps in 1e-8f64..0.25) {
        let f = random_field(grid(), v);
        let w = CharacteristicWeight::new(eps).unwrap();
        let there = apply_fourier_multiplier(&f, |xi| w.eval(xi)).unwrap();
        let back = apply_fourier_multiplier(&there, |xi| 1.0 / w.eval(xi)).unwrap();
        prop_assert!(max_diff(back.values(), f.values()) < 1e-12);
        let same = apply_fourier_multiplier(&f, |_| 1.0).unwrap();
        prop_assert!(max_diff(same.values(), f.values()) < 1e-14);
    }

    #[test]
    fn interpolation_reproduces_affine_functions(
        c in prop::array::uniform4(-2.0f64..2.0),
        p in prop::array::uniform3(-2.4f64..2.4),
    ) {
        let g = grid();
        let affine = move |v: &Vec3| c[0] + c[1] * v[0] + c[2] * v[1] + c[3] * v[2];
        let f = DistributionField::from_fn(g, FieldRole::Perturbation, affine);
        let p = Vec3::new(p[0], p[1], p[2]);
        let exact = affine(&p);
        prop_assert!((trilinear_eval(&f, &p) - exact).abs() < 1e-12);
        prop_assert!((keys_eval(&f, &p).unwrap() - exact).abs() < 1e-12);
        prop_assert!((corrected_trilinear_eval(&f, &p).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn keys_reproduces_quadratics(
        c in prop::array::uniform3(-1.0f64..1.0),
        p in prop::array::uniform3(-2.4f64..2.4),
    ) {
        let g = grid();
        let q = move |v: &Vec3| c[0] * v[0] * v[1] + c[1] * v[2] * v[2] - c[2] * v[0];
        let f = DistributionField::from_fn(g, FieldRole::Perturbation, q);
        let p = Vec3::new(p[0], p[1], p[2]);
        prop_assert!((keys_eval(&f, &p).unwrap() - q(&p)).abs() < 1e-11);
    }

    #[test]
    fn weighted_norm_is_monotone_in_the_exponent(v in values(), l in -3.0f64..3.0, dl in 0.0f64..2.0) {
        let f = random_field(grid(), v);
        prop_assert!(weighted_l2_norm(&f, l) <= weighted_l2_norm(&f, l + dl) * (1.0 + 1e-14));
        prop_assert!((weighted_l2_norm(&f, 0.0) - f.l2_norm()).abs() <= 1e-13 * f.l2_norm());
    }

    #[test]
    fn projection_is_idempotent(v in values()) {
        let g = grid();
        let basis = ProjectionBasis::new(&g).unwrap();
        let f = random_field(g, v);
        let (p, _) = project_null(&basis, &f).unwrap();
        let (pp, _) = project_null(&basis, &p).unwrap();
        prop_assert!(max_diff(pp.values(), p.values()) < 1e-12);
        let r = f.like(f.values().iter().zip(p.values()).map(|(a, b)| a - b).collect()).unwrap();
        prop_assert!(r.inner(&p).unwrap().abs() < 1e-12 * f.l2_norm().powi(2).max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn collision_operator_is_bilinear(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        s in prop::array::uniform3(-0.4f64..0.4),
    ) {
        let g = VelocityGrid::new(4.5, 8).unwrap();
        let plan = CollisionPlan::new(
            &g,
            OperatorKind::Boltzmann(KernelParams::coulomb(1e-3).unwrap()),
            &CollisionQuadrature::default(),
        )
        .unwrap();
        let bump = |c: Vec3, t: f64| {
            DistributionField::from_fn(g, FieldRole::Perturbation, move |v: &Vec3| {
                (1.0 + t * v[1]) * maxwellian_at(&(v - c))
            })
        };
        let f = bump(Vec3::new(s[0], 0.0, 0.0), 0.2);
        let k = bump(Vec3::new(0.0, s[1], 0.0), -0.3);
        let h = bump(Vec3::new(0.0, 0.0, s[2]), 0.1);
        let mix = f.like(f.values().iter().zip(k.values()).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let lhs = collision_bilinear(&plan, &mix, &h).unwrap();
        let qf = collision_bilinear(&plan, &f, &h).unwrap();
        let qk = collision_bilinear(&plan, &k, &h).unwrap();
        let rhs: Vec<f64> = qf.values().iter().zip(qk.values()).map(|(x, y)| a * x + b * y).collect();
        let scale = rhs.iter().chain(lhs.values()).fold(1e-300f64, |m, x| m.max(x.abs()));
        prop_assert!(max_diff(lhs.values(), &rhs) < 1e-12 * scale);
        let rhs2 = collision_bilinear(&plan, &h, &mix).unwrap();
        let hf = collision_bilinear(&plan, &h, &f).unwrap();
        let hk = collision_bilinear(&plan, &h, &k).unwrap();
        let sum: Vec<f64> = hf.values().iter().zip(hk.values()).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(max_diff(rhs2.values(), &sum) < 1e-12 * scale.max(sum.iter().fold(0.0f64, |m, x| m.max(x.abs()))));
    }
}

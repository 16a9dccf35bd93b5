use abp_core::geometry::set_distance;
use abp_core::linalg::{dist_sq, dot, sub};
use abp_core::{ConstraintRegion, DecisionSet};
use proptest::prelude::*;

fn ball() -> impl Strategy<Value = ConstraintRegion> {
    (prop::collection::vec(-1.0..1.0f64, 2..=3), 0.05..0.8f64)
        .prop_map(|(c, r)| ConstraintRegion::ball(c, r).unwrap())
}

fn boxed() -> impl Strategy<Value = ConstraintRegion> {
    prop::collection::vec((-1.0..1.0f64, 0.0..1.0f64), 2..=3).prop_map(|pairs| {
        let lower = pairs.iter().map(|(l, _)| *l).collect();
        let upper = pairs.iter().map(|(l, w)| l + w).collect();
        ConstraintRegion::boxed(Some(lower), upper).unwrap()
    })
}

fn region() -> impl Strategy<Value = ConstraintRegion> {
    prop_oneof![ball(), boxed()]
}

fn with_point(dim_of: ConstraintRegion) -> impl Strategy<Value = (ConstraintRegion, Vec<f64>)> {
    let m = dim_of.dim();
    (Just(dim_of), prop::collection::vec(-3.0..3.0f64, m))
}

/// A point of `Q⁺`: a point of `Q` pushed down by a nonnegative offset.
fn qplus_member(region: &ConstraintRegion, u: &[f64], t: &[f64]) -> Vec<f64> {
    let y: Vec<f64> = match region {
        ConstraintRegion::Ball { center, radius } => {
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let s = radius * u[0].abs().min(1.0);
            center.iter().zip(u).map(|(c, v)| c + s * v / norm).collect()
        }
        ConstraintRegion::Box { lower, upper } => {
            let lower = lower.as_ref().unwrap();
            lower
                .iter()
                .zip(upper)
                .zip(u)
                .map(|((l, h), v)| l + (h - l) * (0.5 + 0.5 * v.clamp(-1.0, 1.0)))
                .collect()
        }
    };
    y.iter().zip(t).map(|(a, b)| a - b).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_idempotent((q, z) in region().prop_flat_map(with_point)) {
        let p = q.project_qplus(&z).unwrap().p;
        let rho = q.project_qplus(&p).unwrap().rho;
        prop_assert!(dot(&rho, &rho).sqrt() <= 1e-9, "{:?}", rho);
    }

    #[test]
    fn residual_is_nonnegative((q, z) in region().prop_flat_map(with_point)) {
        let rep = q.project_qplus(&z).unwrap();
        prop_assert!(rep.rho.iter().all(|r| *r >= 0.0));
        prop_assert!((rep.g_value - 0.5 * dot(&rep.rho, &rep.rho)).abs() <= 1e-15);
    }

    #[test]
    fn free_disposal(
        (q, z) in region().prop_flat_map(with_point),
        t in prop::collection::vec(0.0..2.0f64, 3),
    ) {
        // Lowering a point never moves it further from Q⁺.
        let lowered: Vec<f64> = z.iter().zip(&t).map(|(a, b)| a - b).collect();
        prop_assert!(q.qplus_distance(&lowered) <= q.qplus_distance(&z) + 1e-12);
        let p = q.project_qplus(&z).unwrap().p;
        let below: Vec<f64> = p.iter().zip(&t).map(|(a, b)| a - b).collect();
        prop_assert!(q.qplus_distance(&below) <= 1e-7);
    }

    #[test]
    fn projection_is_best_approximation(
        (q, z) in region().prop_flat_map(with_point),
        u in prop::collection::vec(-1.0..1.0f64, 3),
        t in prop::collection::vec(0.0..1.0f64, 3),
    ) {
        let p = q.project_qplus(&z).unwrap().p;
        let w = qplus_member(&q, &u[..q.dim()], &t[..q.dim()]);
        prop_assert!(dist_sq(&z, &p).sqrt() <= dist_sq(&z, &w).sqrt() + 1e-7);
        // Variational inequality of the projection onto a convex set.
        prop_assert!(dot(&sub(&z, &p), &sub(&w, &p)) <= 1e-7);
    }

    #[test]
    fn closed_form_distance_matches_projection((q, z) in region().prop_flat_map(with_point)) {
        let rep = q.project_qplus(&z).unwrap();
        prop_assert!((dot(&rep.rho, &rep.rho).sqrt() - q.qplus_distance(&z)).abs() <= 1e-7);
    }

    #[test]
    fn box_projection_variational_inequality(
        bounds in prop::collection::vec((-2.0..2.0f64, 0.0..2.0f64), 1..6),
        seed in prop::collection::vec(-4.0..4.0f64, 12),
    ) {
        let n = bounds.len();
        let lower: Vec<f64> = bounds.iter().map(|(l, _)| *l).collect();
        let upper: Vec<f64> = bounds.iter().map(|(l, w)| l + w).collect();
        let set = DecisionSet::boxed(lower.clone(), upper.clone()).unwrap();
        let x = &seed[..n];
        let px = set.project(x);
        prop_assert!(set.contains(&px, 0.0));
        prop_assert_eq!(set.project(&px), px.clone());
        let y: Vec<f64> = seed[6..6 + n]
            .iter()
            .zip(lower.iter().zip(&upper))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect();
        prop_assert!(dot(&sub(x, &px), &sub(&y, &px)) <= 1e-12);
        prop_assert!((set_distance(x, &set).unwrap() - 0.5 * dist_sq(x, &px)).abs() <= 1e-12);
    }
}

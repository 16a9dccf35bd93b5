use abp_core::metrics::{hypervolume, med};
use proptest::prelude::*;

fn front(m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..2.5f64, m), 1..25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hypervolume_grows_with_more_points(pts in front(2), extra in prop::collection::vec(0.0..2.5f64, 2)) {
        let reference = [2.0, 2.0];
        let base = hypervolume(&pts, &reference).unwrap();
        let mut more = pts.clone();
        more.push(extra);
        prop_assert!(hypervolume(&more, &reference).unwrap() >= base - 1e-12);
    }

    #[test]
    fn hypervolume_3d_grows_with_more_points(pts in front(3), extra in prop::collection::vec(0.0..2.5f64, 3)) {
        let reference = [2.0, 2.0, 2.0];
        let base = hypervolume(&pts, &reference).unwrap();
        let mut more = pts.clone();
        more.push(extra);
        prop_assert!(hypervolume(&more, &reference).unwrap() >= base - 1e-12);
        prop_assert!(base <= 8.0 + 1e-12);
    }

    #[test]
    fn hypervolume_ignores_dominated_points(pts in front(3), shift in prop::collection::vec(0.0..0.5f64, 3)) {
        let reference = [2.0, 2.0, 2.0];
        let base = hypervolume(&pts, &reference).unwrap();
        let mut more = pts.clone();
        more.push(pts[0].iter().zip(&shift).map(|(a, b)| a + b).collect());
        prop_assert!((hypervolume(&more, &reference).unwrap() - base).abs() <= 1e-12);
    }

    #[test]
    fn med_satisfies_triangle_inequality(
        triples in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 6), 1..20),
    ) {
        let a: Vec<Vec<f64>> = triples.iter().map(|t| t[0..2].to_vec()).collect();
        let b: Vec<Vec<f64>> = triples.iter().map(|t| t[2..4].to_vec()).collect();
        let c: Vec<Vec<f64>> = triples.iter().map(|t| t[4..6].to_vec()).collect();
        let ab = med(&a, &b).unwrap();
        let bc = med(&b, &c).unwrap();
        let ac = med(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((ab - med(&b, &a).unwrap()).abs() <= 1e-15);
        prop_assert_eq!(med(&a, &a).unwrap(), 0.0);
    }
}

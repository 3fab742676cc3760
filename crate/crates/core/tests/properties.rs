use hns_core::net::gelu;
use hns_core::relative_l2;
use hns_core::solver::sample_lhs;
use proptest::prelude::*;

proptest! {
    #[test]
    fn lhs_projections_are_one_per_stratum(dim in 1usize..6, count in 1usize..40, seed in any::<u64>()) {
        let pts = sample_lhs(dim, count, seed).unwrap();
        for axis in 0..dim {
            let mut bins: Vec<usize> = (0..count).map(|i| (pts[i * dim + axis] * count as f64) as usize).collect();
            bins.sort_unstable();
            prop_assert_eq!(bins, (0..count).collect::<Vec<_>>());
        }
    }

    #[test]
    fn gelu_odd_part_is_identity(x in -30.0f64..30.0) {
        prop_assert!((gelu(x) - gelu(-x) - x).abs() <= 1e-14 * (1.0 + x.abs()));
    }

    #[test]
    fn relative_l2_is_scale_invariant(v in prop::collection::vec(0.1f64..10.0, 1..20), s in 0.01f64..100.0) {
        let p: Vec<f64> = v.iter().map(|x| x * 1.01).collect();
        let a = relative_l2(&p, &v).unwrap();
        let ps: Vec<f64> = p.iter().map(|x| x * s).collect();
        let vs: Vec<f64> = v.iter().map(|x| x * s).collect();
        let b = relative_l2(&ps, &vs).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-15);
    }
}

use premax::closure::{
    dichotomy, directed_hausdorff, hausdorff, iterate_closure, shadowing_closure, ClosureParams, SamplingParams,
    SetApprox,
};
use premax::maximality::local_product_check;
use premax::suite::connecting_point;
use premax::torus::{HyperbolicMap, ToralAutomorphism, TorusPoint};
use proptest::prelude::*;

fn point2() -> impl Strategy<Value = TorusPoint> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| TorusPoint::new(vec![a, b]))
}

fn set() -> impl Strategy<Value = SetApprox> {
    prop::collection::vec(point2(), 1..8).prop_map(|p| SetApprox::new(p, 1e-6, "s").unwrap())
}

/// The fixed point, a homoclinic point and `2·half` of its iterates.
fn homoclinic_net(a: &ToralAutomorphism, half: usize) -> SetApprox {
    let o = TorusPoint::origin(2);
    let h = connecting_point(a, &o, &o);
    let mut pts = vec![o];
    let mut p = h.clone();
    for _ in 0..half {
        p = a.backward(&p);
    }
    for _ in 0..2 * half + 1 {
        pts.push(p.clone());
        p = a.forward(&p);
    }
    SetApprox::new(pts, 0.004, "homoclinic").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hausdorff_is_a_metric(a in set(), b in set(), c in set()) {
        let h = |x: &SetApprox, y: &SetApprox| hausdorff(x, y).unwrap();
        prop_assert!((h(&a, &b) - h(&b, &a)).abs() <= 1e-12);
        prop_assert!(h(&a, &c) <= h(&a, &b) + h(&b, &c) + 1e-12);
        prop_assert_eq!(h(&a, &a), 0.0);
        prop_assert!(directed_hausdorff(&a, &b).unwrap() <= h(&a, &b));
    }

    #[test]
    fn dichotomy_flags_exactly_the_quiet_pairs(nus in prop::collection::vec(0.0..0.02f64, 0..12), gamma in 0.001..0.02f64) {
        let r = dichotomy(&nus, gamma);
        let expected: Vec<usize> = (0..nus.len().saturating_sub(1))
            .filter(|&j| nus[j].max(nus[j + 1]) < 0.5 * gamma)
            .collect();
        prop_assert_eq!(r.failures, expected);
        prop_assert_eq!(r.pairs_checked, nus.len().saturating_sub(1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn one_step_only_adds_points(seed in any::<u64>(), half in 4..9usize) {
        let a = ToralAutomorphism::cat_map();
        let net = homoclinic_net(&a, half);
        let params = SamplingParams { seed, ..SamplingParams::default() };
        let step = shadowing_closure(&a, &net, 0.04, &params).unwrap();
        // every input point survives coarsening up to the resolution
        prop_assert!(directed_hausdorff(&net, &step.set).unwrap() <= net.resolution());
        prop_assert!(step.set.len() >= net.len());
    }

    #[test]
    fn stabilized_sets_have_local_product_structure(seed in any::<u64>(), half in 5..9usize) {
        let a = ToralAutomorphism::cat_map();
        let net = homoclinic_net(&a, half);
        let params = ClosureParams {
            delta: 0.04,
            u_radius: 0.15,
            max_iter: 10,
            sampling: SamplingParams { seed, ..SamplingParams::default() },
        };
        let t = iterate_closure(&a, &net, &params).unwrap();
        if t.stabilized() {
            let fin = t.final_set();
            // confirmation steps after the candidate stayed below resolution
            let c = match t.verdict { premax::closure::Verdict::Stabilized(c) => c, _ => unreachable!() };
            prop_assert!(t.nus[c..].iter().all(|&nu| nu <= fin.resolution()));
            let lps = local_product_check(&a, fin, 0.1, 0.04, 2.0 * fin.resolution());
            prop_assert!(lps.passed(), "{:?}", lps.failures.first());
        }
    }
}

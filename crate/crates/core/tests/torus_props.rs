use premax::torus::{
    torus_distance, FlowState, HyperbolicMap, ProductSystem, SuspensionFlow, System, ToralAutomorphism,
    TorusPoint,
};
use proptest::prelude::*;

fn point2() -> impl Strategy<Value = TorusPoint> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| TorusPoint::new(vec![a, b]))
}

fn maps() -> impl Strategy<Value = ToralAutomorphism> {
    prop_oneof![
        Just(ToralAutomorphism::cat_map()),
        Just(ToralAutomorphism::fibonacci_map()),
        Just(ToralAutomorphism::from_rows(&[vec![3, 1], vec![2, 1]]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_a_metric(p in point2(), q in point2(), r in point2()) {
        let d = |a: &TorusPoint, b: &TorusPoint| torus_distance(a, b).unwrap();
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() <= 1e-12);
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12);
        prop_assert_eq!(d(&p, &p), 0.0);
        prop_assert!(d(&p, &q) <= 0.5f64.hypot(0.5) + 1e-12);
    }

    #[test]
    fn backward_undoes_forward(a in maps(), p in point2()) {
        let back = a.backward(&a.forward(&p));
        prop_assert!(torus_distance(&back, &p).unwrap() < 1e-12);
    }

    #[test]
    fn stable_directions_contract(a in maps(), c in -1.0..1.0f64) {
        let s = a.splitting();
        let v: Vec<f64> = s.stable_basis()[0].iter().map(|x| c * x).collect();
        let image = a.apply_vector(&v);
        // the image stays on the stable line
        let (_, iu) = s.decompose(&image);
        prop_assert!(iu.iter().all(|x| x.abs() <= 1e-9 * (1.0 + c.abs())));
        prop_assert!(s.adapted_norm(&image) <= s.lambda_s() * (1.0 + 1e-9) * s.adapted_norm(&v) + 1e-15);
    }

    #[test]
    fn flow_group_law(p in point2(), s in 0.0..1.0f64, t1 in -5.0..5.0f64, t2 in -5.0..5.0f64) {
        let flow = SuspensionFlow::new(System::cat_map());
        let x = FlowState::new(p, s);
        let a = flow.flow_at(&flow.flow_at(&x, t1), t2);
        let b = flow.flow_at(&x, t1 + t2);
        prop_assert!(flow.distance(&a, &b) < 1e-10);
    }
}

#[test]
fn default_product_is_dominated() {
    let p = ProductSystem::default_dominated();
    assert!(p.is_dominated());
    assert!(p.factor_a().splitting().lambda_u() > p.factor_b().splitting().lambda_u());
}

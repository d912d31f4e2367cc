use premax::maximality::{
    bracket, bracket_linear, bracket_newton, maximal_invariant_set, BracketOptions, GridSet,
};
use premax::torus::{torus_distance, HyperbolicMap, ToralAutomorphism, TorusPoint};
use proptest::prelude::*;

fn point2() -> impl Strategy<Value = TorusPoint> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| TorusPoint::new(vec![a, b]))
}

fn close_pair() -> impl Strategy<Value = (TorusPoint, TorusPoint)> {
    (point2(), 0.0..0.05f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(x, r, t)| (x.clone(), x.translate(&[r * t.cos(), r * t.sin()])))
}

/// Cells at distance at least `r` from the origin.
fn hole(depth: u32, r: f64) -> GridSet {
    let g = GridSet::full(2, depth).unwrap();
    let o = TorusPoint::origin(2);
    GridSet::from_cells(2, depth, g.cells().filter(|&c| g.distance_to_cell(c, &o) >= r)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_sits_on_both_leaves((x, y) in close_pair()) {
        let a = ToralAutomorphism::cat_map();
        let b = bracket(&a, &x, &y, 0.1).unwrap();
        let s = a.splitting();
        // from x the bracket is a pure unstable step, from y a pure stable one
        let (xs, _) = s.decompose(&x.displacement_to(&b.point));
        let (_, yu) = s.decompose(&y.displacement_to(&b.point));
        prop_assert!(xs.iter().all(|v| v.abs() < 1e-12), "{xs:?}");
        prop_assert!(yu.iter().all(|v| v.abs() < 1e-12), "{yu:?}");
    }

    #[test]
    fn newton_bracket_is_unique((x, y) in close_pair(), off in prop::collection::vec(-0.004..0.004f64, 2)) {
        let a = ToralAutomorphism::cat_map();
        let exact = bracket_linear(&a, &x, &y, 0.1).unwrap();
        let plain = bracket_newton(&a, &x, &y, 0.1, &BracketOptions::default()).unwrap();
        let nudged = bracket_newton(&a, &x, &y, 0.1, &BracketOptions { start_offset: Some(off), ..BracketOptions::default() }).unwrap();
        prop_assert!(torus_distance(&plain.point, &nudged.point).unwrap() < 1e-9);
        prop_assert!(torus_distance(&plain.point, &exact.point).unwrap() < 1e-9);
    }

    #[test]
    fn bracket_orbits_converge((x, y) in close_pair()) {
        let a = ToralAutomorphism::cat_map();
        let s = a.splitting();
        let b = bracket(&a, &x, &y, 0.1).unwrap();
        let (mut p, mut q) = (b.point.clone(), y.clone());
        // float orbits separate again past the roundoff horizon, so stay short
        for n in 0..=12 {
            let d = torus_distance(&p, &q).unwrap();
            prop_assert!(d <= s.distortion() * s.lambda_s().powi(n) * 0.1 + 1e-13);
            p = a.forward(&p);
            q = a.forward(&q);
        }
    }
}

#[test]
fn invariant_set_is_idempotent_and_monotone() {
    let a = ToralAutomorphism::cat_map();
    for r in [0.1, 0.2, 0.3] {
        let u = hole(5, r);
        let inv = maximal_invariant_set(&a, &u, 64).unwrap();
        assert!(inv.is_subset(&u));
        let again = maximal_invariant_set(&a, &inv, 64).unwrap();
        assert_eq!(again.cells().collect::<Vec<_>>(), inv.cells().collect::<Vec<_>>(), "r = {r}");

        // a finer grid never covers more of the coarse cells
        let fine = maximal_invariant_set(&a, &u.refine(6).unwrap(), 64).unwrap();
        assert!(fine.project(5).unwrap().is_subset(&inv), "r = {r}");
    }
}

#[test]
fn full_grid_is_invariant() {
    let a = ToralAutomorphism::cat_map();
    let u = GridSet::full(2, 4).unwrap();
    let inv = maximal_invariant_set(&a, &u, 8).unwrap();
    assert_eq!(inv.len(), u.len());
}

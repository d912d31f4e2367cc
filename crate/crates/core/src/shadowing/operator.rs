use rayon::prelude::*;

use super::{exact_shadow_linear, newton_shadow, NewtonOptions, PseudoOrbit, ShadowError, ShadowResult};
use crate::torus::HyperbolicMap;

/// The shadowing operator `T`: the closed-form series on linear maps, Newton otherwise.
pub fn shadow_operator_t<M: HyperbolicMap + ?Sized>(
    map: &M,
    po: &PseudoOrbit,
) -> Result<ShadowResult, ShadowError> {
    match map.as_linear() {
        Some(lin) => exact_shadow_linear(lin, po),
        None => newton_shadow(map, po, NewtonOptions::default()),
    }
}

/// Apply `T` to many pseudo-orbits in parallel; results keep the input order.
pub fn shadow_batch<M: HyperbolicMap + ?Sized>(
    map: &M,
    orbits: &[PseudoOrbit],
) -> Vec<Result<ShadowResult, ShadowError>> {
    orbits.par_iter().map(|po| shadow_operator_t(map, po)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shadowing::shift_pseudo;
    use crate::torus::{torus_distance, ToralAutomorphism, TorusPoint};
    use rand::{Rng, SeedableRng};

    #[test]
    fn equivariance_under_shift() {
        let a = ToralAutomorphism::cat_map();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut x = TorusPoint::new(vec![rng.random::<f64>(), rng.random::<f64>()]);
        let mut pts = vec![];
        for _ in 0..200 {
            pts.push(x.clone());
            let kick = [rng.random_range(-7e-4..7e-4), rng.random_range(-7e-4..7e-4)];
            x = a.forward(&x).translate(&kick);
        }
        let po = PseudoOrbit::new(&a, -100, pts).unwrap();
        let t = shadow_operator_t(&a, &po).unwrap();
        assert_eq!(shadow_operator_t(&a, &shift_pseudo(&po, 0)).unwrap(), t);
        for n in [1i64, -1] {
            let ts = shadow_operator_t(&a, &shift_pseudo(&po, n)).unwrap();
            let lhs = &ts.point;
            let rhs = a.iterate(&t.point, n);
            assert!(torus_distance(lhs, &rhs).unwrap() < 1e-9);
        }
    }
}

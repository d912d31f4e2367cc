use super::ShadowError;
use crate::torus::{distance_unchecked, HyperbolicMap, TorusPoint};

/// Expansivity radius estimate `a = 1 / (1 + L)`, with `L` the Lipschitz bound of
/// the map and its inverse.
pub fn expansivity_constant<M: HyperbolicMap + ?Sized>(map: &M) -> f64 {
    1.0 / (1.0 + map.lipschitz())
}

/// True iff `d(f^n p, f^n q) < a` for every `|n| <= big_n`.
pub fn expansivity_test<M: HyperbolicMap + ?Sized>(
    map: &M,
    p: &TorusPoint,
    q: &TorusPoint,
    a: f64,
    big_n: usize,
) -> Result<bool, ShadowError> {
    let bound = expansivity_constant(map);
    if !(a > 0.0 && a < bound) {
        return Err(ShadowError::ExpansivityRadius { a, bound });
    }
    if p.dim() != map.dim() || q.dim() != map.dim() {
        return Err(ShadowError::DimensionMismatch {
            expected: map.dim(),
            found: if p.dim() != map.dim() { p.dim() } else { q.dim() },
        });
    }
    if distance_unchecked(p.coords(), q.coords()) >= a {
        return Ok(false);
    }
    for step in [
        (|m: &M, x: &TorusPoint| m.forward(x)) as fn(&M, &TorusPoint) -> TorusPoint,
        |m: &M, x: &TorusPoint| m.backward(x),
    ] {
        let (mut u, mut v) = (p.clone(), q.clone());
        for _ in 0..big_n {
            u = step(map, &u);
            v = step(map, &v);
            if distance_unchecked(u.coords(), v.coords()) >= a {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ToralAutomorphism;

    #[test]
    fn identical_points_never_separate() {
        let a = ToralAutomorphism::cat_map();
        let p = TorusPoint::new(vec![0.3, 0.9]);
        assert!(expansivity_test(&a, &p, &p, 0.1, 200).unwrap());
    }

    #[test]
    fn unstable_pair_separates_quickly() {
        let a = ToralAutomorphism::cat_map();
        let p = TorusPoint::new(vec![0.3, 0.9]);
        let u = &a.splitting().unstable_basis()[0];
        let q = p.translate(&[1e-3 * u[0], 1e-3 * u[1]]);
        assert!(!expansivity_test(&a, &p, &q, 0.1, 50).unwrap());
        // growth 1e-3·λu^n passes 0.1 at n = 5
        assert!(expansivity_test(&a, &p, &q, 0.1, 4).unwrap());
        assert!(!expansivity_test(&a, &p, &q, 0.1, 5).unwrap());
    }

    #[test]
    fn radius_must_be_below_estimate() {
        let a = ToralAutomorphism::cat_map();
        let p = TorusPoint::origin(2);
        assert!(expansivity_constant(&a) > 0.27 && expansivity_constant(&a) < 0.3);
        assert!(expansivity_test(&a, &p, &p, 0.3, 1).is_err());
    }
}

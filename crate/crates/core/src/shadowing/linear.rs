use nalgebra::{DMatrix, DVector};

use super::{check_defect, PseudoOrbit, ShadowError, ShadowResult};
use crate::torus::ToralAutomorphism;

/// Closed-form shadowing orbit of a linear automorphism.
///
/// Writing `y_j = x_j + z_j` and `e_j` for the lifted errors, the orbit equation
/// becomes `z_{j+1} = A z_j - e_j`. In adapted coordinates the stable part is
/// solved forward from `z^s_l = 0`, and the unstable part backward from
/// `z^u_m = 0` through `z^u_j = A_u⁻¹ (z^u_{j+1} + e^u_j)`. A periodic orbit
/// instead fixes `z_0` by summing the geometric series around the cycle.
pub fn exact_shadow_linear(
    map: &ToralAutomorphism,
    po: &PseudoOrbit,
) -> Result<ShadowResult, ShadowError> {
    if po.points()[0].dim() != map.matrix().dim() {
        return Err(ShadowError::DimensionMismatch {
            expected: map.matrix().dim(),
            found: po.points()[0].dim(),
        });
    }
    check_defect(map, po)?;
    let z = linear_displacements(map, po);
    Ok(ShadowResult::assemble(map, po, &z, true, 0))
}

pub(crate) fn linear_displacements(map: &ToralAutomorphism, po: &PseudoOrbit) -> Vec<Vec<f64>> {
    let split = map.splitting();
    let ds = split.stable_dim();
    let du = split.unstable_dim();
    let bs = split.stable_block();
    let bu_inv = split.unstable_block_inv();
    let errors = po.lifted_errors(map);
    let adapted: Vec<DVector<f64>> = errors.iter().map(|e| split.to_adapted(e)).collect();
    let es: Vec<DVector<f64>> = adapted.iter().map(|c| c.rows(0, ds).into_owned()).collect();
    let eu: Vec<DVector<f64>> = adapted.iter().map(|c| c.rows(ds, du).into_owned()).collect();
    let n = po.len();

    let mut zs = vec![DVector::<f64>::zeros(ds); n];
    let mut zu = vec![DVector::<f64>::zeros(du); n];
    if po.is_periodic() {
        // (I - B_s^n) z^s_0 = -Σ B_s^{n-1-i} e^s_i
        let mut acc_s = DVector::<f64>::zeros(ds);
        for e in &es {
            acc_s = bs * acc_s - e;
        }
        let lhs_s = DMatrix::<f64>::identity(ds, ds) - bs.pow(n as u32);
        zs[0] = lhs_s.lu().solve(&acc_s).expect("stable block is a contraction");
        // (I - B_u^{-n}) z^u_0 = Σ B_u^{-(i+1)} e^u_i
        let mut acc_u = DVector::<f64>::zeros(du);
        for e in eu.iter().rev() {
            acc_u = bu_inv * (acc_u + e);
        }
        let lhs_u = DMatrix::<f64>::identity(du, du) - bu_inv.pow(n as u32);
        zu[0] = lhs_u.lu().solve(&acc_u).expect("inverse unstable block is a contraction");
        for j in 0..n - 1 {
            zs[j + 1] = bs * &zs[j] - &es[j];
        }
        let mut next = zu[0].clone();
        for j in (1..n).rev() {
            next = bu_inv * (next + &eu[j]);
            zu[j] = next.clone();
        }
    } else {
        for j in 0..n - 1 {
            zs[j + 1] = bs * &zs[j] - &es[j];
        }
        for j in (0..n - 1).rev() {
            zu[j] = bu_inv * (&zu[j + 1] + &eu[j]);
        }
    }
    (0..n)
        .map(|j| {
            let mut c = DVector::<f64>::zeros(ds + du);
            c.rows_mut(0, ds).copy_from(&zs[j]);
            c.rows_mut(ds, du).copy_from(&zu[j]);
            split.from_adapted(&c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{HyperbolicMap, TorusPoint};
    use rand::{Rng, SeedableRng};

    fn noisy_orbit(map: &ToralAutomorphism, len: usize, amp: f64, seed: u64) -> PseudoOrbit {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = TorusPoint::new(vec![rng.random::<f64>(), rng.random::<f64>()]);
        let mut pts = vec![x.clone()];
        for _ in 1..len {
            let kick = [rng.random_range(-amp..amp), rng.random_range(-amp..amp)];
            x = map.forward(&x).translate(&kick);
            pts.push(x.clone());
        }
        PseudoOrbit::new(map, -(len as i64 / 2), pts).unwrap()
    }

    #[test]
    fn exact_orbit_shadows_itself() {
        let a = ToralAutomorphism::cat_map();
        let p = TorusPoint::new(vec![0.2, 0.7]);
        let po = PseudoOrbit::orbit_of(&a, &p, -10, 21).unwrap();
        let r = exact_shadow_linear(&a, &po).unwrap();
        assert!(r.sup_distance < 1e-12);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn single_kick_bound() {
        let a = ToralAutomorphism::cat_map();
        let mut pts = PseudoOrbit::orbit_of(&a, &TorusPoint::new(vec![0.41, 0.13]), -20, 41)
            .unwrap()
            .points()
            .to_vec();
        // kick x_1 so that the error e_0 has size 1e-4
        let tail: Vec<TorusPoint> = {
            let mut q = pts[21].translate(&[1e-4, 0.0]);
            let mut v = vec![];
            for _ in 21..41 {
                v.push(q.clone());
                q = a.forward(&q);
            }
            v
        };
        pts.splice(21.., tail);
        let po = PseudoOrbit::new(&a, -20, pts).unwrap();
        assert!((po.defect() - 1e-4).abs() < 1e-12);
        let r = exact_shadow_linear(&a, &po).unwrap();
        let k = a.splitting().shadowing_constant();
        assert!((k - 5f64.sqrt()).abs() < 1e-9);
        assert!(r.sup_distance <= k * 1e-4);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn periodic_solution_closes_up() {
        let a = ToralAutomorphism::cat_map();
        // a 2-cycle of the cat map, perturbed
        let p = TorusPoint::new(vec![0.2 + 3e-4, 0.4]);
        let q = TorusPoint::new(vec![0.8, 0.6 - 2e-4]);
        let po = PseudoOrbit::periodic(&a, 0, vec![p, q]).unwrap();
        let r = exact_shadow_linear(&a, &po).unwrap();
        let back = a.iterate(&r.orbit[0], 2);
        assert!(crate::torus::torus_distance(&back, &r.orbit[0]).unwrap() < 1e-10);
        assert!(r.residual < 1e-12);
        // brute oracle: solve (A^2 - I) w = accumulated error for w = y_0 - x_0
        let e = po.lifted_errors(&a);
        let m = a.matrix().to_f64();
        let rhs = &m * DVector::from_column_slice(&e[0]) + DVector::from_column_slice(&e[1]);
        let lhs = &m * &m - DMatrix::<f64>::identity(2, 2);
        let w = lhs.lu().solve(&rhs).unwrap();
        let z0 = po.points()[0].displacement_to(&r.orbit[0]);
        assert!((w[0] - z0[0]).abs() < 1e-12 && (w[1] - z0[1]).abs() < 1e-12);
    }

    #[test]
    fn refuses_large_defect() {
        let a = ToralAutomorphism::cat_map();
        let po = PseudoOrbit::new(
            &a,
            0,
            vec![TorusPoint::origin(2), TorusPoint::new(vec![0.4, 0.0])],
        )
        .unwrap();
        assert!(matches!(
            exact_shadow_linear(&a, &po),
            Err(ShadowError::DefectTooLarge { .. })
        ));
    }

    #[test]
    fn bound_over_defects() {
        let a = ToralAutomorphism::cat_map();
        let k = a.splitting().adapted_shadowing_constant();
        for (i, eps) in [1e-2, 1e-3, 1e-4].into_iter().enumerate() {
            let po = noisy_orbit(&a, 120, eps / 2f64.sqrt(), i as u64);
            let r = exact_shadow_linear(&a, &po).unwrap();
            assert!(r.adapted_sup_distance <= k * po.defect() * (1.0 + 1e-9));
        }
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bracket::{bracket, BracketPoint};
use crate::closure::{SetApprox, SpatialIndex};
use crate::torus::HyperbolicMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpsFailure {
    pub x: usize,
    pub y: usize,
    pub bracket: BracketPoint,
    pub distance_to_set: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpsReport {
    pub epsilon: f64,
    pub delta: f64,
    pub membership_tol: f64,
    /// Ordered pairs `(x, y)`, `x ≠ y`, with `d(x, y) < δ`.
    pub pairs_tested: usize,
    /// Pairs whose bracket was refused (not `ε`-local or not transverse).
    pub refused: usize,
    pub failures: Vec<LpsFailure>,
}

impl LpsReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.refused == 0
    }
}

/// Check that `[x, y]` lies within `membership_tol` of the net for every
/// `δ`-close ordered pair.
pub fn local_product_check<M: HyperbolicMap + ?Sized>(
    map: &M,
    set: &SetApprox,
    eps: f64,
    delta: f64,
    membership_tol: f64,
) -> LpsReport {
    let Some(dim) = set.dim() else {
        return LpsReport {
            epsilon: eps,
            delta,
            membership_tol,
            pairs_tested: 0,
            refused: 0,
            failures: Vec::new(),
        };
    };
    let mut near = SpatialIndex::with_cell_width(dim, delta);
    for p in set.points() {
        near.insert(p.coords().to_vec());
    }
    let members = set.index();
    let pts = set.points();
    let per_x: Vec<(usize, usize, Vec<LpsFailure>)> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut tested = 0;
            let mut refused = 0;
            let mut failures = Vec::new();
            for j in near.within(pts[i].coords(), delta) {
                if j == i {
                    continue;
                }
                tested += 1;
                match bracket(map, &pts[i], &pts[j], eps) {
                    Ok(b) => {
                        let d = members
                            .nearest(b.point.coords())
                            .map_or(f64::INFINITY, |(_, d)| d);
                        if d > membership_tol {
                            failures.push(LpsFailure {
                                x: i,
                                y: j,
                                bracket: b,
                                distance_to_set: d,
                            });
                        }
                    }
                    Err(_) => refused += 1,
                }
            }
            (tested, refused, failures)
        })
        .collect();
    let mut report = LpsReport {
        epsilon: eps,
        delta,
        membership_tol,
        pairs_tested: 0,
        refused: 0,
        failures: Vec::new(),
    };
    for (t, r, f) in per_x {
        report.pairs_tested += t;
        report.refused += r;
        report.failures.extend(f);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{ToralAutomorphism, TorusPoint};

    #[test]
    fn singleton_passes_vacuously() {
        let a = ToralAutomorphism::cat_map();
        let s = SetApprox::singleton(TorusPoint::origin(2), 0.01, "p").unwrap();
        let r = local_product_check(&a, &s, 0.1, 0.05, 0.02);
        assert!(r.passed());
        assert_eq!(r.pairs_tested, 0);
    }

    #[test]
    fn full_torus_net_passes() {
        let a = ToralAutomorphism::cat_map();
        let m = 40;
        let pts = (0..m * m)
            .map(|k| TorusPoint::new(vec![(k % m) as f64 / m as f64, (k / m) as f64 / m as f64]))
            .collect();
        let res = 1.0 / m as f64;
        let s = SetApprox::new(pts, res, "grid").unwrap();
        let r = local_product_check(&a, &s, 0.1, 1.5 * res, res);
        assert!(r.pairs_tested > 0);
        assert!(r.passed(), "{} failures", r.failures.len());
    }

    #[test]
    fn two_close_points_fail() {
        // x and y close, but neither bracket is near {x, y}
        let a = ToralAutomorphism::cat_map();
        let x = TorusPoint::new(vec![0.3, 0.3]);
        let y = x.translate(&[0.03, 0.0]);
        let s = SetApprox::new(vec![x.clone(), y.clone()], 0.002, "xy").unwrap();
        let r = local_product_check(&a, &s, 0.1, 0.05, 0.004);
        assert_eq!(r.pairs_tested, 2);
        assert_eq!(r.failures.len(), 2);
        let b = bracket(&a, &x, &y, 0.1).unwrap();
        assert!((r.failures[0].distance_to_set - s.distance_to(&b.point)).abs() < 1e-15);
        assert!(r.failures[0].distance_to_set > 0.004);
    }
}

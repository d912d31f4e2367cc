use serde::{Deserialize, Serialize};

use super::grid::{maximal_invariant_set, GridSet};
use super::witness::NonPremaxWitness;
use super::MaxError;
use crate::torus::{torus_distance, HyperbolicMap, ProductSystem, ToralAutomorphism, TorusPoint};

const MAX_PERIOD: u32 = 64;

/// Parameters of the four-torus example. `q_period` selects the periodic
/// point of `A` that plays the role of the second fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrovisierSetup {
    pub q_period: u32,
    pub r: Vec<f64>,
    pub v_radius: f64,
    pub depth: u32,
    pub n_iter: usize,
}

impl Default for CrovisierSetup {
    fn default() -> Self {
        CrovisierSetup {
            q_period: 2,
            r: vec![0.0, 0.0],
            v_radius: 0.125,
            depth: 4,
            n_iter: 64,
        }
    }
}

impl CrovisierSetup {
    pub fn q(&self, product: &ProductSystem) -> Result<TorusPoint, MaxError> {
        crovisier_q(product.factor_a(), self.q_period)
    }

    pub fn run(&self, product: &ProductSystem) -> Result<GridSet, MaxError> {
        let q = self.q(product)?;
        crovisier_set(
            product,
            &q,
            &TorusPoint::new(self.r.clone()),
            self.v_radius,
            self.depth,
            self.n_iter,
        )
    }
}

/// Smallest (lexicographically) non-origin point of exact period `period`.
pub fn crovisier_q(a: &ToralAutomorphism, period: u32) -> Result<TorusPoint, MaxError> {
    if period == 0 || period > MAX_PERIOD {
        return Err(MaxError::NoPeriodicPoint(period));
    }
    a.periodic_points(period)
        .into_iter()
        .map(|p| p.to_torus())
        .find(|p| p.coords().iter().any(|&c| c != 0.0))
        .ok_or(MaxError::NoPeriodicPoint(period))
}

fn check_periodic(map: &ToralAutomorphism, p: &TorusPoint) -> Result<(), MaxError> {
    if p.dim() != map.dim() {
        return Err(MaxError::DimensionMismatch {
            expected: map.dim(),
            found: p.dim(),
        });
    }
    let mut x = p.clone();
    for _ in 0..MAX_PERIOD {
        x = map.forward(&x);
        if torus_distance(&x, p).map_err(|_| MaxError::NotPeriodic(format!("{:?}", p.coords()), MAX_PERIOD))? < 1e-9 {
            return Ok(());
        }
    }
    Err(MaxError::NotPeriodic(format!("{:?}", p.coords()), MAX_PERIOD))
}

/// Grid outer approximation of `∩ f^n(T^4 − V)` with `V` the ball of radius
/// `v_radius` about `(q, r)`.
///
/// `U` keeps every cell not contained in `V`, so it covers `T^4 − V`.
pub fn crovisier_set(
    product: &ProductSystem,
    q: &TorusPoint,
    r: &TorusPoint,
    v_radius: f64,
    depth: u32,
    n_iter: usize,
) -> Result<GridSet, MaxError> {
    check_periodic(product.factor_a(), q)?;
    check_periodic(product.factor_b(), r)?;
    if !(v_radius >= 0.0) || !v_radius.is_finite() {
        return Err(MaxError::VRadius(v_radius));
    }
    let centre = ProductSystem::join(q, r);
    let full = GridSet::full(4, depth)?;
    let w = full.cell_width();
    let u = GridSet::from_predicate(4, depth, |idx| {
        // a closed cell lies inside the ball iff its farthest corner does
        let far = idx
            .iter()
            .zip(centre.coords())
            .map(|(&c, &z)| {
                let lo = c as f64 * w;
                let d = (crate::torus::wrap_centered(lo - z).abs())
                    .max(crate::torus::wrap_centered(lo + w - z).abs());
                // the cell may straddle the antipode of z
                let d = if (lo..=lo + w).contains(&crate::torus::wrap_unit(z + 0.5)) {
                    0.5
                } else {
                    d
                };
                d * d
            })
            .sum::<f64>()
            .sqrt();
        far >= v_radius
    })?;
    if u.is_empty() {
        return Err(MaxError::VSwallowsGrid(v_radius));
    }
    maximal_invariant_set(product, &u, n_iter)
}

/// The family `ξ(n, t) = (A^n x_h, B^n y_t)`, `n ∈ [-n_half, n_half]`,
/// `t ∈ [0, a]` on `n_t` samples.
///
/// `x_h` is a homoclinic point of the origin of `A` passing within
/// `v_radius / 2` of `q` at `n = 0` and staying farther than `v_radius` from
/// `q` at every other sampled time. `y_t = r + (a - t) e_u` runs along the
/// unstable direction of `B` into `r`, which must be fixed by `B`. Both
/// factors are evaluated in closed form, since iterating would amplify
/// round-off by `λ_u^n`.
pub fn crovisier_witness(
    product: &ProductSystem,
    q: &TorusPoint,
    r: &TorusPoint,
    v_radius: f64,
    a: f64,
    n_half: i64,
    n_t: usize,
) -> Result<NonPremaxWitness, MaxError> {
    let fb = product.factor_b();
    if torus_distance(&fb.forward(r), r).map_err(|_| MaxError::DimensionMismatch {
        expected: 2,
        found: r.dim(),
    })? > 1e-12
    {
        return Err(MaxError::NotPeriodic(format!("{:?}", r.coords()), 1));
    }
    let h = homoclinic_near(product.factor_a(), q, v_radius, n_half)?;
    let eb = fb.splitting().unstable_basis()[0].clone();
    let mu = signed_eigenvalue(fb, &eb);
    let n_t = n_t.max(2);
    let ts: Vec<f64> = (0..n_t).map(|k| a * k as f64 / (n_t - 1) as f64).collect();
    let xi = (-n_half..=n_half)
        .map(|n| {
            let x = h.at(n);
            let scale = mu.powi(n as i32);
            ts.iter()
                .map(|&t| {
                    let y = r.translate(&eb.iter().map(|e| e * (a - t) * scale).collect::<Vec<_>>());
                    ProductSystem::join(&x, &y)
                })
                .collect()
        })
        .collect();
    NonPremaxWitness::new(-n_half, ts, xi)
}

fn signed_eigenvalue(a: &ToralAutomorphism, v: &[f64]) -> f64 {
    let av = a.apply_vector(v);
    av.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() / v.iter().map(|y| y * y).sum::<f64>()
}

/// Orbit of the homoclinic point `α v_u ≡ -β v_s`, where `k = α v_u + β v_s`
/// is a lattice vector, shifted so that index 0 is the chosen point.
struct Homoclinic {
    alpha: f64,
    beta: f64,
    shift: i64,
    vu: Vec<f64>,
    vs: Vec<f64>,
    lu: f64,
    ls: f64,
}

impl Homoclinic {
    fn at(&self, n: i64) -> TorusPoint {
        let m = n + self.shift;
        // each form is accurate on the side where it contracts
        let (c, v) = if m < 0 {
            (self.alpha * self.lu.powi(m as i32), &self.vu)
        } else {
            (-self.beta * self.ls.powi(m as i32), &self.vs)
        };
        TorusPoint::new(v.iter().map(|x| c * x).collect::<Vec<_>>())
    }
}

/// Search small lattice vectors for a homoclinic orbit that visits `q`
/// closely exactly once in the window.
fn homoclinic_near(
    a: &ToralAutomorphism,
    q: &TorusPoint,
    v_radius: f64,
    n_half: i64,
) -> Result<Homoclinic, MaxError> {
    let sp = a.splitting();
    let vu = sp.unstable_basis()[0].clone();
    let vs = sp.stable_basis()[0].clone();
    let (lu, ls) = (signed_eigenvalue(a, &vu), signed_eigenvalue(a, &vs));
    let det = vu[0] * vs[1] - vu[1] * vs[0];
    let dist = |p: &TorusPoint| crate::torus::distance_unchecked(p.coords(), q.coords());
    let mut best: Option<(f64, Homoclinic)> = None;
    let span = 40i64;
    for k0 in -span..=span {
        for k1 in -span..=span {
            if k0 == 0 && k1 == 0 {
                continue;
            }
            let (k0f, k1f) = (k0 as f64, k1 as f64);
            for shift in -6..=6i64 {
                let h = Homoclinic {
                    alpha: (k0f * vs[1] - k1f * vs[0]) / det,
                    beta: (vu[0] * k1f - vu[1] * k0f) / det,
                    shift,
                    vu: vu.clone(),
                    vs: vs.clone(),
                    lu,
                    ls,
                };
                let d0 = dist(&h.at(0));
                if d0 >= v_radius / 2.0 || best.as_ref().is_some_and(|(b, _)| d0 >= *b) {
                    continue;
                }
                let clean = (1..=n_half).all(|n| dist(&h.at(n)) > v_radius && dist(&h.at(-n)) > v_radius);
                if clean {
                    best = Some((d0, h));
                }
            }
        }
    }
    best.map(|(_, h)| h).ok_or(MaxError::Witness(
        "no homoclinic orbit through V found in the search window".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximality::verify_nonpremax_witness;
    use rand::{Rng, SeedableRng};

    #[test]
    fn default_q_is_period_two() {
        let a = ToralAutomorphism::cat_map();
        let q = crovisier_q(&a, 2).unwrap();
        assert!(torus_distance(&q, &TorusPoint::new(vec![0.2, 0.4])).unwrap() < 1e-15);
        assert!(matches!(crovisier_q(&a, 1), Err(MaxError::NoPeriodicPoint(1))));
    }

    #[test]
    fn zero_radius_keeps_everything() {
        let f = ProductSystem::default_dominated();
        let q = crovisier_q(f.factor_a(), 2).unwrap();
        let g = crovisier_set(&f, &q, &TorusPoint::origin(2), 0.0, 2, 10).unwrap();
        assert_eq!(g.len(), 256);
    }

    #[test]
    fn huge_radius_is_refused() {
        let f = ProductSystem::default_dominated();
        let q = crovisier_q(f.factor_a(), 2).unwrap();
        assert!(matches!(
            crovisier_set(&f, &q, &TorusPoint::origin(2), 1.1, 2, 10),
            Err(MaxError::VSwallowsGrid(_))
        ));
    }

    #[test]
    fn non_periodic_q_is_refused() {
        let f = ProductSystem::default_dominated();
        let q = TorusPoint::new(vec![0.1234, 0.4321]);
        assert!(matches!(
            crovisier_set(&f, &q, &TorusPoint::origin(2), 0.1, 2, 10),
            Err(MaxError::NotPeriodic(..))
        ));
    }

    #[test]
    fn default_grid_excludes_v_and_keeps_fixed_point() {
        let f = ProductSystem::default_dominated();
        let setup = CrovisierSetup::default();
        let g = setup.run(&f).unwrap();
        let q = setup.q(&f).unwrap();
        let r = TorusPoint::origin(2);
        let qr = ProductSystem::join(&q, &r);
        assert!(!g.contains(g.cell_of(&qr)));
        assert_eq!(g.distance_to(&TorusPoint::origin(4)), 0.0);
        // oracle: sample points of every dropped cell reach V within n_iter steps
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let dropped: Vec<u64> = (0..g.total()).filter(|&c| !g.contains(c)).collect();
        assert!(!dropped.is_empty());
        for c in dropped {
            let lo: Vec<f64> = g.multi_index(c).iter().map(|&k| k as f64 * g.cell_width()).collect();
            for _ in 0..8 {
                let p = TorusPoint::new(
                    lo.iter().map(|x| x + rng.random::<f64>() * g.cell_width()).collect::<Vec<_>>(),
                );
                let hits = (-(setup.n_iter as i64)..=setup.n_iter as i64)
                    .any(|n| torus_distance(&f.iterate(&p, n), &qr).unwrap() < setup.v_radius);
                assert!(hits);
            }
        }
    }

    #[test]
    fn witness_on_default_grid_passes() {
        let f = ProductSystem::default_dominated();
        let setup = CrovisierSetup::default();
        let g = setup.run(&f).unwrap();
        let q = setup.q(&f).unwrap();
        let w = crovisier_witness(&f, &q, &TorusPoint::origin(2), setup.v_radius, 0.3, 30, 31).unwrap();
        let tol = g.cell_width() / 8.0;
        let rep = verify_nonpremax_witness(&f, &g, &w, tol);
        assert!(rep.all_pass(), "{rep:?}");
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MaxError, PointSet};
use crate::torus::{distance_unchecked, HyperbolicMap, TorusPoint};

/// Minimum fitted decay rate (per step of `|n|`) of the distance envelope.
pub const DECAY_MARGIN: f64 = 0.05;

/// A sampled family of exact orbits `ξ(n, t)`, `n_min ≤ n ≤ n_max`, `t ∈ ts ⊂ [0, a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonPremaxWitness {
    n_min: i64,
    ts: Vec<f64>,
    /// `xi[n - n_min][k]` is `ξ(n, ts[k])`.
    xi: Vec<Vec<TorusPoint>>,
}

impl NonPremaxWitness {
    pub fn new(n_min: i64, ts: Vec<f64>, xi: Vec<Vec<TorusPoint>>) -> Result<Self, MaxError> {
        if ts.is_empty() || ts[0] != 0.0 {
            return Err(MaxError::Witness("t grid must start at 0".into()));
        }
        if ts.windows(2).any(|w| !(w[1] > w[0])) || ts.iter().any(|t| !t.is_finite()) {
            return Err(MaxError::Witness("t grid must be finite and increasing".into()));
        }
        let n_max = n_min + xi.len() as i64 - 1;
        if n_min > 0 || n_max < 0 {
            return Err(MaxError::Witness(format!("n window [{n_min}, {n_max}] must contain 0")));
        }
        let dim = xi.first().and_then(|r| r.first()).map(TorusPoint::dim);
        for (i, row) in xi.iter().enumerate() {
            if row.len() != ts.len() {
                return Err(MaxError::Witness(format!(
                    "row n = {} has {} samples, expected {}",
                    n_min + i as i64,
                    row.len(),
                    ts.len()
                )));
            }
            if row.iter().any(|p| Some(p.dim()) != dim || !p.is_finite()) {
                return Err(MaxError::Witness(format!("row n = {} has a bad point", n_min + i as i64)));
            }
        }
        Ok(NonPremaxWitness { n_min, ts, xi })
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.xi.len() as i64 - 1
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn a(&self) -> f64 {
        *self.ts.last().expect("non-empty t grid")
    }

    pub fn get(&self, n: i64, k: usize) -> Option<&TorusPoint> {
        let i = usize::try_from(n - self.n_min).ok()?;
        self.xi.get(i)?.get(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub tol: f64,
    /// Largest `d(f(ξ(n, t)), ξ(n + 1, t))`.
    pub orbit_defect: f64,
    /// `dist(ξ(0, 0), Λ)`.
    pub base_distance: f64,
    /// `E(k) = max_{|n| ≥ k} sup_t dist(ξ(n, t), Λ)`, `k = 0..=min(-n_min, n_max)`.
    pub envelope: Vec<f64>,
    /// First `k` with `E(k) ≤ tol`.
    pub settles_at: Option<usize>,
    /// Least-squares slope of `-ln E` over `0..=settles_at`.
    pub decay_rate: Option<f64>,
    /// `max_t dist(ξ(0, t), Λ)` and the `t` attaining it.
    pub escape_distance: f64,
    pub t1: f64,
    /// Conditions (orbit, base point, decay, escape) in order.
    pub conditions: [bool; 4],
}

impl WitnessReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|&c| c)
    }
}

fn decay_fit(env: &[f64], k_star: usize, tol: f64) -> f64 {
    let floor = tol * 1e-3;
    let ys: Vec<f64> = env[..=k_star].iter().map(|&e| -e.max(floor).ln()).collect();
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in ys.iter().enumerate() {
        sxy += (k as f64 - mx) * (y - my);
        sxx += (k as f64 - mx).powi(2);
    }
    sxy / sxx
}

/// Check the four conditions that make `w` a witness of non-premaximality of `Λ`.
pub fn verify_nonpremax_witness<M: HyperbolicMap + ?Sized, S: PointSet + ?Sized>(
    map: &M,
    lambda: &S,
    w: &NonPremaxWitness,
    tol: f64,
) -> WitnessReport {
    let orbit_defect = w
        .xi
        .par_windows(2)
        .map(|pair| {
            pair[0]
                .iter()
                .zip(&pair[1])
                .map(|(p, q)| distance_unchecked(map.forward(p).coords(), q.coords()))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let dists: Vec<Vec<f64>> = w
        .xi
        .par_iter()
        .map(|row| row.iter().map(|p| lambda.distance_to(p)).collect())
        .collect();
    let row0 = &dists[(-w.n_min) as usize];
    let base_distance = row0[0];
    let (k1, escape_distance) = row0
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, d)| if d > acc.1 { (k, d) } else { acc });
    let sup: Vec<f64> = dists.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    let half = (-w.n_min).min(w.n_max()) as usize;
    let zero = (-w.n_min) as usize;
    let mut envelope = vec![0.0; half + 1];
    let mut tail = 0.0f64;
    // also fold in the samples beyond the symmetric window
    for (i, &s) in sup.iter().enumerate() {
        let k = (i as i64 - zero as i64).unsigned_abs() as usize;
        if k > half {
            tail = tail.max(s);
        }
    }
    for k in (0..=half).rev() {
        tail = tail.max(sup[zero + k]).max(sup[zero - k]);
        envelope[k] = tail;
    }
    let settles_at = envelope.iter().position(|&e| e <= tol);
    let decay_rate = settles_at.filter(|&k| k > 0).map(|k| decay_fit(&envelope, k, tol));
    let decays = match settles_at {
        Some(0) => true,
        Some(_) => decay_rate.is_some_and(|r| r >= DECAY_MARGIN),
        None => false,
    };
    WitnessReport {
        tol,
        orbit_defect,
        base_distance,
        envelope,
        settles_at,
        decay_rate,
        escape_distance,
        t1: w.ts[k1],
        conditions: [
            orbit_defect < tol,
            base_distance < tol,
            decays,
            escape_distance > 2.0 * tol,
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::SetApprox;
    use crate::torus::ToralAutomorphism;

    fn family(
        map: &ToralAutomorphism,
        n_half: i64,
        ts: &[f64],
        start: impl Fn(f64) -> TorusPoint,
    ) -> NonPremaxWitness {
        let xi = (-n_half..=n_half)
            .map(|n| ts.iter().map(|&t| map.iterate(&start(t), n)).collect())
            .collect();
        NonPremaxWitness::new(-n_half, ts.to_vec(), xi).unwrap()
    }

    #[test]
    fn constant_family_fails_only_escape() {
        let a = ToralAutomorphism::cat_map();
        let lam = SetApprox::singleton(TorusPoint::origin(2), 1e-3, "p").unwrap();
        let w = family(&a, 10, &[0.0, 0.5, 1.0], |_| TorusPoint::origin(2));
        let r = verify_nonpremax_witness(&a, &lam, &w, 1e-6);
        assert_eq!(r.conditions, [true, true, true, false]);
    }

    #[test]
    fn unstable_segment_does_not_return() {
        let a = ToralAutomorphism::cat_map();
        let vu = a.splitting().unstable_basis()[0].clone();
        let lam = SetApprox::singleton(TorusPoint::origin(2), 1e-3, "p").unwrap();
        let ts: Vec<f64> = (0..11).map(|k| 0.01 * k as f64).collect();
        let w = family(&a, 15, &ts, |t| TorusPoint::new(vec![t * vu[0], t * vu[1]]));
        let r = verify_nonpremax_witness(&a, &lam, &w, 1e-3);
        assert_eq!(r.conditions, [true, true, false, true]);
        // oracle: the t = 0.1 sample sits 0.1 from the origin at n = 0
        assert!((r.escape_distance - 0.1).abs() < 1e-12);
        assert_eq!(r.t1, ts[10]);
    }

    #[test]
    fn ragged_samples_are_refused() {
        let p = TorusPoint::origin(2);
        let xi = vec![vec![p.clone(), p.clone()], vec![p.clone()]];
        assert!(NonPremaxWitness::new(0, vec![0.0, 1.0], xi).is_err());
        let xi = vec![vec![p.clone()]];
        assert!(NonPremaxWitness::new(1, vec![0.0], xi.clone()).is_err());
        assert!(NonPremaxWitness::new(0, vec![0.5], xi).is_err());
    }
}

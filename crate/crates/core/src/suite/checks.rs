use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closure::{hausdorff, SetApprox};
use crate::maximality::{bracket, QuadraticMap, Surd};
use crate::shadowing::{
    exact_shadow_linear, expansivity_test, newton_shadow, NewtonOptions, PseudoOrbit,
};
use crate::symbolic::{
    even_shift, full_shift, golden_mean, is_locally_maximal, odd_run_witness, random_presentation,
    shift_metric, stabilization_check, PeriodicWord,
};
use crate::torus::{torus_distance, HyperbolicMap, ToralAutomorphism, TorusPoint};

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> TorusPoint {
    TorusPoint::new((0..dim).map(|_| rng.random::<f64>()).collect::<Vec<_>>())
}

fn random_kick(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let r = radius * rng.random::<f64>().sqrt();
    [r * angle.cos(), r * angle.sin()]
}

/// `x_{j+1} = f(x_j) + e_j` with `|e_j| < eps`.
pub fn random_pseudo_orbit(
    map: &ToralAutomorphism,
    rng: &mut ChaCha8Rng,
    len: usize,
    eps: f64,
) -> Vec<TorusPoint> {
    let mut x = random_point(rng, 2);
    let mut pts = Vec::with_capacity(len);
    for _ in 0..len {
        pts.push(x.clone());
        let k = random_kick(rng, eps * 0.999);
        x = map.forward(&x).translate(&k);
    }
    pts
}

#[derive(Debug, Clone, Serialize)]
pub struct ShadowRow {
    pub eps: f64,
    pub count: usize,
    pub converged: usize,
    pub max_adapted_ratio: f64,
    pub max_ratio: f64,
    pub max_route_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShadowLemmaCheck {
    pub constant: f64,
    pub rows: Vec<ShadowRow>,
    pub passed: bool,
}

pub fn shadow_lemma(seed: u64, count: usize, len: usize) -> ShadowLemmaCheck {
    let a = ToralAutomorphism::cat_map();
    let constant = a.splitting().adapted_shadowing_constant();
    let rows: Vec<ShadowRow> = [1e-2, 1e-3, 1e-4]
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let per: Vec<Option<(f64, f64, f64)>> = (0..count)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((i as u64) << 32) ^ k as u64);
                    let pts = random_pseudo_orbit(&a, &mut rng, len, eps);
                    let po = PseudoOrbit::new(&a, 0, pts).ok()?;
                    let n = newton_shadow(&a, &po, NewtonOptions::default()).ok()?;
                    let l = exact_shadow_linear(&a, &po).ok()?;
                    if !n.converged {
                        return None;
                    }
                    let gap = n
                        .orbit
                        .iter()
                        .zip(&l.orbit)
                        .map(|(p, q)| torus_distance(p, q).unwrap_or(f64::INFINITY))
                        .fold(0.0, f64::max);
                    Some((n.adapted_sup_distance / eps, n.sup_distance / eps, gap))
                })
                .collect();
            let ok: Vec<_> = per.iter().flatten().collect();
            ShadowRow {
                eps,
                count,
                converged: ok.len(),
                max_adapted_ratio: ok.iter().map(|r| r.0).fold(0.0, f64::max),
                max_ratio: ok.iter().map(|r| r.1).fold(0.0, f64::max),
                max_route_gap: ok.iter().map(|r| r.2).fold(0.0, f64::max),
            }
        })
        .collect();
    let passed = rows.iter().all(|r| {
        r.converged == r.count && r.max_adapted_ratio <= constant && r.max_route_gap < 1e-10
    });
    ShadowLemmaCheck {
        constant,
        rows,
        passed,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivarianceCheck {
    pub count: usize,
    pub margin: usize,
    pub max_discrepancy: f64,
    pub passed: bool,
}

/// `T(σ x)` against `f(T(x))` on the interior of the window: the shifted
/// window drops the first point of `x` and appends one more.
pub fn equivariance(seed: u64, count: usize) -> EquivarianceCheck {
    let a = ToralAutomorphism::cat_map();
    let (len, margin) = (200usize, 40usize);
    let gaps: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let pts = random_pseudo_orbit(&a, &mut rng, len + 1, 1e-3);
            let t = exact_shadow_linear(&a, &PseudoOrbit::new(&a, 0, pts[..len].to_vec()).unwrap());
            let ts = exact_shadow_linear(&a, &PseudoOrbit::new(&a, 0, pts[1..].to_vec()).unwrap());
            let (t, ts) = match (t, ts) {
                (Ok(t), Ok(ts)) => (t, ts),
                _ => return f64::INFINITY,
            };
            (margin..len - margin)
                .map(|j| torus_distance(&ts.orbit[j], &a.forward(&t.orbit[j])).unwrap())
                .fold(0.0, f64::max)
        })
        .collect();
    let max_discrepancy = gaps.iter().copied().fold(0.0, f64::max);
    EquivarianceCheck {
        count,
        margin,
        max_discrepancy,
        passed: max_discrepancy < 1e-9,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansivityCheck {
    pub count: usize,
    /// Pairs reported as staying `a`-close for `|n| ≤ N`.
    pub stayed_close: usize,
    pub passed: bool,
}

pub fn expansivity(seed: u64, count: usize) -> ExpansivityCheck {
    let a = ToralAutomorphism::cat_map();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stayed_close = 0;
    for _ in 0..count {
        let p = random_point(&mut rng, 2);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let q = p.translate(&[1e-3 * angle.cos(), 1e-3 * angle.sin()]);
        if expansivity_test(&a, &p, &q, 0.1, 50).unwrap_or(true) {
            stayed_close += 1;
        }
    }
    ExpansivityCheck {
        count,
        stayed_close,
        passed: stayed_close == 0,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketCheck {
    pub count: usize,
    pub eps: f64,
    /// Largest `d_n / (C λ_s^n ε)` over both directions, in exact arithmetic.
    pub worst_ratio: f64,
    /// Largest distance between the float bracket and the exact one.
    pub route_gap: f64,
    /// Largest `n` up to which float orbits keep the bound; past it the
    /// rounding of the bracket point, blown up by `λ_u^n`, dominates.
    pub float_horizon: usize,
    pub self_bracket_exact: bool,
    pub passed: bool,
}

/// Brackets of random close pairs followed for 30 steps both ways. The bound
/// is checked on exact orbits in `Q(√5)`; the float bracket is checked
/// against the exact one.
pub fn bracket_convergence(seed: u64, count: usize) -> BracketCheck {
    let a = ToralAutomorphism::cat_map();
    let q = QuadraticMap::new(&a).expect("the cat map lives on T^2");
    let s = a.splitting();
    let (ls, c) = (s.lambda_s(), s.distortion());
    let d = q.discriminant();
    let eps = 0.1;
    let c_eps = Surd::from_f64(c * eps, d).expect("finite constant");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut route_gap: f64 = 0.0;
    let mut first_violation: Option<usize> = None;
    let mut self_exact = true;
    for _ in 0..count {
        let x = random_point(&mut rng, 2);
        let k = random_kick(&mut rng, 0.05);
        let y = x.translate(&k);
        let Ok(b) = bracket(&a, &x, &y, eps) else {
            worst = f64::INFINITY;
            continue;
        };
        let (xe, ye) = (q.point(&x).expect("finite"), q.point(&y).expect("finite"));
        let ze = q.bracket(&xe, &ye);
        route_gap = route_gap.max(torus_distance(&b.point, &ze.to_torus()).unwrap());
        self_exact &= bracket(&a, &x, &x, eps).is_ok_and(|bx| bx.point == x) && q.bracket(&xe, &xe) == xe;

        let (mut pf, mut yf, mut pb, mut xb) = (ze.clone(), ye, ze, xe);
        let (mut fz, mut fy) = (b.point.clone(), y.clone());
        let (mut bz, mut bx) = (b.point.clone(), x.clone());
        let mut bound = c_eps.clone();
        for n in 0..=30usize {
            let bound_sq = &bound * &bound;
            let inv = bound_sq.inverse().expect("positive bound");
            for dist_sq in [q.distance_sq(&pf, &yf), q.distance_sq(&pb, &xb)] {
                worst = worst.max((&dist_sq * &inv).to_f64().sqrt());
            }
            let df = torus_distance(&fz, &fy).unwrap().max(torus_distance(&bz, &bx).unwrap());
            if df > c * ls.powi(n as i32) * eps {
                first_violation = Some(first_violation.map_or(n, |f| f.min(n)));
            }
            pf = q.forward(&pf);
            yf = q.forward(&yf);
            pb = q.backward(&pb);
            xb = q.backward(&xb);
            fz = a.forward(&fz);
            fy = a.forward(&fy);
            bz = a.backward(&bz);
            bx = a.backward(&bx);
            bound = &bound * q.lambda_s();
        }
    }
    BracketCheck {
        count,
        eps,
        worst_ratio: worst,
        route_gap,
        float_horizon: first_violation.map_or(30, |n| n.saturating_sub(1)),
        self_bracket_exact: self_exact,
        passed: worst <= 1.0 && route_gap < 1e-14 && self_exact,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricCheck {
    pub triples: usize,
    pub torus_violations: usize,
    pub hausdorff_violations: usize,
    pub shift_violations: usize,
    pub passed: bool,
}

fn axioms_hold(ab: f64, ba: f64, ac: f64, bc: f64, aa: f64, tol: f64) -> bool {
    (ab - ba).abs() <= tol && ac <= ab + bc + tol && aa.abs() <= tol && ab >= 0.0
}

fn random_word(rng: &mut ChaCha8Rng) -> PeriodicWord {
    let mut sym = |lo: usize| -> Vec<u8> {
        let n = rng.random_range(lo..=4);
        (0..n).map(|_| rng.random_range(0..3u8)).collect()
    };
    let (l, c, r) = (sym(1), sym(0), sym(1));
    PeriodicWord::new(l, c, r, rng.random_range(-4..=4)).expect("non-empty cycles")
}

pub fn metric_axioms(seed: u64, triples: usize) -> MetricCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; 3];
    for _ in 0..triples {
        let p: Vec<TorusPoint> = (0..3).map(|_| random_point(&mut rng, 2)).collect();
        let d = |i: usize, j: usize| torus_distance(&p[i], &p[j]).unwrap();
        if !axioms_hold(d(0, 1), d(1, 0), d(0, 2), d(1, 2), d(0, 0), 1e-12) {
            counts[0] += 1;
        }
        let sets: Vec<SetApprox> = (0..3)
            .map(|_| {
                let n = rng.random_range(1..6);
                let pts = (0..n).map(|_| random_point(&mut rng, 2)).collect();
                SetApprox::new(pts, 1e-6, "m").expect("finite points")
            })
            .collect();
        let h = |i: usize, j: usize| hausdorff(&sets[i], &sets[j]).unwrap();
        if !axioms_hold(h(0, 1), h(1, 0), h(0, 2), h(1, 2), h(0, 0), 1e-12) {
            counts[1] += 1;
        }
        let w: Vec<PeriodicWord> = (0..3).map(|_| random_word(&mut rng)).collect();
        let m = |i: usize, j: usize| shift_metric(&w[i], &w[j], 40).value;
        let separated = shift_metric(&w[0], &w[1], 40).upper() > 0.0;
        let exact = m(0, 1) == m(1, 0)
            && m(0, 2) <= m(0, 1) + m(1, 2)
            && m(0, 0) == 0.0
            && separated == (w[0] != w[1]);
        if !exact {
            counts[2] += 1;
        }
    }
    MetricCheck {
        triples,
        torus_violations: counts[0],
        hausdorff_violations: counts[1],
        shift_violations: counts[2],
        passed: counts == [0, 0, 0],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolicCheck {
    pub presentations: usize,
    pub stabilization_failures: Vec<(u64, usize)>,
    pub full_shift_k: Option<usize>,
    pub golden_mean_k: Option<usize>,
    pub even_shift_k: Option<usize>,
    pub even_shift_kmax: usize,
    /// Text form of a periodic point with an odd run of `1`s, per window.
    pub odd_run_witnesses: Vec<(usize, Option<String>)>,
    pub passed: bool,
}

pub fn symbolic(presentations: usize, kmax: usize) -> SymbolicCheck {
    let mut stabilization_failures = Vec::new();
    for seed in 0..presentations as u64 {
        let s = random_presentation(seed, 2 + (seed % 2) as usize).expect("valid alphabet");
        for k in 1..=4 {
            if !stabilization_check(&s, k).unwrap_or(false) {
                stabilization_failures.push((seed, k));
            }
        }
    }
    let k_of = |s| is_locally_maximal(&s, kmax).ok().and_then(|r| r.k);
    let full_shift_k = k_of(full_shift(2).expect("binary"));
    let golden_mean_k = k_of(golden_mean());
    let even_shift_k = k_of(even_shift());
    let odd_run_witnesses: Vec<(usize, Option<String>)> = (1..=kmax)
        .map(|k| {
            let w = odd_run_witness(&even_shift(), k).ok().flatten();
            (k, w.map(|w| w.to_string()))
        })
        .collect();
    let passed = stabilization_failures.is_empty()
        && full_shift_k == Some(1)
        && golden_mean_k == Some(2)
        && even_shift_k.is_none()
        && odd_run_witnesses.iter().all(|(_, w)| w.is_some());
    SymbolicCheck {
        presentations,
        stabilization_failures,
        full_shift_k,
        golden_mean_k,
        even_shift_k,
        even_shift_kmax: kmax,
        odd_run_witnesses,
        passed,
    }
}

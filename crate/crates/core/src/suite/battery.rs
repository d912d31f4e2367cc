use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::closure::{iterate_closure, ClosureParams, ClosureTrace, SamplingParams, SetApprox};
use crate::maximality::{local_product_check, LpsReport};
use crate::shadowing::max_admissible_defect;
use crate::torus::{HyperbolicMap, ProductSystem, System, ToralAutomorphism, TorusPoint};

/// One seeded input of the closure battery.
#[derive(Debug, Clone)]
pub struct BatteryCase {
    pub name: String,
    pub system: System,
    pub lambda0: SetApprox,
    pub params: ClosureParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseOutcome {
    pub name: String,
    pub delta: f64,
    pub trace: Option<ClosureTrace>,
    /// Set when the engine refused the input.
    pub error: Option<String>,
    /// Bracket check of the final set at twice its resolution; only run on
    /// stabilized traces.
    pub lps: Option<LpsReport>,
}

/// Bracket radius used when checking final sets.
pub const LPS_EPSILON: f64 = 0.1;

/// Global shape of the battery runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySettings {
    pub delta: f64,
    pub u_radius: f64,
    pub resolution: f64,
    pub max_iter: usize,
    pub sampling: SamplingParams,
}

impl Default for BatterySettings {
    fn default() -> Self {
        BatterySettings {
            delta: 0.04,
            u_radius: 0.15,
            resolution: 0.004,
            max_iter: 10,
            sampling: SamplingParams::default(),
        }
    }
}

fn orbit_points(a: &ToralAutomorphism, period: u32, which: usize) -> Vec<TorusPoint> {
    let pts = a.periodic_points(period);
    let p = &pts[which % pts.len()];
    a.exact_orbit(p).iter().map(|r| r.to_torus()).collect()
}

/// Solve `α v_u - β v_s = (to - from) + k` over a small box of lattice
/// vectors `k` and return `from + α v_u`, whose orbit leaves `from` along
/// its unstable manifold and falls onto `to` along its stable one.
pub fn connecting_point(a: &ToralAutomorphism, from: &TorusPoint, to: &TorusPoint) -> TorusPoint {
    let s = a.splitting();
    assert_eq!(a.dim(), 2, "connections are built on T^2");
    let (vu, vs) = (&s.unstable_basis()[0], &s.stable_basis()[0]);
    let det = vu[0] * (-vs[1]) - (-vs[0]) * vu[1];
    let mut best: Option<(f64, f64)> = None;
    for k0 in -3i32..=3 {
        for k1 in -3i32..=3 {
            let r = [
                to.coords()[0] - from.coords()[0] + k0 as f64,
                to.coords()[1] - from.coords()[1] + k1 as f64,
            ];
            let alpha = (r[0] * (-vs[1]) - (-vs[0]) * r[1]) / det;
            let beta = (vu[0] * r[1] - vu[1] * r[0]) / det;
            let cost = alpha.abs() + beta.abs();
            if cost > 1e-12 && best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, alpha));
            }
        }
    }
    let (_, alpha) = best.expect("the box holds a non-trivial lattice vector");
    from.translate(&[alpha * vu[0], alpha * vu[1]])
}

fn orbit_window<M: HyperbolicMap + ?Sized>(map: &M, x: &TorusPoint, half: i64) -> Vec<TorusPoint> {
    let mut back = Vec::new();
    let mut p = x.clone();
    for _ in 0..half {
        p = map.backward(&p);
        back.push(p.clone());
    }
    back.reverse();
    let mut out = back;
    let mut p = x.clone();
    out.push(p.clone());
    for _ in 0..half {
        p = map.forward(&p);
        out.push(p.clone());
    }
    out
}

fn case(
    name: &str,
    system: System,
    points: Vec<TorusPoint>,
    resolution: f64,
    settings: &BatterySettings,
    seed: u64,
) -> BatteryCase {
    let origin = TorusPoint::origin(system.dim());
    // keep δ under the admissible bound of slower maps
    let delta = settings.delta.min(0.5 * max_admissible_defect(&system, &origin));
    let mut sampling = settings.sampling;
    sampling.seed = seed;
    BatteryCase {
        name: name.to_string(),
        lambda0: SetApprox::new(points, resolution, name).expect("battery points are finite"),
        system,
        params: ClosureParams {
            delta,
            u_radius: settings.u_radius,
            max_iter: settings.max_iter,
            sampling,
        },
    }
}

/// Thirteen inputs: periodic orbits, homoclinic and heteroclinic loops, a
/// full-torus net, the golden-mean map, the four-torus product and two
/// seeded unions of periodic orbits.
pub fn battery(settings: &BatterySettings, seed: u64) -> Vec<BatteryCase> {
    let cat = ToralAutomorphism::cat_map();
    let fib = ToralAutomorphism::fibonacci_map();
    let cat_sys = || System::Automorphism(cat.clone());
    let res = settings.resolution;
    let origin = TorusPoint::origin(2);
    let mut cases = Vec::new();
    let mut push = |c: BatteryCase| cases.push(c);
    let s = |i: u64| seed.wrapping_add(i);

    push(case("fixed", cat_sys(), vec![origin.clone()], res, settings, s(0)));
    for (i, p) in [2u32, 3, 5].into_iter().enumerate() {
        push(case(&format!("period_{p}"), cat_sys(), orbit_points(&cat, p, 0), res, settings, s(1 + i as u64)));
    }

    let h = connecting_point(&cat, &origin, &origin);
    let mut hom = vec![origin.clone()];
    hom.extend(orbit_window(&cat, &h, 8));
    push(case("homoclinic_loop", cat_sys(), hom, res, settings, s(4)));

    let q_orbit = orbit_points(&cat, 2, 0);
    let mut het = vec![origin.clone()];
    het.extend(q_orbit.iter().cloned());
    het.extend(orbit_window(&cat, &connecting_point(&cat, &origin, &q_orbit[0]), 8));
    het.extend(orbit_window(&cat, &connecting_point(&cat, &q_orbit[0], &origin), 8));
    push(case("heteroclinic_cycle", cat_sys(), het, res, settings, s(5)));

    let n = 50;
    let full = (0..n * n)
        .map(|k| TorusPoint::new(vec![(k % n) as f64 / n as f64, (k / n) as f64 / n as f64]))
        .collect();
    push(case("full_torus_net", cat_sys(), full, 0.02, settings, s(6)));

    let fib_sys = || System::Automorphism(fib.clone());
    push(case("golden_fixed", fib_sys(), vec![origin.clone()], res, settings, s(7)));
    let fh = connecting_point(&fib, &origin, &origin);
    let mut fhom = vec![origin.clone()];
    fhom.extend(orbit_window(&fib, &fh, 10));
    push(case("golden_homoclinic_loop", fib_sys(), fhom, res, settings, s(8)));

    let product = ProductSystem::default_dominated();
    let prod_sys = || System::Product(product.clone());
    push(case("product_fixed", prod_sys(), vec![TorusPoint::origin(4)], res, settings, s(9)));
    let prod_orbit = q_orbit
        .iter()
        .map(|q| ProductSystem::join(q, &origin))
        .collect();
    push(case("product_period_2", prod_sys(), prod_orbit, res, settings, s(10)));

    for i in 0..2u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(s(11 + i));
        let mut pts = Vec::new();
        for period in [1u32, 2, 3, 4] {
            let cands = cat.periodic_points(period);
            if let Some(p) = cands.choose(&mut rng) {
                pts.extend(cat.exact_orbit(p).iter().map(|r| r.to_torus()));
            }
        }
        push(case(&format!("seeded_net_{i}"), cat_sys(), pts, res, settings, s(11 + i)));
    }
    cases
}

pub fn run_case(c: &BatteryCase) -> CaseOutcome {
    let (trace, error) = match iterate_closure(&c.system, &c.lambda0, &c.params) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let lps = trace.as_ref().filter(|t| t.stabilized()).map(|t| {
        let fin = t.final_set();
        local_product_check(&c.system, fin, LPS_EPSILON, c.params.delta, 2.0 * fin.resolution())
    });
    CaseOutcome {
        name: c.name.clone(),
        delta: c.params.delta,
        trace,
        error,
        lps,
    }
}

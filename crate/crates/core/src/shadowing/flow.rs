use serde::{Deserialize, Serialize};

use super::{max_admissible_defect, shadow_operator_t, PseudoOrbit, ShadowError};
use crate::torus::{FlowState, HyperbolicMap, SuspensionFlow};

/// Samples `g(t_0 + i h)` of a pseudotrajectory of the suspension flow.
///
/// The grid must put samples on every integer time: `t_0` is an integer and
/// `1/h` a positive integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowPseudoTrajectory {
    t0: i64,
    steps_per_unit: usize,
    samples: Vec<FlowState>,
    defect: f64,
}

impl FlowPseudoTrajectory {
    pub fn new(
        flow: &SuspensionFlow,
        t0: i64,
        steps_per_unit: usize,
        samples: Vec<FlowState>,
    ) -> Result<Self, ShadowError> {
        if steps_per_unit == 0 {
            return Err(ShadowError::SampleGrid("step must be 1/m for integer m >= 1".into()));
        }
        if samples.len() < 2 {
            return Err(ShadowError::InsufficientSamples(format!(
                "{} sample(s), need at least 2",
                samples.len()
            )));
        }
        for s in &samples {
            if !(0.0..1.0).contains(&s.fiber) || s.point.dim() != flow.base().dim() {
                return Err(ShadowError::SampleGrid(format!(
                    "bad sample state {:?} at fiber {}",
                    s.point, s.fiber
                )));
            }
        }
        let defect = measure(flow, steps_per_unit, &samples);
        Ok(FlowPseudoTrajectory {
            t0,
            steps_per_unit,
            samples,
            defect,
        })
    }

    /// Constant-roof suspension of a base pseudo-orbit: `g(j + s) = (x_j, s)`.
    pub fn suspend(
        flow: &SuspensionFlow,
        po: &PseudoOrbit,
        steps_per_unit: usize,
    ) -> Result<Self, ShadowError> {
        let m = steps_per_unit.max(1);
        let mut samples = Vec::with_capacity(po.len() * m);
        for (j, x) in po.points().iter().enumerate() {
            let reps = if j + 1 == po.len() { 1 } else { m };
            for k in 0..reps {
                samples.push(FlowState::new(x.clone(), k as f64 / m as f64));
            }
        }
        Self::new(flow, po.start(), m, samples)
    }

    /// Exact trajectory through `state` sampled over `[t0, t0 + units]`.
    pub fn exact(
        flow: &SuspensionFlow,
        state: &FlowState,
        t0: i64,
        units: usize,
        steps_per_unit: usize,
    ) -> Result<Self, ShadowError> {
        let m = steps_per_unit.max(1);
        let samples = (0..=units * m)
            .map(|i| flow.flow_at(state, t0 as f64 + i as f64 / m as f64))
            .collect();
        Self::new(flow, t0, m, samples)
    }

    pub fn step(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 as f64 + i as f64 * self.step()
    }

    pub fn samples(&self) -> &[FlowState] {
        &self.samples
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }
}

/// `max d(g(t + τ), φ_τ(g(t)))` over sample pairs with `0 < τ <= 1`.
///
/// Including `τ = 1` lets a grid of integer times alone see the roof jumps.
fn measure(flow: &SuspensionFlow, m: usize, samples: &[FlowState]) -> f64 {
    let h = 1.0 / m as f64;
    let mut worst = 0.0f64;
    for i in 0..samples.len() {
        for k in 1..=m {
            let Some(later) = samples.get(i + k) else {
                break;
            };
            let pushed = flow.flow_at(&samples[i], k as f64 * h);
            worst = worst.max(flow.distance(later, &pushed));
        }
    }
    worst
}

/// Increasing piecewise-linear time change given by its breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reparameterization {
    breakpoints: Vec<(f64, f64)>,
    distortion: f64,
}

impl Reparameterization {
    /// Validates strict monotonicity and `|slope - 1| < distortion` on every pair.
    pub fn new(breakpoints: Vec<(f64, f64)>, distortion: f64) -> Result<Self, ShadowError> {
        if breakpoints.len() < 2 {
            return Err(ShadowError::Reparameterization("need two breakpoints".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(ShadowError::Reparameterization(format!(
                    "not strictly increasing between {:?} and {:?}",
                    w[0], w[1]
                )));
            }
        }
        let r = Reparameterization {
            breakpoints,
            distortion,
        };
        let dev = r.max_slope_deviation();
        if !(dev < distortion) {
            return Err(ShadowError::Reparameterization(format!(
                "slope deviation {dev:e} not below {distortion:e}"
            )));
        }
        Ok(r)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    /// Largest `|(α(t1) - α(t2)) / (t1 - t2) - 1|` over breakpoint pairs.
    ///
    /// Chord slopes are averages of consecutive slopes, so the consecutive
    /// pairs attain the maximum.
    pub fn max_slope_deviation(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `α(t)`, extended linearly past the end breakpoints.
    pub fn eval(&self, t: f64) -> f64 {
        eval_pwl(&self.breakpoints, t)
    }

    /// The inverse time change `β = α⁻¹`.
    pub fn inverse(&self) -> Reparameterization {
        let breakpoints: Vec<(f64, f64)> = self.breakpoints.iter().map(|&(t, a)| (a, t)).collect();
        // slopes s -> 1/s; |1/s - 1| = |s - 1| / s
        let distortion = breakpoints
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0) - 1.0).abs())
            .fold(0.0, f64::max)
            .max(self.distortion);
        Reparameterization {
            breakpoints,
            distortion: distortion + f64::EPSILON,
        }
    }
}

fn eval_pwl(bp: &[(f64, f64)], t: f64) -> f64 {
    let k = match bp.iter().position(|&(s, _)| s > t) {
        Some(0) => 0,
        Some(k) => k - 1,
        None => bp.len() - 2,
    };
    let k = k.min(bp.len() - 2);
    let (t0, a0) = bp[k];
    let (t1, a1) = bp[k + 1];
    a0 + (t - t0) * (a1 - a0) / (t1 - t0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowShadow {
    /// Shadowing state `x_0`, the point the time change is measured from.
    pub state: FlowState,
    pub alpha: Reparameterization,
    /// `max_t d(g(t), φ_{α(t)}(x_0))` on the sample grid.
    pub sup_distance: f64,
    pub per_sample: Vec<f64>,
}

/// Shadow a flow pseudotrajectory through its base-map pseudo-orbit.
///
/// The state at integer time `j` is `(p_j, s_j)`; written with `|s_j| <= 1/2`,
/// the base points `p_j` form a pseudo-orbit of the map, `T` gives its orbit
/// `y_j`, and `α` has knots `α(j) = j + s_j - s_{t_0}` so that
/// `φ_{α(j)}(x_0) = (y_j, s_j)`.
pub fn flow_shadow(
    flow: &SuspensionFlow,
    g: &FlowPseudoTrajectory,
    delta: f64,
) -> Result<FlowShadow, ShadowError> {
    let m = g.steps_per_unit;
    let knots: Vec<usize> = (0..g.samples.len()).step_by(m).collect();
    if knots.len() < 2 {
        return Err(ShadowError::InsufficientSamples(
            "pseudotrajectory shorter than one roof period".into(),
        ));
    }
    let base = flow.base();
    let bound = max_admissible_defect(base, &g.samples[0].point) * flow.roof();
    if !(g.defect < bound) {
        return Err(ShadowError::DefectTooLarge {
            defect: g.defect,
            bound,
        });
    }
    let (points, fibers): (Vec<_>, Vec<f64>) = knots
        .iter()
        .map(|&i| {
            let s = &g.samples[i];
            if s.fiber > 0.5 {
                (base.forward(&s.point), s.fiber - 1.0)
            } else {
                (s.point.clone(), s.fiber)
            }
        })
        .unzip();
    let po = PseudoOrbit::new(base, g.t0, points)?;
    let shadow = shadow_operator_t(base, &po)?;
    let origin = FlowState::at_base(shadow.orbit[0].clone());
    let state = flow.flow_at(&origin, fibers[0] - g.t0 as f64);
    let breakpoints: Vec<(f64, f64)> = knots
        .iter()
        .zip(&fibers)
        .map(|(&i, s)| {
            let t = g.time(i);
            (t, t + s - fibers[0])
        })
        .collect();
    let alpha = Reparameterization::new(breakpoints, delta).map_err(|e| {
        // constructed time changes must satisfy the declared bound
        debug_assert!(false, "{e}");
        e
    })?;
    let per_sample: Vec<f64> = g
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            // φ_{α(t)}(x_0) = φ_{α(t) - α(j) + s_j}(y_j, 0) for the knot j below t;
            // flowing from x_0 directly would amplify round-off by λu^t
            let j = (i / m).min(knots.len() - 1);
            let anchor = FlowState::at_base(shadow.orbit[j].clone());
            let tau = alpha.eval(g.time(i)) - alpha.breakpoints()[j].1 + fibers[j];
            flow.distance(s, &flow.flow_at(&anchor, tau))
        })
        .collect();
    let sup = per_sample.iter().copied().fold(0.0, f64::max);
    if let Some((i, &d)) = per_sample.iter().enumerate().find(|(_, d)| !(**d < delta)) {
        return Err(ShadowError::FlowShadowMiss {
            time: g.time(i),
            distance: d,
            delta,
        });
    }
    Ok(FlowShadow {
        state,
        alpha,
        sup_distance: sup,
        per_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{System, TorusPoint};
    use rand::{Rng, SeedableRng};

    fn flow() -> SuspensionFlow {
        SuspensionFlow::new(System::cat_map())
    }

    #[test]
    fn exact_trajectory_gives_identity() {
        let f = flow();
        let s = FlowState::new(TorusPoint::new(vec![0.3, 0.6]), 0.25);
        let g = FlowPseudoTrajectory::exact(&f, &s, 0, 12, 4).unwrap();
        assert!(g.defect() < 1e-12);
        let r = flow_shadow(&f, &g, 1e-6).unwrap();
        assert!(r.sup_distance < 1e-9);
        for &(t, a) in r.alpha.breakpoints() {
            assert!((t - a).abs() < 1e-12);
        }
    }

    #[test]
    fn suspended_pseudo_orbit() {
        let f = flow();
        let base = f.base();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut x = TorusPoint::new(vec![0.1, 0.2]);
        let mut pts = vec![];
        for _ in 0..40 {
            pts.push(x.clone());
            x = base.forward(&x).translate(&[rng.random_range(-7e-4..7e-4), rng.random_range(-7e-4..7e-4)]);
        }
        let po = PseudoOrbit::new(base, 0, pts).unwrap();
        let g = FlowPseudoTrajectory::suspend(&f, &po, 4).unwrap();
        let k = base.linear().splitting().shadowing_constant();
        let delta = k * 1e-3;
        let r = flow_shadow(&f, &g, delta).unwrap();
        assert!(r.sup_distance < delta);
        assert!(r.alpha.max_slope_deviation() <= delta);
    }

    #[test]
    fn degenerate_samples_rejected() {
        let f = flow();
        let one = vec![FlowState::at_base(TorusPoint::origin(2))];
        assert!(matches!(
            FlowPseudoTrajectory::new(&f, 0, 4, one),
            Err(ShadowError::InsufficientSamples(_))
        ));
        assert!(matches!(
            FlowPseudoTrajectory::new(&f, 0, 4, vec![]),
            Err(ShadowError::InsufficientSamples(_))
        ));
    }

    #[test]
    fn reparameterization_invariants() {
        let r = Reparameterization::new(vec![(0.0, 0.0), (1.0, 1.01), (2.0, 1.99)], 0.05).unwrap();
        assert!((r.eval(0.5) - 0.505).abs() < 1e-12);
        assert!((r.max_slope_deviation() - 0.02).abs() < 1e-12);
        let inv = r.inverse();
        assert!((inv.eval(r.eval(1.7)) - 1.7).abs() < 1e-12);
        assert!(Reparameterization::new(vec![(0.0, 0.0), (1.0, 0.0)], 0.5).is_err());
        assert!(Reparameterization::new(vec![(0.0, 0.0), (1.0, 1.2)], 0.1).is_err());
    }
}

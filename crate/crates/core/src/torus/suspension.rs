use serde::{Deserialize, Serialize};

use super::point::{distance_unchecked, TorusPoint};
use super::system::System;
use super::HyperbolicMap;

/// A point of the mapping torus: base point plus fiber time in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub point: TorusPoint,
    pub fiber: f64,
}

impl FlowState {
    pub fn new(point: TorusPoint, fiber: f64) -> Self {
        FlowState { point, fiber }
    }

    pub fn at_base(point: TorusPoint) -> Self {
        FlowState { point, fiber: 0.0 }
    }
}

/// Constant-roof suspension: `(p, 1) ~ (f(p), 0)`, so `φ_n(p, 0) = (f^n p, 0)`.
#[derive(Debug, Clone)]
pub struct SuspensionFlow {
    base: System,
}

impl SuspensionFlow {
    pub fn new(base: System) -> Self {
        SuspensionFlow { base }
    }

    pub fn base(&self) -> &System {
        &self.base
    }

    pub fn roof(&self) -> f64 {
        1.0
    }

    pub fn iterate(&self, p: &TorusPoint, n: i64) -> TorusPoint {
        let mut q = p.clone();
        if n >= 0 {
            for _ in 0..n {
                q = self.base.forward(&q);
            }
        } else {
            for _ in 0..(-n) {
                q = self.base.backward(&q);
            }
        }
        q
    }

    /// `φ_t(state)`: advance the fiber time, applying the base map at each roof crossing.
    pub fn flow_at(&self, state: &FlowState, t: f64) -> FlowState {
        let total = state.fiber + t;
        let mut n = total.floor();
        let mut s = total - n;
        if s >= 1.0 {
            s = 0.0;
            n += 1.0;
        }
        FlowState {
            point: self.iterate(&state.point, n as i64),
            fiber: s,
        }
    }

    /// Distance on the mapping torus, taking the seam identification into account.
    ///
    /// Compares `(p, s)` with the three representatives `(q, u)`, `(f q, u - 1)`
    /// and `(f⁻¹ q, u + 1)` of the second state.
    pub fn distance(&self, a: &FlowState, b: &FlowState) -> f64 {
        let reps = [
            (b.point.clone(), b.fiber),
            (self.base.forward(&b.point), b.fiber - 1.0),
            (self.base.backward(&b.point), b.fiber + 1.0),
        ];
        reps.iter()
            .map(|(q, u)| {
                let dp = distance_unchecked(a.point.coords(), q.coords());
                let ds = a.fiber - u;
                (dp * dp + ds * ds).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ToralAutomorphism;
    use rand::{Rng, SeedableRng};

    fn flow() -> SuspensionFlow {
        SuspensionFlow::new(System::Automorphism(ToralAutomorphism::cat_map()))
    }

    #[test]
    fn zero_time_is_identity() {
        let f = flow();
        let s = FlowState::new(TorusPoint::new(vec![0.3, 0.7]), 0.25);
        assert_eq!(f.flow_at(&s, 0.0), s);
    }

    #[test]
    fn fixed_point_orbit() {
        let f = flow();
        let s = FlowState::at_base(TorusPoint::origin(2));
        assert_eq!(f.flow_at(&s, 3.0), s);
    }

    #[test]
    fn unit_time_applies_base_map() {
        let f = flow();
        let p = TorusPoint::new(vec![0.1, 0.35]);
        let s = f.flow_at(&FlowState::at_base(p.clone()), 1.0);
        assert_eq!(s.point, f.base().forward(&p));
        assert_eq!(s.fiber, 0.0);
    }

    #[test]
    fn group_law() {
        let f = flow();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = FlowState::new(
                TorusPoint::new(vec![rng.random::<f64>(), rng.random::<f64>()]),
                rng.random::<f64>(),
            );
            let t1 = rng.random_range(-3.0..3.0);
            let t2 = rng.random_range(-3.0..3.0);
            let a = f.flow_at(&f.flow_at(&s, t1), t2);
            let b = f.flow_at(&s, t1 + t2);
            assert!(f.distance(&a, &b) < 1e-10);
        }
    }

    #[test]
    fn seam_distance_is_small_across_roof() {
        let f = flow();
        let p = TorusPoint::new(vec![0.2, 0.4]);
        let before = FlowState::new(p.clone(), 1.0 - 1e-9);
        let after = FlowState::at_base(f.base().forward(&p));
        assert!(f.distance(&before, &after) < 1e-8);
    }
}

use serde::{Deserialize, Serialize};

use super::ShadowError;
use crate::torus::{distance_unchecked, wrap_centered, HyperbolicMap, TorusPoint};

/// A finite pseudo-orbit `x_l, …, x_m`, indexed from `start = l`.
///
/// `defect` is the largest one-step error `d(f(x_j), x_{j+1})` (including the
/// wrap pair `x_m → x_l` when periodic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoOrbit {
    start: i64,
    points: Vec<TorusPoint>,
    periodic: bool,
    defect: f64,
}

impl PseudoOrbit {
    /// Build a segment starting at index `start` and measure its defect.
    pub fn new<M: HyperbolicMap + ?Sized>(
        map: &M,
        start: i64,
        points: Vec<TorusPoint>,
    ) -> Result<Self, ShadowError> {
        Self::build(map, start, points, false)
    }

    /// A periodic pseudo-orbit: the step after the last point returns to the first.
    pub fn periodic<M: HyperbolicMap + ?Sized>(
        map: &M,
        start: i64,
        points: Vec<TorusPoint>,
    ) -> Result<Self, ShadowError> {
        Self::build(map, start, points, true)
    }

    fn build<M: HyperbolicMap + ?Sized>(
        map: &M,
        start: i64,
        points: Vec<TorusPoint>,
        periodic: bool,
    ) -> Result<Self, ShadowError> {
        let min_len = if periodic { 1 } else { 2 };
        if points.len() < min_len {
            return Err(ShadowError::TooShort(points.len()));
        }
        for p in &points {
            if p.dim() != map.dim() {
                return Err(ShadowError::DimensionMismatch {
                    expected: map.dim(),
                    found: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(ShadowError::NonFinite);
            }
        }
        let defect = measure(map, &points, periodic);
        Ok(PseudoOrbit {
            start,
            points,
            periodic,
            defect,
        })
    }

    /// The true orbit of `p` over indices `start .. start + len`, with `p` at index 0.
    pub fn orbit_of<M: HyperbolicMap + ?Sized>(
        map: &M,
        p: &TorusPoint,
        start: i64,
        len: usize,
    ) -> Result<Self, ShadowError> {
        let mut q = map.iterate(p, start);
        let mut points = Vec::with_capacity(len);
        for _ in 0..len {
            points.push(q.clone());
            q = map.forward(&q);
        }
        Self::new(map, start, points)
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Index of the last point.
    pub fn end(&self) -> i64 {
        self.start + self.points.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    /// Point with absolute index `j`, if it lies in the window.
    pub fn get(&self, j: i64) -> Option<&TorusPoint> {
        let k = j - self.start;
        if k < 0 {
            return None;
        }
        self.points.get(k as usize)
    }

    /// Minimal lifts `e_j = x_{j+1} - f(x_j)` of the one-step errors.
    /// A periodic orbit has one error per point; a segment one fewer.
    pub fn lifted_errors<M: HyperbolicMap + ?Sized>(&self, map: &M) -> Vec<Vec<f64>> {
        let n = self.points.len();
        let steps = if self.periodic { n } else { n - 1 };
        (0..steps)
            .map(|j| {
                let next = &self.points[(j + 1) % n];
                let image = map.lift_forward(self.points[j].coords());
                next.coords()
                    .iter()
                    .zip(&image)
                    .map(|(a, b)| wrap_centered(a - b))
                    .collect()
            })
            .collect()
    }

    pub(crate) fn with_start(mut self, start: i64) -> Self {
        self.start = start;
        self
    }
}

fn measure<M: HyperbolicMap + ?Sized>(map: &M, points: &[TorusPoint], periodic: bool) -> f64 {
    let n = points.len();
    let steps = if periodic { n } else { n - 1 };
    (0..steps)
        .map(|j| {
            let image = map.forward(&points[j]);
            distance_unchecked(image.coords(), points[(j + 1) % n].coords())
        })
        .fold(0.0, f64::max)
}

/// Largest consecutive defect `max_j d(f(x_j), x_{j+1})` of a point list.
pub fn pseudo_orbit_defect<M: HyperbolicMap + ?Sized>(
    map: &M,
    points: &[TorusPoint],
) -> Result<f64, ShadowError> {
    if points.len() < 2 {
        return Err(ShadowError::TooShort(points.len()));
    }
    Ok(measure(map, points, false))
}

/// `σ^n`: reindex so that the new sequence satisfies `x'_j = x_{j+n}`.
pub fn shift_pseudo(po: &PseudoOrbit, n: i64) -> PseudoOrbit {
    po.clone().with_start(po.start - n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ToralAutomorphism;

    #[test]
    fn exact_orbit_has_zero_defect() {
        let a = ToralAutomorphism::cat_map();
        let po = PseudoOrbit::orbit_of(&a, &TorusPoint::origin(2), -5, 11).unwrap();
        assert_eq!(po.defect(), 0.0);
        let po = PseudoOrbit::orbit_of(&a, &TorusPoint::new(vec![0.123, 0.456]), 0, 30).unwrap();
        assert!(po.defect() < 1e-12);
    }

    #[test]
    fn single_step_defect() {
        let a = ToralAutomorphism::cat_map();
        let pts = vec![TorusPoint::origin(2), TorusPoint::new(vec![0.01, 0.0])];
        let d = pseudo_orbit_defect(&a, &pts).unwrap();
        assert!((d - 0.01).abs() < 1e-15);
        assert!(matches!(
            pseudo_orbit_defect(&a, &pts[..1]),
            Err(ShadowError::TooShort(1))
        ));
    }

    #[test]
    fn shift_reindexes() {
        let a = ToralAutomorphism::cat_map();
        let po = PseudoOrbit::orbit_of(&a, &TorusPoint::new(vec![0.3, 0.1]), -3, 7).unwrap();
        let s = shift_pseudo(&po, 1);
        assert_eq!(s.start(), -4);
        assert_eq!(s.get(0), po.get(1));
        assert_eq!(shift_pseudo(&po, 0), po);
    }
}

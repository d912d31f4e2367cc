use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::SpatialIndex;
use super::ClosureError;
use crate::torus::TorusPoint;

/// A finite `r`-net standing in for a compact subset of `T^d`.
///
/// No two stored points are closer than `r / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetApprox {
    points: Vec<TorusPoint>,
    resolution: f64,
    label: String,
}

impl SetApprox {
    /// Coarsen `points` to a net: a point is kept unless an earlier kept point
    /// lies within `r / 2` of it.
    pub fn new(
        points: Vec<TorusPoint>,
        resolution: f64,
        label: impl Into<String>,
    ) -> Result<Self, ClosureError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(ClosureError::Resolution(resolution));
        }
        if let Some(first) = points.first() {
            let d = first.dim();
            if let Some(bad) = points.iter().find(|p| p.dim() != d) {
                return Err(ClosureError::DimensionMismatch {
                    expected: d,
                    found: bad.dim(),
                });
            }
            if points.iter().any(|p| !p.is_finite()) {
                return Err(ClosureError::NonFinite);
            }
        }
        let mut set = SetApprox {
            points: Vec::new(),
            resolution,
            label: label.into(),
        };
        set.extend(points);
        Ok(set)
    }

    pub fn singleton(p: TorusPoint, resolution: f64, label: impl Into<String>) -> Result<Self, ClosureError> {
        Self::new(vec![p], resolution, label)
    }

    fn extend(&mut self, extra: Vec<TorusPoint>) {
        let Some(first) = self.points.first().or(extra.first()) else {
            return;
        };
        let mut idx = SpatialIndex::with_cell_width(first.dim(), self.resolution / 2.0);
        for p in &self.points {
            idx.insert(p.coords().to_vec());
        }
        let half = self.resolution / 2.0;
        for p in extra {
            if !idx.any_within(p.coords(), half) {
                idx.insert(p.coords().to_vec());
                self.points.push(p);
            }
        }
    }

    /// `self ∪ extra`, coarsened; every existing point is kept.
    pub fn merged(&self, extra: Vec<TorusPoint>, label: impl Into<String>) -> SetApprox {
        let mut out = SetApprox {
            points: self.points.clone(),
            resolution: self.resolution,
            label: label.into(),
        };
        out.extend(extra);
        out
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(TorusPoint::dim)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn index(&self) -> SpatialIndex {
        let coords: Vec<Vec<f64>> = self.points.iter().map(|p| p.coords().to_vec()).collect();
        SpatialIndex::for_points(self.dim().unwrap_or(1), &coords)
    }

    /// Distance from `p` to the nearest stored point.
    pub fn distance_to(&self, p: &TorusPoint) -> f64 {
        self.index().nearest(p.coords()).map_or(f64::INFINITY, |(_, d)| d)
    }
}

fn directed(a: &SetApprox, b_index: &SpatialIndex) -> f64 {
    a.points
        .par_iter()
        .map(|p| b_index.nearest(p.coords()).map_or(f64::INFINITY, |(_, d)| d))
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between two nets under the flat torus metric.
pub fn hausdorff(a: &SetApprox, b: &SetApprox) -> Result<f64, ClosureError> {
    let (Some(da), Some(db)) = (a.dim(), b.dim()) else {
        return Err(ClosureError::EmptySet);
    };
    if da != db {
        return Err(ClosureError::DimensionMismatch {
            expected: da,
            found: db,
        });
    }
    Ok(directed(a, &b.index()).max(directed(b, &a.index())))
}

/// `sup_{x ∈ a} d(x, b)`: how far `a` reaches outside `b`.
pub fn directed_hausdorff(a: &SetApprox, b: &SetApprox) -> Result<f64, ClosureError> {
    if a.is_empty() || b.is_empty() {
        return Err(ClosureError::EmptySet);
    }
    Ok(directed(a, &b.index()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::distance_unchecked;

    fn set(pts: &[[f64; 2]]) -> SetApprox {
        SetApprox::new(
            pts.iter().map(|p| TorusPoint::new(p.to_vec())).collect(),
            1e-3,
            "t",
        )
        .unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let a = set(&[[0.0, 0.0]]);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        let b = set(&[[0.1, 0.0]]);
        assert!((hausdorff(&a, &b).unwrap() - 0.1).abs() < 1e-15);
        let c = set(&[[0.0, 0.0], [0.5, 0.0]]);
        assert!((hausdorff(&c, &a).unwrap() - 0.5).abs() < 1e-15);
        let empty = SetApprox::new(vec![], 1e-3, "e").unwrap();
        assert!(matches!(hausdorff(&a, &empty), Err(ClosureError::EmptySet)));
    }

    #[test]
    fn coarsening_keeps_earliest() {
        let s = SetApprox::new(
            vec![
                TorusPoint::new(vec![0.5, 0.5]),
                TorusPoint::new(vec![0.5004, 0.5]),
                TorusPoint::new(vec![0.9999, 0.0]),
                TorusPoint::new(vec![0.0003, 0.0]),
            ],
            1e-3,
            "c",
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points()[0].coords(), &[0.5, 0.5]);
        for (i, p) in s.points().iter().enumerate() {
            for q in &s.points()[i + 1..] {
                assert!(distance_unchecked(p.coords(), q.coords()) >= 5e-4);
            }
        }
        let grown = s.merged(vec![TorusPoint::new(vec![0.2, 0.2])], "g");
        assert_eq!(&grown.points()[..2], s.points());
        assert_eq!(grown.len(), 3);
    }
}

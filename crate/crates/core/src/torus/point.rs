use serde::{Deserialize, Serialize};
use std::fmt;

use super::TorusError;

/// Reduce a real number to the fundamental domain `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    // rem_euclid rounds tiny negative inputs up to exactly 1.0
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Minimal representative of `x` modulo 1, in `[-1/2, 1/2]`.
#[inline]
pub fn wrap_centered(x: f64) -> f64 {
    x - x.round()
}

/// A point of the flat torus `R^d / Z^d`, stored with every coordinate in `[0, 1)`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    /// Build a point, wrapping each coordinate into `[0, 1)`.
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        let mut coords = coords.into();
        for c in coords.iter_mut() {
            *c = wrap_unit(*c);
        }
        TorusPoint { coords }
    }

    pub fn origin(dim: usize) -> Self {
        TorusPoint {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Translate by a vector of the covering space and re-wrap.
    pub fn translate(&self, v: &[f64]) -> TorusPoint {
        debug_assert_eq!(v.len(), self.dim());
        TorusPoint::new(
            self.coords
                .iter()
                .zip(v)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        )
    }

    /// Minimal lift of `other - self`: the shortest covering-space vector `v`
    /// with `self + v ≡ other`.
    pub fn displacement_to(&self, other: &TorusPoint) -> Vec<f64> {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| wrap_centered(b - a))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{:?}", self.coords)
    }
}

/// Flat torus distance; panics-free fast path used by the hot loops.
#[inline]
pub(crate) fn distance_unchecked(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = wrap_centered(a - b);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance on `T^d`: the Euclidean length of the shortest lift of `q - p`.
pub fn torus_distance(p: &TorusPoint, q: &TorusPoint) -> Result<f64, TorusError> {
    if p.dim() != q.dim() {
        return Err(TorusError::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(distance_unchecked(p.coords(), q.coords()))
}

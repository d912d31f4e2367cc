//! Pseudo-orbits and their shadowing orbits, for maps and for the suspension flow.

mod banded;
mod expansivity;
mod flow;
mod linear;
mod newton;
mod operator;
mod pseudo_orbit;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::torus::{distance_unchecked, HyperbolicMap, TorusError, TorusPoint};

pub use banded::{BandedMatrix, SingularMatrix};
pub use expansivity::{expansivity_constant, expansivity_test};
pub use flow::{flow_shadow, FlowPseudoTrajectory, FlowShadow, Reparameterization};
pub use linear::exact_shadow_linear;
pub use newton::{newton_shadow, newton_shadow_from, NewtonOptions};
pub use operator::{shadow_batch, shadow_operator_t};
pub use pseudo_orbit::{pseudo_orbit_defect, shift_pseudo, PseudoOrbit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShadowError {
    #[error("defect too large: {defect:e} >= admissible bound {bound:e}")]
    DefectTooLarge { defect: f64, bound: f64 },
    #[error("pseudo-orbit too short ({0} points)")]
    TooShort(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate in pseudo-orbit")]
    NonFinite,
    #[error("newton did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("singular newton system at pivot {0}")]
    Singular(usize),
    #[error("expansivity radius {a} must lie in (0, {bound})")]
    ExpansivityRadius { a: f64, bound: f64 },
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("invalid sample grid: {0}")]
    SampleGrid(String),
    #[error("invalid reparameterization: {0}")]
    Reparameterization(String),
    #[error("flow shadow misses the trajectory by {distance:e} at t = {time} (δ = {delta:e})")]
    FlowShadowMiss { time: f64, distance: f64, delta: f64 },
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// `δ₀ = (1 - λ_s) · a / (2C)`: the largest defect the shadowers accept.
///
/// `a` is [`expansivity_constant`]; the splitting is taken at `at`.
pub fn max_admissible_defect<M: HyperbolicMap + ?Sized>(map: &M, at: &TorusPoint) -> f64 {
    let s = map.splitting_at(at);
    (1.0 - s.lambda_s()) * expansivity_constant(map) / (2.0 * s.distortion())
}

pub(crate) fn check_defect<M: HyperbolicMap + ?Sized>(
    map: &M,
    po: &PseudoOrbit,
) -> Result<(), ShadowError> {
    let bound = max_admissible_defect(map, &po.points()[0]);
    if !(po.defect() < bound) {
        return Err(ShadowError::DefectTooLarge {
            defect: po.defect(),
            bound,
        });
    }
    Ok(())
}

/// A true orbit segment `y_l, …, y_m` next to a pseudo-orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowResult {
    pub start: i64,
    /// `y_0`, pulled back or pushed forward if index 0 is outside the window.
    pub point: TorusPoint,
    pub orbit: Vec<TorusPoint>,
    /// `d(y_j, x_j)` in the flat metric.
    pub per_index: Vec<f64>,
    /// `|y_j - x_j|` in the adapted norm.
    pub adapted_per_index: Vec<f64>,
    pub sup_distance: f64,
    pub adapted_sup_distance: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `max_j d(f(y_j), y_{j+1})`.
    pub residual: f64,
    pub periodic: bool,
}

impl ShadowResult {
    pub(crate) fn assemble<M: HyperbolicMap + ?Sized>(
        map: &M,
        po: &PseudoOrbit,
        displacements: &[Vec<f64>],
        converged: bool,
        iterations: usize,
    ) -> Self {
        let orbit: Vec<TorusPoint> = po
            .points()
            .iter()
            .zip(displacements)
            .map(|(x, z)| x.translate(z))
            .collect();
        let per_index: Vec<f64> = orbit
            .iter()
            .zip(po.points())
            .map(|(y, x)| distance_unchecked(y.coords(), x.coords()))
            .collect();
        let adapted_per_index: Vec<f64> = po
            .points()
            .iter()
            .zip(displacements)
            .map(|(x, z)| map.splitting_at(x).adapted_norm(z))
            .collect();
        let residual = orbit_residual(map, &orbit, po.is_periodic());
        let point = if po.start() <= 0 && po.end() >= 0 {
            orbit[(-po.start()) as usize].clone()
        } else {
            map.iterate(&orbit[0], -po.start())
        };
        ShadowResult {
            start: po.start(),
            point,
            sup_distance: per_index.iter().copied().fold(0.0, f64::max),
            adapted_sup_distance: adapted_per_index.iter().copied().fold(0.0, f64::max),
            orbit,
            per_index,
            adapted_per_index,
            converged,
            iterations,
            residual,
            periodic: po.is_periodic(),
        }
    }

    pub fn end(&self) -> i64 {
        self.start + self.orbit.len() as i64 - 1
    }

    pub fn get(&self, j: i64) -> Option<&TorusPoint> {
        let k = j - self.start;
        if k < 0 {
            return None;
        }
        self.orbit.get(k as usize)
    }
}

pub(crate) fn orbit_residual<M: HyperbolicMap + ?Sized>(
    map: &M,
    orbit: &[TorusPoint],
    periodic: bool,
) -> f64 {
    let n = orbit.len();
    let steps = if periodic { n } else { n.saturating_sub(1) };
    (0..steps)
        .map(|j| distance_unchecked(map.forward(&orbit[j]).coords(), orbit[(j + 1) % n].coords()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{ProductSystem, ToralAutomorphism};

    #[test]
    fn admissible_defect_values() {
        // cat map: λs = 0.382, L = 2.618, C = 1
        let a = ToralAutomorphism::cat_map();
        let lu = (3.0 + 5f64.sqrt()) / 2.0;
        let expected = (1.0 - 1.0 / lu) / (1.0 + lu) / 2.0;
        let got = max_admissible_defect(&a, &TorusPoint::origin(2));
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        // product: the weak factor sets λs = 0.618
        let p = ProductSystem::default_dominated();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let expected = (1.0 - 1.0 / phi) / (1.0 + lu) / 2.0;
        let got = max_admissible_defect(&p, &TorusPoint::origin(4));
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }
}

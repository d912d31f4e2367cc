//! Hyperbolic toral automorphisms, dominated products on `T^4`, and their
//! constant-roof suspensions.

mod automorphism;
pub mod exact;
mod point;
mod product;
mod splitting;
mod suspension;
mod system;

use std::borrow::Cow;

use nalgebra::DMatrix;
use thiserror::Error;

pub use automorphism::{IntMatrix, ToralAutomorphism};
pub use point::{torus_distance, wrap_centered, wrap_unit, TorusPoint};
pub(crate) use point::distance_unchecked;
pub use product::ProductSystem;
pub use splitting::{compute_splitting, HyperbolicSplitting, SplittingSummary};
pub use suspension::{FlowState, SuspensionFlow};
pub use system::{System, SystemSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square and nonempty (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("torus dimension must be at least 2 (got {0})")]
    DimensionTooSmall(usize),
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(i64),
    #[error("not hyperbolic: eigenvalue of modulus {modulus}")]
    NotHyperbolic { modulus: f64 },
    #[error("matrix is not diagonalizable over its eigenvalue clusters")]
    NotDiagonalizable,
    #[error("product factors must act on T^2")]
    ProductFactorDimension,
    #[error(
        "factor A does not dominate factor B (λu: {lambda_u_a} vs {lambda_u_b}, λs: {lambda_s_a} vs {lambda_s_b})"
    )]
    NotDominated {
        lambda_u_a: f64,
        lambda_u_b: f64,
        lambda_s_a: f64,
        lambda_s_b: f64,
    },
    #[error("config: {0}")]
    Config(String),
}

/// A diffeomorphism of `T^d` with a uniformly hyperbolic splitting.
///
/// Only linear automorphisms ship with the crate, but the shadowing, bracket
/// and grid code is written against this trait.
pub trait HyperbolicMap: Send + Sync {
    fn dim(&self) -> usize;
    fn forward(&self, p: &TorusPoint) -> TorusPoint;
    fn backward(&self, p: &TorusPoint) -> TorusPoint;
    /// A continuous lift of the map to the covering space.
    fn lift_forward(&self, x: &[f64]) -> Vec<f64>;
    fn lift_backward(&self, x: &[f64]) -> Vec<f64>;
    /// Derivative at `p`.
    fn jacobian(&self, p: &TorusPoint) -> DMatrix<f64>;
    /// Splitting of the tangent space at `p`.
    fn splitting_at(&self, p: &TorusPoint) -> Cow<'_, HyperbolicSplitting>;
    /// Global Lipschitz bound for both the map and its inverse.
    fn lipschitz(&self) -> f64;
    fn as_linear(&self) -> Option<&ToralAutomorphism> {
        None
    }
    /// Padding that turns the corner hull of a cell image into an enclosure.
    fn enclosure_padding(&self, cell_width: f64) -> f64 {
        self.lipschitz() * cell_width * (self.dim() as f64).sqrt()
    }

    fn iterate(&self, p: &TorusPoint, n: i64) -> TorusPoint {
        let mut q = p.clone();
        if n >= 0 {
            for _ in 0..n {
                q = self.forward(&q);
            }
        } else {
            for _ in 0..(-n) {
                q = self.backward(&q);
            }
        }
        q
    }
}

//! Local product structure, maximal invariant sets on grids, and the
//! non-premaximality witness.

mod bracket;
mod crovisier;
mod grid;
mod lps;
mod quadratic;
mod witness;

use thiserror::Error;

use crate::closure::SetApprox;
use crate::shadowing::ShadowError;
use crate::torus::TorusPoint;

pub use bracket::{
    bracket, bracket_linear, bracket_newton, BracketOptions, BracketPoint, MAX_FRAME_CONDITION,
};
pub use crovisier::{crovisier_q, crovisier_set, crovisier_witness, CrovisierSetup};
pub use grid::{maximal_invariant_set, GridSet, MAX_GRID_CELLS};
pub use lps::{local_product_check, LpsFailure, LpsReport};
pub use quadratic::{QuadraticMap, Surd, SurdPoint};
pub use witness::{verify_nonpremax_witness, NonPremaxWitness, WitnessReport, DECAY_MARGIN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ε must lie in (0, 1/4) (got {0})")]
    Epsilon(f64),
    #[error("stable and unstable directions are nearly parallel (frame condition {condition:.3e})")]
    NotTransverse { condition: f64 },
    #[error("no local bracket: s-distance {s_distance:.3e}, u-distance {u_distance:.3e}, ε = {eps}")]
    NoLocalBracket {
        s_distance: f64,
        u_distance: f64,
        eps: f64,
    },
    #[error("grid of {cells} cells exceeds the limit of {limit}")]
    GridTooLarge { cells: u128, limit: usize },
    #[error("cell index {0} outside the grid")]
    CellOutOfRange(u64),
    #[error("empty grid")]
    EmptyGrid,
    #[error("V of radius {0} covers every cell")]
    VSwallowsGrid(f64),
    #[error("negative V radius {0}")]
    VRadius(f64),
    #[error("{0} is not a periodic point of period at most {1}")]
    NotPeriodic(String, u32),
    #[error("no periodic point of exact period {0} other than the origin")]
    NoPeriodicPoint(u32),
    #[error("witness sample is not rectangular: {0}")]
    Witness(String),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
}

/// Anything a point-to-set distance can be measured against.
pub trait PointSet: Sync {
    fn distance_to(&self, p: &TorusPoint) -> f64;
}

impl PointSet for SetApprox {
    fn distance_to(&self, p: &TorusPoint) -> f64 {
        SetApprox::distance_to(self, p)
    }
}

impl PointSet for GridSet {
    fn distance_to(&self, p: &TorusPoint) -> f64 {
        GridSet::distance_to(self, p)
    }
}

//! Shadowing closures `sh(Λ, δ)` on finite nets, their iteration, and Hausdorff distance.

mod engine;
mod graph;
mod index;
mod set_approx;

use thiserror::Error;

use crate::shadowing::ShadowError;

pub use engine::{
    dichotomy, gamma_for, iterate_closure, shadowing_closure, ClosureParams, ClosureStats,
    ClosureStep, ClosureTrace, DichotomyReport, Verdict, CONFIRMATION_STEPS, DICHOTOMY_SLACK,
    GAMMA_MARGIN,
};
pub use graph::{
    build_graph, sample_pseudo_orbits, simple_cycles, PseudoOrbitSample, SampleKind, Sampling,
    SamplingParams, TransitionGraph,
};
pub use index::SpatialIndex;
pub use set_approx::{directed_hausdorff, hausdorff, SetApprox};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosureError {
    #[error("empty set")]
    EmptySet,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite point")]
    NonFinite,
    #[error("resolution must be positive (got {0})")]
    Resolution(f64),
    #[error("positive δ required (got {0})")]
    NonPositiveDelta(f64),
    #[error("δ = {delta} is not below the admissible defect bound {bound}")]
    DeltaNotAdmissible { delta: f64, bound: f64 },
    #[error("U radius must be positive (got {0})")]
    URadius(f64),
    #[error("all {0} sampled pseudo-orbits were refused by the shadower")]
    AllRefused(usize),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
}

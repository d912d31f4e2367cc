//! Shift spaces on eventually periodic words: languages, SFT closures, the
//! local maximality decision, and symbolic shadowing by splicing.

mod presentation;
mod sft;
mod shadow;
mod word;

use thiserror::Error;

pub use presentation::{
    even_shift, full_shift, golden_mean, random_presentation, SubshiftPresentation,
};
pub use sft::{
    is_locally_maximal, odd_run_witness, sft_closure, stabilization_check, LocalMaximality,
    Sft, PERIOD_FACTOR,
};
pub use shadow::{delta_for_window, symbolic_shadow, SymbolicPseudoOrbit};
pub use word::{shift_metric, MetricValue, PeriodicWord, Symbol, MAX_ALPHABET};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("cycles must be non-empty")]
    EmptyCycle,
    #[error("symbol {symbol} outside an alphabet of size {alphabet}")]
    Symbol { symbol: Symbol, alphabet: usize },
    #[error("alphabet size must be in 1..={max} (got {0})", max = MAX_ALPHABET)]
    Alphabet(usize),
    #[error("parse error at column {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("word length {found}, expected {expected}")]
    WordLength { expected: usize, found: usize },
    #[error("window length must be at least 1")]
    ZeroWindow,
    #[error("empty pseudo-orbit")]
    EmptyPseudo,
    #[error("pseudo-orbit entry {0} is not in the SFT")]
    NotMember(usize),
    #[error("gap of {distance} at index {index} is not below δ = {delta}")]
    Gap { index: i64, distance: f64, delta: f64 },
    #[error("δ = {delta} exceeds 2^-(k+1) = {bound}")]
    DeltaTooLarge { delta: f64, bound: f64 },
}

//! Dense feed-forward networks, just large enough for this project: a
//! fixed stack of affine layers with scalar activations, exact gradients
//! via a recorded tape, and Adam. Everything is f64 and single-threaded;
//! the models are tiny and bit-reproducibility is worth more than speed.

pub mod adam;
pub mod mlp;
pub mod numdiff;

pub use adam::AdamState;
pub use mlp::{Activation, Gradients, Mlp, Tape};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("invalid layer spec: {0}")]
    BadSpec(String),
    #[error("input has length {got}, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tape does not match this network's shape")]
    TapeMismatch,
    #[error("non-finite {0} encountered")]
    NonFinite(&'static str),
}

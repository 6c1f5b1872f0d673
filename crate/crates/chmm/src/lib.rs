//! Cloned hidden Markov models: block-sparse Baum-Welch training,
//! exact inference under hard or soft evidence, synthetic sequence
//! generators, and analysis tools for trained models.
//!
//! A cloned HMM is an HMM whose emission map is fixed and
//! deterministic: every hidden state belongs to exactly one symbol,
//! and the states of a symbol are its "clones". The transition matrix
//! is stored as an E x E grid of per-symbol-pair blocks, which keeps
//! inference O(M^2) per step in the clone count M instead of O(H^2)
//! in the total state count.

pub mod analysis;
pub mod datasets;
mod error;
pub mod inference;
pub mod learning;
pub mod model;

pub use error::{ChmmError, Result};

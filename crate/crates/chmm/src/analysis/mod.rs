//! Analysis tools: scrambled-text decoding, transition pruning, graph
//! export and the Kneser-Ney baseline.

mod graph;
mod kneser_ney;
mod prune;
mod scramble;

pub use graph::{edge_count, export_graph, GraphFormat};
pub use kneser_ney::{fit_kneser_ney, ngram_bps, NgramModel};
pub use prune::{prune_sweep, prune_transitions, PruneReport, PruneRow};
pub use scramble::{
    decode_scrambled, encode_scrambled, permutation_baseline_accuracy, scramble, word_boundaries,
    DecodeReport, ScrambledEncoding,
};

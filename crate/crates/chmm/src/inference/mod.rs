//! Exact inference: scaled forward/backward, sequence likelihood, BPS
//! and MAP decoding, under hard or soft evidence.

mod evidence;
mod forward;
mod viterbi;

pub use evidence::{EvidenceSequence, EvidenceStep, SupportIter};
pub use forward::{
    backward, bits_per_symbol, forward, posteriors, sequence_loglik, BackwardTrace, Bps,
    ForwardTrace, Message,
};
pub use viterbi::{viterbi, ViterbiPath};

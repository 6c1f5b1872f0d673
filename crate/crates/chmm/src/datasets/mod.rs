//! Synthetic sequence generators and the character-level text
//! pipeline.

mod bracket;
mod concat_ab;
mod text;
mod toy;

pub use bracket::{
    bracket_alphabet, bracket_generate, bracket_is_valid, BracketParams, BAR, CLOSE_PAREN,
    CLOSE_SQUARE, OPEN_PAREN, OPEN_SQUARE,
};
pub use concat_ab::{concat_ab_alphabet, concat_ab_generate};
pub use text::{normalize_text, number_to_words, preprocess_text, TextPipelineConfig, TextSplits};
pub use toy::{
    toy_alphabet, toy_generate, toy_generate_blocks, toy_ground_truth_model, AlphaMix,
    ToyFsmParams,
};

//! Clone layout, block-sparse transition model, clone allocation and
//! model serialization.

mod alphabet;
mod io;
mod layout;
mod transition;

pub use alphabet::Alphabet;
pub use io::{load_model, save_model};
pub use layout::{allocate_clones_by_frequency, allocate_clones_by_ngram, CloneLayout};
pub use transition::{init_random, BlockTransitionModel, ROW_SUM_TOL};

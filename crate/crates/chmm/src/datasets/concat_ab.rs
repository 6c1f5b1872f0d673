//! The ab/(ab) language: i.i.d. uniform concatenation of the units
//! "ab" and "(ab)".

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::Alphabet;

pub fn concat_ab_alphabet() -> Alphabet {
    Alphabet::new(["a", "b", "(", ")"]).expect("distinct symbols")
}

/// Generate exactly `n_symbols` symbols (the final unit may be cut).
pub fn concat_ab_generate(n_symbols: usize, seed: u64) -> Vec<usize> {
    let a = 0;
    let b = 1;
    let open = 2;
    let close = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_symbols + 3);
    while out.len() < n_symbols {
        if rng.gen_bool(0.5) {
            out.extend_from_slice(&[open, a, b, close]);
        } else {
            out.extend_from_slice(&[a, b]);
        }
    }
    out.truncate(n_symbols);
    out
}

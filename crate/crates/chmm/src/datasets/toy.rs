//! Toy FSM generator: blocks of length 3k over the alphabet
//! {0, ..., 4k+1}. Signal symbols {0,1,2,3} open and close each block;
//! the closer matches the opener (0 -> 1, 2 -> 3). Between them sit
//! noise groups whose identity is random but whose clone structure
//! carries the opener memory.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ChmmError, Result};
use crate::model::{Alphabet, BlockTransitionModel, CloneLayout};

/// Mixture over the noise-extension probability: alpha is drawn once
/// per block, `alpha_u` with probability `p_u`, else `alpha_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaMix {
    pub alpha_u: f64,
    pub alpha_d: f64,
    pub p_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyFsmParams {
    /// Number of stochastic "holes" per block; blocks have length 3k.
    pub k: usize,
    pub alpha_mix: Option<AlphaMix>,
    pub seed: u64,
}

impl ToyFsmParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            alpha_mix: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(ChmmError::InvalidParameter("k must be >= 2".into()));
        }
        if let Some(m) = &self.alpha_mix {
            for p in [m.alpha_u, m.alpha_d, m.p_u] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(ChmmError::InvalidParameter(format!(
                        "alpha-mix probability {p} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn toy_alphabet(k: usize) -> Alphabet {
    Alphabet::integers(4 * k + 2)
}

struct ToyRng {
    rng: ChaCha8Rng,
    /// Alpha-related draws live on a separate stream so alpha = 0
    /// reproduces the base generator byte for byte.
    alpha_rng: ChaCha8Rng,
}

impl ToyRng {
    fn new(seed: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(seed);
        let mut alpha_rng = ChaCha8Rng::seed_from_u64(seed);
        alpha_rng.set_stream(1);
        Self { rng, alpha_rng }
    }
}

fn push_block(out: &mut Vec<usize>, params: &ToyFsmParams, r: &mut ToyRng) -> Option<f64> {
    let k = params.k;
    let opener = if r.rng.gen_bool(0.5) { 2 } else { 0 };
    out.push(opener);
    let alpha = params.alpha_mix.map(|m| {
        if r.alpha_rng.gen_bool(m.p_u) {
            m.alpha_u
        } else {
            m.alpha_d
        }
    });
    for n in 1..k {
        loop {
            out.push(4 * n + usize::from(r.rng.gen_bool(0.5)));
            out.push(4 * n + 2);
            out.push(4 * n + 3);
            match alpha {
                Some(a) if a > 0.0 && r.alpha_rng.gen_bool(a) => continue,
                _ => break,
            }
        }
    }
    out.push(4 * k + usize::from(r.rng.gen_bool(0.5)));
    out.push(opener + 1);
    alpha
}

/// Generate whole blocks (length 3k each in the base variant, longer
/// when noise groups are geometrically extended by `alpha_mix`).
pub fn toy_generate_blocks(params: &ToyFsmParams, n_blocks: usize) -> Result<Vec<Vec<usize>>> {
    Ok(toy_generate_blocks_with_alpha(params, n_blocks)?
        .into_iter()
        .map(|(block, _)| block)
        .collect())
}

/// As [`toy_generate_blocks`], also reporting each block's drawn
/// noise-extension probability (`None` without `alpha_mix`).
pub fn toy_generate_blocks_with_alpha(
    params: &ToyFsmParams,
    n_blocks: usize,
) -> Result<Vec<(Vec<usize>, Option<f64>)>> {
    params.validate()?;
    let mut r = ToyRng::new(params.seed);
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let mut block = Vec::with_capacity(3 * params.k);
        let alpha = push_block(&mut block, params, &mut r);
        blocks.push((block, alpha));
    }
    Ok(blocks)
}

/// Generate a flat sequence, truncated to exactly `n_symbols`.
pub fn toy_generate(params: &ToyFsmParams, n_symbols: usize) -> Result<Vec<usize>> {
    params.validate()?;
    if n_symbols < 3 * params.k {
        return Err(ChmmError::InvalidParameter(format!(
            "n_symbols {} shorter than one block (3k = {})",
            n_symbols,
            3 * params.k
        )));
    }
    let mut out = Vec::with_capacity(n_symbols + 3 * params.k);
    let mut r = ToyRng::new(params.seed);
    while out.len() < n_symbols {
        push_block(&mut out, params, &mut r);
    }
    out.truncate(n_symbols);
    Ok(out)
}

/// The exact generating CHMM: one clone per signal symbol {0,1,2,3},
/// two clones per noise symbol (clone 0 remembers opener 0, clone 1
/// remembers opener 2).
pub fn toy_ground_truth_model(k: usize) -> Result<BlockTransitionModel> {
    if k < 2 {
        return Err(ChmmError::InvalidParameter("k must be >= 2".into()));
    }
    let alphabet = toy_alphabet(k);
    let e = alphabet.len();
    let mut clones = vec![1; e];
    for c in clones.iter_mut().skip(4) {
        *c = 2;
    }
    let layout = CloneLayout::new(clones)?;
    let mut blocks: Vec<Option<Vec<f64>>> = vec![None; e * e];
    let set = |blocks: &mut Vec<Option<Vec<f64>>>, i: usize, j: usize, b: Vec<f64>| {
        blocks[i * e + j] = Some(b);
    };
    // openers (clone c of the first noise group matches the opener)
    for (opener, c) in [(0usize, 0usize), (2, 1)] {
        // 1x2 block into each of the first choice symbols 4, 5
        let row = |target_clone: usize| {
            let mut b = vec![0.0; 2];
            b[target_clone] = 0.5;
            b
        };
        set(&mut blocks, opener, 4, row(c));
        set(&mut blocks, opener, 5, row(c));
    }
    // noise groups n = 1..k-1: choice -> 4n+2 -> 4n+3 -> next choice
    for n in 1..k {
        for choice in [4 * n, 4 * n + 1] {
            // 2x2 identity: clone memory is preserved
            set(&mut blocks, choice, 4 * n + 2, vec![1.0, 0.0, 0.0, 1.0]);
        }
        set(&mut blocks, 4 * n + 2, 4 * n + 3, vec![1.0, 0.0, 0.0, 1.0]);
        let next = if n + 1 < k { 4 * (n + 1) } else { 4 * k };
        for target in [next, next + 1] {
            set(&mut blocks, 4 * n + 3, target, vec![0.5, 0.0, 0.0, 0.5]);
        }
    }
    // final choice -> matched closer (2x1 blocks)
    for choice in [4 * k, 4 * k + 1] {
        set(&mut blocks, choice, 1, vec![1.0, 0.0]);
        set(&mut blocks, choice, 3, vec![0.0, 1.0]);
    }
    // closers -> next block's opener
    for closer in [1usize, 3] {
        for (opener, _) in [(0usize, 0usize), (2, 1)] {
            set(&mut blocks, closer, opener, vec![0.5]);
        }
    }
    let mut prior = vec![0.0; layout.total_states()];
    prior[layout.offset(0)] = 0.5;
    prior[layout.offset(2)] = 0.5;
    BlockTransitionModel::from_parts(alphabet, layout, blocks, prior)
}

//! Shared test helpers: an independent brute-force oracle that
//! enumerates every clone path of a small model, plus random fixture
//! generation.

#![allow(dead_code)]

use chmm::inference::{EvidenceSequence, EvidenceStep};
use chmm::model::{init_random, Alphabet, BlockTransitionModel, CloneLayout};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Everything the oracle can say about a fixture, computed by explicit
/// enumeration over all clone paths (exponential; fixtures stay tiny).
pub struct OracleResult {
    pub loglik: f64,
    /// gamma[n][state], normalized per step.
    pub gamma: Vec<Vec<f64>>,
    /// Expected transition counts, dense H x H: sum over n of xi(n).
    pub xi: Vec<f64>,
    /// gamma at the first step (unnormalized by path count, normalized
    /// by total probability) — equals gamma[0].
    pub best_log_score: f64,
    pub best_path: Vec<usize>,
}

fn step_weight(step: &EvidenceStep, symbol: usize) -> f64 {
    match step {
        EvidenceStep::Hard(s) => {
            if *s == symbol {
                1.0
            } else {
                0.0
            }
        }
        EvidenceStep::Soft(w) => w
            .iter()
            .find(|(s, _)| *s == symbol)
            .map(|(_, p)| *p)
            .unwrap_or(0.0),
    }
}

pub fn oracle(model: &BlockTransitionModel, evidence: &EvidenceSequence) -> Option<OracleResult> {
    let layout = model.layout();
    let h = layout.total_states();
    let n = evidence.len();
    let dense = model.assemble_dense();
    let prior = model.prior();
    // states admissible at each step (weight > 0)
    let admissible: Vec<Vec<(usize, f64)>> = evidence
        .steps()
        .iter()
        .map(|step| {
            (0..h)
                .filter_map(|z| {
                    let w = step_weight(step, layout.symbol_of_state(z));
                    (w > 0.0).then_some((z, w))
                })
                .collect()
        })
        .collect();
    let mut total = 0.0_f64;
    let mut gamma = vec![vec![0.0; h]; n];
    let mut xi = vec![0.0; h * h];
    let mut best = f64::NEG_INFINITY;
    let mut best_path: Vec<usize> = Vec::new();
    let mut path = vec![0usize; n];

    fn recurse(
        depth: usize,
        weight: f64,
        admissible: &[Vec<(usize, f64)>],
        dense: &[f64],
        prior: &[f64],
        h: usize,
        path: &mut Vec<usize>,
        total: &mut f64,
        gamma: &mut [Vec<f64>],
        xi: &mut [f64],
        best: &mut f64,
        best_path: &mut Vec<usize>,
    ) {
        if depth == admissible.len() {
            *total += weight;
            for (step, &z) in path.iter().enumerate() {
                gamma[step][z] += weight;
            }
            for w in path.windows(2) {
                xi[w[0] * h + w[1]] += weight;
            }
            let log = weight.ln();
            // strict > keeps the lexicographically first (lowest state
            // index) maximizer, matching the decoder's tie-break
            if log > *best {
                *best = log;
                *best_path = path.clone();
            }
            return;
        }
        for &(z, w) in &admissible[depth] {
            let step_w = if depth == 0 {
                prior[z] * w
            } else {
                dense[path[depth - 1] * h + z] * w
            };
            if step_w == 0.0 {
                continue;
            }
            path[depth] = z;
            recurse(
                depth + 1,
                weight * step_w,
                admissible,
                dense,
                prior,
                h,
                path,
                total,
                gamma,
                xi,
                best,
                best_path,
            );
        }
    }
    recurse(
        0, 1.0, &admissible, &dense, prior, h, &mut path, &mut total, &mut gamma, &mut xi,
        &mut best, &mut best_path,
    );
    if total == 0.0 {
        return None;
    }
    for step in gamma.iter_mut() {
        for v in step.iter_mut() {
            *v /= total;
        }
    }
    for v in xi.iter_mut() {
        *v /= total;
    }
    Some(OracleResult {
        loglik: total.ln(),
        gamma,
        xi,
        best_log_score: best,
        best_path,
    })
}

/// Random small fixture: alphabet of `e` symbols, up to `max_clones`
/// clones each, full-support random model, and a length-`n` evidence
/// sequence mixing hard and soft steps.
pub fn random_fixture(
    seed: u64,
    e: usize,
    max_clones: usize,
    n: usize,
) -> (BlockTransitionModel, EvidenceSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = Alphabet::integers(e);
    let clones: Vec<usize> = (0..e).map(|_| rng.gen_range(1..=max_clones)).collect();
    let layout = CloneLayout::new(clones).unwrap();
    let model = init_random(&alphabet, &layout, rng.gen(), None).unwrap();
    let steps: Vec<EvidenceStep> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) || e < 2 {
                EvidenceStep::Hard(rng.gen_range(0..e))
            } else {
                // soft step over a random 2-symbol support
                let a = rng.gen_range(0..e);
                let mut b = rng.gen_range(0..e);
                while b == a {
                    b = rng.gen_range(0..e);
                }
                let p = rng.gen_range(0.05..0.95);
                EvidenceStep::Soft(vec![(a, p), (b, 1.0 - p)])
            }
        })
        .collect();
    let evidence = EvidenceSequence::new(steps, e).unwrap();
    (model, evidence)
}

/// Sample an emitted-symbol sequence from the model's own generative
/// process (prior, then transition rows).
pub fn sample_sequence(model: &BlockTransitionModel, len: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = model.layout();
    let h = layout.total_states();
    let dense = model.assemble_dense();
    let draw = |weights: &[f64], rng: &mut ChaCha8Rng| -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = rng.gen_range(0.0..total);
        for (i, &w) in weights.iter().enumerate() {
            u -= w;
            if u <= 0.0 {
                return i;
            }
        }
        weights.len() - 1
    };
    let mut state = draw(model.prior(), &mut rng);
    let mut out = Vec::with_capacity(len);
    out.push(layout.symbol_of_state(state));
    while out.len() < len {
        state = draw(&dense[state * h..(state + 1) * h], &mut rng);
        out.push(layout.symbol_of_state(state));
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Dense H x H view of a `SufficientStats` xi accumulator.
pub fn xi_dense(stats: &chmm::learning::SufficientStats) -> Vec<f64> {
    let layout = stats.layout();
    let h = layout.total_states();
    let e = layout.num_symbols();
    let mut out = vec![0.0; h * h];
    for i in 0..e {
        for j in 0..e {
            if let Some(block) = stats.xi_block(i, j) {
                let mj = layout.clones_of(j);
                for (u, row) in block.chunks_exact(mj).enumerate() {
                    let base = (layout.offset(i) + u) * h + layout.offset(j);
                    out[base..base + mj].copy_from_slice(row);
                }
            }
        }
    }
    out
}

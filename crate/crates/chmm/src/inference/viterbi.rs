//! MAP state decoding under hard or soft evidence.

use crate::error::{ChmmError, Result};
use crate::inference::EvidenceSequence;
use crate::model::BlockTransitionModel;

/// Decoded MAP path: global hidden-state indices, their emitted symbols,
/// and the max-path log probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiPath {
    pub states: Vec<usize>,
    pub symbols: Vec<usize>,
    pub log_score: f64,
}

/// Max-product decoding in log domain, restricted to each step's
/// evidence support. Ties break toward the lowest state index.
pub fn viterbi(model: &BlockTransitionModel, evidence: &EvidenceSequence) -> Result<ViterbiPath> {
    if evidence.is_empty() {
        return Err(ChmmError::EmptyInput("evidence sequence".into()));
    }
    let layout = model.layout();
    let e = model.num_symbols();

    // per step: flat list of (global_state, score, backpointer into prev list)
    let mut states_per_step: Vec<Vec<usize>> = Vec::with_capacity(evidence.len());
    let mut backptrs: Vec<Vec<usize>> = Vec::with_capacity(evidence.len());
    let mut scores: Vec<f64> = Vec::new();

    for n in 0..evidence.len() {
        let mut step_states = Vec::new();
        let mut step_scores = Vec::new();
        let mut step_back = Vec::new();
        for (j, w) in evidence.step(n).support() {
            if j >= e {
                return Err(ChmmError::InvalidEvidence(format!(
                    "step {n}: symbol {j} out of range (E = {e})"
                )));
            }
            let log_w = w.ln();
            let rj = layout.range(j);
            let mj = rj.len();
            for v in 0..mj {
                let (best, from) = if n == 0 {
                    (model.prior()[rj.start + v].ln(), usize::MAX)
                } else {
                    let mut best = f64::NEG_INFINITY;
                    let mut from = usize::MAX;
                    for (k, &prev_state) in states_per_step[n - 1].iter().enumerate() {
                        let ps = scores[k];
                        if ps == f64::NEG_INFINITY {
                            continue;
                        }
                        let i = layout.symbol_of_state(prev_state);
                        if let Some(block) = model.block(i, j) {
                            let u = prev_state - layout.offset(i);
                            let t = block[u * mj + v];
                            if t > 0.0 {
                                let cand = ps + t.ln();
                                if cand > best {
                                    best = cand;
                                    from = k;
                                }
                            }
                        }
                    }
                    (best, from)
                };
                step_states.push(rj.start + v);
                step_scores.push(best + log_w);
                step_back.push(from);
            }
        }
        if step_scores.iter().all(|&s| s == f64::NEG_INFINITY) {
            return Err(ChmmError::ImpossibleSequence { index: n });
        }
        states_per_step.push(step_states);
        backptrs.push(step_back);
        scores = step_scores;
    }

    // argmax at the last step, lowest state index wins ties
    let last = states_per_step.len() - 1;
    let mut best_k = 0;
    for k in 1..scores.len() {
        let better = scores[k] > scores[best_k]
            || (scores[k] == scores[best_k]
                && states_per_step[last][k] < states_per_step[last][best_k]);
        if better {
            best_k = k;
        }
    }
    let log_score = scores[best_k];
    if log_score == f64::NEG_INFINITY {
        return Err(ChmmError::ImpossibleSequence { index: last });
    }

    let mut states = vec![0usize; evidence.len()];
    let mut k = best_k;
    for n in (0..evidence.len()).rev() {
        states[n] = states_per_step[n][k];
        k = backptrs[n][k];
    }
    let symbols = states.iter().map(|&h| layout.symbol_of_state(h)).collect();
    Ok(ViterbiPath {
        states,
        symbols,
        log_score,
    })
}

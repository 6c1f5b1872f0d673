//! Batch Baum-Welch over one or more training sequences.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{ChmmError, Result};
use crate::inference::EvidenceSequence;
use crate::learning::{e_step, m_step_with_support, EmConfig, StopReason, SufficientStats, TrainReport};
use crate::model::{init_random, Alphabet, BlockTransitionModel, CloneLayout};

/// E-step over a corpus of sequences, statistics merged. Parallel over
/// sequences when the `parallel` feature is enabled.
pub fn e_step_corpus(
    model: &BlockTransitionModel,
    sequences: &[Vec<usize>],
) -> Result<(SufficientStats, f64)> {
    if sequences.is_empty() {
        return Err(ChmmError::EmptyInput("training corpus".into()));
    }
    #[cfg(feature = "parallel")]
    {
        let per_seq: Vec<(SufficientStats, f64)> = sequences
            .par_iter()
            .enumerate()
            .map(|(index, seq)| {
                e_step(model, &EvidenceSequence::hard(seq))
                    .map_err(|_| ChmmError::ImpossibleSequence { index })
            })
            .collect::<Result<_>>()?;
        Ok(reduce_stats(model.layout(), per_seq))
    }
    #[cfg(not(feature = "parallel"))]
    {
        e_step_corpus_sequential(model, sequences)
    }
}

/// Sequential reference path; also the benchmark baseline for the
/// parallel E-step.
pub fn e_step_corpus_sequential(
    model: &BlockTransitionModel,
    sequences: &[Vec<usize>],
) -> Result<(SufficientStats, f64)> {
    if sequences.is_empty() {
        return Err(ChmmError::EmptyInput("training corpus".into()));
    }
    let per_seq: Vec<(SufficientStats, f64)> = sequences
        .iter()
        .enumerate()
        .map(|(index, seq)| {
            e_step(model, &EvidenceSequence::hard(seq))
                .map_err(|_| ChmmError::ImpossibleSequence { index })
        })
        .collect::<Result<_>>()?;
    Ok(reduce_stats(model.layout(), per_seq))
}

fn reduce_stats(
    layout: &CloneLayout,
    per_seq: Vec<(SufficientStats, f64)>,
) -> (SufficientStats, f64) {
    let mut it = per_seq.into_iter();
    let (mut stats, mut loglik) = it.next().unwrap_or_else(|| {
        (SufficientStats::zeros(layout), 0.0)
    });
    for (s, ll) in it {
        stats.merge(&s);
        loglik += ll;
    }
    (stats, loglik)
}

/// Fit by alternating merged E-steps and M-steps until the relative
/// likelihood gain drops below `rel_tol` or `max_iters` is reached.
/// The grid support is fixed by the random initialization (full unless
/// restricted) so evaluation-time smoothing can cover unvisited pairs.
pub fn fit_batch_em(
    alphabet: &Alphabet,
    layout: &CloneLayout,
    sequences: &[Vec<usize>],
    config: &EmConfig,
) -> Result<(BlockTransitionModel, TrainReport)> {
    let model = init_random(alphabet, layout, config.seed, None)?;
    fit_batch_em_from(model, sequences, config)
}

/// Batch EM continuing from an existing model.
pub fn fit_batch_em_from(
    mut model: BlockTransitionModel,
    sequences: &[Vec<usize>],
    config: &EmConfig,
) -> Result<(BlockTransitionModel, TrainReport)> {
    config.validate()?;
    let alphabet = model.alphabet().clone();
    let presence = model.presence();
    let n_symbols: usize = sequences.iter().map(Vec::len).sum();
    let mut report = TrainReport::new(StopReason::MaxIters);
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..config.max_iters {
        let (stats, loglik) = e_step_corpus(&model, sequences)?;
        report.push(loglik, n_symbols, None);
        model = m_step_with_support(&stats, &alphabet, &presence)?;
        if prev_ll.is_finite() {
            let gain = (loglik - prev_ll) / prev_ll.abs().max(f64::MIN_POSITIVE);
            if gain.abs() < config.rel_tol {
                report.stop_reason = StopReason::Converged;
                break;
            }
        }
        prev_ll = loglik;
    }
    Ok((model, report))
}

//! Online (incremental) EM over a single long sequence.
//!
//! The sequence is cut into batches. Batch 0 covers positions
//! `[0, bs)`; every later batch starts one position early, at
//! `[b*bs - 1, (b+1)*bs)`, so the transition that straddles a batch
//! boundary is counted exactly once, by the later batch. The forward
//! pass restarts from the prior at each batch.
//!
//! Accumulated statistics follow the recursion
//! `A <- lambda * A + (1 - lambda) * S_batch`, and the transition
//! model is re-normalized from `A` every `update_every` batches.
//!
//! Batch starts are mid-sequence, so their first symbol carries no
//! information about the initial distribution: the working model keeps
//! a uniform prior throughout, and the returned model does too.

use crate::error::Result;
use crate::inference::EvidenceSequence;
use crate::learning::{
    e_step, m_step_with_support, OnlineEmConfig, StopReason, SufficientStats, TrainReport,
};
use crate::model::{init_random, Alphabet, BlockTransitionModel, CloneLayout};

/// Half-open batch windows over a sequence of length `n`.
pub fn batch_windows(n: usize, batch_size: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut b = 0;
    loop {
        let start = if b == 0 { 0 } else { b * batch_size - 1 };
        if start + 1 >= n {
            break;
        }
        let end = ((b + 1) * batch_size).min(n);
        out.push((start, end));
        if end == n {
            break;
        }
        b += 1;
    }
    out
}

/// Train from a fresh random initialization.
pub fn fit_online_em(
    alphabet: &Alphabet,
    layout: &CloneLayout,
    sequence: &[usize],
    config: &OnlineEmConfig,
    seed: u64,
) -> Result<(BlockTransitionModel, TrainReport)> {
    let model = init_random(alphabet, layout, seed, None)?;
    fit_online_em_with(model, sequence, config, |_, _| true)
}

/// Train from an existing model, invoking `on_epoch` after every epoch
/// with the current model and the 0-based epoch index. Return `false`
/// from the callback to stop early.
pub fn fit_online_em_with(
    mut model: BlockTransitionModel,
    sequence: &[usize],
    config: &OnlineEmConfig,
    mut on_epoch: impl FnMut(&BlockTransitionModel, usize) -> bool,
) -> Result<(BlockTransitionModel, TrainReport)> {
    config.validate()?;
    let alphabet = model.alphabet().clone();
    let presence = model.presence();
    let uniform = vec![1.0 / model.total_states() as f64; model.total_states()];
    model = model.with_prior(uniform.clone())?;
    let windows = batch_windows(sequence.len(), config.batch_size);
    let mut acc = SufficientStats::zeros(model.layout());
    let mut report = TrainReport::new(StopReason::MaxIters);
    for epoch in 0..config.epochs {
        let mut epoch_ll = 0.0;
        let mut since_update = 0;
        for &(start, end) in &windows {
            let evidence = EvidenceSequence::hard(&sequence[start..end]);
            let (stats, ll) = e_step(&model, &evidence)?;
            epoch_ll += ll;
            acc.scale(config.lambda);
            acc.add_scaled(&stats, 1.0 - config.lambda);
            since_update += 1;
            if since_update == config.update_every {
                model = m_step_with_support(&acc, &alphabet, &presence)?
                    .with_prior(uniform.clone())?;
                since_update = 0;
            }
        }
        if since_update != 0 {
            model = m_step_with_support(&acc, &alphabet, &presence)?
                .with_prior(uniform.clone())?;
        }
        report.push(epoch_ll, sequence.len(), None);
        if !on_epoch(&model, epoch) {
            report.stop_reason = StopReason::EarlyStop;
            break;
        }
    }
    Ok((model, report))
}

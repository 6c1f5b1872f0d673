//! Two-phase training with validation-based early stopping: It1 epochs
//! of online EM followed by It2 iterations of batch EM, both counts
//! chosen to minimize validation BPS, then a retrain on train +
//! validation with the selected counts.

use crate::error::{ChmmError, Result};
use crate::inference::{bits_per_symbol, EvidenceSequence};
use crate::learning::{
    fit_batch_em_from, fit_online_em_with, EmConfig, OnlineEmConfig, StopReason, TrainReport,
};
use crate::model::{init_random, Alphabet, BlockTransitionModel, CloneLayout};

fn validation_bps(
    model: &BlockTransitionModel,
    validation: &EvidenceSequence,
    floor: f64,
) -> Result<f64> {
    let eval = model.smoothed_for_eval(floor);
    Ok(bits_per_symbol(&eval, validation)?.value)
}

pub fn fit_with_early_stopping(
    alphabet: &Alphabet,
    layout: &CloneLayout,
    train: &[usize],
    validation: &[usize],
    online_config: &OnlineEmConfig,
    em_config: &EmConfig,
) -> Result<(BlockTransitionModel, TrainReport)> {
    if validation.is_empty() {
        return Err(ChmmError::EmptyValidation);
    }
    if train.is_empty() {
        return Err(ChmmError::EmptyInput("training sequence".into()));
    }
    online_config.validate()?;
    em_config.validate()?;
    let val_evidence = EvidenceSequence::hard(validation);
    let floor = em_config.smoothing_floor;

    // phase A: online EM on train, snapshot the epoch with the best
    // validation BPS
    let init = init_random(alphabet, layout, em_config.seed, None)?;
    let mut val_trace: Vec<f64> = Vec::new();
    let mut best_online: Option<(usize, f64, BlockTransitionModel)> = None;
    let mut callback_err = None;
    let (_, mut report) = fit_online_em_with(init, train, online_config, |model, epoch| {
        match validation_bps(model, &val_evidence, floor) {
            Ok(v) => {
                val_trace.push(v);
                if best_online.as_ref().map_or(true, |(_, b, _)| v < *b) {
                    best_online = Some((epoch + 1, v, model.clone()));
                }
                true
            }
            Err(e) => {
                callback_err = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = callback_err {
        return Err(e);
    }
    let (it1, mut best_bps, snapshot) = best_online.expect("at least one epoch ran");

    // phase B: batch EM from the snapshot, one iteration at a time
    let mut it2 = 0;
    let mut probe = snapshot;
    let step = EmConfig {
        max_iters: 1,
        rel_tol: 0.0,
        ..*em_config
    };
    for iter in 1..=em_config.max_iters {
        let (next, _) = fit_batch_em_from(probe, &[train.to_vec()], &step)?;
        let v = validation_bps(&next, &val_evidence, floor)?;
        val_trace.push(v);
        if v < best_bps {
            best_bps = v;
            it2 = iter;
        }
        probe = next;
    }

    // phase C: retrain on train + validation with the selected counts
    let mut combined = train.to_vec();
    combined.extend_from_slice(validation);
    let retrain_online = OnlineEmConfig {
        epochs: it1,
        ..*online_config
    };
    let init = init_random(alphabet, layout, em_config.seed, None)?;
    let (mut final_model, _) =
        fit_online_em_with(init, &combined, &retrain_online, |_, _| true)?;
    if it2 > 0 {
        let batch_cfg = EmConfig {
            max_iters: it2,
            rel_tol: 0.0,
            ..*em_config
        };
        let (m, _) = fit_batch_em_from(final_model, &[combined], &batch_cfg)?;
        final_model = m;
    }

    report.stop_reason = StopReason::EarlyStop;
    report.selected_iters = Some((it1, it2));
    report.val_bps = val_trace.iter().copied().map(Some).collect();
    Ok((final_model, report))
}

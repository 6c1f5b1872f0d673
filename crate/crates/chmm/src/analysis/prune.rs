//! Transition sparsification: zero entries below a threshold and
//! measure the BPS cost on held-out data.

use std::io::Write;

use crate::error::Result;
use crate::inference::{bits_per_symbol, EvidenceSequence};
use crate::model::BlockTransitionModel;

/// Zero all in-support entries `< threshold` and renormalize each row.
/// A row losing all its mass becomes uniform over its previously
/// present successor entries. Block presence is unchanged.
pub fn prune_transitions(model: &BlockTransitionModel, threshold: f64) -> BlockTransitionModel {
    if threshold <= 0.0 {
        return model.clone();
    }
    let layout = model.layout().clone();
    let e = model.num_symbols();
    let h = layout.total_states();
    // per-state row masses after thresholding
    let mut mass = vec![0.0; h];
    let mut row_support = vec![0usize; h];
    for (i, j) in model.present_blocks() {
        let block = model.block(i, j).unwrap();
        let mj = layout.clones_of(j);
        for (u, row) in block.chunks_exact(mj).enumerate() {
            let state = layout.offset(i) + u;
            row_support[state] += mj;
            mass[state] += row.iter().filter(|&&v| v >= threshold).sum::<f64>();
        }
    }
    let mut blocks: Vec<Option<Vec<f64>>> = vec![None; e * e];
    for (i, j) in model.present_blocks() {
        let block = model.block(i, j).unwrap();
        let mj = layout.clones_of(j);
        let mut out = Vec::with_capacity(block.len());
        for (u, row) in block.chunks_exact(mj).enumerate() {
            let state = layout.offset(i) + u;
            for &v in row {
                out.push(if mass[state] > 0.0 {
                    if v >= threshold {
                        v / mass[state]
                    } else {
                        0.0
                    }
                } else {
                    1.0 / row_support[state] as f64
                });
            }
        }
        blocks[i * e + j] = Some(out);
    }
    BlockTransitionModel::from_parts(model.alphabet().clone(), layout, blocks, model.prior().to_vec())
        .expect("pruned rows renormalized")
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneRow {
    pub threshold: f64,
    /// Fraction of in-support entries that are zero after pruning.
    pub fraction_zeroed: f64,
    pub bps: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PruneReport {
    pub rows: Vec<PruneRow>,
}

impl PruneReport {
    /// CSV: `threshold,fraction_zeroed,bps`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "threshold,fraction_zeroed,bps")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.threshold, r.fraction_zeroed, r.bps)?;
        }
        Ok(())
    }
}

fn fraction_zeroed(model: &BlockTransitionModel) -> f64 {
    let mut total = 0usize;
    let mut zero = 0usize;
    for (i, j) in model.present_blocks() {
        for &v in model.block(i, j).unwrap() {
            total += 1;
            if v == 0.0 {
                zero += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        zero as f64 / total as f64
    }
}

/// Prune at each threshold and score on `eval` with an `eps_eval`
/// smoothing floor (pass 0.0 to score the raw pruned model).
pub fn prune_sweep(
    model: &BlockTransitionModel,
    thresholds: &[f64],
    eval: &EvidenceSequence,
    eps_eval: f64,
) -> Result<(Vec<BlockTransitionModel>, PruneReport)> {
    let mut report = PruneReport::default();
    let mut models = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let pruned = prune_transitions(model, t);
        let bps = bits_per_symbol(&pruned.smoothed_for_eval(eps_eval), eval)?.value;
        report.rows.push(PruneRow {
            threshold: t,
            fraction_zeroed: fraction_zeroed(&pruned),
            bps,
        });
        models.push(pruned);
    }
    Ok((models, report))
}

//! Expected sufficient statistics and the E/M steps of block Baum-Welch.

use crate::error::{ChmmError, Result};
use crate::inference::{forward, EvidenceSequence, Message};
use crate::model::{Alphabet, BlockTransitionModel, CloneLayout};

/// Accumulated posterior transition counts (xi) per symbol-pair block,
/// plus the initial-state posterior (gamma(1)) accumulator. Mergeable
/// across workers by elementwise addition.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    layout: CloneLayout,
    xi: Vec<Option<Vec<f64>>>,
    gamma1: Vec<f64>,
}

impl SufficientStats {
    pub fn zeros(layout: &CloneLayout) -> Self {
        let e = layout.num_symbols();
        Self {
            layout: layout.clone(),
            xi: vec![None; e * e],
            gamma1: vec![0.0; layout.total_states()],
        }
    }

    pub fn layout(&self) -> &CloneLayout {
        &self.layout
    }

    pub fn xi_block(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.xi[i * self.layout.num_symbols() + j].as_deref()
    }

    pub fn gamma1(&self) -> &[f64] {
        &self.gamma1
    }

    fn xi_block_mut(&mut self, i: usize, j: usize) -> &mut Vec<f64> {
        let e = self.layout.num_symbols();
        let size = self.layout.clones_of(i) * self.layout.clones_of(j);
        self.xi[i * e + j].get_or_insert_with(|| vec![0.0; size])
    }

    /// Elementwise addition; associative and commutative.
    pub fn merge(&mut self, other: &SufficientStats) {
        assert_eq!(self.layout, other.layout, "stats layouts differ");
        for (k, ob) in other.xi.iter().enumerate() {
            if let Some(ob) = ob {
                match &mut self.xi[k] {
                    Some(sb) => {
                        for (s, o) in sb.iter_mut().zip(ob) {
                            *s += o;
                        }
                    }
                    None => self.xi[k] = Some(ob.clone()),
                }
            }
        }
        for (g, o) in self.gamma1.iter_mut().zip(&other.gamma1) {
            *g += o;
        }
    }

    /// Multiply every accumulator by `f` (exponential forgetting).
    pub fn scale(&mut self, f: f64) {
        for b in self.xi.iter_mut().flatten() {
            for x in b {
                *x *= f;
            }
        }
        for g in &mut self.gamma1 {
            *g *= f;
        }
    }

    /// `self += f * other`.
    pub fn add_scaled(&mut self, other: &SufficientStats, f: f64) {
        assert_eq!(self.layout, other.layout, "stats layouts differ");
        for (k, ob) in other.xi.iter().enumerate() {
            if let Some(ob) = ob {
                match &mut self.xi[k] {
                    Some(sb) => {
                        for (s, o) in sb.iter_mut().zip(ob) {
                            *s += f * o;
                        }
                    }
                    None => self.xi[k] = Some(ob.iter().map(|&x| f * x).collect()),
                }
            }
        }
        for (g, o) in self.gamma1.iter_mut().zip(&other.gamma1) {
            *g += f * o;
        }
    }

    pub fn total_xi_mass(&self) -> f64 {
        self.xi
            .iter()
            .flatten()
            .map(|b| b.iter().sum::<f64>())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_xi_mass() == 0.0 && self.gamma1.iter().all(|&g| g == 0.0)
    }
}

/// Posterior expected counts for one sequence.
///
/// Runs the scaled forward pass, then a backward sweep that accumulates
/// `xi_ij(n) = alpha(n) ∘ T(i,j) ∘ w_{n+1} beta(n+1) / c_{n+1}` on the
/// fly. `gamma1` receives the (already normalized) initial-state
/// posterior. The returned log-likelihood matches `forward`.
pub fn e_step(
    model: &BlockTransitionModel,
    evidence: &EvidenceSequence,
) -> Result<(SufficientStats, f64)> {
    let fwd = forward(model, evidence)?;
    if fwd.impossible {
        return Err(ChmmError::ImpossibleSequence { index: 0 });
    }
    let layout = model.layout();
    let n_steps = evidence.len();
    let mut stats = SufficientStats::zeros(layout);

    // beta(N) under the forward-scaler convention: ones on the support,
    // so that alpha_hat(n) . beta_hat(n) = 1 for every n.
    let mut beta = Message {
        segs: evidence
            .step(n_steps - 1)
            .support()
            .map(|(i, _)| (i, vec![1.0; layout.clones_of(i)]))
            .collect(),
    };

    for n in (0..n_steps.saturating_sub(1)).rev() {
        let inv_c = (-fwd.log_scalers[n + 1]).exp();
        let alpha = &fwd.alphas[n];
        let mut beta_prev_segs: Vec<(usize, Vec<f64>)> = Vec::with_capacity(alpha.segs.len());
        for (i, alpha_vals) in &alpha.segs {
            let i = *i;
            let mi = layout.clones_of(i);
            let mut beta_out = vec![0.0; mi];
            for (j, wj) in evidence.step(n + 1).support() {
                let Some(block) = model.block(i, j) else {
                    continue;
                };
                let beta_next = beta.seg(j).expect("beta covers support");
                let mj = beta_next.len();
                let xi = stats.xi_block_mut(i, j);
                let wc = wj * inv_c;
                for u in 0..mi {
                    let a = alpha_vals[u];
                    let row = &block[u * mj..(u + 1) * mj];
                    let xrow = &mut xi[u * mj..(u + 1) * mj];
                    let mut acc = 0.0;
                    if a > 0.0 {
                        let awc = a * wc;
                        for v in 0..mj {
                            let p = row[v] * beta_next[v];
                            acc += p;
                            xrow[v] += awc * p;
                        }
                    } else {
                        for v in 0..mj {
                            acc += row[v] * beta_next[v];
                        }
                    }
                    beta_out[u] += wc * acc;
                }
            }
            beta_prev_segs.push((i, beta_out));
        }
        beta = Message {
            segs: beta_prev_segs,
        };
    }

    // gamma(1) = alpha_hat(1) ∘ beta_hat(1); sums to 1 by construction
    for (i, alpha_vals) in &fwd.alphas[0].segs {
        let beta_vals = beta.seg(*i).expect("beta covers support");
        let off = layout.offset(*i);
        for (u, (&a, &b)) in alpha_vals.iter().zip(beta_vals).enumerate() {
            stats.gamma1[off + u] += a * b;
        }
    }
    Ok((stats, fwd.loglik))
}

/// Count-ratio M-step: normalize each row of the accumulated xi blocks,
/// and the prior from gamma1. Block presence in the output follows the
/// statistics themselves; use [`m_step_with_support`] to keep a fixed
/// grid support across EM iterations.
pub fn m_step(stats: &SufficientStats, alphabet: &Alphabet) -> Result<BlockTransitionModel> {
    let e = stats.layout().num_symbols();
    let presence: Vec<bool> = (0..e * e)
        .map(|k| stats.xi[k].is_some())
        .collect();
    m_step_with_support(stats, alphabet, &presence)
}

/// M-step with an explicit grid support. Rows with zero accumulated mass
/// are set to uniform over the row's entries within present blocks; such
/// rows carry zero posterior mass so training is unaffected.
pub fn m_step_with_support(
    stats: &SufficientStats,
    alphabet: &Alphabet,
    presence: &[bool],
) -> Result<BlockTransitionModel> {
    let layout = stats.layout().clone();
    let e = layout.num_symbols();
    assert_eq!(presence.len(), e * e, "presence bitmap shape");
    if stats.is_zero() {
        return Err(ChmmError::ZeroStats);
    }
    for (k, b) in stats.xi.iter().enumerate() {
        if b.is_some() && !presence[k] {
            return Err(ChmmError::InvalidModel(format!(
                "stats block ({}, {}) outside the permitted support",
                k / e,
                k % e
            )));
        }
    }

    let mut blocks: Vec<Option<Vec<f64>>> = vec![None; e * e];
    for i in 0..e {
        let mi = layout.clones_of(i);
        let row_support: usize = (0..e)
            .filter(|&j| presence[i * e + j])
            .map(|j| layout.clones_of(j))
            .sum();
        if row_support == 0 {
            return Err(ChmmError::EmptySuccessorRow(i));
        }
        let mut row_mass = vec![0.0; mi];
        for j in 0..e {
            if let Some(b) = stats.xi_block(i, j) {
                let mj = layout.clones_of(j);
                for u in 0..mi {
                    row_mass[u] += b[u * mj..(u + 1) * mj].iter().sum::<f64>();
                }
            }
        }
        for j in 0..e {
            if !presence[i * e + j] {
                continue;
            }
            let mj = layout.clones_of(j);
            let src = stats.xi_block(i, j);
            let mut out = vec![0.0; mi * mj];
            for u in 0..mi {
                if row_mass[u] > 0.0 {
                    if let Some(src) = src {
                        let inv = 1.0 / row_mass[u];
                        for v in 0..mj {
                            out[u * mj + v] = src[u * mj + v] * inv;
                        }
                    }
                } else {
                    let p = 1.0 / row_support as f64;
                    out[u * mj..(u + 1) * mj].fill(p);
                }
            }
            blocks[i * e + j] = Some(out);
        }
    }

    let gsum: f64 = stats.gamma1.iter().sum();
    let prior: Vec<f64> = if gsum > 0.0 {
        stats.gamma1.iter().map(|&g| g / gsum).collect()
    } else {
        let h = layout.total_states();
        vec![1.0 / h as f64; h]
    };
    Ok(BlockTransitionModel::from_parts_unchecked(
        alphabet.clone(),
        layout,
        blocks,
        prior,
    ))
}

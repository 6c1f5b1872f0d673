//! Scaled forward/backward message passing.
//!
//! Messages are allocated only over the clone ranges present in each
//! step's evidence support, so the per-step cost stays `O(M_i M_j)`.
//! Each message is normalized to sum 1 and the log normalizers are
//! accumulated; the sequence log-likelihood is their sum.

use crate::error::{ChmmError, Result};
use crate::inference::{EvidenceSequence, EvidenceStep};
use crate::model::BlockTransitionModel;

/// A forward or backward message restricted to the evidence support of
/// its step: one dense segment per supported symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub segs: Vec<(usize, Vec<f64>)>,
}

impl Message {
    pub fn total(&self) -> f64 {
        self.segs.iter().map(|(_, v)| v.iter().sum::<f64>()).sum()
    }

    pub fn scale(&mut self, f: f64) {
        for (_, v) in &mut self.segs {
            for x in v {
                *x *= f;
            }
        }
    }

    pub fn seg(&self, symbol: usize) -> Option<&[f64]> {
        self.segs
            .iter()
            .find(|(i, _)| *i == symbol)
            .map(|(_, v)| v.as_slice())
    }

    /// Expand to a dense length-H vector.
    pub fn to_dense(&self, model: &BlockTransitionModel) -> Vec<f64> {
        let mut out = vec![0.0; model.total_states()];
        for (i, v) in &self.segs {
            let r = model.layout().range(*i);
            out[r].copy_from_slice(v);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Scaled forward messages, one per step; each sums to 1.
    pub alphas: Vec<Message>,
    /// Log of the per-step normalizers.
    pub log_scalers: Vec<f64>,
    /// `log P(x | model)`; `-inf` when the sequence is impossible.
    pub loglik: f64,
    pub impossible: bool,
}

#[derive(Debug, Clone)]
pub struct BackwardTrace {
    /// Self-scaled backward messages, one per step; each sums to 1.
    pub betas: Vec<Message>,
    pub log_scalers: Vec<f64>,
    pub loglik: f64,
    pub impossible: bool,
}

fn check_step(step: &EvidenceStep, num_symbols: usize, n: usize) -> Result<()> {
    for (i, _) in step.support() {
        if i >= num_symbols {
            return Err(ChmmError::InvalidEvidence(format!(
                "step {n}: symbol {i} out of range (E = {num_symbols})"
            )));
        }
    }
    Ok(())
}

/// First forward message: evidence-weighted prior sub-vectors.
fn alpha_init(model: &BlockTransitionModel, step: &EvidenceStep) -> Message {
    let segs = step
        .support()
        .map(|(i, w)| {
            let v: Vec<f64> = model.prior_of(i).iter().map(|&p| w * p).collect();
            (i, v)
        })
        .collect();
    Message { segs }
}

/// One unnormalized forward step: `a_{n+1}(j) = w_j * sum_i a_n(i)^T T(i, j)`.
fn alpha_step(model: &BlockTransitionModel, prev: &Message, step: &EvidenceStep) -> Message {
    let layout = model.layout();
    let segs = step
        .support()
        .map(|(j, w)| {
            let mj = layout.clones_of(j);
            let mut out = vec![0.0; mj];
            for (i, vals) in &prev.segs {
                if let Some(block) = model.block(*i, j) {
                    for (u, &a) in vals.iter().enumerate() {
                        if a > 0.0 {
                            let row = &block[u * mj..(u + 1) * mj];
                            for v in 0..mj {
                                out[v] += a * row[v];
                            }
                        }
                    }
                }
            }
            if w != 1.0 {
                for x in &mut out {
                    *x *= w;
                }
            }
            (j, out)
        })
        .collect();
    Message { segs }
}

/// Scaled forward pass storing all messages.
pub fn forward(model: &BlockTransitionModel, evidence: &EvidenceSequence) -> Result<ForwardTrace> {
    if evidence.is_empty() {
        return Err(ChmmError::EmptyInput("evidence sequence".into()));
    }
    let e = model.num_symbols();
    let n_steps = evidence.len();
    let mut alphas = Vec::with_capacity(n_steps);
    let mut log_scalers = Vec::with_capacity(n_steps);
    let mut loglik = 0.0;
    for n in 0..n_steps {
        let step = evidence.step(n);
        check_step(step, e, n)?;
        let mut msg = if n == 0 {
            alpha_init(model, step)
        } else {
            alpha_step(model, &alphas[n - 1], step)
        };
        let c = msg.total();
        if c <= 0.0 {
            return Ok(ForwardTrace {
                alphas,
                log_scalers,
                loglik: f64::NEG_INFINITY,
                impossible: true,
            });
        }
        msg.scale(1.0 / c);
        loglik += c.ln();
        log_scalers.push(c.ln());
        alphas.push(msg);
    }
    Ok(ForwardTrace {
        alphas,
        log_scalers,
        loglik,
        impossible: false,
    })
}

/// Streaming forward pass: log-likelihood only, O(M) memory.
/// Returns `(loglik, impossible)`.
pub fn sequence_loglik(
    model: &BlockTransitionModel,
    evidence: &EvidenceSequence,
) -> Result<(f64, bool)> {
    if evidence.is_empty() {
        return Err(ChmmError::EmptyInput("evidence sequence".into()));
    }
    let e = model.num_symbols();
    let mut prev: Option<Message> = None;
    let mut loglik = 0.0;
    for n in 0..evidence.len() {
        let step = evidence.step(n);
        check_step(step, e, n)?;
        let mut msg = match &prev {
            None => alpha_init(model, step),
            Some(p) => alpha_step(model, p, step),
        };
        let c = msg.total();
        if c <= 0.0 {
            return Ok((f64::NEG_INFINITY, true));
        }
        msg.scale(1.0 / c);
        loglik += c.ln();
        prev = Some(msg);
    }
    Ok((loglik, false))
}

/// One unnormalized backward step:
/// `b_n(i) = sum_j w_j T(i, j) b_{n+1}(j)`, over the support of step n.
fn beta_step(
    model: &BlockTransitionModel,
    next: &Message,
    step_n: &EvidenceStep,
    step_next: &EvidenceSequence,
    n: usize,
) -> Message {
    let layout = model.layout();
    let segs = step_n
        .support()
        .map(|(i, _)| {
            let mi = layout.clones_of(i);
            let mut out = vec![0.0; mi];
            for (j, wj) in step_next.step(n + 1).support() {
                if let Some(block) = model.block(i, j) {
                    let vals = next.seg(j).expect("next message covers its support");
                    let mj = vals.len();
                    for u in 0..mi {
                        let row = &block[u * mj..(u + 1) * mj];
                        let mut acc = 0.0;
                        for v in 0..mj {
                            acc += row[v] * vals[v];
                        }
                        out[u] += wj * acc;
                    }
                }
            }
            (i, out)
        })
        .collect();
    Message { segs }
}

/// Scaled backward pass with self-contained normalization. The final
/// message `beta(N)` is the unit vector on the last step's support
/// (normalized); the returned log-likelihood equals the forward one.
pub fn backward(model: &BlockTransitionModel, evidence: &EvidenceSequence) -> Result<BackwardTrace> {
    if evidence.is_empty() {
        return Err(ChmmError::EmptyInput("evidence sequence".into()));
    }
    let e = model.num_symbols();
    let n_steps = evidence.len();
    for n in 0..n_steps {
        check_step(evidence.step(n), e, n)?;
    }
    let mut betas: Vec<Message> = vec![Message { segs: Vec::new() }; n_steps];
    let mut log_scalers = vec![0.0; n_steps];
    let mut logscale = 0.0;

    let last = evidence.step(n_steps - 1);
    let mut msg = Message {
        segs: last
            .support()
            .map(|(i, _)| (i, vec![1.0; model.layout().clones_of(i)]))
            .collect(),
    };
    let c = msg.total();
    msg.scale(1.0 / c);
    logscale += c.ln();
    log_scalers[n_steps - 1] = c.ln();
    betas[n_steps - 1] = msg;

    for n in (0..n_steps - 1).rev() {
        let mut msg = beta_step(model, &betas[n + 1], evidence.step(n), evidence, n);
        let c = msg.total();
        if c <= 0.0 {
            return Ok(BackwardTrace {
                betas,
                log_scalers,
                loglik: f64::NEG_INFINITY,
                impossible: true,
            });
        }
        msg.scale(1.0 / c);
        logscale += c.ln();
        log_scalers[n] = c.ln();
        betas[n] = msg;
    }

    // fold in the prior and first-step evidence weights
    let mut head = 0.0;
    for (i, w) in evidence.step(0).support() {
        let beta = betas[0].seg(i).expect("beta covers support");
        for (p, b) in model.prior_of(i).iter().zip(beta) {
            head += w * p * b;
        }
    }
    let loglik = if head <= 0.0 {
        f64::NEG_INFINITY
    } else {
        head.ln() + logscale
    };
    Ok(BackwardTrace {
        betas,
        log_scalers,
        loglik,
        impossible: !head.is_finite() || head <= 0.0,
    })
}

/// Posterior state marginals `gamma(n) ∝ alpha(n) ∘ beta(n)`, each
/// normalized to sum 1, plus the sequence log-likelihood.
pub fn posteriors(
    model: &BlockTransitionModel,
    evidence: &EvidenceSequence,
) -> Result<(Vec<Message>, f64)> {
    let fwd = forward(model, evidence)?;
    if fwd.impossible {
        return Err(ChmmError::ImpossibleSequence { index: 0 });
    }
    let bwd = backward(model, evidence)?;
    let mut gammas = Vec::with_capacity(evidence.len());
    for (a, b) in fwd.alphas.iter().zip(&bwd.betas) {
        let mut segs: Vec<(usize, Vec<f64>)> = a
            .segs
            .iter()
            .map(|(i, av)| {
                let bv = b.seg(*i).expect("matching support");
                (*i, av.iter().zip(bv).map(|(x, y)| x * y).collect())
            })
            .collect();
        let tot: f64 = segs.iter().map(|(_, v)| v.iter().sum::<f64>()).sum();
        for (_, v) in &mut segs {
            for x in v {
                *x /= tot;
            }
        }
        gammas.push(Message { segs });
    }
    Ok((gammas, fwd.loglik))
}

/// Bits-per-symbol of a sequence under the model: `-loglik / (N ln 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bps {
    pub value: f64,
    pub impossible: bool,
}

pub fn bits_per_symbol(model: &BlockTransitionModel, evidence: &EvidenceSequence) -> Result<Bps> {
    let (loglik, impossible) = sequence_loglik(model, evidence)?;
    if impossible {
        return Ok(Bps {
            value: f64::INFINITY,
            impossible: true,
        });
    }
    Ok(Bps {
        value: -loglik / (evidence.len() as f64 * std::f64::consts::LN_2),
        impossible: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_random, Alphabet, CloneLayout};

    #[test]
    fn deterministic_chain_has_zero_bps() {
        let a = Alphabet::integers(1);
        let l = CloneLayout::new(vec![1]).unwrap();
        let m = init_random(&a, &l, 0, None).unwrap();
        let ev = EvidenceSequence::hard(&vec![0; 50]);
        let bps = bits_per_symbol(&m, &ev).unwrap();
        assert!(bps.value.abs() < 1e-12);
        let f = forward(&m, &ev).unwrap();
        assert_eq!(f.loglik, 0.0);
    }

    #[test]
    fn uniform_iid_model_has_log2e_bps() {
        // E = 4 symbols, 1 clone each, uniform rows: every symbol costs 2 bits
        let a = Alphabet::integers(4);
        let l = CloneLayout::uniform(4, 1).unwrap();
        let blocks = (0..16).map(|_| Some(vec![0.25])).collect();
        let m = crate::model::BlockTransitionModel::from_parts(
            a,
            l,
            blocks,
            vec![0.25; 4],
        )
        .unwrap();
        let ev = EvidenceSequence::hard(&[0, 3, 1, 2, 2, 0, 1]);
        let bps = bits_per_symbol(&m, &ev).unwrap();
        assert!((bps.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn impossible_sequence_flags_not_panics() {
        let a = Alphabet::integers(2);
        let l = CloneLayout::uniform(2, 1).unwrap();
        // only 0->0 and 1->1 possible
        let blocks = vec![Some(vec![1.0]), None, None, Some(vec![1.0])];
        let m =
            crate::model::BlockTransitionModel::from_parts(a, l, blocks, vec![0.5, 0.5]).unwrap();
        let ev = EvidenceSequence::hard(&[0, 1]);
        let f = forward(&m, &ev).unwrap();
        assert!(f.impossible);
        assert_eq!(f.loglik, f64::NEG_INFINITY);
        let bps = bits_per_symbol(&m, &ev).unwrap();
        assert!(bps.impossible && bps.value.is_infinite());
    }

    #[test]
    fn forward_and_backward_logliks_agree() {
        let a = Alphabet::integers(3);
        let l = CloneLayout::new(vec![2, 1, 2]).unwrap();
        let m = init_random(&a, &l, 5, None).unwrap();
        let ev = EvidenceSequence::hard(&[0, 2, 1, 1, 0, 2, 2]);
        let f = forward(&m, &ev).unwrap();
        let b = backward(&m, &ev).unwrap();
        assert!((f.loglik - b.loglik).abs() < 1e-10);
        for alpha in &f.alphas {
            assert!((alpha.total() - 1.0).abs() < 1e-9);
        }
        assert!((f.loglik - f.log_scalers.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn single_step_backward_is_support_unit_vector() {
        let a = Alphabet::integers(2);
        let l = CloneLayout::uniform(2, 2).unwrap();
        let m = init_random(&a, &l, 1, None).unwrap();
        let ev = EvidenceSequence::hard(&[1]);
        let b = backward(&m, &ev).unwrap();
        assert_eq!(b.betas.len(), 1);
        let seg = b.betas[0].seg(1).unwrap();
        // normalized unit vector over the 2 clones of symbol 1
        assert_eq!(seg, &[0.5, 0.5]);
        assert!(b.betas[0].seg(0).is_none());
    }

    #[test]
    fn posterior_marginals_normalize() {
        let a = Alphabet::integers(2);
        let l = CloneLayout::uniform(2, 2).unwrap();
        let m = init_random(&a, &l, 2, None).unwrap();
        let ev = EvidenceSequence::hard(&[0, 1, 1, 0]);
        let (gammas, _) = posteriors(&m, &ev).unwrap();
        for g in gammas {
            assert!((g.total() - 1.0).abs() < 1e-9);
        }
    }
}

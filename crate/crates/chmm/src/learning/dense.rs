//! Overcomplete dense-HMM baseline: standard Baum-Welch with a learned
//! emission matrix, no clone structure.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ChmmError, Result};
use crate::learning::{EmConfig, StopReason, TrainReport};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseHmm {
    pub num_states: usize,
    pub num_symbols: usize,
    /// Row-major H x H, rows sum to one.
    pub transition: Vec<f64>,
    /// Row-major H x E, rows sum to one.
    pub emission: Vec<f64>,
    pub prior: Vec<f64>,
}

impl DenseHmm {
    fn init_random(num_states: usize, num_symbols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw_rows = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
            let mut m = vec![0.0; rows * cols];
            for r in 0..rows {
                let row = &mut m[r * cols..(r + 1) * cols];
                let mut total = 0.0;
                for v in row.iter_mut() {
                    *v = rng.gen_range(0.1..1.0);
                    total += *v;
                }
                for v in row.iter_mut() {
                    *v /= total;
                }
            }
            m
        };
        let transition = draw_rows(num_states, num_states, &mut rng);
        let emission = draw_rows(num_states, num_symbols, &mut rng);
        let prior = vec![1.0 / num_states as f64; num_states];
        Self {
            num_states,
            num_symbols,
            transition,
            emission,
            prior,
        }
    }

    fn emit(&self, state: usize, symbol: usize) -> f64 {
        self.emission[state * self.num_symbols + symbol]
    }

    /// Scaled forward pass; returns per-step scaled alphas and log scalers.
    fn forward(&self, seq: &[usize]) -> Option<(Vec<Vec<f64>>, Vec<f64>, f64)> {
        let h = self.num_states;
        let mut alphas = Vec::with_capacity(seq.len());
        let mut log_scalers = Vec::with_capacity(seq.len());
        let mut loglik = 0.0;
        let mut alpha: Vec<f64> = (0..h).map(|s| self.prior[s] * self.emit(s, seq[0])).collect();
        for (n, &sym) in seq.iter().enumerate() {
            if n > 0 {
                let prev = alphas.last().unwrap() as &Vec<f64>;
                let mut next = vec![0.0; h];
                for (i, &a) in prev.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let row = &self.transition[i * h..(i + 1) * h];
                    for j in 0..h {
                        next[j] += a * row[j];
                    }
                }
                for (j, v) in next.iter_mut().enumerate() {
                    *v *= self.emit(j, sym);
                }
                alpha = next;
            }
            let c: f64 = alpha.iter().sum();
            if c <= 0.0 {
                return None;
            }
            for v in alpha.iter_mut() {
                *v /= c;
            }
            loglik += c.ln();
            log_scalers.push(c.ln());
            alphas.push(std::mem::take(&mut alpha));
            alpha = Vec::new();
        }
        Some((alphas, log_scalers, loglik))
    }

    pub fn sequence_loglik(&self, seq: &[usize]) -> Option<f64> {
        self.forward(seq).map(|(_, _, ll)| ll)
    }

    /// Bits per symbol over a corpus; `None` if any sequence has zero
    /// likelihood.
    pub fn bits_per_symbol(&self, sequences: &[Vec<usize>]) -> Option<f64> {
        let mut total = 0.0;
        let mut n = 0usize;
        for seq in sequences {
            total += self.sequence_loglik(seq)?;
            n += seq.len();
        }
        Some(-total / (n as f64 * std::f64::consts::LN_2))
    }

    /// Uniform-mixture floor on transitions and emissions for scoring
    /// held-out data.
    pub fn smoothed_for_eval(&self, eps: f64) -> Self {
        let mut out = self.clone();
        let h = self.num_states as f64;
        let e = self.num_symbols as f64;
        for v in out.transition.iter_mut() {
            *v = (1.0 - eps) * *v + eps / h;
        }
        for v in out.emission.iter_mut() {
            *v = (1.0 - eps) * *v + eps / e;
        }
        out
    }
}

/// Standard Baum-Welch for a dense HMM with `num_states` hidden states.
pub fn fit_dense_hmm(
    num_states: usize,
    num_symbols: usize,
    sequences: &[Vec<usize>],
    config: &EmConfig,
) -> Result<(DenseHmm, TrainReport)> {
    config.validate()?;
    if num_states == 0 || num_symbols == 0 {
        return Err(ChmmError::InvalidParameter(
            "num_states and num_symbols must be positive".into(),
        ));
    }
    if sequences.is_empty() || sequences.iter().any(Vec::is_empty) {
        return Err(ChmmError::EmptyInput("training corpus".into()));
    }
    for seq in sequences {
        if let Some(&s) = seq.iter().find(|&&s| s >= num_symbols) {
            return Err(ChmmError::UnknownSymbol(s.to_string()));
        }
    }
    let h = num_states;
    let e = num_symbols;
    let n_symbols: usize = sequences.iter().map(Vec::len).sum();
    let mut model = DenseHmm::init_random(h, e, config.seed);
    let mut report = TrainReport::new(StopReason::MaxIters);
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..config.max_iters {
        let mut xi = vec![0.0; h * h];
        let mut emit_counts = vec![0.0; h * e];
        let mut gamma1 = vec![0.0; h];
        let mut loglik = 0.0;
        for (index, seq) in sequences.iter().enumerate() {
            let (alphas, log_scalers, ll) = model
                .forward(seq)
                .ok_or(ChmmError::ImpossibleSequence { index })?;
            loglik += ll;
            let n = seq.len();
            let mut beta = vec![1.0; h];
            for step in (0..n).rev() {
                let alpha = &alphas[step];
                for s in 0..h {
                    emit_counts[s * e + seq[step]] += alpha[s] * beta[s];
                }
                if step == 0 {
                    for s in 0..h {
                        gamma1[s] += alpha[s] * beta[s];
                    }
                    break;
                }
                let sym = seq[step];
                let inv_c = (-log_scalers[step]).exp();
                let prev = &alphas[step - 1];
                let mut beta_prev = vec![0.0; h];
                for i in 0..h {
                    let row = &model.transition[i * h..(i + 1) * h];
                    let a = prev[i];
                    let mut acc = 0.0;
                    for j in 0..h {
                        let contrib = row[j] * model.emit(j, sym) * beta[j] * inv_c;
                        acc += contrib;
                        if a > 0.0 {
                            xi[i * h + j] += a * contrib;
                        }
                    }
                    beta_prev[i] = acc;
                }
                beta = beta_prev;
            }
        }
        report.push(loglik, n_symbols, None);
        // M-step
        for i in 0..h {
            let row = &mut xi[i * h..(i + 1) * h];
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                for v in row.iter_mut() {
                    *v /= total;
                }
            } else {
                row.fill(1.0 / h as f64);
            }
        }
        for s in 0..h {
            let row = &mut emit_counts[s * e..(s + 1) * e];
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                for v in row.iter_mut() {
                    *v /= total;
                }
            } else {
                row.fill(1.0 / e as f64);
            }
        }
        let g_total: f64 = gamma1.iter().sum();
        if g_total > 0.0 {
            for v in gamma1.iter_mut() {
                *v /= g_total;
            }
        } else {
            gamma1.fill(1.0 / h as f64);
        }
        model.transition = xi;
        model.emission = emit_counts;
        model.prior = gamma1;
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

use std::io::Write;

use crate::error::{ChmmError, Result};

/// Batch EM settings. `smoothing_floor` is applied at evaluation time
/// only: test BPS is computed on `(1-eps) T + eps U` over each row's
/// present blocks; training always uses the raw model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub smoothing_floor: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            rel_tol: 1e-6,
            seed: 0,
            smoothing_floor: 1e-5,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(ChmmError::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.smoothing_floor) {
            return Err(ChmmError::InvalidParameter(format!(
                "smoothing_floor {} outside [0, 1)",
                self.smoothing_floor
            )));
        }
        Ok(())
    }
}

/// Online EM settings: contiguous batches with exponentially discounted
/// statistics. `update_every` controls how many batches are absorbed
/// between transition-matrix refreshes (1 = refresh after every batch,
/// as in the online recursion; the matrix is always refreshed at epoch
/// end).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineEmConfig {
    pub batch_size: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub update_every: usize,
}

impl Default for OnlineEmConfig {
    fn default() -> Self {
        Self {
            batch_size: 400,
            lambda: 0.9,
            epochs: 100,
            update_every: 1,
        }
    }
}

impl OnlineEmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(ChmmError::InvalidParameter("batch_size must be >= 2".into()));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(ChmmError::InvalidParameter(format!(
                "lambda {} outside (0, 1)",
                self.lambda
            )));
        }
        if self.epochs < 1 || self.update_every < 1 {
            return Err(ChmmError::InvalidParameter(
                "epochs and update_every must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIters,
    EarlyStop,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::Converged => "converged",
            StopReason::MaxIters => "max_iters",
            StopReason::EarlyStop => "early_stop",
        };
        f.write_str(s)
    }
}

/// Per-iteration training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iters_run: usize,
    /// Train log-likelihood at the start of each iteration.
    pub train_loglik: Vec<f64>,
    /// Train BPS per iteration (same trace, in bits).
    pub train_bps: Vec<f64>,
    /// Validation BPS per iteration, when a validation set was supplied.
    pub val_bps: Vec<Option<f64>>,
    pub stop_reason: StopReason,
    /// Early stopping only: the selected (online epochs, batch iters).
    pub selected_iters: Option<(usize, usize)>,
}

impl TrainReport {
    pub fn new(stop_reason: StopReason) -> Self {
        Self {
            iters_run: 0,
            train_loglik: Vec::new(),
            train_bps: Vec::new(),
            val_bps: Vec::new(),
            stop_reason,
            selected_iters: None,
        }
    }

    pub fn push(&mut self, loglik: f64, n_symbols: usize, val_bps: Option<f64>) {
        self.iters_run += 1;
        self.train_loglik.push(loglik);
        self.train_bps
            .push(-loglik / (n_symbols as f64 * std::f64::consts::LN_2));
        self.val_bps.push(val_bps);
    }

    /// CSV with one row per iteration: `iteration,train_bps,val_bps`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "iteration,train_bps,val_bps")?;
        for i in 0..self.iters_run {
            let val = self.val_bps[i]
                .map(|v| v.to_string())
                .unwrap_or_default();
            writeln!(w, "{},{},{}", i + 1, self.train_bps[i], val)?;
        }
        Ok(())
    }
}

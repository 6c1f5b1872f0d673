//! Block-form Baum-Welch: batch EM, online EM with exponential
//! forgetting, early stopping, dense-HMM baseline and the
//! clone-splitting demonstrator.

mod batch;
mod config;
mod dense;
mod early_stop;
mod online;
mod split_demo;
mod stats;

pub use batch::{e_step_corpus, e_step_corpus_sequential, fit_batch_em, fit_batch_em_from};
pub use config::{EmConfig, OnlineEmConfig, StopReason, TrainReport};
pub use dense::{fit_dense_hmm, DenseHmm};
pub use early_stop::fit_with_early_stopping;
pub use online::{batch_windows, fit_online_em, fit_online_em_with};
pub use split_demo::{greedy_split_demo, SplitDemoReport};
pub use stats::{e_step, m_step, m_step_with_support, SufficientStats};

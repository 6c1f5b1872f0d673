use crate::error::{ChmmError, Result};

/// Per-timestep observation: either a hard symbol or a sparse
/// distribution over symbols (soft evidence). `Hard(i)` is semantically
/// identical to `Soft({i: 1.0})`.
#[derive(Debug, Clone, PartialEq)]
pub enum EvidenceStep {
    Hard(usize),
    Soft(Vec<(usize, f64)>),
}

impl EvidenceStep {
    /// Iterate over `(symbol, weight)` pairs in the step's support.
    pub fn support(&self) -> SupportIter<'_> {
        match self {
            EvidenceStep::Hard(i) => SupportIter::Hard(Some(*i)),
            EvidenceStep::Soft(v) => SupportIter::Soft(v.iter()),
        }
    }

    pub fn support_len(&self) -> usize {
        match self {
            EvidenceStep::Hard(_) => 1,
            EvidenceStep::Soft(v) => v.len(),
        }
    }
}

pub enum SupportIter<'a> {
    Hard(Option<usize>),
    Soft(std::slice::Iter<'a, (usize, f64)>),
}

impl Iterator for SupportIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            SupportIter::Hard(i) => i.take().map(|i| (i, 1.0)),
            SupportIter::Soft(it) => it.next().copied(),
        }
    }
}

/// A length-N observation sequence under hard or soft evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceSequence {
    steps: Vec<EvidenceStep>,
}

impl EvidenceSequence {
    /// Validating constructor. Soft steps must have nonempty support,
    /// nonnegative weights summing to 1 within 1e-9; zero-weight entries
    /// are dropped and duplicate symbols merged.
    pub fn new(steps: Vec<EvidenceStep>, num_symbols: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(steps.len());
        for (n, step) in steps.into_iter().enumerate() {
            match step {
                EvidenceStep::Hard(i) => {
                    if i >= num_symbols {
                        return Err(ChmmError::InvalidEvidence(format!(
                            "step {n}: symbol {i} out of range (E = {num_symbols})"
                        )));
                    }
                    out.push(EvidenceStep::Hard(i));
                }
                EvidenceStep::Soft(entries) => {
                    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
                    let mut sum = 0.0;
                    for (i, w) in entries {
                        if i >= num_symbols {
                            return Err(ChmmError::InvalidEvidence(format!(
                                "step {n}: symbol {i} out of range (E = {num_symbols})"
                            )));
                        }
                        if w < 0.0 || !w.is_finite() {
                            return Err(ChmmError::InvalidEvidence(format!(
                                "step {n}: weight {w} for symbol {i}"
                            )));
                        }
                        sum += w;
                        if w == 0.0 {
                            continue;
                        }
                        match merged.iter_mut().find(|(j, _)| *j == i) {
                            Some((_, acc)) => *acc += w,
                            None => merged.push((i, w)),
                        }
                    }
                    if merged.is_empty() {
                        return Err(ChmmError::InvalidEvidence(format!(
                            "step {n}: empty support"
                        )));
                    }
                    if (sum - 1.0).abs() > 1e-9 {
                        return Err(ChmmError::InvalidEvidence(format!(
                            "step {n}: weights sum to {sum}"
                        )));
                    }
                    out.push(EvidenceStep::Soft(merged));
                }
            }
        }
        Ok(Self { steps: out })
    }

    /// Hard evidence straight from a symbol sequence. Symbols are range
    /// checked lazily by inference.
    pub fn hard(seq: &[usize]) -> Self {
        Self {
            steps: seq.iter().map(|&i| EvidenceStep::Hard(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn step(&self, n: usize) -> &EvidenceStep {
        &self.steps[n]
    }

    pub fn steps(&self) -> &[EvidenceStep] {
        &self.steps
    }
}

//! Interpolated Kneser-Ney n-gram baseline: single absolute discount
//! per order estimated as D = n1 / (n1 + 2 n2), continuation counts at
//! the lower orders, uniform base distribution.

use std::collections::{HashMap, HashSet};

use crate::error::{ChmmError, Result};

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    num_symbols: usize,
    /// Per level m (1-indexed): gram counts of length m — raw at the
    /// top level, continuation counts below.
    counts: Vec<HashMap<Vec<usize>, f64>>,
    /// Per level: total mass of each length-(m-1) context.
    totals: Vec<HashMap<Vec<usize>, f64>>,
    /// Per level: number of distinct successors of each context.
    distinct: Vec<HashMap<Vec<usize>, f64>>,
    discounts: Vec<f64>,
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discounts(&self) -> &[f64] {
        &self.discounts
    }

    fn prob_level(&self, m: usize, context: &[usize], w: usize) -> f64 {
        if m == 0 {
            return 1.0 / self.num_symbols as f64;
        }
        debug_assert_eq!(context.len(), m - 1);
        let total = self.totals[m - 1].get(context).copied().unwrap_or(0.0);
        if total == 0.0 {
            return self.prob_level(m - 1, &context[1.min(context.len())..], w);
        }
        let mut gram = context.to_vec();
        gram.push(w);
        let c = self.counts[m - 1].get(&gram).copied().unwrap_or(0.0);
        let d = self.discounts[m - 1];
        let successors = self.distinct[m - 1].get(context).copied().unwrap_or(0.0);
        (c - d).max(0.0) / total
            + d * successors / total * self.prob_level(m - 1, &context[1.min(context.len())..], w)
    }

    /// Predictive probability of `w` after `context` (any length; only
    /// the last `order - 1` symbols are used).
    pub fn prob(&self, context: &[usize], w: usize) -> f64 {
        let used = context.len().min(self.order - 1);
        let context = &context[context.len() - used..];
        self.prob_level(used + 1, context, w)
    }
}

/// Fit an order-`n` interpolated Kneser-Ney model.
pub fn fit_kneser_ney(
    corpus: &[Vec<usize>],
    order: usize,
    num_symbols: usize,
) -> Result<NgramModel> {
    if order < 1 {
        return Err(ChmmError::InvalidParameter("order must be >= 1".into()));
    }
    if num_symbols == 0 {
        return Err(ChmmError::InvalidParameter("num_symbols must be > 0".into()));
    }
    let longest = corpus.iter().map(Vec::len).max().unwrap_or(0);
    if longest <= order {
        return Err(ChmmError::EmptyInput(format!(
            "corpus has no sequence longer than the order ({order})"
        )));
    }
    // raw m-gram counts for every level
    let mut raw: Vec<HashMap<Vec<usize>, f64>> = vec![HashMap::new(); order];
    for seq in corpus {
        for m in 1..=order {
            for gram in seq.windows(m) {
                *raw[m - 1].entry(gram.to_vec()).or_default() += 1.0;
            }
        }
    }
    // level tables: top level raw, lower levels continuation (number
    // of distinct left-extensions, read off the raw counts one order up)
    let mut counts = raw.clone();
    for m in 1..order {
        let mut continuation: HashMap<Vec<usize>, f64> = HashMap::new();
        let mut seen: HashSet<&[usize]> = HashSet::new();
        for gram in raw[m].keys() {
            if seen.insert(gram) {
                *continuation.entry(gram[1..].to_vec()).or_default() += 1.0;
            }
        }
        counts[m - 1] = continuation;
    }
    let mut totals: Vec<HashMap<Vec<usize>, f64>> = vec![HashMap::new(); order];
    let mut distinct: Vec<HashMap<Vec<usize>, f64>> = vec![HashMap::new(); order];
    for m in 1..=order {
        for (gram, &c) in &counts[m - 1] {
            let context = gram[..m - 1].to_vec();
            *totals[m - 1].entry(context.clone()).or_default() += c;
            *distinct[m - 1].entry(context).or_default() += 1.0;
        }
    }
    let discounts = counts
        .iter()
        .enumerate()
        .map(|(idx, table)| {
            let n1 = table.values().filter(|&&c| c == 1.0).count() as f64;
            let n2 = table.values().filter(|&&c| c == 2.0).count() as f64;
            if n1 + 2.0 * n2 == 0.0 {
                eprintln!(
                    "warning: kneser-ney order {} has degenerate count-of-counts; using D = 0.5",
                    idx + 1
                );
                0.5
            } else {
                n1 / (n1 + 2.0 * n2)
            }
        })
        .collect();
    Ok(NgramModel {
        order,
        num_symbols,
        counts,
        totals,
        distinct,
        discounts,
    })
}

/// Bits per symbol of `sequence` under the model; the first positions
/// use the shorter available contexts.
pub fn ngram_bps(model: &NgramModel, sequence: &[usize]) -> Result<f64> {
    if sequence.is_empty() {
        return Err(ChmmError::EmptyInput("evaluation sequence".into()));
    }
    let mut log2_sum = 0.0;
    for (i, &w) in sequence.iter().enumerate() {
        let start = i.saturating_sub(model.order() - 1);
        let p = model.prob(&sequence[start..i], w);
        log2_sum += p.log2();
    }
    Ok(-log2_sum / sequence.len() as f64)
}

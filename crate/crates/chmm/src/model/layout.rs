use std::ops::Range;

use crate::error::{ChmmError, Result};

/// Fixed assignment of hidden states ("clones") to emission symbols.
///
/// Hidden states are ordered so that all clones of symbol 0 come first,
/// then all clones of symbol 1, and so on. State `h` belongs to symbol `i`
/// iff `offsets[i] <= h < offsets[i+1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneLayout {
    clones: Vec<usize>,
    offsets: Vec<usize>,
}

impl CloneLayout {
    pub fn new(clones_per_symbol: Vec<usize>) -> Result<Self> {
        if clones_per_symbol.is_empty() {
            return Err(ChmmError::EmptyInput("clone layout".into()));
        }
        if let Some(i) = clones_per_symbol.iter().position(|&m| m == 0) {
            return Err(ChmmError::InvalidParameter(format!(
                "symbol {i} has zero clones"
            )));
        }
        let mut offsets = Vec::with_capacity(clones_per_symbol.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &m in &clones_per_symbol {
            acc += m;
            offsets.push(acc);
        }
        Ok(Self {
            clones: clones_per_symbol,
            offsets,
        })
    }

    /// Same number of clones for every symbol.
    pub fn uniform(num_symbols: usize, clones: usize) -> Result<Self> {
        Self::new(vec![clones; num_symbols])
    }

    pub fn num_symbols(&self) -> usize {
        self.clones.len()
    }

    /// Total number of hidden states H.
    pub fn total_states(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn clones_per_symbol(&self) -> &[usize] {
        &self.clones
    }

    pub fn clones_of(&self, symbol: usize) -> usize {
        self.clones[symbol]
    }

    /// Hidden-state index range of symbol `i`.
    pub fn range(&self, symbol: usize) -> Range<usize> {
        self.offsets[symbol]..self.offsets[symbol + 1]
    }

    pub fn offset(&self, symbol: usize) -> usize {
        self.offsets[symbol]
    }

    /// The symbol emitted by hidden state `h`.
    pub fn symbol_of_state(&self, h: usize) -> usize {
        debug_assert!(h < self.total_states());
        // offsets is sorted; partition_point gives the first offset > h
        self.offsets.partition_point(|&o| o <= h) - 1
    }
}

/// Allocate `total_capacity` clones proportionally to symbol frequency in
/// the corpus, with a floor of `min_per_symbol` and largest-remainder
/// rounding so the capacity is met exactly.
pub fn allocate_clones_by_frequency(
    corpus: &[usize],
    num_symbols: usize,
    total_capacity: usize,
    min_per_symbol: usize,
) -> Result<CloneLayout> {
    let mut counts = vec![0usize; num_symbols];
    for &s in corpus {
        counts[s] += 1;
    }
    allocate_proportional(&counts, total_capacity, min_per_symbol)
}

/// Allocate clones proportionally to the number of distinct n-grams in the
/// corpus ending with each symbol.
pub fn allocate_clones_by_ngram(
    corpus: &[usize],
    n: usize,
    num_symbols: usize,
    total_capacity: usize,
    min_per_symbol: usize,
) -> Result<CloneLayout> {
    if n < 2 {
        return Err(ChmmError::InvalidParameter("ngram order must be >= 2".into()));
    }
    let mut seen = std::collections::HashSet::new();
    let mut counts = vec![0usize; num_symbols];
    for w in corpus.windows(n) {
        if seen.insert(w.to_vec()) {
            counts[w[n - 1]] += 1;
        }
    }
    // Symbols present in the corpus but never ending an n-gram (can only
    // happen on very short corpora) still need a nonzero weight.
    let mut occurs = vec![false; num_symbols];
    for &s in corpus {
        occurs[s] = true;
    }
    for i in 0..num_symbols {
        if occurs[i] && counts[i] == 0 {
            counts[i] = 1;
        }
    }
    allocate_proportional(&counts, total_capacity, min_per_symbol)
}

/// Largest-remainder apportionment of `total_capacity` seats over `weights`,
/// flooring every symbol at `min_per_symbol`.
fn allocate_proportional(
    weights: &[usize],
    total_capacity: usize,
    min_per_symbol: usize,
) -> Result<CloneLayout> {
    let e = weights.len();
    if min_per_symbol == 0 {
        return Err(ChmmError::InvalidParameter("min_per_symbol must be >= 1".into()));
    }
    if total_capacity < e * min_per_symbol {
        return Err(ChmmError::CapacityTooSmall {
            capacity: total_capacity,
            needed: e * min_per_symbol,
            symbols: e,
            min_per_symbol,
        });
    }
    if let Some(i) = weights.iter().position(|&w| w == 0) {
        return Err(ChmmError::SymbolMissingFromCorpus(i));
    }
    let total_weight: usize = weights.iter().sum();
    let cap = total_capacity as f64;
    let quotas: Vec<f64> = weights
        .iter()
        .map(|&w| cap * w as f64 / total_weight as f64)
        .collect();
    let mut alloc: Vec<usize> = quotas
        .iter()
        .map(|&q| (q.floor() as usize).max(min_per_symbol))
        .collect();
    let mut assigned: usize = alloc.iter().sum();

    // Flooring at min_per_symbol can overshoot; take seats back from the
    // symbols with the most slack above the floor.
    while assigned > total_capacity {
        let i = (0..e)
            .filter(|&i| alloc[i] > min_per_symbol)
            .max_by(|&a, &b| {
                let sa = alloc[a] as f64 - quotas[a];
                let sb = alloc[b] as f64 - quotas[b];
                sa.partial_cmp(&sb).unwrap().then(b.cmp(&a))
            })
            .expect("capacity >= E * min_per_symbol guarantees slack");
        alloc[i] -= 1;
        assigned -= 1;
    }
    // Distribute remaining seats by largest fractional remainder,
    // breaking ties toward the lower symbol index.
    while assigned < total_capacity {
        let i = (0..e)
            .max_by(|&a, &b| {
                let ra = quotas[a] - alloc[a] as f64;
                let rb = quotas[b] - alloc[b] as f64;
                ra.partial_cmp(&rb).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        alloc[i] += 1;
        assigned += 1;
    }
    CloneLayout::new(alloc)
}

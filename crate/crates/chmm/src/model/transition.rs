use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ChmmError, Result};
use crate::model::{Alphabet, CloneLayout};

pub const ROW_SUM_TOL: f64 = 1e-9;

/// Row-stochastic transition matrix stored as an `E x E` grid of per
/// symbol-pair blocks, plus the initial-state distribution.
///
/// `blocks[i * E + j]`, when present, is the `M_i x M_j` row-major matrix
/// of transition probabilities from clones of symbol `i` to clones of
/// symbol `j`. Absent blocks are all-zero. The model is immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTransitionModel {
    alphabet: Alphabet,
    layout: CloneLayout,
    blocks: Vec<Option<Vec<f64>>>,
    prior: Vec<f64>,
}

impl BlockTransitionModel {
    pub fn from_parts(
        alphabet: Alphabet,
        layout: CloneLayout,
        blocks: Vec<Option<Vec<f64>>>,
        prior: Vec<f64>,
    ) -> Result<Self> {
        let model = Self {
            alphabet,
            layout,
            blocks,
            prior,
        };
        model.validate()?;
        Ok(model)
    }

    /// Construct without invariant checks. For internal callers that
    /// guarantee row-stochasticity by construction.
    pub(crate) fn from_parts_unchecked(
        alphabet: Alphabet,
        layout: CloneLayout,
        blocks: Vec<Option<Vec<f64>>>,
        prior: Vec<f64>,
    ) -> Self {
        Self {
            alphabet,
            layout,
            blocks,
            prior,
        }
    }

    /// Same transitions with a replaced initial distribution.
    pub fn with_prior(&self, prior: Vec<f64>) -> Result<Self> {
        let out = Self {
            prior,
            ..self.clone()
        };
        out.validate()?;
        Ok(out)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn layout(&self) -> &CloneLayout {
        &self.layout
    }

    pub fn num_symbols(&self) -> usize {
        self.layout.num_symbols()
    }

    pub fn total_states(&self) -> usize {
        self.layout.total_states()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// Prior sub-vector over the clones of `symbol`.
    pub fn prior_of(&self, symbol: usize) -> &[f64] {
        &self.prior[self.layout.range(symbol)]
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.blocks[i * self.num_symbols() + j].as_deref()
    }

    /// Grid-presence bitmap in row-major order.
    pub fn presence(&self) -> Vec<bool> {
        self.blocks.iter().map(|b| b.is_some()).collect()
    }

    pub fn present_blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let e = self.num_symbols();
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_some())
            .map(move |(k, _)| (k / e, k % e))
    }

    /// Assemble the full `H x H` dense matrix. Intended for small models
    /// and tests.
    pub fn assemble_dense(&self) -> Vec<f64> {
        let h = self.total_states();
        let e = self.num_symbols();
        let mut t = vec![0.0; h * h];
        for i in 0..e {
            let ri = self.layout.range(i);
            for j in 0..e {
                if let Some(block) = self.block(i, j) {
                    let rj = self.layout.range(j);
                    let mj = rj.len();
                    for (u, row) in block.chunks_exact(mj).enumerate() {
                        let base = (ri.start + u) * h + rj.start;
                        t[base..base + mj].copy_from_slice(row);
                    }
                }
            }
        }
        t
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.num_symbols();
        if self.alphabet.len() != e {
            return Err(ChmmError::ShapeMismatch(format!(
                "alphabet has {} symbols, layout has {e}",
                self.alphabet.len()
            )));
        }
        if self.blocks.len() != e * e {
            return Err(ChmmError::ShapeMismatch(format!(
                "expected {} grid cells, got {}",
                e * e,
                self.blocks.len()
            )));
        }
        if self.prior.len() != self.total_states() {
            return Err(ChmmError::ShapeMismatch(format!(
                "prior length {} != H = {}",
                self.prior.len(),
                self.total_states()
            )));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if let Some(b) = b {
                let (i, j) = (k / e, k % e);
                let expect = self.layout.clones_of(i) * self.layout.clones_of(j);
                if b.len() != expect {
                    return Err(ChmmError::ShapeMismatch(format!(
                        "block ({i},{j}) has {} entries, expected {expect}",
                        b.len()
                    )));
                }
                for (o, &v) in b.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(ChmmError::NonFinite(o));
                    }
                    if !(0.0..=1.0 + ROW_SUM_TOL).contains(&v) {
                        return Err(ChmmError::InvalidModel(format!(
                            "block ({i},{j}) entry {o} = {v} outside [0,1]"
                        )));
                    }
                }
            }
        }
        for (o, &v) in self.prior.iter().enumerate() {
            if !v.is_finite() {
                return Err(ChmmError::NonFinite(o));
            }
            if v < 0.0 {
                return Err(ChmmError::InvalidModel(format!("prior[{o}] = {v} < 0")));
            }
        }
        let psum: f64 = self.prior.iter().sum();
        if (psum - 1.0).abs() > ROW_SUM_TOL {
            return Err(ChmmError::InvalidModel(format!("prior sums to {psum}")));
        }
        for i in 0..e {
            let mi = self.layout.clones_of(i);
            for u in 0..mi {
                let mut sum = 0.0;
                for j in 0..e {
                    if let Some(b) = self.block(i, j) {
                        let mj = self.layout.clones_of(j);
                        sum += b[u * mj..(u + 1) * mj].iter().sum::<f64>();
                    }
                }
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(ChmmError::InvalidModel(format!(
                        "row {u} of symbol {i} sums to {sum}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluation-time smoothed copy: `T' = (1-eps) T + eps U` where `U`
    /// is uniform over each row's entries within present blocks; the
    /// prior is smoothed the same way so a sequence never scores as
    /// impossible merely because it starts with a symbol unseen at
    /// training starts. `eps = 0` returns an identical model. Training
    /// never uses this.
    pub fn smoothed_for_eval(&self, eps: f64) -> Self {
        if eps == 0.0 {
            return self.clone();
        }
        let e = self.num_symbols();
        let mut out = self.clone();
        let h = self.total_states() as f64;
        for p in out.prior.iter_mut() {
            *p = (1.0 - eps) * *p + eps / h;
        }
        for i in 0..e {
            // entries per row within present blocks of this grid row
            let row_support: usize = (0..e)
                .filter(|&j| self.block(i, j).is_some())
                .map(|j| self.layout.clones_of(j))
                .sum();
            if row_support == 0 {
                continue;
            }
            let floor = eps / row_support as f64;
            for j in 0..e {
                if let Some(b) = out.blocks[i * e + j].as_mut() {
                    for v in b.iter_mut() {
                        *v = (1.0 - eps) * *v + floor;
                    }
                }
            }
        }
        out
    }
}

/// Random row-stochastic initialization: uniform(0,1) draws on every
/// permitted entry, row-normalized; uniform prior. Deterministic given
/// the seed. `block_support`, when given, lists the permitted `(i, j)`
/// symbol-pair blocks; absent pairs stay zero.
pub fn init_random(
    alphabet: &Alphabet,
    layout: &CloneLayout,
    seed: u64,
    block_support: Option<&[(usize, usize)]>,
) -> Result<BlockTransitionModel> {
    let e = layout.num_symbols();
    let mut permitted = vec![false; e * e];
    match block_support {
        Some(pairs) => {
            for &(i, j) in pairs {
                if i >= e || j >= e {
                    return Err(ChmmError::InvalidParameter(format!(
                        "block support pair ({i},{j}) out of range"
                    )));
                }
                permitted[i * e + j] = true;
            }
        }
        None => permitted.fill(true),
    }
    for i in 0..e {
        if !(0..e).any(|j| permitted[i * e + j]) {
            return Err(ChmmError::EmptySuccessorRow(i));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: Vec<Option<Vec<f64>>> = vec![None; e * e];
    for i in 0..e {
        let mi = layout.clones_of(i);
        // draw rows across the whole grid row, then normalize
        let mut grid_row: Vec<Vec<f64>> = (0..e)
            .map(|j| {
                if permitted[i * e + j] {
                    let mj = layout.clones_of(j);
                    (0..mi * mj).map(|_| rng.gen::<f64>()).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        for u in 0..mi {
            let mut sum = 0.0;
            for (j, b) in grid_row.iter().enumerate() {
                if !b.is_empty() {
                    let mj = layout.clones_of(j);
                    sum += b[u * mj..(u + 1) * mj].iter().sum::<f64>();
                }
            }
            for (j, b) in grid_row.iter_mut().enumerate() {
                if !b.is_empty() {
                    let mj = layout.clones_of(j);
                    for v in &mut b[u * mj..(u + 1) * mj] {
                        *v /= sum;
                    }
                }
            }
        }
        for (j, b) in grid_row.into_iter().enumerate() {
            if !b.is_empty() {
                blocks[i * e + j] = Some(b);
            }
        }
    }
    let h = layout.total_states();
    let prior = vec![1.0 / h as f64; h];
    Ok(BlockTransitionModel::from_parts_unchecked(
        alphabet.clone(),
        layout.clone(),
        blocks,
        prior,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> (Alphabet, CloneLayout) {
        (Alphabet::integers(3), CloneLayout::new(vec![2, 1, 2]).unwrap())
    }

    #[test]
    fn init_is_deterministic() {
        let (a, l) = tiny();
        let m1 = init_random(&a, &l, 7, None).unwrap();
        let m2 = init_random(&a, &l, 7, None).unwrap();
        assert_eq!(m1, m2);
        let m3 = init_random(&a, &l, 8, None).unwrap();
        assert_ne!(m1, m3);
    }

    #[test]
    fn single_state_row_is_one() {
        let a = Alphabet::integers(1);
        let l = CloneLayout::new(vec![1]).unwrap();
        let m = init_random(&a, &l, 0, None).unwrap();
        assert_eq!(m.block(0, 0).unwrap(), &[1.0]);
    }

    #[test]
    fn rows_are_stochastic() {
        let (a, l) = tiny();
        let m = init_random(&a, &l, 42, None).unwrap();
        m.validate().unwrap();
        let h = m.total_states();
        let t = m.assemble_dense();
        for u in 0..h {
            let s: f64 = t[u * h..(u + 1) * h].iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "row {u} sums to {s}");
        }
    }

    #[test]
    fn restricted_support_leaves_absent_blocks_zero() {
        let (a, l) = tiny();
        let support = vec![(0, 1), (1, 2), (2, 0)];
        let m = init_random(&a, &l, 3, Some(&support)).unwrap();
        assert!(m.block(0, 0).is_none());
        assert!(m.block(0, 1).is_some());
        m.validate().unwrap();
    }

    #[test]
    fn empty_successor_row_is_an_error() {
        let (a, l) = tiny();
        let err = init_random(&a, &l, 3, Some(&[(0, 1)])).unwrap_err();
        assert!(matches!(err, ChmmError::EmptySuccessorRow(_)));
    }

    #[test]
    fn eval_smoothing_keeps_rows_stochastic() {
        let (a, l) = tiny();
        let m = init_random(&a, &l, 9, Some(&[(0, 1), (1, 2), (2, 0), (2, 2)])).unwrap();
        let s = m.smoothed_for_eval(1e-5);
        s.validate().unwrap();
        assert_eq!(m.smoothed_for_eval(0.0), m);
    }
}

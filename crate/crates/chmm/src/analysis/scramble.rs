//! Scrambled-word evidence: word boundaries stay Hard, interiors
//! become Soft distributions over the word's own interior letters, and
//! MAP decoding recovers the original text.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ChmmError, Result};
use crate::inference::{viterbi, EvidenceSequence, EvidenceStep};
use crate::model::BlockTransitionModel;

#[derive(Debug, Clone, PartialEq)]
pub struct ScrambledEncoding {
    pub evidence: EvidenceSequence,
    /// Half-open letter spans `(start, end)` of each word.
    pub boundaries: Vec<(usize, usize)>,
}

/// Word spans of a symbol sequence: maximal runs of non-`separator`
/// symbols.
pub fn word_boundaries(seq: &[usize], separator: usize) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, &s) in seq.iter().enumerate() {
        if s == separator {
            if let Some(st) = start.take() {
                spans.push((st, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        spans.push((st, seq.len()));
    }
    spans
}

fn check_boundaries(boundaries: &[(usize, usize)], len: usize) -> Result<()> {
    let mut prev_end = 0;
    for &(start, end) in boundaries {
        if start >= end || end > len || start < prev_end {
            return Err(ChmmError::MalformedBoundaries(format!(
                "span ({start}, {end}) invalid for length {len}"
            )));
        }
        prev_end = end;
    }
    Ok(())
}

/// Build the evidence for scrambled-word decoding. Within each span,
/// the first and last symbol are Hard; interior positions share a Soft
/// distribution over the interior multiset, weighted by multiplicity.
/// Words of length <= 3 have no interior and stay fully Hard, as do
/// all positions outside the spans.
pub fn encode_scrambled(
    seq: &[usize],
    boundaries: &[(usize, usize)],
    num_symbols: usize,
) -> Result<ScrambledEncoding> {
    check_boundaries(boundaries, seq.len())?;
    let mut steps: Vec<EvidenceStep> = seq.iter().map(|&s| EvidenceStep::Hard(s)).collect();
    for &(start, end) in boundaries {
        if end - start <= 3 {
            continue;
        }
        let interior = &seq[start + 1..end - 1];
        let m = interior.len() as f64;
        let mut weights: Vec<(usize, f64)> = Vec::new();
        for &s in interior {
            match weights.iter_mut().find(|(sym, _)| *sym == s) {
                Some((_, w)) => *w += 1.0 / m,
                None => weights.push((s, 1.0 / m)),
            }
        }
        weights.sort_by_key(|&(sym, _)| sym);
        for step in steps.iter_mut().take(end - 1).skip(start + 1) {
            *step = EvidenceStep::Soft(weights.clone());
        }
    }
    Ok(ScrambledEncoding {
        evidence: EvidenceSequence::new(steps, num_symbols)?,
        boundaries: boundaries.to_vec(),
    })
}

/// Randomly permute the interior of each word. The boundary symbols
/// and words of length <= 3 are untouched.
pub fn scramble(seq: &[usize], boundaries: &[(usize, usize)], seed: u64) -> Result<Vec<usize>> {
    check_boundaries(boundaries, seq.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = seq.to_vec();
    for &(start, end) in boundaries {
        if end - start > 3 {
            out[start + 1..end - 1].shuffle(&mut rng);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeReport {
    pub decoded: Vec<usize>,
    pub word_accuracy: f64,
    pub char_accuracy: f64,
    /// Number of words the decoder could not explain (impossible
    /// evidence); these count as incorrect.
    pub impossible_words: usize,
}

/// MAP-decode the scrambled evidence and score against `reference`.
pub fn decode_scrambled(
    model: &BlockTransitionModel,
    encoding: &ScrambledEncoding,
    reference: &[usize],
) -> Result<DecodeReport> {
    if reference.len() != encoding.evidence.len() {
        return Err(ChmmError::ShapeMismatch(format!(
            "reference length {} != evidence length {}",
            reference.len(),
            encoding.evidence.len()
        )));
    }
    let (decoded, impossible) = match viterbi(model, &encoding.evidence) {
        Ok(path) => (path.symbols, false),
        Err(ChmmError::ImpossibleSequence { .. }) => {
            // no consistent path at all: fall back to the evidence mode
            let decoded = encoding
                .evidence
                .steps()
                .iter()
                .map(|step| match step {
                    EvidenceStep::Hard(s) => *s,
                    EvidenceStep::Soft(w) => {
                        w.iter()
                            .max_by(|a, b| a.1.total_cmp(&b.1))
                            .expect("nonempty support")
                            .0
                    }
                })
                .collect();
            (decoded, true)
        }
        Err(e) => return Err(e),
    };
    let words = encoding.boundaries.len();
    let mut correct_words = 0usize;
    for &(start, end) in &encoding.boundaries {
        if !impossible && decoded[start..end] == reference[start..end] {
            correct_words += 1;
        }
    }
    let chars = reference.len();
    let correct_chars = decoded
        .iter()
        .zip(reference)
        .filter(|(a, b)| a == b)
        .count();
    Ok(DecodeReport {
        decoded,
        word_accuracy: if words == 0 {
            1.0
        } else {
            correct_words as f64 / words as f64
        },
        char_accuracy: if chars == 0 {
            1.0
        } else {
            correct_chars as f64 / chars as f64
        },
        impossible_words: if impossible { words } else { 0 },
    })
}

/// Expected word accuracy of guessing a uniform random permutation of
/// each interior: mean over words of (product of multiplicity
/// factorials) / m!.
pub fn permutation_baseline_accuracy(seq: &[usize], boundaries: &[(usize, usize)]) -> f64 {
    if boundaries.is_empty() {
        return 1.0;
    }
    let factorial = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
    let mut total = 0.0;
    for &(start, end) in boundaries {
        if end - start <= 3 {
            total += 1.0;
            continue;
        }
        let interior = &seq[start + 1..end - 1];
        let mut counts = std::collections::HashMap::new();
        for &s in interior {
            *counts.entry(s).or_insert(0usize) += 1;
        }
        let repeats: f64 = counts.values().map(|&c| factorial(c)).product();
        total += repeats / factorial(interior.len());
    }
    total / boundaries.len() as f64
}

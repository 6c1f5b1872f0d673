//! Character-level text pipeline: normalization to the 27-symbol
//! alphabet {a..z, space}, positional train/test split, rare-word
//! closure of the vocabulary, and validation holdout.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{ChmmError, Result};
use crate::model::Alphabet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextPipelineConfig {
    pub train_fraction: f64,
    pub max_train_symbols: usize,
    pub validation_fraction_of_train: f64,
    pub rare_token: String,
}

impl Default for TextPipelineConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.9,
            max_train_symbols: 750_000,
            validation_fraction_of_train: 0.1,
            rare_token: "rare".into(),
        }
    }
}

impl TextPipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for f in [self.train_fraction, self.validation_fraction_of_train] {
            if !(0.0 < f && f < 1.0) {
                return Err(ChmmError::InvalidParameter(format!(
                    "fraction {f} outside (0, 1)"
                )));
            }
        }
        if self.rare_token.is_empty()
            || !self.rare_token.chars().all(|c| c.is_ascii_lowercase())
        {
            return Err(ChmmError::InvalidParameter(
                "rare_token must be nonempty lowercase a-z".into(),
            ));
        }
        Ok(())
    }
}

const ONES: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];
const SCALES: [(u64, &str); 6] = [
    (1_000_000_000_000_000_000, "quintillion"),
    (1_000_000_000_000_000, "quadrillion"),
    (1_000_000_000_000, "trillion"),
    (1_000_000_000, "billion"),
    (1_000_000, "million"),
    (1_000, "thousand"),
];

/// Standard English name of an integer, lowercase, space-separated
/// words only (no hyphens: "twenty one").
pub fn number_to_words(n: u64) -> String {
    fn under_thousand(n: u64, out: &mut Vec<String>) {
        let n = if n >= 100 {
            out.push(ONES[(n / 100) as usize].into());
            out.push("hundred".into());
            n % 100
        } else {
            n
        };
        if n >= 20 {
            out.push(TENS[(n / 10) as usize].into());
            if n % 10 > 0 {
                out.push(ONES[(n % 10) as usize].into());
            }
        } else if n > 0 {
            out.push(ONES[n as usize].into());
        }
    }
    if n == 0 {
        return "zero".into();
    }
    let mut out = Vec::new();
    let mut rest = n;
    for (scale, name) in SCALES {
        if rest >= scale {
            under_thousand(rest / scale, &mut out);
            out.push(name.into());
            rest %= scale;
        }
    }
    under_thousand(rest, &mut out);
    out.join(" ")
}

fn digit_run_to_words(digits: &str) -> String {
    match digits.parse::<u64>() {
        Ok(n) => number_to_words(n),
        // too large for an integer name: spell digit by digit
        Err(_) => digits
            .chars()
            .map(|c| ONES[c.to_digit(10).unwrap() as usize])
            .collect::<Vec<_>>()
            .join(" "),
    }
}

/// Lowercase, spell out digit runs as English words, drop everything
/// outside {a..z, space}, collapse whitespace. Idempotent.
pub fn normalize_text(raw: &str) -> String {
    let mut with_numbers = String::with_capacity(raw.len());
    let mut digits = String::new();
    for c in raw.chars() {
        if c.is_ascii_digit() {
            digits.push(c);
            continue;
        }
        if !digits.is_empty() {
            with_numbers.push(' ');
            with_numbers.push_str(&digit_run_to_words(&digits));
            with_numbers.push(' ');
            digits.clear();
        }
        with_numbers.push(c);
    }
    if !digits.is_empty() {
        with_numbers.push(' ');
        with_numbers.push_str(&digit_run_to_words(&digits));
    }
    let mut out = String::with_capacity(with_numbers.len());
    for c in with_numbers.chars() {
        let c = c.to_ascii_lowercase();
        if c.is_ascii_lowercase() {
            out.push(c);
        } else if c.is_whitespace() && !out.is_empty() && !out.ends_with(' ') {
            out.push(' ');
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextSplits {
    pub alphabet: Alphabet,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

fn encode_words(words: &[&str], alphabet: &Alphabet) -> Result<Vec<usize>> {
    alphabet.encode_chars(&words.join(" "))
}

/// Full pipeline: normalize, split train/test by position (word
/// granularity), close the vocabulary with the rare token (train
/// singletons; test words absent from the train vocabulary), cap the
/// train length, hold out the tail of train as validation.
pub fn preprocess_text(raw: &str, config: &TextPipelineConfig) -> Result<TextSplits> {
    config.validate()?;
    let normalized = normalize_text(raw);
    if normalized.is_empty() {
        return Err(ChmmError::EmptyInput("text is empty after filtering".into()));
    }
    let words: Vec<&str> = normalized.split(' ').collect();
    let n_train_words =
        ((words.len() as f64 * config.train_fraction).round() as usize).clamp(1, words.len());
    let (train_words, test_words) = words.split_at(n_train_words);

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for &w in train_words {
        *counts.entry(w).or_default() += 1;
    }
    let rare = config.rare_token.as_str();
    let train_closed: Vec<&str> = train_words
        .iter()
        .map(|&w| if counts[w] == 1 { rare } else { w })
        .collect();
    let test_closed: Vec<&str> = test_words
        .iter()
        .map(|&w| {
            if counts.get(w).copied().unwrap_or(0) >= 2 {
                w
            } else {
                rare
            }
        })
        .collect();

    // cap train by symbol count at word granularity
    let mut capped = 0usize;
    let mut symbols = 0usize;
    for (i, w) in train_closed.iter().enumerate() {
        let add = w.len() + usize::from(i > 0);
        if symbols + add > config.max_train_symbols {
            break;
        }
        symbols += add;
        capped = i + 1;
    }
    if capped == 0 {
        return Err(ChmmError::InvalidParameter(
            "max_train_symbols smaller than the first word".into(),
        ));
    }
    let train_capped = &train_closed[..capped];
    let n_val_words = ((train_capped.len() as f64 * config.validation_fraction_of_train).round()
        as usize)
        .min(train_capped.len().saturating_sub(1));
    let split = train_capped.len() - n_val_words;

    let alphabet = Alphabet::lowercase_text();
    Ok(TextSplits {
        train: encode_words(&train_capped[..split], &alphabet)?,
        validation: encode_words(&train_capped[split..], &alphabet)?,
        test: encode_words(&test_closed, &alphabet)?,
        alphabet,
    })
}

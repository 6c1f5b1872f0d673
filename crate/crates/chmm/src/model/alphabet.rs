use std::collections::HashMap;

use crate::error::{ChmmError, Result};

/// Ordered set of emission symbols. Symbol indices are stable for the
/// lifetime of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(ChmmError::EmptyInput("alphabet".into()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(ChmmError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols, index })
    }

    /// Alphabet `"0", "1", ..., "n-1"` for integer-coded sequences.
    pub fn integers(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string())).expect("integer symbols are distinct")
    }

    /// The 27-symbol text alphabet: `a..z` plus space.
    pub fn lowercase_text() -> Self {
        let mut syms: Vec<String> = ('a'..='z').map(|c| c.to_string()).collect();
        syms.push(" ".into());
        Self::new(syms).expect("text symbols are distinct")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Result<usize> {
        self.index
            .get(symbol)
            .copied()
            .ok_or_else(|| ChmmError::UnknownSymbol(symbol.to_string()))
    }

    /// Encode a string character-by-character.
    pub fn encode_chars(&self, text: &str) -> Result<Vec<usize>> {
        text.chars()
            .map(|c| self.index_of(&c.to_string()))
            .collect()
    }

    pub fn decode(&self, seq: &[usize]) -> String {
        seq.iter().map(|&i| self.symbols[i].as_str()).collect()
    }
}

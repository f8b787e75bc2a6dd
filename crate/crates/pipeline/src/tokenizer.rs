//! Bidirectional mapping between instruction-format strings and token ids.
//!
//! The vocabulary is fixed at exactly 22 entries: the two binary symbols,
//! nine structural specials, and eleven reserved slots that never appear in
//! data. Ids are stable across runs so checkpoints and datasets stay
//! mutually compatible.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::PipelineError;

pub type TokenId = u8;
pub type TokenSequence = Vec<TokenId>;

/// Fixed vocabulary size.
pub const VOCAB_SIZE: usize = 22;

pub const PAD_ID: TokenId = 0;
pub const BOS_ID: TokenId = 1;
pub const EOS_ID: TokenId = 2;
pub const MASK_ID: TokenId = 3;
pub const ZERO_ID: TokenId = 4;
pub const ONE_ID: TokenId = 5;
pub const R_ID: TokenId = 6;
pub const BIC_ID: TokenId = 7;
pub const EIC_ID: TokenId = 8;
pub const BGS2_ID: TokenId = 9;
pub const EGS2_ID: TokenId = 10;

const TOKENS: [&str; VOCAB_SIZE] = [
    "[PAD]", "[BOS]", "[EOS]", "[MASK]", "0", "1", "[R]", "[BIC]", "[EIC]", "[BGS2]", "[EGS2]",
    // Reserved ids 11..=21; never emitted into data.
    "[RES0]", "[RES1]", "[RES2]", "[RES3]", "[RES4]", "[RES5]", "[RES6]", "[RES7]", "[RES8]",
    "[RES9]", "[RES10]",
];

/// The 22-token vocabulary with id and reverse lookup.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::standard()
    }
}

impl Vocabulary {
    /// The canonical vocabulary with deterministic id assignment.
    pub fn standard() -> Self {
        let tokens: Vec<String> = TOKENS.iter().map(|t| t.to_string()).collect();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Self { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(usize::from(id)).map(String::as_str)
    }

    /// Encodes a space-delimited string, one id per unit. Unknown units are
    /// hard errors naming the unit and its position: datasets are machine
    /// generated, so silence would hide pipeline bugs.
    pub fn encode(&self, text: &str) -> Result<TokenSequence, PipelineError> {
        let mut ids = Vec::new();
        for (position, unit) in text.split_whitespace().enumerate() {
            match self.id(unit) {
                Some(id) => ids.push(id),
                None => {
                    return Err(PipelineError::UnknownToken {
                        unit: unit.to_string(),
                        position,
                    })
                }
            }
        }
        Ok(ids)
    }

    /// Decodes ids back into a space-joined string.
    pub fn decode(&self, ids: &[TokenId]) -> Result<String, PipelineError> {
        let mut parts = Vec::with_capacity(ids.len());
        for &id in ids {
            match self.token(id) {
                Some(tok) => parts.push(tok),
                None => {
                    return Err(PipelineError::InvalidTokenId {
                        id,
                        vocab_size: self.len(),
                    })
                }
            }
        }
        Ok(parts.join(" "))
    }

    /// Writes one token per line in id order.
    pub fn write_to(&self, path: &Path) -> Result<(), PipelineError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for tok in &self.tokens {
            writeln!(out, "{tok}")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a vocabulary file, insisting on exactly 22 entries.
    pub fn read_from(path: &Path) -> Result<Self, PipelineError> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let tokens: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
        if tokens.len() != VOCAB_SIZE {
            return Err(PipelineError::VocabularySize {
                expected: VOCAB_SIZE,
                got: tokens.len(),
            });
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Ok(Self { tokens, index })
    }
}

/// Result of scanning text for binary payload units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryScan {
    /// The `0`/`1` units in order.
    pub bits: Vec<u8>,
    /// Units that were neither binary nor known specials.
    pub malformed: usize,
}

/// Filters a decoded string down to its binary data, dropping special tokens
/// silently and counting anything else as malformed. Total by design: model
/// output may be arbitrarily broken and is scored, not crashed on.
pub fn extract_binary(text: &str) -> BinaryScan {
    let vocab = Vocabulary::standard();
    let mut bits = Vec::new();
    let mut malformed = 0usize;
    for unit in text.split_whitespace() {
        match unit {
            "0" => bits.push(0),
            "1" => bits.push(1),
            _ if vocab.id(unit).is_some() => {}
            _ => malformed += 1,
        }
    }
    BinaryScan { bits, malformed }
}

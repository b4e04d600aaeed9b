//! Symbol↔id vocabularies with reserved control symbols.

use indexmap::IndexMap;

use crate::corpus::tokenize::TokenMode;
use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;

pub const RESERVED: [&str; 4] = ["<pad>", "<bos>", "<eos>", "<unk>"];

/// Bijective symbol↔id map. Ids 0..=3 are reserved for PAD/BOS/EOS/UNK;
/// corpus symbols start at 4 in first-appearance order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    mode: TokenMode,
    index: IndexMap<String, usize>,
}

impl Vocabulary {
    pub fn new(mode: TokenMode) -> Self {
        let mut index = IndexMap::new();
        for (i, s) in RESERVED.iter().enumerate() {
            index.insert((*s).to_string(), i);
        }
        Vocabulary { mode, index }
    }

    /// Build from symbol sequences. Reserved strings occurring as corpus
    /// symbols violate the bijection and are rejected.
    pub fn build<'a, I, S>(mode: TokenMode, sequences: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a str>,
    {
        let mut v = Vocabulary::new(mode);
        let mut any = false;
        for seq in sequences {
            for sym in seq {
                any = true;
                v.intern(sym)?;
            }
        }
        if !any {
            return Err(Error::contract("vocabulary built from an empty corpus"));
        }
        Ok(v)
    }

    fn intern(&mut self, symbol: &str) -> Result<usize> {
        if RESERVED.contains(&symbol) {
            return Err(Error::contract(format!(
                "corpus symbol {symbol:?} collides with a reserved symbol"
            )));
        }
        let next = self.index.len();
        Ok(*self.index.entry(symbol.to_string()).or_insert(next))
    }

    pub fn mode(&self) -> TokenMode {
        self.mode
    }

    /// Total size including the four reserved ids.
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of corpus symbols (reserved ids excluded) — the size reported
    /// in corpus statistics.
    pub fn content_len(&self) -> usize {
        self.index.len() - RESERVED.len()
    }

    pub fn id(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn id_or_unk(&self, symbol: &str) -> usize {
        self.id(symbol).unwrap_or(UNK)
    }

    pub fn symbol(&self, id: usize) -> Result<&str> {
        self.index
            .get_index(id)
            .map(|(s, _)| s.as_str())
            .ok_or_else(|| Error::Index(format!("symbol id {id} out of range 0..{}", self.len())))
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    /// Symbols in id order, reserved first.
    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    /// Map tokens to ids, unknown symbols to UNK.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id_or_unk(t)).collect()
    }

    /// Map ids back to symbols, dropping reserved ids.
    pub fn decode(&self, ids: &[usize]) -> Result<Vec<String>> {
        let mut out = Vec::with_capacity(ids.len());
        for &id in ids {
            let sym = self.symbol(id)?;
            if id >= RESERVED.len() {
                out.push(sym.to_string());
            }
        }
        Ok(out)
    }

    /// Rebuild from a symbol list in id order (checkpoint loading). The
    /// first four symbols must be the reserved ones.
    pub fn from_symbols(mode: TokenMode, symbols: &[String]) -> Result<Self> {
        if symbols.len() < RESERVED.len() {
            return Err(Error::contract(format!(
                "vocabulary needs at least {} symbols, got {}",
                RESERVED.len(),
                symbols.len()
            )));
        }
        for (i, expected) in RESERVED.iter().enumerate() {
            if symbols[i] != *expected {
                return Err(Error::contract(format!(
                    "reserved symbol {i} is {:?}, expected {expected:?}",
                    symbols[i]
                )));
            }
        }
        let mut index = IndexMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::contract(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Vocabulary { mode, index })
    }
}

//! Corpus-to-model pipeline.
//!
//! Windowed co-occurrence counts are weighted by positive PMI and reduced
//! with NMF; the rows of `W` are the word vectors. Verbs additionally get
//! relational matrices built from their dependency arguments, and every word
//! can get a density matrix from the averaged vectors of its contexts.

mod cooccur;
mod density;
pub mod io;
mod nmf;
mod pmi;
mod verbs;

use std::collections::HashMap;

pub use cooccur::{context_occurrences, count_cooccurrences, frequent_words, CooccurrenceCounts};
pub use density::{build_density_word, build_density_word_with, OccurrenceWeights};
pub use nmf::{nmf, NmfConfig, NmfModel};
pub use pmi::pmi_weight;
pub use verbs::{
    build_relational_verb, build_verb_matrices, verb_arguments, Dependency, RelationalVerbMatrix,
};

use crate::error::{Error, Result};
use crate::tensor::{Matrix, WordVector};

/// Strips a trailing `_POS` tag, if any.
pub fn strip_pos(token: &str) -> &str {
    match token.rfind('_') {
        Some(i) if i > 0 && i + 1 < token.len() => &token[..i],
        _ => token,
    }
}

/// Word vectors of a common dimension, looked up by label.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorStore {
    dim: usize,
    words: Vec<WordVector>,
    index: HashMap<String, usize>,
}

impl VectorStore {
    pub fn new(dim: usize) -> Self {
        VectorStore {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_vectors(dim: usize, vectors: impl IntoIterator<Item = WordVector>) -> Result<Self> {
        let mut store = VectorStore::new(dim);
        for v in vectors {
            store.insert(v)?;
        }
        Ok(store)
    }

    /// Rows of `w` labelled by `vocab`.
    pub fn from_rows(vocab: &[String], w: &Matrix) -> Result<Self> {
        if vocab.len() != w.rows() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                got: w.rows(),
            });
        }
        VectorStore::from_vectors(
            w.cols(),
            vocab
                .iter()
                .enumerate()
                .map(|(i, word)| WordVector::new(word.clone(), w.row(i).to_vec()))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Replaces any earlier vector with the same label.
    pub fn insert(&mut self, v: WordVector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        match self.index.get(&v.label) {
            Some(&i) => self.words[i] = v,
            None => {
                self.index.insert(v.label.clone(), self.words.len());
                self.words.push(v);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Exact label first, then the token without its POS tag.
    pub fn get(&self, word: &str) -> Option<&WordVector> {
        self.index
            .get(word)
            .or_else(|| self.index.get(strip_pos(word)))
            .map(|&i| &self.words[i])
    }

    pub fn require(&self, word: &str) -> Result<&WordVector> {
        self.get(word).ok_or_else(|| Error::MissingWord(word.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &WordVector> {
        self.words.iter()
    }
}

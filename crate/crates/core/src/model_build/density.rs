//! Word density matrices `Σᵢ pᵢ cᵢ cᵢᵀ` from context occurrences.

use serde::{Deserialize, Serialize};

use super::VectorStore;
use crate::error::{Error, Result};
use crate::tensor::{DensityMatrix, Matrix};

/// How occurrences are weighted in the mixture.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum OccurrenceWeights {
    /// `1/m` over the `m` usable occurrences.
    #[default]
    Uniform,
    /// Proportional to the number of in-vocabulary neighbours.
    ContextFrequency,
    /// Caller-supplied, one per occurrence; renormalized over usable ones.
    Explicit(Vec<f64>),
}

/// `cᵢ` is the L2-normalized average of the vectors of the in-vocabulary
/// tokens of occurrence `i`; occurrences with no such token, or a zero
/// average, are skipped.
pub fn build_density_word(occurrences: &[Vec<String>], vectors: &VectorStore) -> Result<DensityMatrix> {
    build_density_word_with(occurrences, vectors, &OccurrenceWeights::Uniform)
}

pub fn build_density_word_with(
    occurrences: &[Vec<String>],
    vectors: &VectorStore,
    weights: &OccurrenceWeights,
) -> Result<DensityMatrix> {
    if let OccurrenceWeights::Explicit(w) = weights {
        if w.len() != occurrences.len() {
            return Err(Error::DimensionMismatch {
                expected: occurrences.len(),
                got: w.len(),
            });
        }
        if let Some((index, &value)) = w.iter().enumerate().find(|(_, &x)| !(x >= 0.0)) {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    let d = vectors.dim();
    let mut contexts: Vec<(f64, Vec<f64>)> = Vec::new();
    for (i, occ) in occurrences.iter().enumerate() {
        let mut avg = vec![0.0; d];
        let mut used = 0usize;
        for tok in occ {
            if let Some(v) = vectors.get(tok) {
                for (a, x) in avg.iter_mut().zip(v.entries()) {
                    *a += x;
                }
                used += 1;
            }
        }
        if used == 0 {
            continue;
        }
        let norm = avg.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let weight = match weights {
            OccurrenceWeights::Uniform => 1.0,
            OccurrenceWeights::ContextFrequency => used as f64,
            OccurrenceWeights::Explicit(w) => w[i],
        };
        if weight > 0.0 {
            contexts.push((weight, avg.into_iter().map(|x| x / norm).collect()));
        }
    }
    let total: f64 = contexts.iter().map(|(w, _)| w).sum();
    if contexts.is_empty() || !(total > 0.0) {
        return Err(Error::Empty("no usable occurrences".into()));
    }
    let mut rho = Matrix::zeros(d, d);
    for (w, c) in &contexts {
        let p = w / total;
        for i in 0..d {
            if c[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                rho[(i, j)] += p * c[i] * c[j];
            }
        }
    }
    DensityMatrix::from_psd("", rho, 0.0)
}

//! Relational verb matrices `Σᵢ nᵢ ⊗ (v ⊙ nᵢ)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::VectorStore;
use crate::composition::Relation;
use crate::error::{Error, Result};
use crate::tensor::{hadamard, Matrix, WordVector};

/// Relative tolerance of the recomputation check.
const RECOMPUTE_TOL: f64 = 1e-12;

/// A verb as the sum over its argument nouns `nᵢ` of `nᵢ ⊗ (v ⊙ nᵢ)`, laid
/// out as `M[k][s] = Σᵢ nᵢ[k] (v ⊙ nᵢ)[s]` (noun index first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationalVerbMatrix {
    pub label: String,
    matrix: Matrix,
    verb_vector: Option<WordVector>,
    argument_vectors: Vec<WordVector>,
}

impl RelationalVerbMatrix {
    pub fn build(verb: WordVector, arguments: Vec<WordVector>) -> Result<Self> {
        if arguments.is_empty() {
            return Err(Error::MissingVerbData(verb.label.clone()));
        }
        let matrix = assemble(&verb, &arguments)?;
        Ok(RelationalVerbMatrix {
            label: verb.label.clone(),
            matrix,
            verb_vector: Some(verb),
            argument_vectors: arguments,
        })
    }

    /// A stored matrix without constituents; phrases use `Mᵀ n`.
    pub fn from_matrix(label: impl Into<String>, matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                got: matrix.cols(),
            });
        }
        Ok(RelationalVerbMatrix {
            label: label.into(),
            matrix,
            verb_vector: None,
            argument_vectors: Vec::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn verb_vector(&self) -> Option<&WordVector> {
        self.verb_vector.as_ref()
    }

    pub fn argument_vectors(&self) -> &[WordVector] {
        &self.argument_vectors
    }

    pub fn constituents(&self) -> Option<(&WordVector, &[WordVector])> {
        self.verb_vector
            .as_ref()
            .map(|v| (v, self.argument_vectors.as_slice()))
    }

    /// A zero matrix composes every noun to zero.
    pub fn is_degenerate(&self) -> bool {
        self.matrix.max_abs() == 0.0
    }

    /// Reassembles from constituents and compares; matrices without
    /// constituents pass trivially.
    pub fn recompute_check(&self) -> bool {
        match self.constituents() {
            None => true,
            Some((v, args)) => match assemble(v, args) {
                Ok(m) => {
                    let scale = self.matrix.max_abs().max(1.0);
                    m.sub(&self.matrix)
                        .map(|d| d.max_abs() <= RECOMPUTE_TOL * scale)
                        .unwrap_or(false)
                }
                Err(_) => false,
            },
        }
    }
}

fn assemble(v: &WordVector, args: &[WordVector]) -> Result<Matrix> {
    let d = v.dim();
    let mut m = Matrix::zeros(d, d);
    for n in args {
        let vn = hadamard(v, n)?;
        for (k, &nk) in n.entries().iter().enumerate() {
            if nk == 0.0 {
                continue;
            }
            for (s, &x) in vn.entries().iter().enumerate() {
                m[(k, s)] += nk * x;
            }
        }
    }
    Ok(m)
}

pub fn build_relational_verb(verb: &WordVector, arguments: &[WordVector]) -> Result<RelationalVerbMatrix> {
    RelationalVerbMatrix::build(verb.clone(), arguments.to_vec())
}

/// One line of a dependency file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub verb: String,
    pub relation: Relation,
    pub noun: String,
    pub count: u64,
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}", self.verb, self.relation, self.noun, self.count)
    }
}

/// Distinct nouns observed with `verb` under `relation`, sorted.
pub fn verb_arguments(deps: &[Dependency], verb: &str, relation: Relation) -> Vec<String> {
    let set: BTreeSet<&str> = deps
        .iter()
        .filter(|d| d.verb == verb && d.relation == relation && d.count > 0)
        .map(|d| d.noun.as_str())
        .collect();
    set.into_iter().map(String::from).collect()
}

/// One matrix per verb in `verbs` that has vectors for itself and at least
/// one argument. Verbs without usable data are returned separately.
pub fn build_verb_matrices(
    store: &VectorStore,
    deps: &[Dependency],
    verbs: &[String],
    relation: Relation,
) -> (Vec<RelationalVerbMatrix>, Vec<(String, Error)>) {
    let mut built = Vec::new();
    let mut skipped = Vec::new();
    for verb in verbs {
        let result = store.require(verb).and_then(|v| {
            let args: Vec<WordVector> = verb_arguments(deps, verb, relation)
                .iter()
                .filter_map(|n| store.get(n).cloned())
                .collect();
            RelationalVerbMatrix::build(v.clone().with_label(verb.clone()), args)
        });
        match result {
            Ok(m) => built.push(m.with_label(format!("{verb}:{relation}"))),
            Err(e) => skipped.push((verb.clone(), e)),
        }
    }
    (built, skipped)
}

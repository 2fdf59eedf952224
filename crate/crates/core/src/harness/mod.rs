//! Entailment experiments: score phrase pairs under each model, correlate
//! with human judgements and classify with an informedness-optimal threshold.

mod dataset;
mod experiment;
mod metrics;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use dataset::{
    load_dataset, load_predictions, parse_dataset, parse_predictions, Phrase, PhraseEntailmentRecord,
    StoredPrediction,
};
pub use experiment::{
    run_experiment, run_with_store, EvaluationReport, ExperimentConfig, ExperimentOutput, ModelReport,
    ThresholdMode, SCORE_DIRECTION,
};
pub use metrics::{
    average_ranks, binarize_gold, classification_metrics, optimize_threshold, pearson, spearman,
    threshold_candidates, ClassificationMetrics, Confusion, GOLD_BOUNDARY,
};

use crate::composition::{compose_additive, compose_multiplicative, compose_phrase_density, compose_phrase_vector};
use crate::error::{Error, Result};
use crate::measures::{representativeness_kl_with, representativeness_vn_with, Representativeness, Tolerances};
use crate::model_build::{RelationalVerbMatrix, VectorStore};
use crate::tensor::{normalize_l1, DensityMatrix, WordVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    BaselineVerb,
    CategoricalKl,
    CategoricalVn,
    AdditiveKl,
    MultiplicativeKl,
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::BaselineVerb,
        Model::CategoricalKl,
        Model::CategoricalVn,
        Model::AdditiveKl,
        Model::MultiplicativeKl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::BaselineVerb => "baseline_verb",
            Model::CategoricalKl => "categorical_kl",
            Model::CategoricalVn => "categorical_vn",
            Model::AdditiveKl => "additive_kl",
            Model::MultiplicativeKl => "multiplicative_kl",
        }
    }

    pub fn parse(s: &str) -> Result<Model> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model `{s}`")))
    }

    /// Comma-separated list; `all` selects every model.
    pub fn parse_list(s: &str) -> Result<Vec<Model>> {
        if s.trim() == "all" {
            return Ok(Model::ALL.to_vec());
        }
        let mut out: Vec<Model> = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(Model::parse)
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::InvalidArgument("no models selected".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    pub record_id: String,
    pub model: Model,
    pub score: f64,
    /// A phrase composed to zero; the score is then 0.
    pub degenerate: bool,
    /// The divergence was infinite (support violation); the score is then 0.
    pub diverged: bool,
}

/// Everything the models need: word vectors, relational verb matrices
/// (keyed `verb:obj`, `verb:subj` or plain `verb`) and word densities.
#[derive(Clone, Debug, Default)]
pub struct ModelStore {
    pub vectors: VectorStore,
    pub verb_matrices: BTreeMap<String, RelationalVerbMatrix>,
    pub densities: BTreeMap<String, DensityMatrix>,
    pub tol: Tolerances,
}

impl ModelStore {
    pub fn new(vectors: VectorStore) -> Self {
        ModelStore {
            vectors,
            ..ModelStore::default()
        }
    }

    pub fn with_verb_matrices(mut self, verbs: impl IntoIterator<Item = RelationalVerbMatrix>) -> Self {
        for v in verbs {
            self.verb_matrices.insert(v.label.clone(), v);
        }
        self
    }

    pub fn with_densities(mut self, densities: impl IntoIterator<Item = DensityMatrix>) -> Self {
        for d in densities {
            self.densities.insert(d.label.clone(), d);
        }
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    fn vector(&self, word: &str) -> Result<&WordVector> {
        self.vectors.require(word)
    }

    fn verb_matrix(&self, p: &Phrase<'_>) -> Result<&RelationalVerbMatrix> {
        let keyed = format!("{}:{}", p.verb, p.order.relation());
        self.verb_matrices
            .get(&keyed)
            .or_else(|| self.verb_matrices.get(p.verb))
            .ok_or_else(|| Error::MissingVerbData(keyed))
    }

    fn density(&self, word: &str) -> Result<&DensityMatrix> {
        self.densities
            .get(word)
            .ok_or_else(|| Error::MissingWord(format!("{word} (density)")))
    }
}

enum Composed<T> {
    Value(T),
    Degenerate,
}

fn degenerate_ok<T>(r: Result<T>) -> Result<Composed<T>> {
    match r {
        Ok(x) => Ok(Composed::Value(x)),
        Err(Error::DegeneratePhrase(_)) | Err(Error::Degenerate(_)) => Ok(Composed::Degenerate),
        Err(e) => Err(e),
    }
}

fn phrase_vector(model: Model, p: &Phrase<'_>, store: &ModelStore) -> Result<Composed<WordVector>> {
    let v = store.vector(p.verb)?;
    match model {
        Model::BaselineVerb => degenerate_ok(normalize_l1(v)),
        Model::CategoricalKl => {
            let n = store.vector(p.noun)?;
            degenerate_ok(compose_phrase_vector(store.verb_matrix(p)?, n, p.order))
        }
        Model::AdditiveKl => degenerate_ok(compose_additive(v, store.vector(p.noun)?)),
        Model::MultiplicativeKl => degenerate_ok(compose_multiplicative(v, store.vector(p.noun)?)),
        Model::CategoricalVn => unreachable!("density model"),
    }
}

/// `R(lhs ‖ rhs)` under `model`: the representativeness of the entailing
/// phrase within the entailed one.
pub fn score_pair(record: &PhraseEntailmentRecord, model: Model, store: &ModelStore) -> Result<ModelPrediction> {
    let (lhs, rhs) = (record.lhs(), record.rhs());
    let rep: Option<Representativeness> = match model {
        Model::CategoricalVn => {
            let compose = |p: &Phrase<'_>| -> Result<Composed<DensityMatrix>> {
                degenerate_ok(compose_phrase_density(store.density(p.verb)?, store.density(p.noun)?))
            };
            match (compose(&lhs)?, compose(&rhs)?) {
                (Composed::Value(a), Composed::Value(b)) => Some(representativeness_vn_with(&a, &b, store.tol)?),
                _ => None,
            }
        }
        _ => match (phrase_vector(model, &lhs, store)?, phrase_vector(model, &rhs, store)?) {
            (Composed::Value(a), Composed::Value(b)) => {
                Some(representativeness_kl_with(&a, &b, store.tol.eig)?)
            }
            _ => None,
        },
    };
    Ok(match rep {
        Some(r) => ModelPrediction {
            record_id: record.id.clone(),
            model,
            score: r.value,
            degenerate: false,
            diverged: r.diverged,
        },
        None => ModelPrediction {
            record_id: record.id.clone(),
            model,
            score: 0.0,
            degenerate: true,
            diverged: false,
        },
    })
}

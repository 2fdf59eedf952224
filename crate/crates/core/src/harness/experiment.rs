//! Config-driven experiment runs and their reports.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{load_dataset, load_predictions, PhraseEntailmentRecord};
use super::metrics::{binarize_gold, classification_metrics, optimize_threshold, spearman, ClassificationMetrics};
use super::{score_pair, Model, ModelPrediction, ModelStore};
use crate::composition::Relation;
use crate::error::{parse_err, Error, Result};
use crate::measures::Tolerances;
use crate::model_build::io::{load_densities, load_dependencies, load_vectors, load_verb_matrices};
use crate::model_build::build_verb_matrices;

/// Header line stating how pairs are scored.
pub const SCORE_DIRECTION: &str = "score = R(lhs || rhs) for lhs |- rhs (entailing phrase first)";

/// Inter-annotator agreement quoted for the original human study; cited, not computed.
const UPPER_BOUND: f64 = 0.66;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThresholdMode {
    Optimize,
    Fixed(f64),
}

impl ThresholdMode {
    pub fn parse(s: &str) -> Result<ThresholdMode> {
        let s = s.trim();
        if s == "optimize" {
            return Ok(ThresholdMode::Optimize);
        }
        s.strip_prefix("fixed:")
            .and_then(|t| t.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite())
            .map(ThresholdMode::Fixed)
            .ok_or_else(|| Error::InvalidArgument(format!("threshold mode `{s}` is not optimize or fixed:<θ>")))
    }

    fn describe(self) -> String {
        match self {
            ThresholdMode::Optimize => "optimize".into(),
            ThresholdMode::Fixed(t) => format!("fixed:{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub vectors: Option<PathBuf>,
    pub verb_matrices: Option<PathBuf>,
    pub dependencies: Option<PathBuf>,
    pub densities: Option<PathBuf>,
    /// Stored scores replace model computation entirely.
    pub predictions: Option<PathBuf>,
    pub models: Vec<Model>,
    pub thresholds: ThresholdMode,
    pub model_thresholds: BTreeMap<Model, ThresholdMode>,
    pub seed: u64,
    pub tol: Tolerances,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            dataset: dataset.into(),
            vectors: None,
            verb_matrices: None,
            dependencies: None,
            densities: None,
            predictions: None,
            models: Model::ALL.to_vec(),
            thresholds: ThresholdMode::Optimize,
            model_thresholds: BTreeMap::new(),
            seed: 0,
            tol: Tolerances::default(),
        }
    }

    /// `key = value` lines; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut dataset = None;
        let mut cfg = ExperimentConfig::new("");
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(ln, 1, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let eq = raw.find('=').unwrap_or(0);
            let vcol = raw.len() - raw[eq + 1..].trim_start().len() + 1;
            let bad = |e: Error| parse_err(ln, vcol, e.to_string());
            let path = || base.join(value);
            match key.replace('-', "_").as_str() {
                "dataset" => dataset = Some(path()),
                "vectors" => cfg.vectors = Some(path()),
                "verb_matrices" => cfg.verb_matrices = Some(path()),
                "dependencies" => cfg.dependencies = Some(path()),
                "densities" => cfg.densities = Some(path()),
                "predictions" => cfg.predictions = Some(path()),
                "models" => cfg.models = Model::parse_list(value).map_err(bad)?,
                "thresholds_mode" | "thresholds" => cfg.thresholds = ThresholdMode::parse(value).map_err(bad)?,
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| parse_err(ln, vcol, format!("bad seed `{value}`")))?
                }
                "tol_support" => cfg.tol.support = positive(value).ok_or_else(|| parse_err(ln, vcol, "bad tolerance"))?,
                "tol_eig" => cfg.tol.eig = positive(value).ok_or_else(|| parse_err(ln, vcol, "bad tolerance"))?,
                k => match k.strip_prefix("threshold.") {
                    Some(m) => {
                        let model = Model::parse(m).map_err(|e| parse_err(ln, 1, e.to_string()))?;
                        cfg.model_thresholds.insert(model, ThresholdMode::parse(value).map_err(bad)?);
                    }
                    None => return Err(parse_err(ln, 1, format!("unknown key `{key}`"))),
                },
            }
        }
        cfg.dataset = dataset.ok_or_else(|| Error::InvalidArgument("config has no `dataset`".into()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        ExperimentConfig::parse(&fs::read_to_string(path)?, base)
    }

    pub fn threshold_for(&self, model: Model) -> ThresholdMode {
        self.model_thresholds.get(&model).copied().unwrap_or(self.thresholds)
    }

    /// Settings echoed in the report; paths are reduced to file names so
    /// reports do not depend on where the inputs live.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let name = |p: &Path| {
            p.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default()
        };
        let mut m = BTreeMap::new();
        m.insert("dataset".into(), name(&self.dataset));
        for (k, v) in [
            ("vectors", &self.vectors),
            ("verb_matrices", &self.verb_matrices),
            ("dependencies", &self.dependencies),
            ("densities", &self.densities),
            ("predictions", &self.predictions),
        ] {
            if let Some(p) = v {
                m.insert(k.into(), name(p));
            }
        }
        m.insert(
            "models".into(),
            self.models.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
        );
        m.insert("thresholds_mode".into(), self.thresholds.describe());
        for (model, mode) in &self.model_thresholds {
            m.insert(format!("threshold.{model}"), mode.describe());
        }
        m.insert("seed".into(), self.seed.to_string());
        m.insert("tol_eig".into(), format!("{:e}", self.tol.eig));
        m.insert("tol_support".into(), format!("{:e}", self.tol.support));
        m
    }
}

fn positive(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| *x > 0.0 && x.is_finite())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub pairs: usize,
    pub scored: usize,
    pub excluded: usize,
    pub positives: usize,
    pub negatives: usize,
    pub at_boundary: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: Model,
    pub spearman_rho: Option<f64>,
    pub threshold_mode: ThresholdMode,
    pub metrics: Option<ClassificationMetrics>,
    pub degenerate: usize,
    pub diverged: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub score_direction: String,
    pub upper_bound: f64,
    pub dataset: DatasetStats,
    pub models: Vec<ModelReport>,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

impl EvaluationReport {
    pub fn model(&self, m: Model) -> Option<&ModelReport> {
        self.models.iter().find(|r| r.model == m)
    }

    pub fn to_text(&self) -> String {
        let d = &self.dataset;
        let mut out = String::new();
        let _ = writeln!(out, "Phrase entailment evaluation");
        let _ = writeln!(out, "{}", self.score_direction);
        let _ = writeln!(
            out,
            "pairs: {} ({} scored, {} excluded); gold: {} positive, {} negative, {} at the 4.0 boundary (negative)",
            d.pairs, d.scored, d.excluded, d.positives, d.negatives, d.at_boundary
        );
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<18} {:>8} {:>8} {:>8} {:>8} {:>10} {:>6} {:>6}",
            "model", "rho", "Inf", "F1", "Acc", "threshold", "degen", "diverg"
        );
        for m in &self.models {
            let metrics = m.metrics.as_ref();
            let _ = writeln!(
                out,
                "{:<18} {:>8} {:>8} {:>8} {:>8} {:>10} {:>6} {:>6}",
                m.model.name(),
                opt(m.spearman_rho),
                opt(metrics.map(|x| x.informedness)),
                opt(metrics.map(|x| x.f1)),
                opt(metrics.map(|x| x.accuracy)),
                opt(metrics.map(|x| x.threshold)),
                m.degenerate,
                m.diverged
            );
        }
        let _ = writeln!(out, "{:<18} {:>8.4}", "upper bound", self.upper_bound);
        let _ = writeln!(out);
        let _ = writeln!(out, "config:");
        for (k, v) in &self.config {
            let _ = writeln!(out, "  {k} = {v}");
        }
        if !self.notes.is_empty() {
            let _ = writeln!(out, "notes:");
            for n in &self.notes {
                let _ = writeln!(out, "  - {n}");
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub report: EvaluationReport,
    /// Scored records in dataset order.
    pub records: Vec<PhraseEntailmentRecord>,
    /// `predictions[r][m]` for record `r` and the `m`-th configured model.
    pub predictions: Vec<Vec<ModelPrediction>>,
    pub gold: Vec<bool>,
}

fn tf(b: bool) -> &'static str {
    if b {
        "T"
    } else {
        "F"
    }
}

impl ExperimentOutput {
    /// Per-model labels at the reported thresholds (`None` when unavailable).
    pub fn labels(&self, model: Model) -> Option<Vec<bool>> {
        let col = self.report.models.iter().position(|r| r.model == model)?;
        let t = self.report.models[col].metrics.as_ref()?.threshold;
        Some(self.predictions.iter().map(|row| row[col].score > t).collect())
    }

    /// One row per pair: gold, then score and label for every model.
    pub fn predictions_tsv(&self) -> String {
        let mut out = format!("# {SCORE_DIRECTION}\nid\tpair\thuman_score\tgold");
        for m in &self.report.models {
            let t = opt(m.metrics.as_ref().map(|x| x.threshold));
            let _ = write!(out, "\t{}\t{}({t})", m.model, m.model);
        }
        out.push('\n');
        for (r, rec) in self.records.iter().enumerate() {
            let _ = write!(out, "{}\t{}\t{:.2}\t{}", rec.id, rec.display(), rec.human_score, tf(self.gold[r]));
            for (c, m) in self.report.models.iter().enumerate() {
                let p = &self.predictions[r][c];
                let label = m
                    .metrics
                    .as_ref()
                    .map(|x| tf(p.score > x.threshold))
                    .unwrap_or("-");
                let _ = write!(out, "\t{:.6}\t{label}", p.score);
            }
            out.push('\n');
        }
        out
    }
}

/// Loads models (or stored predictions) and the dataset named by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let records = load_dataset(&cfg.dataset)?;
    if let Some(p) = &cfg.predictions {
        let stored = load_predictions(p)?;
        let table: HashMap<(String, Model), f64> = stored
            .into_iter()
            .map(|s| ((s.id, s.model), s.score))
            .collect();
        return evaluate(cfg, records, |rec, model| {
            table
                .get(&(rec.id.clone(), model))
                .map(|&score| ModelPrediction {
                    record_id: rec.id.clone(),
                    model,
                    score,
                    degenerate: score == 0.0,
                    diverged: false,
                })
                .ok_or_else(|| Error::MissingWord(format!("stored prediction for {model}")))
        });
    }

    let vectors_path = cfg
        .vectors
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("config needs `vectors` or `predictions`".into()))?;
    let vectors = load_vectors(vectors_path)?;
    let mut store = ModelStore::new(vectors).with_tolerances(cfg.tol);
    if let Some(p) = &cfg.verb_matrices {
        store = store.with_verb_matrices(load_verb_matrices(p)?);
    }
    if let Some(p) = &cfg.dependencies {
        let deps = load_dependencies(p)?;
        for relation in [Relation::Object, Relation::Subject] {
            let verbs: BTreeSet<String> = records
                .iter()
                .flat_map(|r| [r.lhs(), r.rhs()])
                .filter(|p| p.order.relation() == relation)
                .map(|p| p.verb.to_string())
                .filter(|v| !store.verb_matrices.contains_key(&format!("{v}:{relation}")))
                .collect();
            let verbs: Vec<String> = verbs.into_iter().collect();
            let (built, _) = build_verb_matrices(&store.vectors, &deps, &verbs, relation);
            store = store.with_verb_matrices(built);
        }
    }
    if let Some(p) = &cfg.densities {
        store = store.with_densities(load_densities(p)?);
    }
    run_with_store(cfg, records, &store)
}

/// Scores `records` with the models in `store`.
pub fn run_with_store(
    cfg: &ExperimentConfig,
    records: Vec<PhraseEntailmentRecord>,
    store: &ModelStore,
) -> Result<ExperimentOutput> {
    evaluate(cfg, records, |rec, model| score_pair(rec, model, store))
}

fn evaluate<F>(cfg: &ExperimentConfig, records: Vec<PhraseEntailmentRecord>, score: F) -> Result<ExperimentOutput>
where
    F: Fn(&PhraseEntailmentRecord, Model) -> Result<ModelPrediction> + Sync,
{
    let models = &cfg.models;
    let rows: Vec<std::result::Result<Vec<ModelPrediction>, String>> = records
        .par_iter()
        .map(|rec| {
            models
                .iter()
                .map(|&m| score(rec, m).map_err(|e| format!("pair {} excluded ({m}): {e}", rec.id)))
                .collect()
        })
        .collect();

    let total = records.len();
    let mut notes = Vec::new();
    let mut kept = Vec::new();
    let mut predictions = Vec::new();
    for (rec, row) in records.into_iter().zip(rows) {
        match row {
            Ok(p) => {
                kept.push(rec);
                predictions.push(p);
            }
            Err(e) => notes.push(e),
        }
    }
    let excluded = total - kept.len();
    if 2 * excluded > total {
        return Err(Error::Experiment(format!(
            "{excluded} of {total} pairs could not be scored; first: {}",
            notes.first().map(String::as_str).unwrap_or("")
        )));
    }

    let human: Vec<f64> = kept.iter().map(|r| r.human_score).collect();
    let (gold, at_boundary) = binarize_gold(&human);
    let positives = gold.iter().filter(|&&g| g).count();

    let mut reports = Vec::new();
    for (c, &model) in models.iter().enumerate() {
        let scores: Vec<f64> = predictions.iter().map(|row| row[c].score).collect();
        let rho = match spearman(&scores, &human) {
            Ok(r) => Some(r),
            Err(e) => {
                notes.push(format!("{model}: spearman undefined ({e})"));
                None
            }
        };
        let mode = cfg.threshold_for(model);
        let threshold = match mode {
            ThresholdMode::Fixed(t) => Some(t),
            ThresholdMode::Optimize => match optimize_threshold(&scores, &gold) {
                Ok((t, _)) => Some(t),
                Err(e) => {
                    notes.push(format!("{model}: no threshold ({e})"));
                    None
                }
            },
        };
        let metrics = match threshold {
            Some(t) => {
                let m = classification_metrics(&scores, &gold, t)?;
                if m.precision_undefined {
                    notes.push(format!("{model}: no predicted positives, F1 reported as 0"));
                }
                Some(m)
            }
            None => None,
        };
        reports.push(ModelReport {
            model,
            spearman_rho: rho,
            threshold_mode: mode,
            metrics,
            degenerate: predictions.iter().filter(|row| row[c].degenerate).count(),
            diverged: predictions.iter().filter(|row| row[c].diverged).count(),
        });
    }

    let report = EvaluationReport {
        score_direction: SCORE_DIRECTION.to_string(),
        upper_bound: UPPER_BOUND,
        dataset: DatasetStats {
            pairs: total,
            scored: kept.len(),
            excluded,
            positives,
            negatives: kept.len() - positives,
            at_boundary,
        },
        models: reports,
        seed: cfg.seed,
        config: cfg.echo(),
        notes,
    };
    Ok(ExperimentOutput {
        report,
        records: kept,
        predictions,
        gold,
    })
}

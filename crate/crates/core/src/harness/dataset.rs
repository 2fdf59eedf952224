//! Phrase-pair datasets and stored predictions.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Model;
use crate::composition::WordOrder;
use crate::error::{parse_err, Error, Result};

/// `lhs ⊢ rhs` candidate with its averaged 1–7 human score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhraseEntailmentRecord {
    pub id: String,
    pub lhs_tokens: Vec<String>,
    pub lhs_order: WordOrder,
    pub rhs_tokens: Vec<String>,
    pub rhs_order: WordOrder,
    pub human_score: f64,
    pub human_norm: f64,
}

impl PhraseEntailmentRecord {
    pub fn new(
        id: impl Into<String>,
        lhs: (&str, WordOrder),
        rhs: (&str, WordOrder),
        human_score: f64,
    ) -> Result<Self> {
        let split = |s: &str| -> Result<Vec<String>> {
            let t: Vec<String> = s.split_whitespace().map(String::from).collect();
            if t.len() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "phrase `{s}` must have exactly two tokens"
                )));
            }
            Ok(t)
        };
        if !(1.0..=7.0).contains(&human_score) {
            return Err(Error::InvalidArgument(format!(
                "human score {human_score} outside [1, 7]"
            )));
        }
        Ok(PhraseEntailmentRecord {
            id: id.into(),
            lhs_tokens: split(lhs.0)?,
            lhs_order: lhs.1,
            rhs_tokens: split(rhs.0)?,
            rhs_order: rhs.1,
            human_score,
            human_norm: (human_score - 1.0) / 6.0,
        })
    }

    pub fn lhs(&self) -> Phrase<'_> {
        Phrase::new(&self.lhs_tokens, self.lhs_order)
    }

    pub fn rhs(&self) -> Phrase<'_> {
        Phrase::new(&self.rhs_tokens, self.rhs_order)
    }

    pub fn display(&self) -> String {
        format!("{} ⊢ {}", self.lhs_tokens.join(" "), self.rhs_tokens.join(" "))
    }
}

/// A two-word phrase split into its verb and noun.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Phrase<'a> {
    pub verb: &'a str,
    pub noun: &'a str,
    pub order: WordOrder,
}

impl<'a> Phrase<'a> {
    fn new(tokens: &'a [String], order: WordOrder) -> Self {
        let v = order.verb_position();
        Phrase {
            verb: &tokens[v],
            noun: &tokens[1 - v],
            order,
        }
    }
}

/// `id<TAB>lhs<TAB>lhs_order<TAB>rhs<TAB>rhs_order<TAB>human_score`; a first
/// line starting with `id` is a header.
pub fn parse_dataset(text: &str) -> Result<Vec<PhraseEntailmentRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (out.is_empty() && line.starts_with("id\t")) {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 6 {
            return Err(parse_err(ln, 1, format!("expected 6 tab-separated fields, found {}", parts.len())));
        }
        let col = |k: usize| parts[..k].iter().map(|p| p.len() + 1).sum::<usize>() + 1;
        let order = |k: usize| {
            WordOrder::parse(parts[k]).map_err(|e| parse_err(ln, col(k), e.to_string()))
        };
        let score: f64 = parts[5]
            .trim()
            .parse()
            .map_err(|_| parse_err(ln, col(5), format!("expected a score, found `{}`", parts[5])))?;
        let record = PhraseEntailmentRecord::new(parts[0], (parts[1], order(2)?), (parts[3], order(4)?), score)
            .map_err(|e| parse_err(ln, 1, e.to_string()))?;
        out.push(record);
    }
    if out.is_empty() {
        return Err(Error::Empty("dataset has no records".into()));
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<PhraseEntailmentRecord>> {
    parse_dataset(&fs::read_to_string(path)?)
}

/// A precomputed score: `id<TAB>model<TAB>score`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredPrediction {
    pub id: String,
    pub model: Model,
    pub score: f64,
}

pub fn parse_predictions(text: &str) -> Result<Vec<StoredPrediction>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(parse_err(ln, 1, "expected `id<TAB>model<TAB>score`"));
        }
        let model = Model::parse(parts[1])
            .map_err(|e| parse_err(ln, parts[0].len() + 2, e.to_string()))?;
        let col = parts[0].len() + parts[1].len() + 3;
        let score: f64 = parts[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(ln, col, format!("expected a score, found `{}`", parts[2])))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(parse_err(ln, col, format!("score {score} outside [0, 1]")));
        }
        out.push(StoredPrediction {
            id: parts[0].to_string(),
            model,
            score,
        });
    }
    Ok(out)
}

pub fn load_predictions(path: &Path) -> Result<Vec<StoredPrediction>> {
    parse_predictions(&fs::read_to_string(path)?)
}

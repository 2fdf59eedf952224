//! Rank correlation and binary classification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gold scores strictly above this are entailments.
pub const GOLD_BOUNDARY: f64 = 4.0;

/// 1-based ranks, ties sharing the average of the positions they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("a sequence is constant".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of the average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "spearman needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite score".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Labels and the number of scores sitting exactly on the boundary.
pub fn binarize_gold(scores: &[f64]) -> (Vec<bool>, usize) {
    let labels = scores.iter().map(|&s| s > GOLD_BOUNDARY).collect();
    let on_boundary = scores.iter().filter(|&&s| s == GOLD_BOUNDARY).count();
    (labels, on_boundary)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    /// Predicts positive when `score > threshold`.
    pub fn at(scores: &[f64], gold: &[bool], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (&s, &g) in scores.iter().zip(gold) {
            match (s > threshold, g) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    /// `TPR + TNR − 1`; a missing class contributes a rate of 0.
    pub fn informedness(&self) -> f64 {
        let rate = |a: usize, n: usize| if n == 0 { 0.0 } else { a as f64 / n as f64 };
        rate(self.tp, self.positives()) + rate(self.tn, self.negatives()) - 1.0
    }

    /// Zero when precision or recall is undefined.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if self.tp == 0 || denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    pub fn accuracy(&self) -> f64 {
        let n = self.positives() + self.negatives();
        if n == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / n as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub threshold: f64,
    pub informedness: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub confusion: Confusion,
    /// Nothing was predicted positive, so precision (and F1) is undefined.
    pub precision_undefined: bool,
}

pub fn classification_metrics(scores: &[f64], gold: &[bool], threshold: f64) -> Result<ClassificationMetrics> {
    if scores.len() != gold.len() {
        return Err(Error::DimensionMismatch {
            expected: gold.len(),
            got: scores.len(),
        });
    }
    let c = Confusion::at(scores, gold, threshold);
    Ok(ClassificationMetrics {
        threshold,
        informedness: c.informedness(),
        f1: c.f1(),
        accuracy: c.accuracy(),
        confusion: c,
        precision_undefined: c.tp + c.fp == 0,
    })
}

/// Midpoints between consecutive distinct sorted scores, plus `min − 1`
/// (everything positive) and `max` (everything negative), ascending.
pub fn threshold_candidates(scores: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = scores.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    let mut out = Vec::with_capacity(s.len() + 1);
    if let (Some(&lo), Some(&hi)) = (s.first(), s.last()) {
        out.push(lo - 1.0);
        out.extend(s.windows(2).map(|p| p[0] + (p[1] - p[0]) / 2.0));
        out.push(hi);
    }
    out
}

/// Threshold maximising informedness; ties go to the smallest threshold.
pub fn optimize_threshold(scores: &[f64], gold: &[bool]) -> Result<(f64, f64)> {
    if scores.len() != gold.len() {
        return Err(Error::DimensionMismatch {
            expected: gold.len(),
            got: scores.len(),
        });
    }
    if !gold.iter().any(|&g| g) || gold.iter().all(|&g| g) {
        return Err(Error::SingleClass);
    }
    let mut best: Option<(f64, f64)> = None;
    for t in threshold_candidates(scores) {
        let inf = Confusion::at(scores, gold, t).informedness();
        if best.is_none_or(|(_, b)| inf > b) {
            best = Some((t, inf));
        }
    }
    best.ok_or_else(|| Error::Empty("no scores".into()))
}

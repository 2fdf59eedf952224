//! Symmetric-window co-occurrence counting within sentences.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::strip_pos;
use crate::error::{Error, Result};

/// Lines per shard when counting in parallel.
const SHARD_LINES: usize = 2048;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceCounts {
    pub vocab: Vec<String>,
    pub context_vocab: Vec<String>,
    pub window: usize,
    /// Row-major `vocab × context_vocab`.
    counts: Vec<u64>,
}

impl CooccurrenceCounts {
    pub fn from_dense(
        vocab: Vec<String>,
        context_vocab: Vec<String>,
        window: usize,
        counts: Vec<u64>,
    ) -> Result<Self> {
        let expected = vocab.len() * context_vocab.len();
        if counts.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: counts.len(),
            });
        }
        Ok(CooccurrenceCounts {
            vocab,
            context_vocab,
            window,
            counts,
        })
    }

    pub fn rows(&self) -> usize {
        self.vocab.len()
    }

    pub fn cols(&self) -> usize {
        self.context_vocab.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: u64) {
        let cols = self.cols();
        self.counts[i * cols + j] = c;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_marginals(&self) -> Vec<u64> {
        self.counts.chunks(self.cols().max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginals(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.cols()];
        for row in self.counts.chunks(self.cols().max(1)) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// Nonzero cells in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        let cols = self.cols();
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(k, &c)| (k / cols, k % cols, c))
    }

    /// Count of a (word, context) pair by label.
    pub fn count(&self, word: &str, context: &str) -> Option<u64> {
        let i = self.vocab.iter().position(|w| w == word)?;
        let j = self.context_vocab.iter().position(|c| c == context)?;
        Some(self.get(i, j))
    }
}

struct Lookup<'a> {
    map: HashMap<&'a str, usize>,
}

impl<'a> Lookup<'a> {
    fn new(words: &'a [String]) -> Self {
        let mut map = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            map.entry(w.as_str()).or_insert(i);
        }
        Lookup { map }
    }

    /// Exact token first, then the token with its POS tag removed.
    fn find(&self, token: &str) -> Option<usize> {
        self.map
            .get(token)
            .or_else(|| self.map.get(strip_pos(token)))
            .copied()
    }
}

/// Counts, for every target token in `vocab`, the `context_vocab` tokens at
/// most `window` positions away in the same sentence (one sentence per line).
pub fn count_cooccurrences<S: AsRef<str> + Sync>(
    corpus: &[S],
    vocab: &[String],
    context_vocab: &[String],
    window: usize,
) -> Result<CooccurrenceCounts> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if vocab.is_empty() || context_vocab.is_empty() {
        return Err(Error::Empty("vocabulary".into()));
    }
    if corpus.iter().all(|l| l.as_ref().trim().is_empty()) {
        return Err(Error::Empty("corpus".into()));
    }
    let rows = Lookup::new(vocab);
    let cols = Lookup::new(context_vocab);
    let width = context_vocab.len();

    let shards: Vec<Vec<u64>> = corpus
        .par_chunks(SHARD_LINES)
        .map(|lines| {
            let mut acc = vec![0u64; vocab.len() * width];
            for line in lines {
                let tokens: Vec<&str> = line.as_ref().split_whitespace().collect();
                let r: Vec<Option<usize>> = tokens.iter().map(|t| rows.find(t)).collect();
                let c: Vec<Option<usize>> = tokens.iter().map(|t| cols.find(t)).collect();
                for (i, ri) in r.iter().enumerate() {
                    let Some(ri) = *ri else { continue };
                    let lo = i.saturating_sub(window);
                    let hi = (i + window).min(tokens.len() - 1);
                    for (j, cj) in c.iter().enumerate().take(hi + 1).skip(lo) {
                        if j == i {
                            continue;
                        }
                        if let Some(cj) = *cj {
                            acc[ri * width + cj] += 1;
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let mut counts = vec![0u64; vocab.len() * width];
    for shard in shards {
        for (a, b) in counts.iter_mut().zip(shard) {
            *a += b;
        }
    }
    Ok(CooccurrenceCounts {
        vocab: vocab.to_vec(),
        context_vocab: context_vocab.to_vec(),
        window,
        counts,
    })
}

/// The `top` most frequent tokens (POS tags kept), ties broken alphabetically.
pub fn frequent_words<S: AsRef<str>>(corpus: &[S], top: usize) -> Vec<String> {
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for line in corpus {
        for t in line.as_ref().split_whitespace() {
            *freq.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.into_iter().take(top).map(|(w, _)| w.to_string()).collect()
}

/// Every occurrence of `word` (exact or POS-stripped match) with the other
/// tokens of its window.
pub fn context_occurrences<S: AsRef<str>>(corpus: &[S], word: &str, window: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for line in corpus {
        let tokens: Vec<&str> = line.as_ref().split_whitespace().collect();
        for (i, t) in tokens.iter().enumerate() {
            if *t != word && strip_pos(t) != word {
                continue;
            }
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(tokens.len() - 1);
            let ctx = (lo..=hi)
                .filter(|&j| j != i)
                .map(|j| tokens[j].to_string())
                .collect();
            out.push(ctx);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn window_of_one() {
        let v = words("a b c");
        let c = count_cooccurrences(&["a b c"], &v, &v, 1).unwrap();
        assert_eq!(c.count("b", "a"), Some(1));
        assert_eq!(c.count("b", "c"), Some(1));
        assert_eq!(c.count("b", "b"), Some(0));
        assert_eq!(c.count("a", "c"), Some(0));
    }

    #[test]
    fn both_directions() {
        let v = words("a b");
        let c = count_cooccurrences(&["a b"], &v, &v, 5).unwrap();
        assert_eq!(c.count("a", "b"), Some(1));
        assert_eq!(c.count("b", "a"), Some(1));
        assert_eq!(c.total(), 2);
    }

    #[test]
    fn sentences_are_boundaries() {
        let v = words("a b");
        let c = count_cooccurrences(&["a", "b"], &v, &v, 5).unwrap();
        assert_eq!(c.total(), 0);
    }

    #[test]
    fn pos_tagged_tokens_match_plain_vocab() {
        let v = words("cat sleeps");
        let c = count_cooccurrences(&["cat_NN sleeps_VBZ"], &v, &v, 2).unwrap();
        assert_eq!(c.count("cat", "sleeps"), Some(1));
        let tagged = words("cat_NN");
        let c = count_cooccurrences(&["cat_NN sleeps_VBZ cat_VB"], &tagged, &v, 2).unwrap();
        assert_eq!(c.count("cat_NN", "sleeps"), Some(1));
        // `cat_VB` is a context (tag stripped) but not the tagged target
        assert_eq!(c.count("cat_NN", "cat"), Some(1));
        assert_eq!(c.total(), 2);
    }

    #[test]
    fn total_is_twice_the_window_pairs() {
        let v = words("a b c d e");
        let line = "a b c d e a b";
        let c = count_cooccurrences(&[line], &v, &v, 2).unwrap();
        // pairs at distance 1 or 2 among 7 tokens: 6 + 5
        assert_eq!(c.total(), 2 * 11);
        let rows: u64 = c.row_marginals().iter().sum();
        let cols: u64 = c.col_marginals().iter().sum();
        assert_eq!(rows, c.total());
        assert_eq!(cols, c.total());
    }

    #[test]
    fn errors() {
        let v = words("a");
        assert!(matches!(count_cooccurrences::<&str>(&[], &v, &v, 5), Err(Error::Empty(_))));
        assert!(matches!(count_cooccurrences(&["a"], &[], &v, 5), Err(Error::Empty(_))));
        assert!(count_cooccurrences(&["a"], &v, &v, 0).is_err());
    }

    #[test]
    fn frequency_ranking_and_occurrences() {
        let corpus = ["b a b", "c b a"];
        assert_eq!(frequent_words(&corpus, 2), words("b a"));
        let occ = context_occurrences(&corpus, "a", 1);
        assert_eq!(occ, vec![words("b b"), words("b")]);
    }
}

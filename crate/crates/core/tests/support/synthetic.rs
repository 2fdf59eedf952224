//! Generated corpus with planted hyponym/hypernym phrase pairs.
//!
//! Every sentence is one content word next to one feature word, repeated a
//! few times. Each entailment pair draws a block of features from a shared
//! pool. The lhs noun occurs only with the first `noun_features` of them, and
//! the rhs noun splits its occurrences between those and the rest of the
//! block: a fraction `f` of them goes outside the lhs core, and the gold score
//! falls as `f` grows. Both verbs cover the whole block, the lhs verb
//! uniformly and the rhs verb with random weights, so the verbs alone carry
//! no signal. Counts are apportioned exactly, so the only noise left is in
//! the factorization.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use catent_core::composition::{Relation, WordOrder};
use catent_core::harness::{run_with_store, ExperimentConfig, ExperimentOutput, ModelStore, PhraseEntailmentRecord};
use catent_core::measures::Tolerances;
use catent_core::model_build::{
    build_density_word, build_verb_matrices, context_occurrences, count_cooccurrences, nmf, pmi_weight, Dependency,
    NmfConfig, VectorStore,
};
use catent_core::Result;

#[derive(Clone, Debug)]
pub struct PlantedConfig {
    pub pairs: usize,
    pub pool: usize,
    pub block_features: usize,
    pub noun_features: usize,
    /// Copies of the feature word in each sentence.
    pub repeats: usize,
    /// Gold levels; level `e` puts `(e + ½) / (levels + ½)` of the rhs noun
    /// outside the lhs core.
    pub levels: usize,
    /// Lower end of the rhs verb's feature weights; the upper end is 1.
    pub verb_weight_min: f64,
    pub sentences: usize,
    pub window: usize,
    pub k: usize,
    pub nmf_iter: usize,
    pub nmf_tol: f64,
    pub seed: u64,
    /// Multiplicative updates only shrink entries towards zero, so the zero
    /// cutoff sits well above the library default.
    pub tol: Tolerances,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            pairs: 32,
            pool: 16,
            block_features: 8,
            noun_features: 4,
            repeats: 2,
            levels: 4,
            verb_weight_min: 0.9,
            sentences: 5000,
            window: 5,
            k: 16,
            nmf_iter: 300,
            nmf_tol: 1e-6,
            seed: 7,
            tol: Tolerances {
                eig: 1e-6,
                ..Tolerances::default()
            },
        }
    }
}

pub struct PlantedCorpus {
    pub sentences: Vec<String>,
    pub dependencies: Vec<Dependency>,
    pub records: Vec<PhraseEntailmentRecord>,
    /// Content words then feature words.
    pub vocab: Vec<String>,
    pub features: Vec<String>,
}

struct Profile {
    word: String,
    features: Vec<String>,
    weights: Vec<f64>,
}

/// Splits `total` in proportion to `weights` by largest remainder.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let short = total - counts.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

pub fn gold_score(cfg: &PlantedConfig, level: usize) -> f64 {
    7.0 - 6.0 * level as f64 / (cfg.levels - 1) as f64
}

pub fn generate(cfg: &PlantedConfig, rng: &mut ChaCha8Rng) -> PlantedCorpus {
    let (narrow, outer) = (cfg.noun_features, cfg.block_features - cfg.noun_features);
    let mut profiles: Vec<Profile> = Vec::new();
    let mut dependencies = Vec::new();
    let mut records = Vec::new();
    let mut features: Vec<String> = Vec::new();
    for p in 0..cfg.pairs {
        let mut block: Vec<String> = rand::seq::index::sample(rng, cfg.pool, cfg.block_features)
            .into_iter()
            .map(|a| format!("f{a}"))
            .collect();
        for f in &block {
            if !features.contains(f) {
                features.push(f.clone());
            }
        }
        block.shuffle(rng);
        let e = p % cfg.levels;
        let skewed: Vec<f64> = block.iter().map(|_| rng.random_range(cfg.verb_weight_min..=1.0)).collect();
        let spread = (e as f64 + 0.5) / (cfg.levels as f64 + 0.5);
        let diluted: Vec<f64> = (0..cfg.block_features)
            .map(|i| {
                if i < narrow {
                    (1.0 - spread) / narrow as f64
                } else {
                    spread / outer as f64
                }
            })
            .collect();

        let (v_l, n_l, v_r, n_r) = (format!("va{p}"), format!("na{p}"), format!("vb{p}"), format!("nb{p}"));
        let prof = |word: &String, features: &[String], weights: Vec<f64>| Profile {
            word: word.clone(),
            features: features.to_vec(),
            weights,
        };
        profiles.push(prof(&v_l, &block, vec![1.0; block.len()]));
        profiles.push(prof(&n_l, &block[..narrow], vec![1.0; narrow]));
        profiles.push(prof(&v_r, &block, skewed));
        profiles.push(prof(&n_r, &block, diluted));
        for (verb, noun) in [(&v_l, &n_l), (&v_r, &n_r)] {
            dependencies.push(Dependency {
                verb: verb.clone(),
                relation: Relation::Object,
                noun: noun.clone(),
                count: 1,
            });
        }
        records.push(
            PhraseEntailmentRecord::new(
                format!("p{p}"),
                (&format!("{v_l} {n_l}"), WordOrder::VerbObject),
                (&format!("{v_r} {n_r}"), WordOrder::VerbObject),
                gold_score(cfg, e),
            )
            .expect("planted record is valid"),
        );
    }

    let per_word = cfg.sentences / profiles.len();
    let mut sentences = Vec::with_capacity(cfg.sentences);
    for prof in &profiles {
        let counts = apportion(per_word, &prof.weights);
        for (f, c) in prof.features.iter().zip(counts) {
            for _ in 0..c {
                let mut toks = vec![f.as_str(); cfg.repeats];
                toks.insert(rng.random_range(0..=toks.len()), &prof.word);
                sentences.push(toks.join(" "));
            }
        }
    }
    sentences.shuffle(rng);

    let mut vocab: Vec<String> = profiles.iter().map(|p| p.word.clone()).collect();
    vocab.extend(features.iter().cloned());
    PlantedCorpus {
        sentences,
        dependencies,
        records,
        vocab,
        features,
    }
}

/// Counts, PPMI, NMF, verb matrices and word densities.
pub fn build_store(cfg: &PlantedConfig, corpus: &PlantedCorpus) -> Result<ModelStore> {
    let counts = count_cooccurrences(&corpus.sentences, &corpus.vocab, &corpus.features, cfg.window)?;
    let weighted = pmi_weight(&counts)?;
    let factors = nmf(
        &weighted,
        &NmfConfig {
            max_iter: cfg.nmf_iter,
            tol: cfg.nmf_tol,
            ..NmfConfig::new(cfg.k).with_seed(cfg.seed)
        },
    )?;
    let vectors = VectorStore::from_rows(&corpus.vocab, &factors.w)?;

    let mut verbs: Vec<String> = corpus.dependencies.iter().map(|d| d.verb.clone()).collect();
    verbs.sort();
    verbs.dedup();
    let (built, skipped) = build_verb_matrices(&vectors, &corpus.dependencies, &verbs, Relation::Object);
    assert!(skipped.is_empty(), "verbs without data: {skipped:?}");

    let mut words: Vec<&str> = corpus
        .records
        .iter()
        .flat_map(|r| r.lhs_tokens.iter().chain(&r.rhs_tokens).map(String::as_str))
        .collect();
    words.sort_unstable();
    words.dedup();
    let densities = words
        .iter()
        .map(|w| {
            let occ = context_occurrences(&corpus.sentences, w, cfg.window);
            build_density_word(&occ, &vectors).map(|d| d.with_label(*w))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ModelStore::new(vectors)
        .with_tolerances(cfg.tol)
        .with_verb_matrices(built)
        .with_densities(densities))
}

/// Builds the models and evaluates all of them on the planted pairs.
pub fn run_pipeline(cfg: &PlantedConfig, corpus: &PlantedCorpus) -> Result<ExperimentOutput> {
    let store = build_store(cfg, corpus)?;
    let mut exp = ExperimentConfig::new("planted.tsv");
    exp.seed = cfg.seed;
    exp.tol = cfg.tol;
    run_with_store(&exp, corpus.records.clone(), &store)
}

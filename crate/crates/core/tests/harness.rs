mod support;

use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use rand::Rng;

use catent_core::composition::Relation;
use catent_core::harness::{
    average_ranks, optimize_threshold, parse_dataset, run_experiment, spearman, ExperimentConfig, Model,
    ThresholdMode,
};
use catent_core::measures::Tolerances;
use catent_core::model_build::io::{format_densities, format_dependencies, format_vectors};
use catent_core::model_build::Dependency;
use catent_core::tensor::{DensityMatrix, WordVector};
use support::oracles;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn arb_scores() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..25).prop_flat_map(|n| {
        let col = prop::collection::vec((0u32..12).prop_map(|x| x as f64 / 4.0), n);
        (col.clone(), col)
    })
}

proptest! {
    #[test]
    fn spearman_ignores_monotone_transforms((xs, ys) in arb_scores()) {
        prop_assume!(xs.iter().any(|&x| x != xs[0]) && ys.iter().any(|&y| y != ys[0]));
        let base = spearman(&xs, &ys).unwrap();
        let warped: Vec<f64> = xs.iter().map(|x| (3.0 * x).exp() + 1.0).collect();
        prop_assert!((spearman(&warped, &ys).unwrap() - base).abs() < 1e-12);
        prop_assert!((spearman(&ys, &xs).unwrap() - base).abs() < 1e-12);
        let flipped: Vec<f64> = xs.iter().map(|x| -x).collect();
        prop_assert!((spearman(&flipped, &ys).unwrap() + base).abs() < 1e-12);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&base));
    }

    #[test]
    fn tie_free_spearman_matches_rank_difference_formula(seed in any::<u64>(), n in 3usize..30) {
        let mut rng = support::rng(seed);
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let got = spearman(&xs, &ys).unwrap();
        prop_assert!((got - oracles::spearman_rank_difference(&xs, &ys)).abs() < 1e-12);
    }

    #[test]
    fn average_ranks_sum_like_plain_ranks((xs, _) in arb_scores()) {
        let r = average_ranks(&xs);
        let n = xs.len() as f64;
        prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                prop_assert_eq!(xs[i] < xs[j], r[i] < r[j]);
            }
        }
    }

    #[test]
    fn threshold_search_matches_brute_force(
        (scores, _) in arb_scores(),
        gold in prop::collection::vec(any::<bool>(), 25),
    ) {
        let gold = &gold[..scores.len()];
        prop_assume!(gold.iter().any(|&g| g) && gold.iter().any(|&g| !g));
        let (t, inf) = optimize_threshold(&scores, gold).unwrap();
        prop_assert!((inf - oracles::brute_force_informedness(&scores, gold)).abs() < 1e-12);
        // the returned threshold achieves the reported value
        let tp = scores.iter().zip(gold).filter(|(s, g)| **g && **s > t).count() as f64;
        let tn = scores.iter().zip(gold).filter(|(s, g)| !**g && **s <= t).count() as f64;
        let p = gold.iter().filter(|&&g| g).count() as f64;
        let n = gold.len() as f64 - p;
        prop_assert!((tp / p + tn / n - 1.0 - inf).abs() < 1e-12);
    }
}

#[test]
fn average_ranks_share_tied_positions() {
    assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
}

#[test]
fn dataset_errors_name_the_line() {
    let text = "id\tlhs\tlhs_order\trhs\trhs_order\thuman_score\n\
                a\tsee dog\tverb-object\tnotice pet\tverb-object\t5\n\
                b\tsee dog\tverb-object\tnotice pet\tsideways\t5\n";
    let err = parse_dataset(text).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn config_file_drives_stored_prediction_runs() {
    let dir = fixtures();
    let text = "dataset = snapshot_dataset.tsv\n\
                predictions = snapshot_predictions.tsv\n\
                models = categorical_kl,additive_kl\n\
                thresholds = optimize\n\
                threshold.additive_kl = fixed:0.13\n\
                seed = 3\n";
    let cfg = ExperimentConfig::parse(text, &dir).unwrap();
    assert_eq!(cfg.threshold_for(Model::AdditiveKl), ThresholdMode::Fixed(0.13));
    assert_eq!(cfg.threshold_for(Model::CategoricalKl), ThresholdMode::Optimize);

    let first = run_experiment(&cfg).unwrap();
    let second = run_experiment(&cfg).unwrap();
    assert_eq!(first.report.to_text(), second.report.to_text());
    assert_eq!(first.report.to_json().unwrap(), second.report.to_json().unwrap());
    assert_eq!(first.predictions_tsv(), second.predictions_tsv());

    assert_eq!(first.report.dataset.pairs, 6);
    assert_eq!(first.gold, [true, true, true, false, false, false]);
    // optimized threshold on the categorical scores separates the classes
    let cat = first.report.model(Model::CategoricalKl).unwrap();
    assert!((cat.metrics.unwrap().informedness - 1.0).abs() < 1e-12);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let err = ExperimentConfig::parse("dataset = x.tsv\nwindow = 3\n", &fixtures()).unwrap_err();
    assert!(err.to_string().contains("window"));
}

/// A tiny model built from files, where each verb has seen exactly the noun
/// it appears with.
#[test]
fn single_argument_verbs_reduce_categorical_to_multiplicative() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = support::rng(21);
    let phrases = [
        ("p1", "eat apple", "verb-object", "consume fruit", "verb-object", 6.0),
        ("p2", "dog bark", "subject-verb", "animal sound", "subject-verb", 5.0),
        ("p3", "read book", "verb-object", "consume fruit", "verb-object", 2.0),
        ("p4", "eat book", "verb-object", "consume fruit", "verb-object", 1.0),
    ];
    let mut dataset = String::from("id\tlhs\tlhs_order\trhs\trhs_order\thuman_score\n");
    let mut words: Vec<&str> = Vec::new();
    for (id, l, lo, r, ro, s) in phrases {
        dataset.push_str(&format!("{id}\t{l}\t{lo}\t{r}\t{ro}\t{s}\n"));
        words.extend(l.split(' ').chain(r.split(' ')));
    }
    words.sort_unstable();
    words.dedup();
    let vectors: Vec<WordVector> = words
        .iter()
        .map(|w| WordVector::new(*w, (0..4).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap())
        .collect();
    let densities: Vec<DensityMatrix> = words
        .iter()
        .map(|w| DensityMatrix::new(*w, support::random_density_matrix(&mut rng, 4, 4)).unwrap())
        .collect();
    let dep = |verb: &str, relation, noun: &str| Dependency {
        verb: verb.into(),
        relation,
        noun: noun.into(),
        count: 1,
    };
    let deps = [
        dep("eat", Relation::Object, "apple"),
        dep("consume", Relation::Object, "fruit"),
        dep("read", Relation::Object, "book"),
        dep("bark", Relation::Subject, "dog"),
        dep("sound", Relation::Subject, "animal"),
    ];
    fs::write(dir.path().join("pairs.tsv"), dataset).unwrap();
    fs::write(dir.path().join("vectors.txt"), format_vectors(4, &vectors)).unwrap();
    fs::write(dir.path().join("densities.txt"), format_densities(4, &densities)).unwrap();
    fs::write(dir.path().join("deps.tsv"), format_dependencies(&deps)).unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "dataset = pairs.tsv\nvectors = vectors.txt\ndensities = densities.txt\ndependencies = deps.tsv\n",
    )
    .unwrap();

    let cfg = ExperimentConfig::load(&dir.path().join("run.cfg")).unwrap();
    assert_eq!(cfg.tol, Tolerances::default());
    let out = run_experiment(&cfg).unwrap();
    let col = |m: Model| cfg.models.iter().position(|&x| x == m).unwrap();
    let (cat, mul) = (col(Model::CategoricalKl), col(Model::MultiplicativeKl));
    assert_eq!(out.records.len(), 4);
    for (rec, row) in out.records.iter().zip(&out.predictions) {
        let gap = (row[cat].score - row[mul].score).abs();
        if rec.id == "p4" {
            // "eat" only ever took "apple", so "eat book" is not `eat ⊙ book`
            assert!(gap > 1e-6, "{gap}");
        } else {
            assert!(gap < 1e-12, "{}: {gap}", rec.id);
        }
    }
    assert!(out.predictions.iter().flatten().all(|p| (0.0..=1.0).contains(&p.score)));
    assert!(out.report.model(Model::CategoricalVn).unwrap().spearman_rho.is_some());
}

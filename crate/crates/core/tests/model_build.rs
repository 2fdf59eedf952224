mod support;

use proptest::prelude::*;

use catent_core::composition::Relation;
use catent_core::model_build::io::{
    format_counts, format_densities, format_dependencies, format_vectors, load_vectors, parse_counts,
    parse_densities, parse_dependencies, parse_vectors, save_vectors,
};
use catent_core::model_build::{
    build_density_word, build_verb_matrices, count_cooccurrences, nmf, pmi_weight, CooccurrenceCounts, Dependency,
    NmfConfig, VectorStore,
};
use catent_core::tensor::{DensityMatrix, Matrix, WordVector};
use support::max_abs_diff;

/// Direct double loop over every token pair in every sentence.
fn count_oracle(corpus: &[String], vocab: &[String], ctx: &[String], window: usize) -> Vec<u64> {
    let mut out = vec![0u64; vocab.len() * ctx.len()];
    for line in corpus {
        let toks: Vec<&str> = line.split_whitespace().collect();
        for (i, a) in toks.iter().enumerate() {
            for (j, b) in toks.iter().enumerate() {
                if i == j || i.abs_diff(j) > window {
                    continue;
                }
                let r = vocab.iter().position(|w| w == a);
                let c = ctx.iter().position(|w| w == b);
                if let (Some(r), Some(c)) = (r, c) {
                    out[r * ctx.len() + c] += 1;
                }
            }
        }
    }
    out
}

fn arb_corpus() -> impl Strategy<Value = Vec<String>> {
    let token = prop_oneof!["a", "b", "c", "d", "e"];
    prop::collection::vec(prop::collection::vec(token, 1..12).prop_map(|t| t.join(" ")), 1..20)
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn arb_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
        prop::collection::vec(0.0f64..5.0, r * c).prop_map(move |v| Matrix::from_vec(r, c, v).unwrap())
    })
}

proptest! {
    #[test]
    fn counts_match_oracle(corpus in arb_corpus(), window in 1usize..6) {
        let vocab = words("a b c");
        let ctx = words("b c d e");
        let got = count_cooccurrences(&corpus, &vocab, &ctx, window).unwrap();
        let expected = count_oracle(&corpus, &vocab, &ctx, window);
        for i in 0..vocab.len() {
            for j in 0..ctx.len() {
                prop_assert_eq!(got.get(i, j), expected[i * ctx.len() + j]);
            }
        }
    }

    #[test]
    fn counts_are_symmetric_on_a_shared_vocabulary(corpus in arb_corpus(), window in 1usize..6) {
        let v = words("a b c d e");
        let c = count_cooccurrences(&corpus, &v, &v, window).unwrap();
        for i in 0..v.len() {
            for j in 0..v.len() {
                prop_assert_eq!(c.get(i, j), c.get(j, i));
            }
        }
    }

    #[test]
    fn pmi_is_nonnegative_and_zero_on_empty_cells(data in prop::collection::vec(0u64..6, 12)) {
        prop_assume!(data.iter().any(|&x| x > 0));
        let vocab = (0..3).map(|i| format!("w{i}")).collect();
        let ctx = (0..4).map(|i| format!("c{i}")).collect();
        let c = CooccurrenceCounts::from_dense(vocab, ctx, 5, data.clone()).unwrap();
        let m = pmi_weight(&c).unwrap();
        for (k, &x) in m.as_slice().iter().enumerate() {
            prop_assert!(x >= 0.0);
            if data[k] == 0 {
                prop_assert_eq!(x, 0.0);
            }
        }
    }

    #[test]
    fn nmf_objective_never_rises(x in arb_matrix(), k in 1usize..5, seed in any::<u64>()) {
        let k = k.min(x.rows()).min(x.cols());
        let model = nmf(&x, &NmfConfig { max_iter: 60, tol: 0.0, ..NmfConfig::new(k).with_seed(seed) }).unwrap();
        prop_assert!(model.is_monotone(1e-9));
        prop_assert!(model.w.as_slice().iter().chain(model.h.as_slice()).all(|&v| v >= 0.0));
        prop_assert_eq!((model.w.rows(), model.w.cols()), (x.rows(), k));
        prop_assert_eq!((model.h.rows(), model.h.cols()), (k, x.cols()));
    }

    #[test]
    fn vectors_round_trip(rows in prop::collection::vec(prop::collection::vec(0.0f64..1e6, 3), 1..6)) {
        let store = VectorStore::from_vectors(
            3,
            rows.iter().enumerate().map(|(i, r)| WordVector::new(format!("w{i}"), r.clone()).unwrap()),
        )
        .unwrap();
        let text = format_vectors(3, store.iter());
        prop_assert_eq!(parse_vectors(&text).unwrap(), store);
    }

    #[test]
    fn counts_round_trip(data in prop::collection::vec(0u64..1000, 6), window in 1usize..9) {
        let c = CooccurrenceCounts::from_dense(words("x y"), words("p q r"), window, data).unwrap();
        prop_assert_eq!(parse_counts(&format_counts(&c)).unwrap(), c);
    }

    #[test]
    fn densities_round_trip(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = support::rng(seed);
        let items: Vec<DensityMatrix> = (0..3)
            .map(|i| DensityMatrix::new(format!("d{i}"), support::random_density_matrix(&mut rng, d, d)).unwrap())
            .collect();
        let back = parse_densities(&format_densities(d, &items)).unwrap();
        prop_assert_eq!(back.len(), items.len());
        for (a, b) in back.iter().zip(&items) {
            prop_assert_eq!(a.matrix(), b.matrix());
        }
    }
}

#[test]
fn pmi_of_a_diagonal_table() {
    let c = CooccurrenceCounts::from_dense(words("a b"), words("a b"), 5, vec![2, 0, 0, 2]).unwrap();
    let m = pmi_weight(&c).unwrap();
    assert!((m[(0, 0)] - 2f64.ln()).abs() < 1e-15);
    assert!((m[(1, 1)] - 2f64.ln()).abs() < 1e-15);
    assert_eq!(m[(0, 1)], 0.0);
}

#[test]
fn nmf_recovers_an_exact_product() {
    let w = Matrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [1.0, 1.0], [3.0, 0.5]]).unwrap();
    let h = Matrix::from_rows(&[[1.0, 2.0, 0.0], [0.5, 0.0, 1.0]]).unwrap();
    let x = w.matmul(&h).unwrap();
    let model = nmf(&x, &NmfConfig { max_iter: 5000, tol: 1e-14, ..NmfConfig::new(2).with_seed(1) }).unwrap();
    assert!(model.residual(&x) / x.frobenius_norm() < 1e-3);
    assert!(model.is_monotone(1e-12));
}

#[test]
fn nmf_is_seeded() {
    let x = Matrix::from_rows(&[[1.0, 2.0, 3.0], [0.0, 1.0, 4.0], [2.0, 2.0, 0.0]]).unwrap();
    let cfg = NmfConfig::new(2).with_seed(9);
    assert_eq!(nmf(&x, &cfg).unwrap(), nmf(&x, &cfg).unwrap());
}

#[test]
fn vectors_survive_a_file_round_trip() {
    let store = VectorStore::from_vectors(
        2,
        [
            WordVector::new("dog", vec![0.1, 0.7]).unwrap(),
            WordVector::new("cat", vec![1.0 / 3.0, 0.0]).unwrap(),
        ],
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vectors.txt");
    save_vectors(&path, &store).unwrap();
    assert_eq!(load_vectors(&path).unwrap(), store);
}

#[test]
fn dependencies_round_trip() {
    let deps = vec![
        Dependency { verb: "chase".into(), relation: Relation::Object, noun: "cat".into(), count: 3 },
        Dependency { verb: "bark".into(), relation: Relation::Subject, noun: "dog".into(), count: 1 },
    ];
    assert_eq!(parse_dependencies(&format_dependencies(&deps)).unwrap(), deps);
}

#[test]
fn verb_matrices_sum_argument_outer_products() {
    let store = VectorStore::from_vectors(
        2,
        [
            WordVector::new("eat", vec![1.0, 2.0]).unwrap(),
            WordVector::new("apple", vec![1.0, 0.0]).unwrap(),
            WordVector::new("pear", vec![0.0, 3.0]).unwrap(),
        ],
    )
    .unwrap();
    let deps = vec![
        Dependency { verb: "eat".into(), relation: Relation::Object, noun: "apple".into(), count: 2 },
        Dependency { verb: "eat".into(), relation: Relation::Object, noun: "pear".into(), count: 1 },
        Dependency { verb: "eat".into(), relation: Relation::Subject, noun: "ghost".into(), count: 1 },
    ];
    let (built, skipped) = build_verb_matrices(&store, &deps, &words("eat fly"), Relation::Object);
    assert_eq!(skipped.iter().map(|(v, _)| v.as_str()).collect::<Vec<_>>(), ["fly"]);
    assert_eq!(built.len(), 1);
    // v ⊙ (apple apple + pear pear) with each distinct argument once
    let expected = [1.0, 0.0, 0.0, 18.0];
    assert!(max_abs_diff(built[0].matrix().as_slice(), &expected) < 1e-12);
}

#[test]
fn word_density_mixes_context_projectors() {
    let store = VectorStore::from_vectors(
        2,
        [WordVector::new("x", vec![1.0, 0.0]).unwrap(), WordVector::new("y", vec![0.0, 1.0]).unwrap()],
    )
    .unwrap();
    let occ = vec![words("x"), words("y"), words("x y"), words("unknown")];
    let rho = build_density_word(&occ, &store).unwrap();
    let expected = [0.5, 1.0 / 6.0, 1.0 / 6.0, 0.5];
    assert!(max_abs_diff(rho.matrix().as_slice(), &expected) < 1e-12);
}

#[test]
fn cat_and_goldfish_from_occurrences() {
    let store = VectorStore::from_vectors(
        3,
        [
            WordVector::new("aquarium", vec![1.0, 0.0, 0.0]).unwrap(),
            WordVector::new("pet", vec![0.0, 1.0, 0.0]).unwrap(),
            WordVector::new("fish", vec![0.0, 0.0, 1.0]).unwrap(),
        ],
    )
    .unwrap();
    let cat = build_density_word(&[words("pet"), words("fish")], &store).unwrap();
    assert!(max_abs_diff(cat.matrix().as_slice(), &[0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5]) < 1e-15);

    // the averaged context is L2-normalized, so the pet/fish block carries
    // half the weight of the unnormalized table; pattern and support agree
    let goldfish = build_density_word(&[words("aquarium"), words("pet fish")], &store).unwrap();
    let table = [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0];
    for (got, want) in goldfish.matrix().as_slice().iter().zip(table) {
        assert_eq!(*got > 1e-12, want > 0.0);
    }
    let printed = DensityMatrix::from_psd("", Matrix::from_vec(3, 3, table.to_vec()).unwrap(), 0.0).unwrap();
    assert!(catent_core::measures::support_inclusion(&goldfish, &printed).unwrap());
    assert!(catent_core::measures::support_inclusion(&printed, &goldfish).unwrap());
    assert!(max_abs_diff(goldfish.matrix().as_slice(), &[0.5, 0.0, 0.0, 0.0, 0.25, 0.25, 0.0, 0.25, 0.25]) < 1e-15);
}

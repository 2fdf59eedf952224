use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use catent_core::composition::{
    compose_additive, compose_multiplicative, compose_phrase_density, compose_phrase_vector,
    verify_negative_control, verify_proposition, PropositionConfig, Relation, WordOrder,
};
use catent_core::harness::{
    run_experiment, score_pair, ExperimentConfig, Model, ModelStore, PhraseEntailmentRecord,
};
use catent_core::measures::{alpha_skew, Tolerances, DEFAULT_ALPHA, DEFAULT_SUPPORT_TOL};
use catent_core::model_build::io::{
    format_densities, format_vectors, load_densities, load_dependencies, load_vectors,
    load_verb_matrices, save_counts, save_densities, save_vectors, save_verb_matrices,
};
use catent_core::model_build::{
    build_density_word_with, build_verb_matrices, context_occurrences, count_cooccurrences,
    frequent_words, nmf, pmi_weight, NmfConfig, OccurrenceWeights, VectorStore,
};
use catent_core::tensor::{normalize_l1, DEFAULT_EIG_TOL};

#[derive(Parser)]
#[command(name = "catent", version, about = "Compositional distributional entailment toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Projection residual allowed in support-inclusion tests.
    #[arg(long, global = true, default_value_t = DEFAULT_SUPPORT_TOL)]
    tol_support: f64,
    /// Relative cutoff under which eigenvalues and probabilities count as zero.
    #[arg(long, global = true, default_value_t = DEFAULT_EIG_TOL)]
    tol_eig: f64,
    /// Mixing weight of the skew divergence reported by `entail`.
    #[arg(long, global = true, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Comma-separated model list, or `all`.
    #[arg(long, global = true, default_value = "all")]
    models: String,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Global {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            eig: self.tol_eig,
            support: self.tol_support,
        }
    }
}

#[derive(Args, Clone)]
struct ModelFiles {
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long)]
    verb_matrices: Option<PathBuf>,
    /// Builds verb matrices on demand from `verb<TAB>rel<TAB>noun<TAB>count` lines.
    #[arg(long)]
    dependencies: Option<PathBuf>,
    #[arg(long)]
    densities: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Obj,
    Subj,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Uniform,
    Frequency,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus → counts → PPMI → NMF → vector file.
    BuildVectors {
        #[arg(long)]
        corpus: PathBuf,
        /// Number of most frequent tokens used as targets.
        #[arg(long, default_value_t = 2000)]
        vocab_size: usize,
        /// Number of most frequent tokens used as contexts.
        #[arg(long, default_value_t = 2000)]
        contexts: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value_t = 300)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-6)]
        nmf_tol: f64,
        /// Also write the raw counts here.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Relational verb matrices from vectors and a dependency file.
    BuildVerbMatrices {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        dependencies: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        relation: RelationArg,
    },
    /// Word density matrices from corpus contexts.
    BuildDensity {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
        /// Comma-separated words; defaults to every word in the vector file.
        #[arg(long)]
        words: Option<String>,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, value_enum, default_value = "uniform")]
        weights: WeightsArg,
    },
    /// Composes one phrase and prints its vector or density matrix.
    Compose {
        #[arg(long)]
        phrase: String,
        #[arg(long, default_value = "verb-object")]
        order: String,
        #[arg(long, default_value = "categorical_kl")]
        model: String,
        #[command(flatten)]
        files: ModelFiles,
    },
    /// Scores `lhs ⊢ rhs` under every selected model.
    Entail {
        #[arg(long)]
        lhs: String,
        #[arg(long, default_value = "verb-object")]
        lhs_order: String,
        #[arg(long)]
        rhs: String,
        #[arg(long, default_value = "verb-object")]
        rhs_order: String,
        #[command(flatten)]
        files: ModelFiles,
    },
    /// Runs an experiment from a key=value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Randomized check that word-level entailment lifts to phrases.
    VerifyProposition {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long = "len", default_value_t = 2)]
        phrase_len: usize,
        /// Run the broken-input control instead.
        #[arg(long)]
        negative_control: bool,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(String::from).collect())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_store(files: &ModelFiles, verbs: &[(String, Relation)], tol: Tolerances) -> Result<ModelStore> {
    let vectors = load_vectors(&files.vectors).context("loading vectors")?;
    let mut store = ModelStore::new(vectors).with_tolerances(tol);
    if let Some(p) = &files.verb_matrices {
        store = store.with_verb_matrices(load_verb_matrices(p).context("loading verb matrices")?);
    }
    if let Some(p) = &files.dependencies {
        let deps = load_dependencies(p).context("loading dependencies")?;
        for (verb, rel) in verbs {
            let (built, _) = build_verb_matrices(&store.vectors, &deps, std::slice::from_ref(verb), *rel);
            store = store.with_verb_matrices(built);
        }
    }
    if let Some(p) = &files.densities {
        store = store.with_densities(load_densities(p).context("loading densities")?);
    }
    Ok(store)
}

fn split_phrase(phrase: &str, order: WordOrder) -> Result<(String, String)> {
    let t: Vec<&str> = phrase.split_whitespace().collect();
    if t.len() != 2 {
        bail!("phrase `{phrase}` must have two words");
    }
    let v = order.verb_position();
    Ok((t[v].to_string(), t[1 - v].to_string()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let g = cli.global.clone();
    match cli.command {
        Command::BuildVectors {
            corpus,
            vocab_size,
            contexts,
            window,
            k,
            max_iter,
            nmf_tol,
            counts,
        } => {
            let lines = read_lines(&corpus)?;
            let vocab = frequent_words(&lines, vocab_size);
            let context_vocab = frequent_words(&lines, contexts);
            let c = count_cooccurrences(&lines, &vocab, &context_vocab, window)?;
            if let Some(p) = counts {
                save_counts(&p, &c)?;
            }
            let x = pmi_weight(&c)?;
            let cfg = NmfConfig {
                k,
                max_iter,
                tol: nmf_tol,
                seed: g.seed,
            };
            let model = nmf(&x, &cfg)?;
            eprintln!(
                "nmf: {} iterations, objective {:.6e} -> {:.6e}",
                model.objective_trace.len() - 1,
                model.objective_trace[0],
                model.objective_trace.last().copied().unwrap_or(0.0)
            );
            let store = VectorStore::from_rows(&vocab, &model.w)?;
            match &g.out {
                Some(p) => save_vectors(p, &store)?,
                None => print!("{}", format_vectors(store.dim(), store.iter())),
            }
        }
        Command::BuildVerbMatrices {
            vectors,
            dependencies,
            relation,
        } => {
            let store = load_vectors(&vectors)?;
            let deps = load_dependencies(&dependencies)?;
            let relations = match relation {
                RelationArg::Obj => vec![Relation::Object],
                RelationArg::Subj => vec![Relation::Subject],
                RelationArg::Both => vec![Relation::Object, Relation::Subject],
            };
            let mut all = Vec::new();
            for rel in relations {
                let mut verbs: Vec<String> = deps
                    .iter()
                    .filter(|d| d.relation == rel)
                    .map(|d| d.verb.clone())
                    .collect();
                verbs.sort();
                verbs.dedup();
                let (built, skipped) = build_verb_matrices(&store, &deps, &verbs, rel);
                for (verb, e) in skipped {
                    eprintln!("skipped {verb}:{rel}: {e}");
                }
                all.extend(built);
            }
            let out = g.out.clone().context("--out is required for verb matrices")?;
            save_verb_matrices(&out, store.dim(), &all)?;
            eprintln!("wrote {} verb matrices", all.len());
        }
        Command::BuildDensity {
            corpus,
            vectors,
            words,
            window,
            weights,
        } => {
            let lines = read_lines(&corpus)?;
            let store = load_vectors(&vectors)?;
            let targets: Vec<String> = match words {
                Some(w) => w.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
                None => store.iter().map(|v| v.label.clone()).collect(),
            };
            let scheme = match weights {
                WeightsArg::Uniform => OccurrenceWeights::Uniform,
                WeightsArg::Frequency => OccurrenceWeights::ContextFrequency,
            };
            let mut out = Vec::new();
            for w in &targets {
                let occ = context_occurrences(&lines, w, window);
                match build_density_word_with(&occ, &store, &scheme) {
                    Ok(d) => out.push(d.with_label(w.clone())),
                    Err(e) => eprintln!("skipped {w}: {e}"),
                }
            }
            match &g.out {
                Some(p) => save_densities(p, store.dim(), &out)?,
                None => print!("{}", format_densities(store.dim(), &out)),
            }
        }
        Command::Compose {
            phrase,
            order,
            model,
            files,
        } => {
            let order = WordOrder::parse(&order)?;
            let model = Model::parse(&model)?;
            let (verb, noun) = split_phrase(&phrase, order)?;
            let store = load_store(&files, &[(verb.clone(), order.relation())], g.tolerances())?;
            let text = match model {
                Model::CategoricalVn => {
                    let get = |w: &str| {
                        store
                            .densities
                            .get(w)
                            .with_context(|| format!("no density for `{w}`"))
                    };
                    let d = compose_phrase_density(get(&verb)?, get(&noun)?)?.with_label(phrase.replace(' ', "_"));
                    format_densities(d.dim(), [&d])
                }
                _ => {
                    let v = store.vectors.require(&verb)?;
                    let n = store.vectors.require(&noun)?;
                    let p = match model {
                        Model::BaselineVerb => normalize_l1(v)?,
                        Model::CategoricalKl => {
                            let key = format!("{verb}:{}", order.relation());
                            let m = store
                                .verb_matrices
                                .get(&key)
                                .or_else(|| store.verb_matrices.get(&verb))
                                .with_context(|| format!("no verb matrix for `{key}`"))?;
                            compose_phrase_vector(m, n, order)?
                        }
                        Model::AdditiveKl => compose_additive(v, n)?,
                        _ => compose_multiplicative(v, n)?,
                    };
                    let p = p.with_label(phrase.replace(' ', "_"));
                    format_vectors(p.dim(), [&p])
                }
            };
            emit(&g.out, &text)?;
        }
        Command::Entail {
            lhs,
            lhs_order,
            rhs,
            rhs_order,
            files,
        } => {
            let lo = WordOrder::parse(&lhs_order)?;
            let ro = WordOrder::parse(&rhs_order)?;
            let record = PhraseEntailmentRecord::new("cli", (&lhs, lo), (&rhs, ro), 4.0)?;
            let verbs = vec![
                (record.lhs().verb.to_string(), lo.relation()),
                (record.rhs().verb.to_string(), ro.relation()),
            ];
            let store = load_store(&files, &verbs, g.tolerances())?;
            let mut text = format!("# {lhs} |- {rhs}\n");
            for model in Model::parse_list(&g.models)? {
                match score_pair(&record, model, &store) {
                    Ok(p) => {
                        let flag = if p.degenerate {
                            " degenerate"
                        } else if p.diverged {
                            " diverged"
                        } else {
                            ""
                        };
                        text.push_str(&format!("{model}\t{:.6}{flag}\n", p.score));
                    }
                    Err(e) => text.push_str(&format!("{model}\terror: {e}\n")),
                }
            }
            if let (Ok(a), Ok(b)) = (
                store.vectors.require(record.lhs().verb).and_then(normalize_l1),
                store.vectors.require(record.rhs().verb).and_then(normalize_l1),
            ) {
                if let Ok(s) = alpha_skew(&a, &b, g.alpha) {
                    text.push_str(&format!("verb_skew(alpha={})\t{:.6}\n", g.alpha, s));
                }
            }
            emit(&g.out, &text)?;
        }
        Command::Experiment { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if g.models != "all" {
                cfg.models = Model::parse_list(&g.models)?;
            }
            if g.seed != 0 {
                cfg.seed = g.seed;
            }
            let out = run_experiment(&cfg)?;
            let text = out.report.to_text();
            match &g.out {
                Some(p) => {
                    fs::write(p, &text)?;
                    fs::write(sidecar(p, ".json"), out.report.to_json()?)?;
                    fs::write(sidecar(p, ".predictions.tsv"), out.predictions_tsv())?;
                }
                None => {
                    print!("{text}");
                    print!("\n{}", out.predictions_tsv());
                }
            }
        }
        Command::VerifyProposition {
            trials,
            dim,
            phrase_len,
            negative_control,
        } => {
            let mut cfg = PropositionConfig::new(trials, dim, phrase_len, g.seed);
            cfg.tol = g.tolerances();
            let report = if negative_control {
                verify_negative_control(&cfg)?
            } else {
                verify_proposition(&cfg)?
            };
            print!("{}", report.to_text());
            if let Some(p) = &g.out {
                fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
            }
            let failed = if negative_control {
                report.passed > 0
            } else {
                report.failed > 0
            };
            if failed {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}

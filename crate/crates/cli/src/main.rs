//! `hierindex` — build, inspect and query a self-organizing document
//! index over a directory of text files.
//!
//! Progress goes to stderr, results to stdout, and every run with the
//! same arguments and corpus bytes writes a byte-identical index.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hierindex::categorize::categorize_text;
use hierindex::corpus::{load_corpus, CorpusLayout, PreprocessConfig};
use hierindex::eval::{
    accuracy_protocol, f_measure, kmeans_baseline, kmedoids_baseline, sweep, sweep_to_csv,
    tree_f_measure, ContingencyTable, SweepConfig,
};
use hierindex::hierarchy::NodeId;
use hierindex::index::{BuildParams, Index};
use hierindex::{stopwords, Error};

#[derive(Parser)]
#[command(
    name = "hierindex",
    about = "Hierarchical document indexing and query categorization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LayoutArg {
    /// One directory per class, one article per file.
    Newsgroups,
    /// A plain directory tree of text files without labels.
    Flat,
}

impl From<LayoutArg> for CorpusLayout {
    fn from(value: LayoutArg) -> Self {
        match value {
            LayoutArg::Newsgroups => CorpusLayout::Newsgroups,
            LayoutArg::Flat => CorpusLayout::Flat,
        }
    }
}

#[derive(Args)]
struct PreprocessArgs {
    /// Minimum number of documents a term must appear in.
    #[arg(long = "min-df", default_value_t = 2)]
    min_df: usize,
    /// Terms in more than this fraction of documents are dropped.
    #[arg(long = "max-df-frac", default_value_t = 0.5, value_parser = parse_fraction)]
    max_df_frac: f64,
    /// Stopword list file (one word per line); defaults to the built-in
    /// English list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Tokens shorter than this are dropped.
    #[arg(long = "min-token-len", default_value_t = 2)]
    min_token_len: usize,
    /// Keep newsgroup-style header lines instead of stripping them.
    #[arg(long = "keep-headers")]
    keep_headers: bool,
    /// Corpus directory layout.
    #[arg(long, value_enum, default_value = "newsgroups")]
    layout: LayoutArg,
}

impl PreprocessArgs {
    fn to_config(&self) -> Result<PreprocessConfig, Error> {
        let stopword_set = match &self.stopwords {
            Some(path) => stopwords::load_from_file(path)?,
            None => stopwords::default_set(),
        };
        Ok(PreprocessConfig {
            min_token_len: self.min_token_len,
            min_df: self.min_df,
            max_df_fraction: self.max_df_frac,
            stopwords: stopword_set,
            strip_headers: !self.keep_headers,
        })
    }
}

#[derive(Args)]
struct ClusteringArgs {
    /// Number of semantic topics (the reduced dimension).
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    topics: usize,
    /// Decay factor of the split-stopping rule; smaller splits more.
    #[arg(long, default_value_t = 0.5, value_parser = parse_positive_f64)]
    beta: f64,
    /// Seed for all randomized stages.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Clusters smaller than this are never split.
    #[arg(long = "min-split-size", default_value_t = 4, value_parser = parse_positive)]
    min_split_size: usize,
    /// Use the verbatim uncentered seed-centroid offset (comparison runs).
    #[arg(long = "literal-eq6")]
    literal_eq6: bool,
    /// Length-normalize semantic vectors before clustering.
    #[arg(long)]
    normalize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a corpus directory.
    Build {
        /// Corpus root directory.
        #[arg(long)]
        input: PathBuf,
        /// Where to write the index file.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        clustering: ClusteringArgs,
        #[command(flatten)]
        preprocess: PreprocessArgs,
        /// Top terms stored per node.
        #[arg(long = "top-terms", default_value_t = 10)]
        top_terms: usize,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Categorize a query into an existing index.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Query text (use --file for a document on disk).
        #[arg(long, conflicts_with = "file")]
        text: Option<String>,
        /// Read the query from a file.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate an index: F-measure vs baselines and test-set accuracy.
    Eval {
        #[arg(long)]
        index: PathBuf,
        /// Held-out documents (same layout as the training corpus).
        #[arg(long)]
        test: PathBuf,
        /// Extra baseline cluster counts, comma-separated.
        #[arg(long = "k-list", value_delimiter = ',', value_parser = parse_positive)]
        k_list: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value = "newsgroups")]
        layout: LayoutArg,
        #[arg(long)]
        json: bool,
    },
    /// Build one index per (topics, beta) pair and write metrics as CSV.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        /// Optional held-out documents for the accuracy column.
        #[arg(long)]
        test: Option<PathBuf>,
        /// Topic counts, comma-separated.
        #[arg(long, default_value = "5,10,20,40", value_delimiter = ',', value_parser = parse_positive)]
        topics: Vec<usize>,
        /// Decay factors, comma-separated.
        #[arg(long, default_value = "0.25,0.5,0.75,1.0", value_delimiter = ',', value_parser = parse_positive_f64)]
        betas: Vec<f64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "min-split-size", default_value_t = 4, value_parser = parse_positive)]
        min_split_size: usize,
        #[arg(long = "literal-eq6")]
        literal_eq6: bool,
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        preprocess: PreprocessArgs,
    },
    /// Print the tree outline or one node of an index.
    Inspect {
        #[arg(long)]
        index: PathBuf,
        /// "tree" for the whole outline, or a node id.
        #[arg(default_value = "tree")]
        target: String,
        #[arg(long)]
        json: bool,
    },
}

fn parse_positive(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v == 0 {
        return Err("must be at least 1".to_string());
    }
    Ok(v)
}

fn parse_positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err("must be positive".to_string());
    }
    Ok(v)
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(0.0..=1.0).contains(&v) {
        return Err("must be within [0, 1]".to_string());
    }
    Ok(v)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Build {
            input,
            output,
            clustering,
            preprocess,
            top_terms,
            json,
        } => {
            let config = preprocess.to_config()?;
            let (docs, report) = load_corpus(&input, preprocess.layout.into(), config.strip_headers)?;
            for (path, reason) in &report.skipped {
                eprintln!("skipped {}: {reason}", path.display());
            }
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            eprintln!("loaded {} documents", docs.len());
            let params = BuildParams {
                topics: clustering.topics,
                beta: clustering.beta,
                seed: clustering.seed,
                min_split_size: clustering.min_split_size,
                literal_eq6: clustering.literal_eq6,
                normalize: clustering.normalize,
                top_terms,
                ..Default::default()
            };
            let (index, diagnostics) = Index::build(&docs, config, params)?;
            if let Some(k) = diagnostics.reduced_topics {
                eprintln!(
                    "warning: matrix rank supports only {k} topics (requested {})",
                    clustering.topics
                );
            }
            if !diagnostics.empty_after_preprocess.is_empty() {
                eprintln!(
                    "warning: {} documents had no tokens left after preprocessing",
                    diagnostics.empty_after_preprocess.len()
                );
            }
            eprintln!(
                "vocabulary {} terms, matrix nnz {}, svd iterations {}",
                diagnostics.vocabulary_size, diagnostics.matrix_nnz, diagnostics.svd_iterations
            );
            index.save(&output)?;
            let tree = index.tree();
            if json {
                let summary = serde_json::json!({
                    "output": output.display().to_string(),
                    "documents": index.num_docs(),
                    "vocabulary": diagnostics.vocabulary_size,
                    "nodes": tree.len(),
                    "leaf_clusters": tree.leaf_count(),
                    "levels": tree.height(),
                    "level_counts": tree.level_counts(),
                });
                println!("{summary}");
            } else {
                println!(
                    "indexed {} documents into {} clusters across {} levels -> {}",
                    index.num_docs(),
                    tree.len(),
                    tree.height(),
                    output.display()
                );
                for (level, count) in tree.level_counts().iter().rev() {
                    println!("  level {level}: {count} nodes");
                }
            }
            Ok(())
        }

        Command::Query {
            index,
            text,
            file,
            json,
        } => {
            let index = Index::load(&index)?;
            let query = match (text, file) {
                (Some(t), None) => t,
                (None, Some(path)) => {
                    std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })?
                }
                (None, None) => {
                    return Err(Error::Invalid(
                        "one of --text or --file is required".to_string(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let result = categorize_text(&index, &query)?;
            let terms = index.node_top_terms(result.node);
            if json {
                let steps: Vec<serde_json::Value> = result
                    .path
                    .iter()
                    .zip(&result.distances)
                    .map(|(id, d)| serde_json::json!({ "node": id, "distance": d }))
                    .collect();
                let out = serde_json::json!({
                    "node": result.node,
                    "path": steps,
                    "rejected_child": result.stopped_child.map(|(id, d)| {
                        serde_json::json!({ "node": id, "distance": d })
                    }),
                    "warnings": result.warnings,
                    "node_size": index.tree().node(result.node)?.size(),
                    "top_terms": terms,
                });
                println!("{out}");
            } else {
                for w in &result.warnings {
                    eprintln!("warning: {w:?}");
                }
                println!("landed on node {} (level {}, {} documents)",
                    result.node,
                    index.tree().node(result.node)?.level,
                    index.tree().node(result.node)?.size());
                println!("path from root:");
                for (id, d) in result.path.iter().zip(&result.distances) {
                    println!("  node {id}: distance {d:.6}");
                }
                if let Some((id, d)) = result.stopped_child {
                    println!("  stopped: nearest child {id} at {d:.6} was no closer");
                }
                let rendered: Vec<String> =
                    terms.iter().map(|(t, _)| t.clone()).collect();
                println!("top terms: {}", rendered.join(", "));
            }
            Ok(())
        }

        Command::Eval {
            index,
            test,
            k_list,
            layout,
            json,
        } => {
            let index = Index::load(&index)?;
            let strip = index.preprocess_config().strip_headers;
            let (test_docs, report) = load_corpus(&test, layout.into(), strip)?;
            for (path, reason) in &report.skipped {
                eprintln!("skipped {}: {reason}", path.display());
            }
            if test_docs.is_empty() {
                return Err(Error::Invalid("test directory has no documents".to_string()));
            }
            eprintln!("loaded {} test documents", test_docs.len());

            let tree = index.tree();
            let test_vectors = index.project_documents(&test_docs);
            let accuracy = accuracy_protocol(tree, index.doc_vectors(), &test_vectors)?;

            let labels = index.doc_labels().to_vec();
            let proposed_f = tree_f_measure(tree, &labels);
            let matched_k = tree.leaf_count();
            let mut ks = vec![matched_k];
            if let Some(extra) = k_list {
                ks.extend(extra);
            }
            ks.retain(|&k| k >= 1 && k <= index.num_docs());
            ks.dedup();

            let mut baselines = Vec::new();
            for &k in &ks {
                let km = kmeans_baseline(index.doc_vectors(), k, index.build_params().seed);
                let kd = kmedoids_baseline(index.doc_vectors(), k, index.build_params().seed);
                let km_f = ContingencyTable::from_assignments(&labels, &km.assignments)
                    .map(|t| f_measure(&t));
                let kd_f = ContingencyTable::from_assignments(&labels, &kd.assignments)
                    .map(|t| f_measure(&t));
                baselines.push((k, km_f, kd_f));
            }

            if json {
                let out = serde_json::json!({
                    "accuracy_percent": accuracy,
                    "f_measure": proposed_f,
                    "matched_k": matched_k,
                    "baselines": baselines.iter().map(|(k, km, kd)| serde_json::json!({
                        "k": k, "kmeans_f": km, "kmedoids_f": kd,
                    })).collect::<Vec<_>>(),
                });
                println!("{out}");
            } else {
                println!("categorization accuracy: {accuracy:.2}%");
                match proposed_f {
                    Some(f) => println!("index F-measure ({} leaf clusters): {f:.4}", matched_k),
                    None => println!("index F-measure: n/a (unlabeled corpus)"),
                }
                for (k, km, kd) in &baselines {
                    println!(
                        "baselines at k={k}: kmeans F {}, kmedoids F {}",
                        km.map_or("n/a".to_string(), |f| format!("{f:.4}")),
                        kd.map_or("n/a".to_string(), |f| format!("{f:.4}")),
                    );
                }
            }
            Ok(())
        }

        Command::Sweep {
            input,
            test,
            topics,
            betas,
            out,
            seed,
            min_split_size,
            literal_eq6,
            normalize,
            preprocess,
        } => {
            let config = preprocess.to_config()?;
            let (docs, _) = load_corpus(&input, preprocess.layout.into(), config.strip_headers)?;
            let test_docs = match test {
                Some(dir) => {
                    let (t, _) = load_corpus(&dir, preprocess.layout.into(), config.strip_headers)?;
                    Some(t)
                }
                None => None,
            };
            eprintln!(
                "sweeping {} topic values x {} betas over {} documents",
                topics.len(),
                betas.len(),
                docs.len()
            );
            let rows = sweep(
                &docs,
                test_docs.as_deref(),
                &config,
                &SweepConfig {
                    topic_values: topics,
                    beta_values: betas,
                    seed,
                    min_split_size,
                    literal_offset: literal_eq6,
                    normalize,
                },
            )?;
            let csv = sweep_to_csv(&rows);
            std::fs::write(&out, &csv).map_err(|source| Error::Io {
                path: out.clone(),
                source,
            })?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!("wrote {} rows to {} ({failed} failed)", rows.len(), out.display());
            Ok(())
        }

        Command::Inspect {
            index,
            target,
            json,
        } => {
            let index = Index::load(&index)?;
            let tree = index.tree();
            if target == "tree" {
                if json {
                    let nodes: Vec<serde_json::Value> = tree
                        .nodes()
                        .map(|n| {
                            serde_json::json!({
                                "id": n.id,
                                "level": n.level,
                                "children": n.children,
                                "size": n.size(),
                            })
                        })
                        .collect();
                    let out = serde_json::json!({
                        "root": tree.root(),
                        "levels": tree.height(),
                        "level_counts": tree.level_counts(),
                        "documents": index.num_docs(),
                        "nodes": nodes,
                    });
                    println!("{out}");
                } else {
                    println!(
                        "{} documents, {} nodes, {} levels",
                        index.num_docs(),
                        tree.len(),
                        tree.height()
                    );
                    for (level, count) in tree.level_counts().iter().rev() {
                        println!("level {level}: {count} nodes");
                    }
                    print_outline(&index, tree.root(), 0)?;
                }
            } else {
                let id: NodeId = target
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad node id {target:?}")))?;
                let node = tree.node(id)?;
                let terms = index.node_top_terms(id);
                if json {
                    let docs: Vec<&str> = node
                        .is_leaf()
                        .then(|| node.member_docs.iter().map(|&d| index.doc_id(d)).collect())
                        .unwrap_or_default();
                    let out = serde_json::json!({
                        "id": node.id,
                        "level": node.level,
                        "children": node.children,
                        "size": node.size(),
                        "documents": docs,
                        "top_terms": terms,
                    });
                    println!("{out}");
                } else {
                    println!(
                        "node {} (level {}, {} documents, {} children)",
                        node.id,
                        node.level,
                        node.size(),
                        node.children.len()
                    );
                    if node.is_leaf() {
                        for &d in &node.member_docs {
                            println!("  doc {}", index.doc_id(d));
                        }
                    } else {
                        println!("  children: {:?}", node.children);
                    }
                    let rendered: Vec<String> =
                        terms.iter().map(|(t, w)| format!("{t} ({w:.2})")).collect();
                    println!("  top terms: {}", rendered.join(", "));
                }
            }
            Ok(())
        }
    }
}

fn print_outline(index: &Index, id: NodeId, depth: usize) -> Result<(), Error> {
    let node = index.tree().node(id)?;
    let terms: Vec<String> = index
        .node_top_terms(id)
        .iter()
        .take(5)
        .map(|(t, _)| t.clone())
        .collect();
    println!(
        "{}node {} [level {}] {} docs: {}",
        "  ".repeat(depth),
        node.id,
        node.level,
        node.size(),
        terms.join(", ")
    );
    for &child in &node.children {
        print_outline(index, child, depth + 1)?;
    }
    Ok(())
}

//! Corpus ingestion and TF-IDF weighting.
//!
//! Documents are read one-per-file from a directory tree, preprocessed
//! (lowercase, alphabetic tokenization, stopword removal, Porter
//! stemming), and assembled into a sparse term-document matrix with
//! `tf * ln(N/df)` weights.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hashing::fingerprint_strings;
use crate::stem::stem;
use crate::stopwords;
use crate::{Error, Result};

/// One ingested document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    /// Stable identifier: the file path relative to the corpus root,
    /// with `/` separators.
    pub id: String,
    pub text: String,
    /// Class label (the containing directory), used only by evaluation.
    pub label: Option<String>,
}

/// How documents are laid out on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusLayout {
    /// One directory per class, one article per file. Articles may start
    /// with RFC-822-style headers separated from the body by a blank
    /// line; those headers are stripped when `strip_headers` is set.
    Newsgroups,
    /// A plain directory of text files, no labels, no header stripping.
    Flat,
}

/// Everything that happened during ingestion that is not a document.
#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    /// Files skipped because they could not be read or decoded.
    pub skipped: Vec<(PathBuf, String)>,
    /// Documents whose text was empty on disk.
    pub empty_text_ids: Vec<String>,
    /// Documents that lost every token to preprocessing (set by
    /// `build_matrix`; they are kept as all-zero columns).
    pub empty_after_preprocess: Vec<String>,
    pub warnings: Vec<String>,
}

/// Tokenization, stopword, stemming and vocabulary-pruning options.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Tokens shorter than this are dropped (before stemming).
    pub min_token_len: usize,
    /// Terms present in fewer than this many documents are pruned.
    pub min_df: usize,
    /// Terms present in more than this fraction of documents are pruned.
    pub max_df_fraction: f64,
    /// Lowercase stopwords, removed before stemming.
    pub stopwords: BTreeSet<String>,
    /// Strip newsgroup-style header lines up to the first blank line.
    pub strip_headers: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            min_token_len: 2,
            min_df: 2,
            max_df_fraction: 0.5,
            stopwords: stopwords::default_set(),
            strip_headers: true,
        }
    }
}

impl PreprocessConfig {
    /// A configuration that keeps every term; handy in tests.
    pub fn without_pruning() -> Self {
        PreprocessConfig {
            min_df: 1,
            max_df_fraction: 1.0,
            ..Default::default()
        }
    }
}

/// The retained stemmed terms, sorted, with their document frequencies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub doc_freq: Vec<u32>,
    /// Corpus size the frequencies were computed against.
    pub num_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    /// ln(N / df) with natural log.
    pub fn idf(&self, term_idx: usize) -> f64 {
        (self.num_docs as f64 / self.doc_freq[term_idx] as f64).ln()
    }

    /// Order-sensitive hash binding models to this vocabulary.
    pub fn fingerprint(&self) -> u64 {
        fingerprint_strings(&self.terms)
    }
}

/// Sparse term-document matrix in compressed-column form.
///
/// Column `d` holds the TF-IDF weights of document `d`; entries exist
/// exactly where a retained term occurs in the document (the weight
/// itself may be 0.0 when the term appears in every document).
#[derive(Debug, Clone)]
pub struct TfIdfMatrix {
    num_terms: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
    column_ids: Vec<String>,
}

impl TfIdfMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.num_terms, self.column_ids.len())
    }

    pub fn num_docs(&self) -> usize {
        self.column_ids.len()
    }

    pub fn num_terms(&self) -> usize {
        self.num_terms
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn column_ids(&self) -> &[String] {
        &self.column_ids
    }

    /// (term index, weight) pairs of one document column.
    pub fn column(&self, d: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.col_ptr[d];
        let hi = self.col_ptr[d + 1];
        self.row_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&t, &v)| (t as usize, v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dense copy of one column; mostly for tests and small matrices.
    pub fn dense_column(&self, d: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.num_terms];
        for (t, v) in self.column(d) {
            col[t] = v;
        }
        col
    }

    /// Assemble from per-column sparse entries (term index must be valid).
    pub fn from_columns(
        num_terms: usize,
        column_ids: Vec<String>,
        columns: Vec<Vec<(u32, f64)>>,
    ) -> Self {
        assert_eq!(column_ids.len(), columns.len());
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for col in columns {
            for (t, v) in col {
                debug_assert!((t as usize) < num_terms);
                row_idx.push(t);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        TfIdfMatrix {
            num_terms,
            col_ptr,
            row_idx,
            values,
            column_ids,
        }
    }
}

/// Load every document under `root`, deterministically ordered by
/// relative path. Unreadable or non-UTF-8 files are skipped and recorded
/// in the report; an unreadable root is fatal.
pub fn load_corpus(root: &Path, layout: CorpusLayout, strip_headers: bool) -> Result<(Vec<RawDocument>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut files = Vec::new();
    collect_files(root, root, &mut files, &mut report)?;
    files.sort();

    if files.is_empty() {
        report
            .warnings
            .push(format!("no documents found under {}", root.display()));
    }

    let mut docs = Vec::with_capacity(files.len());
    for rel in files {
        let path = root.join(&rel);
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                report.skipped.push((path, format!("read error: {e}")));
                continue;
            }
        };
        let text = match String::from_utf8(bytes) {
            Ok(t) => t,
            Err(_) => {
                report.skipped.push((path, "not valid UTF-8".to_string()));
                continue;
            }
        };
        let label = match layout {
            CorpusLayout::Newsgroups => rel
                .components()
                .next()
                .filter(|_| rel.components().count() > 1)
                .map(|c| c.as_os_str().to_string_lossy().into_owned()),
            CorpusLayout::Flat => None,
        };
        let text = if strip_headers && layout == CorpusLayout::Newsgroups {
            strip_header_block(&text)
        } else {
            text
        };
        if text.trim().is_empty() {
            report.empty_text_ids.push(id.clone());
        }
        docs.push(RawDocument { id, text, label });
    }
    Ok((docs, report))
}

fn collect_files(
    root: &Path,
    dir: &Path,
    out: &mut Vec<PathBuf>,
    report: &mut IngestReport,
) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::CorpusDir {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                report
                    .skipped
                    .push((dir.to_path_buf(), format!("dir entry error: {e}")));
                continue;
            }
        };
        let path = entry.path();
        if path.is_dir() {
            // A subdirectory we cannot read is recorded, not fatal.
            if let Err(e) = collect_files(root, &path, out, report) {
                report.skipped.push((path, e.to_string()));
            }
        } else if let Ok(rel) = path.strip_prefix(root) {
            out.push(rel.to_path_buf());
        }
    }
    Ok(())
}

/// Drop RFC-822-style headers: everything up to and including the first
/// blank line. Text without a blank line is treated as all body.
fn strip_header_block(text: &str) -> String {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        offset += line.len();
        if line.trim().is_empty() {
            return text[offset..].to_string();
        }
    }
    text.to_string()
}

/// Lowercase, tokenize on non-alphabetic boundaries, drop short tokens
/// and stopwords, Porter-stem. An empty result is legal.
pub fn preprocess(doc: &RawDocument, config: &PreprocessConfig) -> Vec<String> {
    preprocess_text(&doc.text, config)
}

pub fn preprocess_text(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| t.len() >= config.min_token_len)
        .filter(|t| !config.stopwords.contains(*t))
        .map(stem)
        .collect()
}

/// Result of matrix assembly.
#[derive(Debug)]
pub struct MatrixBuild {
    pub vocabulary: Vocabulary,
    pub matrix: TfIdfMatrix,
    /// Ids of documents that preprocessed to nothing; they remain in the
    /// matrix as zero columns to preserve id alignment.
    pub empty_after_preprocess: Vec<String>,
}

/// Preprocess every document and build the pruned vocabulary and the
/// TF-IDF matrix, `weight(t, d) = tf(t, d) * ln(N / df(t))`.
pub fn build_matrix(docs: &[RawDocument], config: &PreprocessConfig) -> Result<MatrixBuild> {
    if docs.len() < 2 {
        return Err(Error::TooFewDocuments {
            needed: 2,
            got: docs.len(),
        });
    }

    let token_lists: Vec<Vec<String>> = docs
        .par_iter()
        .map(|d| preprocess(d, config))
        .collect();

    if token_lists.iter().all(|t| t.is_empty()) {
        return Err(Error::EmptyCorpus);
    }

    let num_docs = docs.len();
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for tokens in &token_lists {
        let unique: BTreeSet<&str> = tokens.iter().map(|t| t.as_str()).collect();
        for t in unique {
            *df.entry(t).or_insert(0) += 1;
        }
    }

    let max_df = config.max_df_fraction * num_docs as f64;
    let mut terms = Vec::new();
    let mut doc_freq = Vec::new();
    for (term, count) in &df {
        if (*count as usize) >= config.min_df && (*count as f64) <= max_df {
            terms.push(term.to_string());
            doc_freq.push(*count);
        }
    }
    if terms.is_empty() {
        return Err(Error::Invalid(format!(
            "vocabulary is empty after pruning (min_df={}, max_df_fraction={}); \
             relax the pruning thresholds",
            config.min_df, config.max_df_fraction
        )));
    }

    let vocabulary = Vocabulary {
        terms,
        doc_freq,
        num_docs,
    };

    let mut empty_after_preprocess = Vec::new();
    let mut columns = Vec::with_capacity(num_docs);
    for (doc, tokens) in docs.iter().zip(&token_lists) {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for t in tokens {
            if let Some(idx) = vocabulary.term_index(t) {
                *counts.entry(idx).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            empty_after_preprocess.push(doc.id.clone());
        }
        let col: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(t, tf)| (t as u32, tf as f64 * vocabulary.idf(t)))
            .collect();
        columns.push(col);
    }

    let matrix = TfIdfMatrix::from_columns(
        vocabulary.len(),
        docs.iter().map(|d| d.id.clone()).collect(),
        columns,
    );

    Ok(MatrixBuild {
        vocabulary,
        matrix,
        empty_after_preprocess,
    })
}

/// TF-IDF weights of an ad-hoc piece of text against an existing
/// vocabulary. Returns the sparse weights and whether any token was in
/// vocabulary at all.
pub fn text_to_weights(
    text: &str,
    vocabulary: &Vocabulary,
    config: &PreprocessConfig,
) -> (Vec<(usize, f64)>, bool) {
    let tokens = preprocess_text(text, config);
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    for t in &tokens {
        if let Some(idx) = vocabulary.term_index(t) {
            *counts.entry(idx).or_insert(0) += 1;
        }
    }
    let any_known = !counts.is_empty();
    let weights = counts
        .into_iter()
        .map(|(t, tf)| (t, tf as f64 * vocabulary.idf(t)))
        .collect();
    (weights, any_known)
}

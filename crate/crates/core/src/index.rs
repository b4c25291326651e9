//! The persisted index: a single self-describing JSON document, format
//! tag "hierindex/1".
//!
//! The file carries everything a query needs — build parameters, the
//! preprocessing configuration including the concrete stopword list, the
//! pruned vocabulary with document frequencies, the semantic model, the
//! per-document vectors and labels, and the node table (children, leaf
//! document lists, Gaussian parameters, top terms). Serialization is
//! deterministic: rebuilding from the same corpus bytes and arguments
//! yields a byte-identical file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{build_matrix, PreprocessConfig, RawDocument, Vocabulary};
use crate::gauss::GaussianModel;
use crate::hierarchy::{
    build_tree, node_top_terms, ClusterNode, ClusterTree, NodeId, TreeParams,
};
use crate::linalg::Mat;
use crate::lsi::{fit_lsi, LsiModel, LsiOptions, SemanticVector};
use crate::{Error, Result};

pub const FORMAT_TAG: &str = "hierindex/1";

/// Everything that parameterized a build, for reproducibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildParams {
    pub topics: usize,
    pub beta: f64,
    pub seed: u64,
    pub min_split_size: usize,
    pub literal_eq6: bool,
    pub normalize: bool,
    pub top_terms: usize,
    /// Fixed convention tags recorded for anyone comparing outputs.
    pub tf: String,
    pub idf: String,
    pub covariance: String,
    pub projection: String,
    pub split_offset: String,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            topics: 20,
            beta: 0.5,
            seed: 42,
            min_split_size: 4,
            literal_eq6: false,
            normalize: false,
            top_terms: 10,
            tf: "raw_count".to_string(),
            idf: "ln_n_over_df".to_string(),
            covariance: "population".to_string(),
            projection: "ut_x".to_string(),
            split_offset: "mean_abs_centered_projection".to_string(),
        }
    }
}

impl BuildParams {
    fn with_conventions(mut self) -> Self {
        if self.literal_eq6 {
            self.split_offset = "literal_raw_projection".to_string();
        }
        self
    }
}

/// Diagnostics worth reporting after a build.
#[derive(Debug, Clone, Default)]
pub struct BuildDiagnostics {
    pub empty_after_preprocess: Vec<String>,
    /// Set when the matrix rank forced fewer topics than requested.
    pub reduced_topics: Option<usize>,
    pub svd_iterations: usize,
    pub vocabulary_size: usize,
    pub matrix_nnz: usize,
}

#[derive(Debug, Clone)]
pub struct Index {
    build_params: BuildParams,
    preprocess: PreprocessConfig,
    vocabulary: Vocabulary,
    lsi: LsiModel,
    doc_labels: Vec<Option<String>>,
    doc_vectors: Vec<SemanticVector>,
    tree: ClusterTree,
    top_terms: BTreeMap<NodeId, Vec<(String, f64)>>,
}

impl Index {
    /// Run the whole pipeline over loaded documents.
    pub fn build(
        docs: &[RawDocument],
        preprocess: PreprocessConfig,
        params: BuildParams,
    ) -> Result<(Index, BuildDiagnostics)> {
        let params = params.with_conventions();
        let built = build_matrix(docs, &preprocess)?;
        let options = LsiOptions {
            seed: params.seed,
            normalize: params.normalize,
            ..Default::default()
        };
        let mut fit = fit_lsi(&built.matrix, params.topics, &options)?;
        fit.model.vocabulary_fingerprint = built.vocabulary.fingerprint();

        let tree_params = TreeParams {
            beta: params.beta,
            min_split_size: params.min_split_size,
            seed: params.seed,
            literal_offset: params.literal_eq6,
        };
        let tree = build_tree(&fit.doc_vectors, &tree_params)?;

        let mut top_terms = BTreeMap::new();
        for node in tree.nodes() {
            top_terms.insert(
                node.id,
                node_top_terms(&tree, node.id, params.top_terms, &built.matrix, &built.vocabulary)?,
            );
        }

        let diagnostics = BuildDiagnostics {
            empty_after_preprocess: built.empty_after_preprocess,
            reduced_topics: fit.reduced_to,
            svd_iterations: fit.iterations,
            vocabulary_size: built.vocabulary.len(),
            matrix_nnz: built.matrix.nnz(),
        };

        let index = Index {
            build_params: params,
            preprocess,
            vocabulary: built.vocabulary,
            lsi: fit.model,
            doc_labels: docs.iter().map(|d| d.label.clone()).collect(),
            doc_vectors: fit.doc_vectors,
            tree,
            top_terms,
        };
        Ok((index, diagnostics))
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn lsi(&self) -> &LsiModel {
        &self.lsi
    }

    pub fn build_params(&self) -> &BuildParams {
        &self.build_params
    }

    pub fn preprocess_config(&self) -> &PreprocessConfig {
        &self.preprocess
    }

    pub fn num_docs(&self) -> usize {
        self.doc_vectors.len()
    }

    pub fn doc_vectors(&self) -> &[SemanticVector] {
        &self.doc_vectors
    }

    pub fn doc_labels(&self) -> &[Option<String>] {
        &self.doc_labels
    }

    pub fn doc_id(&self, doc: u32) -> &str {
        self.doc_vectors[doc as usize]
            .doc_id
            .as_deref()
            .unwrap_or("")
    }

    pub fn node_top_terms(&self, node: NodeId) -> &[(String, f64)] {
        self.top_terms.get(&node).map_or(&[], |v| v.as_slice())
    }

    /// Preprocess text with the stored configuration and fold it into
    /// the stored semantic space. The flag reports an all-unknown query.
    pub fn project_text(&self, text: &str) -> (SemanticVector, bool) {
        let (weights, any_known) =
            crate::corpus::text_to_weights(text, &self.vocabulary, &self.preprocess);
        let projection = self.lsi.project_query(&weights);
        (projection.vector, !any_known)
    }

    /// Project a batch of externally loaded documents (for evaluation).
    pub fn project_documents(&self, docs: &[RawDocument]) -> Vec<SemanticVector> {
        docs.iter()
            .map(|d| {
                let (mut v, _) = self.project_text(&d.text);
                v.doc_id = Some(d.id.clone());
                v
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&IndexFile::from(self)).expect("index serialization cannot fail")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Index> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Index::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Index> {
        let file: IndexFile =
            serde_json::from_str(text).map_err(|e| Error::IndexFormat(e.to_string()))?;
        file.try_into()
    }
}

// ---- on-disk representation ----

#[derive(Serialize, Deserialize)]
struct IndexFile {
    format: String,
    build_params: BuildParams,
    preprocess: PreprocessConfig,
    vocabulary: Vocabulary,
    lsi: LsiModel,
    docs: DocsFile,
    tree: TreeFile,
}

#[derive(Serialize, Deserialize)]
struct DocsFile {
    ids: Vec<String>,
    labels: Vec<Option<String>>,
    vectors: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    root: NodeId,
    level_counts: BTreeMap<u32, usize>,
    nodes: Vec<NodeFile>,
}

#[derive(Serialize, Deserialize)]
struct NodeFile {
    id: NodeId,
    level: u32,
    children: Vec<NodeId>,
    /// Direct document indices; present for leaves only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    docs: Option<Vec<u32>>,
    centroid: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    ridge: f64,
    n: usize,
    top_terms: Vec<(String, f64)>,
}

impl From<&Index> for IndexFile {
    fn from(index: &Index) -> Self {
        let nodes = index
            .tree
            .nodes()
            .map(|node| NodeFile {
                id: node.id,
                level: node.level,
                children: node.children.clone(),
                docs: node.is_leaf().then(|| node.member_docs.clone()),
                centroid: node.gaussian.centroid.clone(),
                covariance: (0..node.gaussian.covariance.rows())
                    .map(|i| node.gaussian.covariance.row(i).to_vec())
                    .collect(),
                ridge: node.gaussian.ridge,
                n: node.gaussian.n,
                top_terms: index.node_top_terms(node.id).to_vec(),
            })
            .collect();
        IndexFile {
            format: FORMAT_TAG.to_string(),
            build_params: index.build_params.clone(),
            preprocess: index.preprocess.clone(),
            vocabulary: index.vocabulary.clone(),
            lsi: index.lsi.clone(),
            docs: DocsFile {
                ids: index
                    .doc_vectors
                    .iter()
                    .map(|v| v.doc_id.clone().unwrap_or_default())
                    .collect(),
                labels: index.doc_labels.clone(),
                vectors: index.doc_vectors.iter().map(|v| v.coords.clone()).collect(),
            },
            tree: TreeFile {
                root: index.tree.root(),
                level_counts: index.tree.level_counts(),
                nodes,
            },
        }
    }
}

impl TryFrom<IndexFile> for Index {
    type Error = Error;

    fn try_from(file: IndexFile) -> Result<Index> {
        if file.format != FORMAT_TAG {
            return Err(Error::IndexFormat(format!(
                "unsupported format tag {:?}, expected {FORMAT_TAG:?}",
                file.format
            )));
        }
        if file.lsi.vocabulary_fingerprint != file.vocabulary.fingerprint() {
            return Err(Error::IndexFormat(
                "semantic model does not belong to the stored vocabulary".to_string(),
            ));
        }
        let num_docs = file.docs.ids.len();
        if file.docs.vectors.len() != num_docs || file.docs.labels.len() != num_docs {
            return Err(Error::IndexFormat(
                "document ids, labels and vectors disagree in length".to_string(),
            ));
        }

        // Leaf documents first, then transitive sets bottom-up by level.
        let mut by_id: BTreeMap<NodeId, &NodeFile> = BTreeMap::new();
        for node in &file.tree.nodes {
            by_id.insert(node.id, node);
        }
        let mut member_docs: BTreeMap<NodeId, Vec<u32>> = BTreeMap::new();
        let mut order: Vec<&NodeFile> = file.tree.nodes.iter().collect();
        order.sort_by_key(|n| n.level);
        for node in order {
            let docs = if node.children.is_empty() {
                node.docs.clone().ok_or_else(|| {
                    Error::IndexFormat(format!("leaf {} has no document list", node.id))
                })?
            } else {
                let mut union = Vec::new();
                for child in &node.children {
                    let child_docs = member_docs.get(child).ok_or_else(|| {
                        Error::IndexFormat(format!(
                            "node {} references child {child} at a level not below it",
                            node.id
                        ))
                    })?;
                    union.extend_from_slice(child_docs);
                }
                union.sort_unstable();
                union
            };
            member_docs.insert(node.id, docs);
        }

        let mut nodes = Vec::with_capacity(file.tree.nodes.len());
        for node in &file.tree.nodes {
            let dim = node.centroid.len();
            if node.covariance.len() != dim {
                return Err(Error::IndexFormat(format!(
                    "node {}: covariance does not match centroid dimension",
                    node.id
                )));
            }
            let covariance = Mat::from_rows(&node.covariance);
            let gaussian =
                GaussianModel::from_stored(node.centroid.clone(), covariance, node.ridge, node.n)?;
            nodes.push(ClusterNode {
                id: node.id,
                level: node.level,
                children: node.children.clone(),
                member_docs: member_docs.remove(&node.id).expect("filled above"),
                gaussian,
            });
        }
        let tree = ClusterTree::from_parts(nodes, file.tree.root, num_docs)?;

        let doc_vectors = file
            .docs
            .ids
            .iter()
            .zip(&file.docs.vectors)
            .map(|(id, coords)| SemanticVector {
                coords: coords.clone(),
                doc_id: Some(id.clone()),
            })
            .collect();

        let top_terms = file
            .tree
            .nodes
            .iter()
            .map(|n| (n.id, n.top_terms.clone()))
            .collect();

        Ok(Index {
            build_params: file.build_params,
            preprocess: file.preprocess,
            vocabulary: file.vocabulary,
            lsi: file.lsi,
            doc_labels: file.docs.labels,
            doc_vectors,
            tree,
            top_terms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::categorize::{categorize_text, QueryWarning};

    fn doc(id: &str, label: &str, text: &str) -> RawDocument {
        RawDocument {
            id: id.to_string(),
            text: text.to_string(),
            label: Some(label.to_string()),
        }
    }

    fn tiny_corpus() -> Vec<RawDocument> {
        let space = [
            "the rocket launched into orbit around the moon",
            "orbital mechanics of satellites and rockets",
            "the satellite reached orbit after launch",
            "rockets burn fuel to escape gravity into orbit",
            "the moon landing required orbital calculations",
            "satellites orbiting earth relay rocket telemetry",
        ];
        let market = [
            "the stock market rallied as traders bought shares",
            "shares of the company fell in heavy trading",
            "market prices and stock trading volumes rose",
            "traders watched the stock exchange closely",
            "the share price climbed after strong earnings",
            "stock traders hedged their market positions",
        ];
        let mut docs = Vec::new();
        for (i, text) in space.iter().enumerate() {
            docs.push(doc(&format!("sci.space/{i:03}"), "sci.space", text));
        }
        for (i, text) in market.iter().enumerate() {
            docs.push(doc(&format!("misc.invest/{i:03}"), "misc.invest", text));
        }
        docs
    }

    fn build_tiny() -> Index {
        let docs = tiny_corpus();
        let preprocess = PreprocessConfig {
            min_df: 1,
            max_df_fraction: 1.0,
            ..Default::default()
        };
        let params = BuildParams {
            topics: 4,
            beta: 1.0,
            ..Default::default()
        };
        Index::build(&docs, preprocess, params).unwrap().0
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let index = build_tiny();
        let json = index.to_json();
        let reloaded = Index::from_json(&json).unwrap();
        assert_eq!(json, reloaded.to_json());
        assert_eq!(index.num_docs(), reloaded.num_docs());
        assert_eq!(index.tree().len(), reloaded.tree().len());
    }

    #[test]
    fn rebuild_is_byte_identical() {
        let docs = tiny_corpus();
        let preprocess = PreprocessConfig {
            min_df: 1,
            max_df_fraction: 1.0,
            ..Default::default()
        };
        let params = BuildParams {
            topics: 4,
            beta: 1.0,
            ..Default::default()
        };
        let a = Index::build(&docs, preprocess.clone(), params.clone()).unwrap().0;
        let b = Index::build(&docs, preprocess, params).unwrap().0;
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn format_tag_is_checked() {
        let index = build_tiny();
        let json = index.to_json().replace("hierindex/1", "hierindex/9");
        let err = Index::from_json(&json).unwrap_err();
        assert!(matches!(err, Error::IndexFormat(_)));
    }

    #[test]
    fn vocabulary_fingerprint_is_checked() {
        let index = build_tiny();
        // Renaming a term breaks the model-vocabulary binding.
        let json = index.to_json().replace("\"rocket\"", "\"rockzz\"");
        let err = Index::from_json(&json).unwrap_err();
        assert!(matches!(err, Error::IndexFormat(_)), "{err}");
    }

    #[test]
    fn training_text_lands_on_a_node_containing_it() {
        let index = build_tiny();
        let docs = tiny_corpus();
        for (i, d) in docs.iter().enumerate() {
            let result = categorize_text(&index, &d.text).unwrap();
            let set = index.tree().document_set(result.node).unwrap();
            assert!(
                set.binary_search(&(i as u32)).is_ok(),
                "doc {i} landed on node {} without it",
                result.node
            );
        }
    }

    #[test]
    fn empty_query_goes_to_root_with_warning() {
        let index = build_tiny();
        let result = categorize_text(&index, "").unwrap();
        assert_eq!(result.node, index.tree().root());
        assert!(result.warnings.contains(&QueryWarning::NoKnownTerms));
        let oov = categorize_text(&index, "zzzqqq xxyyzz").unwrap();
        assert_eq!(oov.node, index.tree().root());
    }

    #[test]
    fn concatenated_leaf_documents_land_in_their_leaf_or_an_ancestor() {
        let index = build_tiny();
        let docs = tiny_corpus();
        let leaf = index
            .tree()
            .nodes()
            .find(|n| n.is_leaf() && n.size() >= 2)
            .expect("a leaf with two documents");
        let a = leaf.member_docs[0] as usize;
        let b = leaf.member_docs[1] as usize;
        let combined = format!("{} {}", docs[a].text, docs[b].text);
        let result = categorize_text(&index, &combined).unwrap();
        let landed = index.tree().document_set(result.node).unwrap();
        assert!(
            landed.binary_search(&(a as u32)).is_ok() && landed.binary_search(&(b as u32)).is_ok(),
            "combined query landed on node {} missing its sources",
            result.node
        );
    }

    #[test]
    fn reloaded_index_categorizes_identically() {
        let index = build_tiny();
        let reloaded = Index::from_json(&index.to_json()).unwrap();
        for text in [
            "rockets launch satellites into orbit",
            "stock traders and market shares",
        ] {
            let a = categorize_text(&index, text).unwrap();
            let b = categorize_text(&reloaded, text).unwrap();
            assert_eq!(a.node, b.node);
            assert_eq!(a.path, b.path);
            assert_eq!(a.distances, b.distances);
        }
    }

    #[test]
    fn stopword_only_document_stays_as_zero_column() {
        let mut docs = tiny_corpus();
        docs.push(doc("misc.invest/zzz", "misc.invest", "the and of"));
        let preprocess = PreprocessConfig {
            min_df: 1,
            max_df_fraction: 1.0,
            ..Default::default()
        };
        let params = BuildParams {
            topics: 4,
            beta: 1.0,
            ..Default::default()
        };
        let (index, diagnostics) = Index::build(&docs, preprocess, params).unwrap();
        assert_eq!(
            diagnostics.empty_after_preprocess,
            vec!["misc.invest/zzz".to_string()]
        );
        // The document keeps its column and lands in exactly one leaf.
        assert_eq!(index.num_docs(), 13);
        let zero_idx = 12u32;
        assert!(index.doc_vectors()[12].coords.iter().all(|&c| c == 0.0));
        let owners: usize = index
            .tree()
            .nodes()
            .filter(|n| n.is_leaf() && n.member_docs.binary_search(&zero_idx).is_ok())
            .count();
        assert_eq!(owners, 1);
    }

    #[test]
    fn literal_offset_mode_is_recorded_and_plumbed() {
        let docs = tiny_corpus();
        let preprocess = PreprocessConfig {
            min_df: 1,
            max_df_fraction: 1.0,
            ..Default::default()
        };
        let params = BuildParams {
            topics: 4,
            beta: 1.0,
            literal_eq6: true,
            ..Default::default()
        };
        let (index, _) = Index::build(&docs, preprocess, params).unwrap();
        assert_eq!(index.build_params().split_offset, "literal_raw_projection");
        let json = index.to_json();
        assert!(json.contains("\"literal_raw_projection\""));
        // Still a valid, loadable index.
        let reloaded = Index::from_json(&json).unwrap();
        assert!(reloaded.build_params().literal_eq6);
    }

    #[test]
    fn top_terms_present_for_every_node() {
        let index = build_tiny();
        for node in index.tree().nodes() {
            assert!(
                !index.node_top_terms(node.id).is_empty(),
                "node {} has no top terms",
                node.id
            );
        }
    }
}

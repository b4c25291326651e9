//! Bottom-up construction of the cluster tree.
//!
//! Level 1 is the flat clustering of the document vectors. Each further
//! level flat-clusters the centroids of the level below, until the
//! centroid set no longer splits; that last cluster is the root. Nodes
//! with exactly one child are collapsed away, so every internal node of
//! the finished tree branches.
//!
//! Every node carries a Gaussian fitted over the semantic vectors of its
//! full document set (not over child centroids): categorization distances
//! need document-scale covariance at every level.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{TfIdfMatrix, Vocabulary};
use crate::divisive::{flat_cluster, FlatParams};
use crate::gauss::{fit_gaussian, GaussianModel};
use crate::hashing::derive_seed;
use crate::lsi::SemanticVector;
use crate::{Error, Result};

pub type NodeId = u32;

/// Hard cap on hierarchy depth; hitting it is an error.
pub const MAX_LEVELS: u32 = 32;

#[derive(Debug, Clone)]
pub struct ClusterNode {
    pub id: NodeId,
    /// 1 = clusters of documents; higher levels cluster centroids.
    /// Document themselves sit at the implicit level 0.
    pub level: u32,
    /// Child node ids; empty for leaves.
    pub children: Vec<NodeId>,
    /// Transitive document set, as sorted indices into the document
    /// vector list the tree was built from.
    pub member_docs: Vec<u32>,
    pub gaussian: GaussianModel,
}

impl ClusterNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Centroid used when clustering this node at the next level.
    pub fn representative(&self) -> &[f64] {
        &self.gaussian.centroid
    }

    pub fn size(&self) -> usize {
        self.member_docs.len()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TreeParams {
    pub beta: f64,
    pub min_split_size: usize,
    pub seed: u64,
    pub literal_offset: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            beta: 0.5,
            min_split_size: 4,
            seed: 42,
            literal_offset: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClusterTree {
    nodes: BTreeMap<NodeId, ClusterNode>,
    root: NodeId,
    num_docs: usize,
}

impl ClusterTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&ClusterNode> {
        self.nodes.get(&id).ok_or(Error::UnknownNode(id))
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &ClusterNode> {
        self.nodes.values()
    }

    /// The transitive document set of a node. Leaves own their documents
    /// directly; internal nodes hold the union of their children, stored
    /// at build time.
    pub fn document_set(&self, id: NodeId) -> Result<&[u32]> {
        Ok(&self.node(id)?.member_docs)
    }

    /// Number of nodes per level.
    pub fn level_counts(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for node in self.nodes.values() {
            *counts.entry(node.level).or_insert(0) += 1;
        }
        counts
    }

    /// Highest level present (the root's level).
    pub fn height(&self) -> u32 {
        self.nodes.values().map(|n| n.level).max().unwrap_or(0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.values().filter(|n| n.is_leaf()).count()
    }

    /// Rebuild a tree from raw parts (index deserialization).
    pub fn from_parts(nodes: Vec<ClusterNode>, root: NodeId, num_docs: usize) -> Result<Self> {
        let map: BTreeMap<NodeId, ClusterNode> = nodes.into_iter().map(|n| (n.id, n)).collect();
        if !map.contains_key(&root) {
            return Err(Error::UnknownNode(root));
        }
        Ok(ClusterTree {
            nodes: map,
            root,
            num_docs,
        })
    }
}

/// Build the full hierarchy over the document vectors.
pub fn build_tree(doc_vectors: &[SemanticVector], params: &TreeParams) -> Result<ClusterTree> {
    if doc_vectors.is_empty() {
        return Err(Error::Invalid(
            "cannot build a hierarchy over zero documents".to_string(),
        ));
    }

    let mut nodes: BTreeMap<NodeId, ClusterNode> = BTreeMap::new();
    let mut next_id: NodeId = 0;

    let flat_params = |level: u32| FlatParams {
        beta: params.beta,
        min_split_size: params.min_split_size,
        seed: derive_seed(params.seed, level as u64),
        literal_offset: params.literal_offset,
    };

    // Level 1: cluster the documents themselves.
    let level1 = flat_cluster(doc_vectors, &flat_params(1));
    let mut current: Vec<NodeId> = Vec::new();
    for cluster in &level1.clusters {
        let mut member_docs: Vec<u32> = cluster.iter().map(|&d| d as u32).collect();
        member_docs.sort_unstable();
        let points: Vec<&[f64]> = member_docs
            .iter()
            .map(|&d| doc_vectors[d as usize].coords.as_slice())
            .collect();
        let gaussian = fit_gaussian(&points);
        let id = next_id;
        next_id += 1;
        nodes.insert(
            id,
            ClusterNode {
                id,
                level: 1,
                children: Vec::new(),
                member_docs,
                gaussian,
            },
        );
        current.push(id);
    }

    // Upper levels: cluster the centroids of the level below.
    let mut level: u32 = 1;
    while current.len() > 1 {
        level += 1;
        if level > MAX_LEVELS {
            return Err(Error::TooManyLevels(MAX_LEVELS));
        }
        let reps: Vec<Vec<f64>> = current
            .iter()
            .map(|id| nodes[id].representative().to_vec())
            .collect();
        let grouping = flat_cluster(&reps, &flat_params(level));
        let mut upper: Vec<NodeId> = Vec::new();
        for group in &grouping.clusters {
            let children: Vec<NodeId> = group.iter().map(|&i| current[i]).collect();
            let mut member_docs: Vec<u32> = children
                .iter()
                .flat_map(|c| nodes[c].member_docs.iter().copied())
                .collect();
            member_docs.sort_unstable();
            let points: Vec<&[f64]> = member_docs
                .iter()
                .map(|&d| doc_vectors[d as usize].coords.as_slice())
                .collect();
            let gaussian = fit_gaussian(&points);
            let id = next_id;
            next_id += 1;
            nodes.insert(
                id,
                ClusterNode {
                    id,
                    level,
                    children,
                    member_docs,
                    gaussian,
                },
            );
            upper.push(id);
        }
        current = upper;
    }

    let tree = ClusterTree {
        nodes,
        root: current[0],
        num_docs: doc_vectors.len(),
    };
    Ok(collapse_single_children(tree))
}

/// Replace every node that has exactly one child by that child,
/// recursively; document sets are untouched. Idempotent.
pub fn collapse_single_children(tree: ClusterTree) -> ClusterTree {
    fn resolve(nodes: &BTreeMap<NodeId, ClusterNode>, mut id: NodeId) -> NodeId {
        while nodes[&id].children.len() == 1 {
            id = nodes[&id].children[0];
        }
        id
    }

    let root = resolve(&tree.nodes, tree.root);
    let mut kept: BTreeMap<NodeId, ClusterNode> = BTreeMap::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if kept.contains_key(&id) {
            continue;
        }
        let mut node = tree.nodes[&id].clone();
        node.children = node
            .children
            .iter()
            .map(|&c| resolve(&tree.nodes, c))
            .collect();
        stack.extend(node.children.iter().copied());
        kept.insert(id, node);
    }
    ClusterTree {
        nodes: kept,
        root,
        num_docs: tree.num_docs,
    }
}

/// Top `m` terms of a node's document set by summed TF-IDF weight.
/// Ties break lexicographically.
pub fn node_top_terms(
    tree: &ClusterTree,
    node: NodeId,
    m: usize,
    matrix: &TfIdfMatrix,
    vocabulary: &Vocabulary,
) -> Result<Vec<(String, f64)>> {
    let node = tree.node(node)?;
    let mut sums = vec![0.0; vocabulary.len()];
    for &d in &node.member_docs {
        for (t, w) in matrix.column(d as usize) {
            sums[t] += w;
        }
    }
    let mut ranked: Vec<(usize, f64)> = sums
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| vocabulary.terms[a.0].cmp(&vocabulary.terms[b.0]))
    });
    Ok(ranked
        .into_iter()
        .take(m)
        .map(|(t, w)| (vocabulary.terms[t].clone(), w))
        .collect())
}

//! Route a query down the cluster tree.
//!
//! Starting at the root, descend into the child of least Mahalanobis
//! distance as long as that child is strictly closer than the current
//! node; otherwise stop where we are. A query can therefore legitimately
//! land on an internal node. Ties between children go to the lower node
//! id.

use serde::Serialize;

use crate::gauss::mahalanobis;
use crate::hierarchy::{ClusterTree, NodeId};
use crate::index::Index;
use crate::lsi::SemanticVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryWarning {
    /// No query term occurred in the index vocabulary.
    NoKnownTerms,
    /// The query projected to the zero vector.
    ZeroVector,
}

#[derive(Debug, Clone)]
pub struct CategorizationResult {
    /// The node the query landed on.
    pub node: NodeId,
    /// Root-to-target node ids.
    pub path: Vec<NodeId>,
    /// Mahalanobis distance to each node on the path.
    pub distances: Vec<f64>,
    /// Best child of the final node when it is internal: the candidate
    /// the descent refused because it was no closer than the node itself.
    pub stopped_child: Option<(NodeId, f64)>,
    pub warnings: Vec<QueryWarning>,
}

/// Tree search per the categorization rule.
pub fn categorize(tree: &ClusterTree, query: &SemanticVector) -> Result<CategorizationResult> {
    let root = tree.node(tree.root())?;
    if query.dim() != root.gaussian.dim() {
        return Err(Error::DimensionMismatch {
            expected: root.gaussian.dim(),
            got: query.dim(),
        });
    }

    let mut warnings = Vec::new();
    if query.coords.iter().all(|&c| c == 0.0) {
        warnings.push(QueryWarning::ZeroVector);
    }

    let mut path = Vec::new();
    let mut distances = Vec::new();
    let mut current = tree.node(tree.root())?;
    let mut current_dist = mahalanobis(&current.gaussian, &query.coords);
    let stopped_child;
    loop {
        path.push(current.id);
        distances.push(current_dist);
        if current.is_leaf() {
            stopped_child = None;
            break;
        }
        // Children are built in ascending id order; strict `<` keeps the
        // lowest id on ties.
        let mut best: Option<(NodeId, f64)> = None;
        for &child_id in &current.children {
            let child = tree.node(child_id)?;
            let d = mahalanobis(&child.gaussian, &query.coords);
            let better = match best {
                None => true,
                Some((best_id, best_d)) => d < best_d || (d == best_d && child_id < best_id),
            };
            if better {
                best = Some((child_id, d));
            }
        }
        let (child_id, child_dist) = best.expect("internal node has children");
        if child_dist < current_dist {
            current = tree.node(child_id)?;
            current_dist = child_dist;
        } else {
            stopped_child = Some((child_id, child_dist));
            break;
        }
    }

    Ok(CategorizationResult {
        node: *path.last().expect("path never empty"),
        path,
        distances,
        stopped_child,
        warnings,
    })
}

/// Preprocess raw text with the index's stored configuration, fold it
/// into semantic space, and categorize. Text with no known terms lands
/// on the root with a warning.
pub fn categorize_text(index: &Index, text: &str) -> Result<CategorizationResult> {
    let (projection, no_known) = index.project_text(text);
    if no_known {
        let tree = index.tree();
        let root = tree.node(tree.root())?;
        let d = mahalanobis(&root.gaussian, &projection.coords);
        return Ok(CategorizationResult {
            node: root.id,
            path: vec![root.id],
            distances: vec![d],
            stopped_child: None,
            warnings: vec![QueryWarning::NoKnownTerms, QueryWarning::ZeroVector],
        });
    }
    categorize(index.tree(), &projection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{build_tree, TreeParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blob_vectors(seed: u64, centers: &[[f64; 2]], spread: f64, per: usize) -> Vec<SemanticVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for c in centers {
            for _ in 0..per {
                out.push(SemanticVector::new(vec![
                    c[0] + spread * (rng.gen::<f64>() - 0.5),
                    c[1] + spread * (rng.gen::<f64>() - 0.5),
                ]));
            }
        }
        out
    }

    /// 20-dimensional blobs, separated in the first two coordinates.
    fn blob_vectors_20d(
        seed: u64,
        centers: &[[f64; 2]],
        spread: f64,
        per: usize,
    ) -> Vec<SemanticVector> {
        let dim = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for c in centers {
            for _ in 0..per {
                let mut p = vec![0.0; dim];
                p[0] = c[0];
                p[1] = c[1];
                for x in p.iter_mut() {
                    *x += spread * (rng.gen::<f64>() - 0.5);
                }
                out.push(SemanticVector::new(p));
            }
        }
        out
    }

    #[test]
    fn blob_means_land_in_their_clusters() {
        let centers = [[0.0, 0.0], [60.0, 0.0], [0.0, 60.0]];
        let docs = blob_vectors_20d(3, &centers, 2.0, 30);
        let params = TreeParams {
            beta: 0.9,
            ..Default::default()
        };
        let tree = build_tree(&docs, &params).unwrap();
        for b in 0..3 {
            // Query the empirical mean of each blob.
            let mut query = vec![0.0; 20];
            for v in &docs[b * 30..(b + 1) * 30] {
                for (q, x) in query.iter_mut().zip(&v.coords) {
                    *q += x / 30.0;
                }
            }
            let result = categorize(&tree, &SemanticVector::new(query)).unwrap();
            let landed = tree.node(result.node).unwrap();
            let expected: Vec<u32> = (b as u32 * 30..(b as u32 + 1) * 30).collect();
            assert_eq!(landed.member_docs, expected, "blob {b}");
            // Descent strictly improved at every step taken.
            for w in result.distances.windows(2) {
                assert!(w[1] < w[0]);
            }
            assert_eq!(result.path[0], tree.root());
            assert!(result.path.len() <= tree.height() as usize + 1);
        }
    }

    #[test]
    fn single_node_tree_returns_root() {
        let docs = blob_vectors(1, &[[0.0, 0.0]], 1.0, 3);
        let tree = build_tree(
            &docs,
            &TreeParams {
                beta: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(tree.len(), 1);
        let result = categorize(&tree, &SemanticVector::new(vec![5.0, 5.0])).unwrap();
        assert_eq!(result.path.len(), 1);
        assert_eq!(result.node, tree.root());
    }

    #[test]
    fn dimension_mismatch_is_fatal() {
        let docs = blob_vectors(1, &[[0.0, 0.0], [9.0, 9.0]], 1.0, 10);
        let tree = build_tree(&docs, &TreeParams::default()).unwrap();
        let err = categorize(&tree, &SemanticVector::new(vec![1.0, 2.0, 3.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, got: 3 }));
    }

    #[test]
    fn exact_tie_prefers_lower_node_id() {
        // A mirror-symmetric pair of blobs: blob B is the exact negation
        // of blob A. Negation is exact in IEEE arithmetic, so the two
        // child Gaussians are exact mirrors and the midpoint query at the
        // origin sees bitwise equal distances to both children.
        let dim = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut points: Vec<SemanticVector> = Vec::new();
        let a: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                (0..dim)
                    .map(|j| if j % 2 == 0 { 10.0 } else { 3.0 } + (rng.gen::<f64>() - 0.5))
                    .collect()
            })
            .collect();
        for p in &a {
            points.push(SemanticVector::new(p.clone()));
        }
        for p in &a {
            points.push(SemanticVector::new(p.iter().map(|x| -x).collect()));
        }
        let tree = build_tree(
            &points,
            &TreeParams {
                beta: 0.9,
                ..Default::default()
            },
        )
        .unwrap();
        let root = tree.node(tree.root()).unwrap();
        assert_eq!(root.children.len(), 2);
        let origin = SemanticVector::new(vec![0.0; dim]);
        let result = categorize(&tree, &origin).unwrap();
        let d0 = mahalanobis(&tree.node(root.children[0]).unwrap().gaussian, &origin.coords);
        let d1 = mahalanobis(&tree.node(root.children[1]).unwrap().gaussian, &origin.coords);
        assert_eq!(d0, d1, "construction failed to produce an exact tie");
        // The query is essentially the root centroid, so descent stops at
        // the root, and the recorded candidate child must be the lower id.
        let (chosen, _) = result.stopped_child.expect("root is internal");
        assert_eq!(chosen, *root.children.iter().min().unwrap());
    }

    #[test]
    fn zero_vector_is_flagged_but_still_routed() {
        let docs = blob_vectors(7, &[[5.0, 5.0], [50.0, 50.0]], 2.0, 15);
        let tree = build_tree(&docs, &TreeParams::default()).unwrap();
        let result = categorize(&tree, &SemanticVector::new(vec![0.0, 0.0])).unwrap();
        assert!(result.warnings.contains(&QueryWarning::ZeroVector));
        assert!(!result.path.is_empty());
    }
}

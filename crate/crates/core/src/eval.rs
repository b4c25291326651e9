//! Evaluation harness: clustering F-measure against labeled classes,
//! K-Means and K-Medoids baselines in the same semantic space, the
//! nearest-neighbor categorization accuracy protocol, and parameter
//! sweeps over (topics, beta).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::categorize::categorize;
use crate::corpus::{build_matrix, PreprocessConfig, RawDocument};
use crate::divisive::FlatClustering;
use crate::hashing::derive_seed;
use crate::hierarchy::{build_tree, ClusterTree, TreeParams};
use crate::kmeans::{lloyd, wcss};
use crate::linalg::{cosine, euclidean};
use crate::lsi::{fit_lsi, LsiOptions, SemanticVector};
use crate::Result;

/// Class-by-cluster document counts.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    pub class_labels: Vec<String>,
    /// counts[class][cluster]
    pub counts: Vec<Vec<usize>>,
    pub class_totals: Vec<usize>,
    pub cluster_totals: Vec<usize>,
    pub total: usize,
}

impl ContingencyTable {
    /// Cross-tabulate labeled documents against cluster assignments.
    /// Unlabeled documents are ignored; returns `None` when nothing is
    /// labeled.
    pub fn from_assignments(
        labels: &[Option<String>],
        assignments: &[usize],
    ) -> Option<ContingencyTable> {
        assert_eq!(labels.len(), assignments.len());
        let num_clusters = assignments.iter().copied().max().map_or(0, |m| m + 1);
        let mut class_labels: Vec<String> = labels.iter().flatten().cloned().collect();
        class_labels.sort();
        class_labels.dedup();
        if class_labels.is_empty() {
            return None;
        }
        let mut counts = vec![vec![0usize; num_clusters]; class_labels.len()];
        for (label, &cluster) in labels.iter().zip(assignments) {
            if let Some(label) = label {
                let class = class_labels.binary_search(label).expect("label present");
                counts[class][cluster] += 1;
            }
        }
        let class_totals: Vec<usize> = counts.iter().map(|row| row.iter().sum()).collect();
        let cluster_totals: Vec<usize> = (0..num_clusters)
            .map(|j| counts.iter().map(|row| row[j]).sum())
            .collect();
        let total = class_totals.iter().sum();
        Some(ContingencyTable {
            class_labels,
            counts,
            class_totals,
            cluster_totals,
            total,
        })
    }
}

/// Overall clustering F-measure: the class-size-weighted maximum over
/// clusters of the per-pair harmonic mean of precision and recall,
/// `F(i,j) = 2 P R / (P + R)` with `P = n_ij / n_j`, `R = n_ij / n_i`.
pub fn f_measure(table: &ContingencyTable) -> f64 {
    assert!(table.total > 0, "empty contingency table");
    let mut overall = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        let n_i = table.class_totals[i];
        if n_i == 0 {
            continue;
        }
        let mut best = 0.0f64;
        for (j, &n_ij) in row.iter().enumerate() {
            let n_j = table.cluster_totals[j];
            if n_ij == 0 || n_j == 0 {
                continue;
            }
            let p = n_ij as f64 / n_j as f64;
            let r = n_ij as f64 / n_i as f64;
            best = best.max(2.0 * p * r / (p + r));
        }
        overall += (n_i as f64 / table.total as f64) * best;
    }
    overall
}

fn clustering_from_assignments(assignments: Vec<usize>) -> FlatClustering {
    // Drop empty clusters and renumber densely.
    let max = assignments.iter().copied().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; max];
    for &a in &assignments {
        seen[a] = true;
    }
    let mut remap = vec![usize::MAX; max];
    let mut next = 0;
    for (c, &s) in seen.iter().enumerate() {
        if s {
            remap[c] = next;
            next += 1;
        }
    }
    let assignments: Vec<usize> = assignments.into_iter().map(|a| remap[a]).collect();
    let mut clusters = vec![Vec::new(); next];
    for (p, &a) in assignments.iter().enumerate() {
        clusters[a].push(p);
    }
    FlatClustering {
        clusters,
        assignments,
    }
}

/// K-Means with farthest-point seeding, ten restarts, best WCSS kept.
pub fn kmeans_baseline<P: AsRef<[f64]> + Sync>(
    points: &[P],
    k: usize,
    seed: u64,
) -> FlatClustering {
    let n = points.len();
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, restart));
        let first = rng.gen_range(0..n);
        let mut chosen = vec![first];
        let mut taken = vec![false; n];
        taken[first] = true;
        // Distance of each point to its nearest chosen center, updated
        // incrementally as centers are added.
        let mut nearest: Vec<f64> = (0..n)
            .map(|i| euclidean(points[i].as_ref(), points[first].as_ref()))
            .collect();
        while chosen.len() < k {
            let mut far = usize::MAX;
            let mut far_d = -1.0;
            for i in 0..n {
                if !taken[i] && nearest[i] > far_d {
                    far_d = nearest[i];
                    far = i;
                }
            }
            chosen.push(far);
            taken[far] = true;
            for i in 0..n {
                let d = euclidean(points[i].as_ref(), points[far].as_ref());
                if d < nearest[i] {
                    nearest[i] = d;
                }
            }
        }
        let centroids: Vec<Vec<f64>> = chosen
            .iter()
            .map(|&i| points[i].as_ref().to_vec())
            .collect();
        let outcome = lloyd(points, centroids, 100);
        debug_assert!(outcome
            .wcss_history
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-9 * (1.0 + w[0])));
        let final_wcss = wcss(points, &outcome.assignments, &outcome.centroids);
        let keep = match &best {
            None => true,
            Some((best_wcss, _)) => final_wcss < *best_wcss,
        };
        if keep {
            best = Some((final_wcss, outcome.assignments));
        }
    }
    clustering_from_assignments(best.expect("at least one restart").1)
}

/// Pairwise-distance source; caches the full matrix while it fits.
struct PointDistances<'a, P: AsRef<[f64]>> {
    points: &'a [P],
    cache: Option<Vec<f64>>,
}

impl<'a, P: AsRef<[f64]>> PointDistances<'a, P> {
    fn new(points: &'a [P]) -> Self {
        let n = points.len();
        let cache = (n <= 4096).then(|| {
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = euclidean(points[i].as_ref(), points[j].as_ref());
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                }
            }
            d
        });
        PointDistances { points, cache }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        match &self.cache {
            Some(c) => c[i * self.points.len() + j],
            None => euclidean(self.points[i].as_ref(), self.points[j].as_ref()),
        }
    }
}

/// K-Medoids: greedy build plus seeded random restarts, each followed by
/// steepest-descent swaps until no swap improves the total distance or
/// 200 swaps were applied; the lowest-cost run wins. Medoids are input
/// points; distances are unsquared Euclidean. Single-run PAM stalls in
/// 1-swap local optima even at n = 10, so the restarts are what lets
/// small instances match exhaustive search.
pub fn kmedoids_baseline<P: AsRef<[f64]> + Sync>(
    points: &[P],
    k: usize,
    seed: u64,
) -> FlatClustering {
    let medoids = kmedoids_medoids(points, k, seed);
    let dists = PointDistances::new(points);
    let assignments: Vec<usize> = (0..points.len())
        .map(|j| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (mi, &m) in medoids.iter().enumerate() {
                let d = dists.get(m, j);
                if d < best_d {
                    best_d = d;
                    best = mi;
                }
            }
            best
        })
        .collect();
    clustering_from_assignments(assignments)
}

/// The medoid indices the best restart settles on, sorted.
pub fn kmedoids_medoids<P: AsRef<[f64]> + Sync>(points: &[P], k: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    let dists = PointDistances::new(points);

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..10u64 {
        let init = if restart == 0 {
            greedy_build(&dists, n, k)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, restart));
            let mut pool: Vec<usize> = (0..n).collect();
            for i in 0..k {
                let j = rng.gen_range(i..n);
                pool.swap(i, j);
            }
            pool.truncate(k);
            pool
        };
        let medoids = swap_descent(&dists, n, init);
        let cost: f64 = (0..n)
            .map(|j| {
                medoids
                    .iter()
                    .map(|&m| dists.get(m, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        let keep = match &best {
            None => true,
            Some((best_cost, _)) => cost < *best_cost,
        };
        if keep {
            best = Some((cost, medoids));
        }
    }
    let mut medoids = best.expect("at least one restart").1;
    medoids.sort_unstable();
    medoids
}

/// Classic BUILD: the 1-medoid optimum, then greedily the point with the
/// greatest total-distance reduction.
fn greedy_build<P: AsRef<[f64]>>(dists: &PointDistances<'_, P>, n: usize, k: usize) -> Vec<usize> {
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut nearest_d: Vec<f64> = vec![f64::INFINITY; n];
    {
        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        for i in 0..n {
            let cost: f64 = (0..n).map(|j| dists.get(i, j)).sum();
            if cost < best_cost {
                best_cost = cost;
                best = i;
            }
        }
        medoids.push(best);
        for j in 0..n {
            nearest_d[j] = dists.get(best, j);
        }
    }
    while medoids.len() < k {
        let mut best = usize::MAX;
        let mut best_gain = -1.0;
        for x in 0..n {
            if medoids.contains(&x) {
                continue;
            }
            let gain: f64 = (0..n)
                .map(|j| (nearest_d[j] - dists.get(x, j)).max(0.0))
                .sum();
            if gain > best_gain {
                best_gain = gain;
                best = x;
            }
        }
        medoids.push(best);
        for j in 0..n {
            nearest_d[j] = nearest_d[j].min(dists.get(best, j));
        }
    }
    medoids
}

/// SWAP: evaluate the exact cost change of every (medoid, candidate)
/// pair in one O(n) pass per candidate, apply the best improvement,
/// stop after 200 swaps or when none improves.
fn swap_descent<P: AsRef<[f64]>>(
    dists: &PointDistances<'_, P>,
    n: usize,
    mut medoids: Vec<usize>,
) -> Vec<usize> {
    let mut swaps = 0;
    while swaps < 200 {
        // nearest and second-nearest medoid distance per point.
        let mut d1 = vec![f64::INFINITY; n];
        let mut d2 = vec![f64::INFINITY; n];
        let mut m1 = vec![usize::MAX; n]; // index into `medoids`
        for (mi, &m) in medoids.iter().enumerate() {
            for j in 0..n {
                let d = dists.get(m, j);
                if d < d1[j] {
                    d2[j] = d1[j];
                    d1[j] = d;
                    m1[j] = mi;
                } else if d < d2[j] {
                    d2[j] = d;
                }
            }
        }

        let mut best_delta = -1e-12;
        let mut best_pair: Option<(usize, usize)> = None;
        let mut delta = vec![0.0f64; medoids.len()];
        for x in 0..n {
            if medoids.contains(&x) {
                continue;
            }
            delta.iter_mut().for_each(|d| *d = 0.0);
            let mut shared = 0.0;
            for j in 0..n {
                let dxj = dists.get(x, j);
                let gain = (dxj - d1[j]).min(0.0);
                shared += gain;
                // Point j's own nearest medoid being removed changes its
                // contribution differently: it falls back to the second
                // nearest or moves to x.
                delta[m1[j]] += (dxj.min(d2[j]) - d1[j]) - gain;
            }
            for (mi, adj) in delta.iter().enumerate() {
                let total = shared + adj;
                if total < best_delta {
                    best_delta = total;
                    best_pair = Some((mi, x));
                }
            }
        }
        match best_pair {
            Some((mi, x)) => {
                medoids[mi] = x;
                swaps += 1;
            }
            None => break,
        }
    }
    medoids
}

/// Total distance of every point to its nearest medoid.
pub fn kmedoids_cost<P: AsRef<[f64]>>(points: &[P], medoids: &[usize]) -> f64 {
    points
        .iter()
        .map(|p| {
            medoids
                .iter()
                .map(|&m| euclidean(p.as_ref(), points[m].as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Categorization accuracy: a test document is correct when the node it
/// lands on contains its nearest training document by cosine similarity
/// (ties to the lowest training index). Returns a percentage.
pub fn accuracy_protocol(
    tree: &ClusterTree,
    train: &[SemanticVector],
    test: &[SemanticVector],
) -> Result<f64> {
    assert!(!train.is_empty() && !test.is_empty());
    let correct: usize = test
        .par_iter()
        .map(|query| {
            let mut best = 0usize;
            let mut best_sim = f64::NEG_INFINITY;
            for (j, t) in train.iter().enumerate() {
                let sim = cosine(&query.coords, &t.coords);
                if sim > best_sim {
                    best_sim = sim;
                    best = j;
                }
            }
            let result = categorize(tree, query)?;
            let docs = tree.document_set(result.node)?;
            Ok(usize::from(docs.binary_search(&(best as u32)).is_ok()))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(100.0 * correct as f64 / test.len() as f64)
}

/// The flat document partition used when scoring a tree against labels:
/// its leaf clusters, in node-id order.
pub fn leaf_assignments(tree: &ClusterTree) -> Vec<usize> {
    let mut assignments = vec![usize::MAX; tree.num_docs()];
    let mut cluster = 0;
    for node in tree.nodes() {
        if node.is_leaf() {
            for &d in &node.member_docs {
                assignments[d as usize] = cluster;
            }
            cluster += 1;
        }
    }
    assignments
}

/// F-measure of the tree's leaf partition against document labels.
pub fn tree_f_measure(tree: &ClusterTree, labels: &[Option<String>]) -> Option<f64> {
    let assignments = leaf_assignments(tree);
    ContingencyTable::from_assignments(labels, &assignments).map(|t| f_measure(&t))
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub topics: usize,
    pub beta: f64,
    /// Total cluster nodes in the tree (documents not counted).
    pub num_clusters: Option<usize>,
    /// Leaf clusters (the level-1 partition).
    pub leaf_clusters: Option<usize>,
    pub levels: Option<u32>,
    pub f_measure: Option<f64>,
    pub accuracy: Option<f64>,
    pub status: String,
}

pub struct SweepConfig {
    pub topic_values: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub seed: u64,
    pub min_split_size: usize,
    pub literal_offset: bool,
    pub normalize: bool,
}

/// Build one tree per (topics, beta) pair and record its metrics. A cell
/// that fails to build is marked in its `status` and the sweep carries
/// on. Cells within one topic count share the fitted semantic model.
pub fn sweep(
    docs: &[RawDocument],
    test_docs: Option<&[RawDocument]>,
    preprocess: &PreprocessConfig,
    config: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    let build = build_matrix(docs, preprocess)?;
    let labels: Vec<Option<String>> = docs.iter().map(|d| d.label.clone()).collect();
    let mut rows = Vec::new();
    for &topics in &config.topic_values {
        let options = LsiOptions {
            seed: config.seed,
            normalize: config.normalize,
            ..Default::default()
        };
        let fit = match fit_lsi(&build.matrix, topics, &options) {
            Ok(fit) => fit,
            Err(e) => {
                for &beta in &config.beta_values {
                    rows.push(SweepRow {
                        topics,
                        beta,
                        num_clusters: None,
                        leaf_clusters: None,
                        levels: None,
                        f_measure: None,
                        accuracy: None,
                        status: format!("failed: {e}"),
                    });
                }
                continue;
            }
        };
        let test_vectors: Option<Vec<SemanticVector>> = test_docs.map(|t| {
            t.iter()
                .map(|d| {
                    let (weights, _) =
                        crate::corpus::text_to_weights(&d.text, &build.vocabulary, preprocess);
                    fit.model.project_query(&weights).vector
                })
                .collect()
        });
        let beta_rows: Vec<SweepRow> = config
            .beta_values
            .par_iter()
            .map(|&beta| {
                let params = TreeParams {
                    beta,
                    min_split_size: config.min_split_size,
                    seed: config.seed,
                    literal_offset: config.literal_offset,
                };
                match build_tree(&fit.doc_vectors, &params) {
                    Ok(tree) => {
                        let accuracy = test_vectors.as_ref().and_then(|tv| {
                            accuracy_protocol(&tree, &fit.doc_vectors, tv).ok()
                        });
                        SweepRow {
                            topics,
                            beta,
                            num_clusters: Some(tree.len()),
                            leaf_clusters: Some(tree.leaf_count()),
                            levels: Some(tree.height()),
                            f_measure: tree_f_measure(&tree, &labels),
                            accuracy,
                            status: "ok".to_string(),
                        }
                    }
                    Err(e) => SweepRow {
                        topics,
                        beta,
                        num_clusters: None,
                        leaf_clusters: None,
                        levels: None,
                        f_measure: None,
                        accuracy: None,
                        status: format!("failed: {e}"),
                    },
                }
            })
            .collect();
        rows.extend(beta_rows);
    }
    Ok(rows)
}

/// Render sweep rows as CSV with a header line.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("topics,beta,num_clusters,levels,f_measure,accuracy,leaf_clusters,status\n");
    for row in rows {
        let fmt_opt_u = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
        let fmt_opt_f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.topics,
            row.beta,
            fmt_opt_u(row.num_clusters),
            row.levels.map_or(String::new(), |x| x.to_string()),
            fmt_opt_f(row.f_measure),
            fmt_opt_f(row.accuracy),
            fmt_opt_u(row.leaf_clusters),
            row.status,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(labels: &[&str]) -> Vec<Option<String>> {
        labels.iter().map(|l| Some(l.to_string())).collect()
    }

    #[test]
    fn f_measure_perfect_clustering_is_one() {
        let labels = labeled(&["a", "a", "b", "b"]);
        let table = ContingencyTable::from_assignments(&labels, &[0, 0, 1, 1]).unwrap();
        assert!((f_measure(&table) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn f_measure_single_cluster_two_classes() {
        let labels = labeled(&["a", "a", "b", "b"]);
        let table = ContingencyTable::from_assignments(&labels, &[0, 0, 0, 0]).unwrap();
        assert!((f_measure(&table) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn f_measure_split_classes() {
        // clusters {a1, b1}, {a2, b2}: P = R = 1/2 everywhere.
        let labels = labeled(&["a", "b", "a", "b"]);
        let table = ContingencyTable::from_assignments(&labels, &[0, 0, 1, 1]).unwrap();
        assert!((f_measure(&table) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f_measure_invariant_under_relabeling() {
        let labels = labeled(&["a", "a", "b", "b", "b"]);
        let t1 = ContingencyTable::from_assignments(&labels, &[0, 1, 1, 1, 1]).unwrap();
        let t2 = ContingencyTable::from_assignments(&labels, &[1, 0, 0, 0, 0]).unwrap();
        assert!((f_measure(&t1) - f_measure(&t2)).abs() < 1e-15);
        assert!(f_measure(&t1) > 0.0 && f_measure(&t1) <= 1.0);
    }

    #[test]
    fn kmeans_k_equals_n_gives_singletons() {
        let points = vec![vec![0.0], vec![1.0], vec![2.0], vec![5.0]];
        let flat = kmeans_baseline(&points, 4, 42);
        assert_eq!(flat.num_clusters(), 4);
        assert!(flat.clusters.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn kmeans_k_one_centroid_is_global_mean() {
        let points = vec![vec![0.0, 0.0], vec![2.0, 2.0], vec![4.0, 1.0]];
        let flat = kmeans_baseline(&points, 1, 42);
        assert_eq!(flat.num_clusters(), 1);
        assert_eq!(flat.assignments, vec![0, 0, 0]);
        let outcome = lloyd(&points, vec![vec![0.0, 0.0]], 100);
        assert!((outcome.centroids[0][0] - 2.0).abs() < 1e-12);
        assert!((outcome.centroids[0][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_recovers_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut points = Vec::new();
        let mut truth = Vec::new();
        for (label, c) in [[0.0, 0.0], [30.0, 0.0], [0.0, 30.0]].iter().enumerate() {
            for _ in 0..25 {
                points.push(vec![
                    c[0] + 2.0 * (rng.gen::<f64>() - 0.5),
                    c[1] + 2.0 * (rng.gen::<f64>() - 0.5),
                ]);
                truth.push(label);
            }
        }
        let flat = kmeans_baseline(&points, 3, 7);
        assert_eq!(flat.num_clusters(), 3);
        for cluster in &flat.clusters {
            let label = truth[cluster[0]];
            let pure = cluster.iter().filter(|&&p| truth[p] == label).count();
            assert!(pure as f64 >= 0.95 * cluster.len() as f64);
        }
    }

    #[test]
    fn kmedoids_line_example_matches_exhaustive_search() {
        let points: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 10.0, 11.0]
            .iter()
            .map(|&x| vec![x])
            .collect();
        let flat = kmedoids_baseline(&points, 2, 42);
        // Exhaustive optimum over all medoid pairs.
        let mut best_cost = f64::INFINITY;
        for a in 0..5 {
            for b in (a + 1)..5 {
                best_cost = best_cost.min(kmedoids_cost(&points, &[a, b]));
            }
        }
        assert!((best_cost - 3.0).abs() < 1e-12);
        // Recover the medoids actually chosen from the assignment.
        let clusters = &flat.clusters;
        assert_eq!(clusters.len(), 2);
        let mut sides: Vec<Vec<usize>> = clusters.clone();
        sides.sort();
        assert_eq!(sides[0], vec![0, 1, 2]);
        assert_eq!(sides[1], vec![3, 4]);
    }

    #[test]
    fn kmedoids_k_equals_n_cost_zero() {
        let points = vec![vec![0.0], vec![3.0], vec![9.0]];
        let flat = kmedoids_baseline(&points, 3, 42);
        assert_eq!(flat.num_clusters(), 3);
        assert_eq!(kmedoids_cost(&points, &[0, 1, 2]), 0.0);
    }

    #[test]
    fn kmedoids_recovers_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut points = Vec::new();
        let mut truth = Vec::new();
        for (label, c) in [[0.0, 0.0], [25.0, 0.0], [0.0, 25.0]].iter().enumerate() {
            for _ in 0..20 {
                points.push(vec![
                    c[0] + 2.0 * (rng.gen::<f64>() - 0.5),
                    c[1] + 2.0 * (rng.gen::<f64>() - 0.5),
                ]);
                truth.push(label);
            }
        }
        let flat = kmedoids_baseline(&points, 3, 3);
        assert_eq!(flat.num_clusters(), 3);
        for cluster in &flat.clusters {
            let label = truth[cluster[0]];
            assert!(cluster.iter().all(|&p| truth[p] == label));
        }
    }

    #[test]
    fn sweep_covers_every_cell_and_leaf_counts_fall_with_beta() {
        use crate::corpus::RawDocument;
        let space = ["orbit rocket launch", "rocket orbit moon", "satellite orbit launch",
                     "moon rocket fuel", "launch satellite telemetry", "orbit fuel moon"];
        let market = ["stock trade share", "market share price", "trader stock market",
                      "price share earnings", "market trader hedge", "stock price trade"];
        let mut docs = Vec::new();
        for (i, t) in space.iter().enumerate() {
            docs.push(RawDocument {
                id: format!("s{i}"),
                text: format!("{t} {t} alpha{i}"),
                label: Some("space".to_string()),
            });
        }
        for (i, t) in market.iter().enumerate() {
            docs.push(RawDocument {
                id: format!("m{i}"),
                text: format!("{t} {t} beta{i}"),
                label: Some("market".to_string()),
            });
        }
        let config = SweepConfig {
            topic_values: vec![3],
            beta_values: vec![0.25, 0.5, 1.0],
            seed: 42,
            min_split_size: 4,
            literal_offset: false,
            normalize: false,
        };
        let preprocess = PreprocessConfig::without_pruning();
        let rows = sweep(&docs, None, &preprocess, &config).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.status == "ok"));
        // Same seed, same data: splitting only loosens as beta falls.
        let leaves: Vec<usize> = rows.iter().map(|r| r.leaf_clusters.unwrap()).collect();
        assert!(leaves.windows(2).all(|w| w[1] <= w[0]), "{leaves:?}");
        assert!(rows.iter().all(|r| r.f_measure.is_some()));
        assert!(rows.iter().all(|r| r.accuracy.is_none()));
        let csv = sweep_to_csv(&rows);
        assert!(csv.starts_with("topics,beta,num_clusters,levels,f_measure,accuracy,leaf_clusters,status\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn accuracy_is_total_when_test_equals_train() {
        use crate::hierarchy::{build_tree, TreeParams};
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vectors: Vec<SemanticVector> = (0..40)
            .map(|i| {
                let c = if i < 20 { 0.0 } else { 30.0 };
                SemanticVector::new(vec![
                    c + rng.gen::<f64>(),
                    c + rng.gen::<f64>(),
                ])
            })
            .collect();
        let tree = build_tree(&vectors, &TreeParams::default()).unwrap();
        let acc = accuracy_protocol(&tree, &vectors, &vectors).unwrap();
        assert_eq!(acc, 100.0);
    }
}

//! Flat clustering by recursive binary splitting.
//!
//! Each cluster is split in two by K-Means initialized on the first
//! principal direction of the cluster (so the two seed centroids
//! straddle the mean along the axis of greatest variance), and the split
//! is kept only while it improves the Gaussian quality measure: a
//! cluster becomes a leaf once its own quality is at most `beta` times
//! the mean quality of its children. The leaves of that splitting tree
//! are the flat clustering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gauss::{cluster_quality, fit_gaussian};
use crate::hashing::cluster_seed;
use crate::kmeans::lloyd;
use crate::linalg::{axpy, dot, euclidean, norm, scale, Mat};

/// One evaluated binary split of a cluster.
#[derive(Debug, Clone)]
pub struct SplitCandidate {
    /// Indices into the point list handed to `binary_split`; together
    /// the two sides partition it and neither side is empty.
    pub children: [Vec<usize>; 2],
    pub parent_quality: f64,
    pub child_qualities: [f64; 2],
    /// WCSS after each Lloyd assignment step; nonincreasing.
    pub wcss_history: Vec<f64>,
    pub lloyd_iterations: usize,
}

/// A single-level partition: the leaves of one divisive run.
#[derive(Debug, Clone)]
pub struct FlatClustering {
    /// Point indices per cluster, in deterministic discovery order.
    pub clusters: Vec<Vec<usize>>,
    /// Point index -> cluster index.
    pub assignments: Vec<usize>,
}

impl FlatClustering {
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FlatParams {
    /// Decay factor in the stopping rule; smaller means more splitting.
    pub beta: f64,
    /// Clusters smaller than this are never split.
    pub min_split_size: usize,
    pub seed: u64,
    /// Use the uncentered projection offset in the seed-centroid
    /// formula instead of the mean absolute centered projection.
    pub literal_offset: bool,
}

impl Default for FlatParams {
    fn default() -> Self {
        FlatParams {
            beta: 0.5,
            min_split_size: 4,
            seed: 42,
            literal_offset: false,
        }
    }
}

/// First principal direction of the mean-centered points by power
/// iteration on the covariance (tolerance 1e-9, at most 1000 rounds; a
/// tie between the top eigenvalues resolves by the seeded start vector).
fn principal_direction<P: AsRef<[f64]>>(points: &[P], mu: &[f64], seed: u64) -> Vec<f64> {
    let dim = mu.len();
    let n = points.len();
    let mut cov = Mat::zeros(dim, dim);
    for p in points {
        let p = p.as_ref();
        for i in 0..dim {
            let di = p[i] - mu[i];
            for j in i..dim {
                let v = cov.get(i, j) + di * (p[j] - mu[j]);
                cov.set(i, j, v);
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov.get(i, j) / n as f64;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    assert!(
        cov.trace() > 0.0,
        "principal direction of identical points is undefined"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nrm = norm(&v);
    scale(&mut v, 1.0 / nrm);
    for _ in 0..1000 {
        let mut next = cov.matvec(&v);
        let nrm = norm(&next);
        if nrm == 0.0 {
            // Start vector fell in the null space; nudge and continue.
            v = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
            let nrm = norm(&v);
            scale(&mut v, 1.0 / nrm);
            continue;
        }
        scale(&mut next, 1.0 / nrm);
        if dot(&next, &v) < 0.0 {
            scale(&mut next, -1.0);
        }
        let delta = euclidean(&next, &v);
        v = next;
        if delta <= 1e-9 {
            break;
        }
    }
    // Fix the sign: largest-magnitude component positive.
    let mut lead = 0;
    let mut best = -1.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            lead = i;
        }
    }
    if v[lead] < 0.0 {
        scale(&mut v, -1.0);
    }
    v
}

/// Seed centroids for the binary split: `mu +/- v * offset` along the
/// first principal direction `v`.
///
/// The offset is the mean absolute projection of the centered points
/// onto `v`; with `literal_offset` it is instead the mean projection of
/// the raw points, which collapses to the same point on both sides for
/// centered data and is kept only for comparison runs.
pub fn pddp_init<P: AsRef<[f64]>>(
    points: &[P],
    seed: u64,
    literal_offset: bool,
) -> (Vec<f64>, Vec<f64>) {
    assert!(points.len() >= 2, "need at least two points to split");
    let n = points.len();
    let dim = points[0].as_ref().len();
    let mut mu = vec![0.0; dim];
    for p in points {
        axpy(&mut mu, 1.0, p.as_ref());
    }
    scale(&mut mu, 1.0 / n as f64);

    let v = principal_direction(points, &mu, seed);

    let offset = if literal_offset {
        points.iter().map(|p| dot(p.as_ref(), &v)).sum::<f64>() / n as f64
    } else {
        points
            .iter()
            .map(|p| (dot(p.as_ref(), &v) - dot(&mu, &v)).abs())
            .sum::<f64>()
            / n as f64
    };

    let mut plus = mu.clone();
    axpy(&mut plus, offset, &v);
    let mut minus = mu;
    axpy(&mut minus, -offset, &v);
    (plus, minus)
}

/// Split a cluster in two with Lloyd iterations from the given seeds.
/// A side left empty at convergence receives the point farthest from the
/// other side's centroid.
pub fn binary_split<P: AsRef<[f64]>>(points: &[P], init: (Vec<f64>, Vec<f64>)) -> SplitCandidate {
    assert!(points.len() >= 2, "need at least two points to split");
    let parent = fit_gaussian(points);
    let parent_quality = cluster_quality(&parent, points);

    let outcome = lloyd(points, vec![init.0, init.1], 100);
    let mut sides: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (idx, &a) in outcome.assignments.iter().enumerate() {
        sides[a].push(idx);
    }

    if sides[0].is_empty() || sides[1].is_empty() {
        let empty = usize::from(sides[1].is_empty());
        let full = 1 - empty;
        let centroid = &outcome.centroids[full];
        let mut farthest = sides[full][0];
        let mut best = -1.0;
        for &idx in &sides[full] {
            let d = euclidean(points[idx].as_ref(), centroid);
            if d > best {
                best = d;
                farthest = idx;
            }
        }
        sides[full].retain(|&idx| idx != farthest);
        sides[empty].push(farthest);
    }

    let collect = |side: &[usize]| -> Vec<&[f64]> {
        side.iter().map(|&i| points[i].as_ref()).collect()
    };
    let left = collect(&sides[0]);
    let right = collect(&sides[1]);
    let child_qualities = [
        cluster_quality(&fit_gaussian(&left), &left),
        cluster_quality(&fit_gaussian(&right), &right),
    ];

    SplitCandidate {
        children: sides,
        parent_quality,
        child_qualities,
        wcss_history: outcome.wcss_history,
        lloyd_iterations: outcome.iterations,
    }
}

/// The stopping rule: keep the cluster whole iff its quality is at most
/// `beta` times the mean quality of the proposed children (boundary
/// inclusive). Infinite parent quality always stops; an infinite child
/// quality drops out of the mean when the other child is finite.
pub fn should_stop(candidate: &SplitCandidate, beta: f64) -> bool {
    if candidate.parent_quality.is_infinite() {
        return true;
    }
    let [q0, q1] = candidate.child_qualities;
    let mean = match (q0.is_finite(), q1.is_finite()) {
        (true, true) => (q0 + q1) / 2.0,
        (true, false) => q0,
        (false, true) => q1,
        (false, false) => return true,
    };
    candidate.parent_quality <= beta * mean
}

fn all_identical<P: AsRef<[f64]>>(points: &[P], members: &[usize]) -> bool {
    let first = points[members[0]].as_ref();
    members[1..]
        .iter()
        .all(|&i| points[i].as_ref() == first)
}

fn recurse<P: AsRef<[f64]> + Sync>(
    points: &[P],
    members: Vec<usize>,
    params: &FlatParams,
) -> Vec<Vec<usize>> {
    let min_size = params.min_split_size.max(2);
    if members.len() < min_size || all_identical(points, &members) {
        return vec![members];
    }
    let seed = cluster_seed(params.seed, &members);
    let subset: Vec<&[f64]> = members.iter().map(|&i| points[i].as_ref()).collect();
    let init = pddp_init(&subset, seed, params.literal_offset);
    let candidate = binary_split(&subset, init);
    debug_assert!(candidate
        .wcss_history
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-9 * (1.0 + w[0])));
    if should_stop(&candidate, params.beta) {
        return vec![members];
    }
    let to_global = |side: &[usize]| -> Vec<usize> { side.iter().map(|&i| members[i]).collect() };
    let left = to_global(&candidate.children[0]);
    let right = to_global(&candidate.children[1]);
    let (mut l, r) = rayon::join(
        || recurse(points, left, params),
        || recurse(points, right, params),
    );
    l.extend(r);
    l
}

/// Divisively cluster the points and return the pruned leaves.
pub fn flat_cluster<P: AsRef<[f64]> + Sync>(points: &[P], params: &FlatParams) -> FlatClustering {
    assert!(!points.is_empty());
    let members: Vec<usize> = (0..points.len()).collect();
    let clusters = recurse(points, members, params);
    let mut assignments = vec![usize::MAX; points.len()];
    for (c, cluster) in clusters.iter().enumerate() {
        for &p in cluster {
            assignments[p] = c;
        }
    }
    debug_assert!(assignments.iter().all(|&a| a != usize::MAX));
    FlatClustering {
        clusters,
        assignments,
    }
}

//! Lloyd iterations shared by the binary splitter and the K-Means
//! baseline. Assignment ties go to the lower centroid index; a centroid
//! that loses all its points keeps its previous position.

use crate::linalg::euclidean;

pub(crate) struct LloydOutcome {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances measured after each
    /// assignment step; nonincreasing by construction.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
}

pub(crate) fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = euclidean(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

pub(crate) fn wcss<P: AsRef<[f64]>>(
    points: &[P],
    assignments: &[usize],
    centroids: &[Vec<f64>],
) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| {
            let d = euclidean(p.as_ref(), &centroids[a]);
            d * d
        })
        .sum()
}

pub(crate) fn lloyd<P: AsRef<[f64]>>(
    points: &[P],
    mut centroids: Vec<Vec<f64>>,
    max_iters: usize,
) -> LloydOutcome {
    assert!(!points.is_empty() && !centroids.is_empty());
    let dim = points[0].as_ref().len();
    let k = centroids.len();
    let mut assignments = vec![usize::MAX; points.len()];
    let mut wcss_history = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iters {
        iterations += 1;
        let mut changed = false;
        for (idx, p) in points.iter().enumerate() {
            let (c, _) = nearest_centroid(p.as_ref(), &centroids);
            if assignments[idx] != c {
                assignments[idx] = c;
                changed = true;
            }
        }
        wcss_history.push(wcss(points, &assignments, &centroids));
        // First pass always changes (assignments start unset).
        if !changed {
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p.as_ref()) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for (target, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *target = s / counts[c] as f64;
                }
            }
        }
    }

    LloydOutcome {
        assignments,
        centroids,
        wcss_history,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_blobs_converge() {
        let points = vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![10.0, 0.0],
            vec![10.1, 0.0],
        ];
        let out = lloyd(&points, vec![vec![0.05, 0.0], vec![10.05, 0.0]], 100);
        assert_eq!(out.assignments, vec![0, 0, 1, 1]);
        assert!(out
            .wcss_history
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn assignment_tie_goes_to_lower_index() {
        let points = vec![vec![0.0]];
        let out = lloyd(&points, vec![vec![-1.0], vec![1.0]], 10);
        assert_eq!(out.assignments, vec![0]);
    }
}

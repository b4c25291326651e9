//! Gaussian cluster model: centroid, covariance, Mahalanobis distance,
//! and the reciprocal-mean-distance cluster quality.
//!
//! Covariance is population (divide by n), which keeps singletons
//! well-defined. Whenever the covariance is singular or badly
//! conditioned — guaranteed for clusters with fewer members than
//! dimensions — the precision matrix comes from a ridge ladder: the
//! smallest lambda in {0, 1e-8, 1e-6, 1e-4, 1e-2} * trace(S)/k whose
//! S + lambda*I is invertible with condition number below 1e12.

use crate::linalg::{symmetric_eigen, Mat};

const RIDGE_LADDER: [f64; 5] = [0.0, 1e-8, 1e-6, 1e-4, 1e-2];
const MAX_CONDITION: f64 = 1e12;
/// Absolute fallback when trace(S) is zero (identical points), where the
/// relative ladder degenerates to all zeros.
const ABSOLUTE_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GaussianModel {
    pub centroid: Vec<f64>,
    pub covariance: Mat,
    /// Inverse of `covariance + ridge * I`.
    pub precision: Mat,
    /// Regularization actually applied.
    pub ridge: f64,
    /// Member count the model was fitted on.
    pub n: usize,
}

impl GaussianModel {
    pub fn dim(&self) -> usize {
        self.centroid.len()
    }

    /// Build a model from explicit parameters, deriving the precision
    /// through the same ridge ladder as fitting.
    pub fn with_parameters(centroid: Vec<f64>, covariance: Mat, n: usize) -> Self {
        let dim = centroid.len();
        assert_eq!(covariance.rows(), dim);
        assert!(covariance.is_symmetric(1e-10), "covariance not symmetric");
        let (ridge, precision) = regularized_inverse(&covariance);
        GaussianModel {
            centroid,
            covariance,
            precision,
            ridge,
            n,
        }
    }

    /// Rehydrate a model whose ridge was already decided (index loading);
    /// the precision is recomputed from covariance + ridge * I.
    pub fn from_stored(centroid: Vec<f64>, covariance: Mat, ridge: f64, n: usize) -> crate::Result<Self> {
        let precision = ridged(&covariance, ridge).inverse().ok_or_else(|| {
            crate::Error::IndexFormat("stored covariance + ridge is singular".to_string())
        })?;
        Ok(GaussianModel {
            centroid,
            covariance,
            precision,
            ridge,
            n,
        })
    }
}

fn regularized_inverse(cov: &Mat) -> (f64, Mat) {
    let k = cov.rows();
    let scale = cov.trace() / k as f64;
    let (eigvals, _) = symmetric_eigen(cov);
    let e_max = eigvals.first().copied().unwrap_or(0.0);
    let e_min = eigvals.last().copied().unwrap_or(0.0);
    for factor in RIDGE_LADDER {
        let ridge = factor * scale;
        let lo = e_min + ridge;
        let hi = e_max + ridge;
        if lo > 0.0 && hi / lo < MAX_CONDITION {
            if let Some(precision) = ridged(cov, ridge).inverse() {
                return (ridge, precision);
            }
        }
    }
    let ridge = ABSOLUTE_RIDGE;
    let precision = ridged(cov, ridge)
        .inverse()
        .expect("S + 1e-8 I is positive definite");
    (ridge, precision)
}

fn ridged(cov: &Mat, ridge: f64) -> Mat {
    let mut m = cov.clone();
    for i in 0..m.rows() {
        let v = m.get(i, i) + ridge;
        m.set(i, i, v);
    }
    m
}

/// Fit centroid and population covariance to the members of a cluster.
pub fn fit_gaussian<P: AsRef<[f64]>>(points: &[P]) -> GaussianModel {
    assert!(!points.is_empty(), "cannot fit a Gaussian to no points");
    let n = points.len();
    let dim = points[0].as_ref().len();
    let mut centroid = vec![0.0; dim];
    for p in points {
        let p = p.as_ref();
        debug_assert_eq!(p.len(), dim);
        for (c, x) in centroid.iter_mut().zip(p) {
            *c += x;
        }
    }
    for c in centroid.iter_mut() {
        *c /= n as f64;
    }

    let mut cov = Mat::zeros(dim, dim);
    for p in points {
        let p = p.as_ref();
        for i in 0..dim {
            let di = p[i] - centroid[i];
            for j in i..dim {
                let dj = p[j] - centroid[j];
                let v = cov.get(i, j) + di * dj;
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

    GaussianModel::with_parameters(centroid, cov, n)
}

/// sqrt((x - mu)^T P (x - mu)) with the stored regularized precision.
pub fn mahalanobis(model: &GaussianModel, x: &[f64]) -> f64 {
    assert_eq!(
        x.len(),
        model.dim(),
        "query dimension does not match the model"
    );
    let dim = model.dim();
    let diff: Vec<f64> = x
        .iter()
        .zip(&model.centroid)
        .map(|(a, b)| a - b)
        .collect();
    let mut q = 0.0;
    for i in 0..dim {
        let mut row = 0.0;
        for j in 0..dim {
            row += model.precision.get(i, j) * diff[j];
        }
        q += diff[i] * row;
    }
    q.max(0.0).sqrt()
}

/// Q = 1 / mean Mahalanobis distance of the members. Identical-point
/// clusters get +inf: they are perfect and must never split.
pub fn cluster_quality<P: AsRef<[f64]>>(model: &GaussianModel, points: &[P]) -> f64 {
    assert!(!points.is_empty());
    let mean = points
        .iter()
        .map(|p| mahalanobis(model, p.as_ref()))
        .sum::<f64>()
        / points.len() as f64;
    if mean == 0.0 {
        f64::INFINITY
    } else {
        1.0 / mean
    }
}

//! Semantic space: rank-k truncated SVD of the TF-IDF matrix.
//!
//! The decomposition runs randomized block subspace iteration against the
//! sparse matrix: sample a Gaussian test matrix, orthonormalize the
//! projected block, and alternate `A^T` / `A` products until the Ritz
//! singular values settle. Documents and queries both map into the space
//! as `U_k^T x`, so fold-in needs no refitting and distances stay
//! comparable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TfIdfMatrix;
use crate::linalg::{axpy, dot, norm, orthonormalize_columns, scale, symmetric_eigen, Mat};
use crate::{Error, Result};

/// A document or query as a dense point in semantic space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticVector {
    pub coords: Vec<f64>,
    pub doc_id: Option<String>,
}

impl SemanticVector {
    pub fn new(coords: Vec<f64>) -> Self {
        SemanticVector {
            coords,
            doc_id: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl AsRef<[f64]> for SemanticVector {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// Truncated-SVD factors for projection and query fold-in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LsiModel {
    /// Number of topics actually fitted (may be below the request when
    /// the matrix rank is smaller).
    pub k: usize,
    /// Orthonormal columns of U_k; `term_factors[j]` is column j over
    /// the vocabulary.
    pub term_factors: Vec<Vec<f64>>,
    /// Strictly positive, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Binds the model to the vocabulary it was fitted against.
    pub vocabulary_fingerprint: u64,
    pub seed: u64,
    /// Length-normalize projected vectors.
    pub normalize: bool,
    /// Projection convention tag; always "ut_x" (coords = U_k^T x).
    pub projection: String,
}

#[derive(Debug, Clone, Copy)]
pub struct LsiOptions {
    pub seed: u64,
    pub oversample: usize,
    pub max_iters: usize,
    /// Relative tolerance on singular-value convergence.
    pub tol: f64,
    pub normalize: bool,
}

impl Default for LsiOptions {
    fn default() -> Self {
        LsiOptions {
            seed: 42,
            oversample: 8,
            max_iters: 100,
            tol: 1e-6,
            normalize: false,
        }
    }
}

pub struct LsiFit {
    pub model: LsiModel,
    pub doc_vectors: Vec<SemanticVector>,
    /// Set when the effective rank forced k below the request.
    pub reduced_to: Option<usize>,
    pub iterations: usize,
}

/// Result of folding a query into the model's semantic space.
#[derive(Debug, Clone)]
pub struct QueryProjection {
    pub vector: SemanticVector,
    /// No query term was in the model vocabulary; the vector is zero.
    pub no_known_terms: bool,
}

/// y_j = A v_j for each column v_j (v over documents, y over terms).
fn sparse_apply(a: &TfIdfMatrix, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, n) = a.shape();
    cols.iter()
        .map(|v| {
            debug_assert_eq!(v.len(), n);
            let mut y = vec![0.0; m];
            for d in 0..n {
                let vd = v[d];
                if vd == 0.0 {
                    continue;
                }
                for (t, w) in a.column(d) {
                    y[t] += w * vd;
                }
            }
            y
        })
        .collect()
}

/// z_j = A^T u_j for each column u_j (u over terms, z over documents).
fn sparse_apply_transpose(a: &TfIdfMatrix, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, n) = a.shape();
    cols.iter()
        .map(|u| {
            debug_assert_eq!(u.len(), m);
            let mut z = vec![0.0; n];
            for (d, zd) in z.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (t, w) in a.column(d) {
                    acc += w * u[t];
                }
                *zd = acc;
            }
            z
        })
        .collect()
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        if u1 > 1e-300 {
            let u2: f64 = rng.gen();
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

/// Ritz singular values and vectors of A restricted to span(Q):
/// eigendecomposition of (Q^T A)(Q^T A)^T.
fn ritz(a: &TfIdfMatrix, q: &[Vec<f64>]) -> (Vec<f64>, Mat) {
    let bt = sparse_apply_transpose(a, q); // bt[j][d] = (Q^T A)[j, d]
    let s = q.len();
    let mut gram = Mat::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let g = dot(&bt[i], &bt[j]);
            gram.set(i, j, g);
            gram.set(j, i, g);
        }
    }
    let (eigvals, eigvecs) = symmetric_eigen(&gram);
    let sigmas = eigvals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    (sigmas, eigvecs)
}

/// Fit a rank-k model and return the per-document semantic vectors.
///
/// When the matrix has fewer than `k` numerically nonzero singular
/// values the model is built at the effective rank instead and
/// `reduced_to` reports the reduction.
pub fn fit_lsi(matrix: &TfIdfMatrix, k: usize, options: &LsiOptions) -> Result<LsiFit> {
    if k == 0 {
        return Err(Error::InvalidTopicCount(0));
    }
    let (m, n) = matrix.shape();
    let k_req = k;
    let k = k.min(m).min(n);
    let block = (k + options.oversample).min(m).min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let omega: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| standard_normal(&mut rng)).collect())
        .collect();

    let mut q = sparse_apply(matrix, &omega);
    orthonormalize_columns(&mut q);
    if q.is_empty() {
        return Err(Error::ZeroMatrix);
    }

    let (mut sigmas, mut eigvecs) = ritz(matrix, &q);
    let mut iterations = 0;
    for _ in 0..options.max_iters {
        iterations += 1;
        let mut z = sparse_apply_transpose(matrix, &q);
        orthonormalize_columns(&mut z);
        q = sparse_apply(matrix, &z);
        orthonormalize_columns(&mut q);
        if q.is_empty() {
            return Err(Error::ZeroMatrix);
        }
        let (new_sigmas, new_vecs) = ritz(matrix, &q);
        let dims = k.min(new_sigmas.len()).min(sigmas.len());
        let mut worst = 0.0f64;
        for i in 0..dims {
            let denom = new_sigmas[i].max(1e-300);
            worst = worst.max((new_sigmas[i] - sigmas[i]).abs() / denom);
        }
        sigmas = new_sigmas;
        eigvecs = new_vecs;
        if worst <= options.tol {
            break;
        }
    }

    // Numerical rank: relative cutoff against the leading value.
    let sigma_max = sigmas.first().copied().unwrap_or(0.0);
    if sigma_max <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let rank = sigmas
        .iter()
        .take_while(|&&s| s > sigma_max * 1e-10)
        .count();
    let k_final = k.min(rank);
    let reduced_to = (k_final < k_req).then_some(k_final);

    // U = Q * W, truncated to k_final columns, sign-fixed so the
    // largest-magnitude entry of each column is positive.
    let s = q.len();
    let mut term_factors: Vec<Vec<f64>> = Vec::with_capacity(k_final);
    for j in 0..k_final {
        let mut col = vec![0.0; m];
        for (i, qi) in q.iter().enumerate().take(s) {
            axpy(&mut col, eigvecs.get(i, j), qi);
        }
        let mut lead = 0usize;
        let mut best = -1.0f64;
        for (t, &v) in col.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                lead = t;
            }
        }
        if col[lead] < 0.0 {
            scale(&mut col, -1.0);
        }
        term_factors.push(col);
    }
    let singular_values: Vec<f64> = sigmas[..k_final].to_vec();

    let model = LsiModel {
        k: k_final,
        term_factors,
        singular_values,
        vocabulary_fingerprint: 0,
        seed: options.seed,
        normalize: options.normalize,
        projection: "ut_x".to_string(),
    };

    // Document vectors: coords(d) = U_k^T x_d, reusing B^T = (Q^T A)^T
    // would tie them to the pre-truncation basis, so project directly.
    let projected = sparse_apply_transpose(matrix, &model.term_factors);
    let mut doc_vectors = Vec::with_capacity(n);
    for d in 0..n {
        let mut coords: Vec<f64> = (0..k_final).map(|j| projected[j][d]).collect();
        if options.normalize {
            let nrm = norm(&coords);
            if nrm > 0.0 {
                scale(&mut coords, 1.0 / nrm);
            }
        }
        doc_vectors.push(SemanticVector {
            coords,
            doc_id: Some(matrix.column_ids()[d].clone()),
        });
    }

    Ok(LsiFit {
        model,
        doc_vectors,
        reduced_to,
        iterations,
    })
}

impl LsiModel {
    pub fn num_terms(&self) -> usize {
        self.term_factors.first().map_or(0, |c| c.len())
    }

    /// Fold a sparse term-weight query into semantic space.
    pub fn project_query(&self, weights: &[(usize, f64)]) -> QueryProjection {
        let mut coords = vec![0.0; self.k];
        let mut any = false;
        for &(t, w) in weights {
            if t >= self.num_terms() {
                continue;
            }
            any = true;
            for (j, col) in self.term_factors.iter().enumerate() {
                coords[j] += w * col[t];
            }
        }
        if self.normalize {
            let nrm = norm(&coords);
            if nrm > 0.0 {
                scale(&mut coords, 1.0 / nrm);
            }
        }
        QueryProjection {
            vector: SemanticVector {
                coords,
                doc_id: None,
            },
            no_known_terms: !any,
        }
    }

    /// max |U^T U - I|; should sit at rounding level.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.term_factors.len();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in i..k {
                let g = dot(&self.term_factors[i], &self.term_factors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Frobenius norm of `A - U (U^T A)`, computed column by column.
    pub fn reconstruction_error(&self, matrix: &TfIdfMatrix) -> f64 {
        let (m, n) = matrix.shape();
        let mut err2 = 0.0;
        for d in 0..n {
            let mut dense = vec![0.0; m];
            for (t, w) in matrix.column(d) {
                dense[t] = w;
            }
            let mut residual = dense.clone();
            for col in &self.term_factors {
                let c = dot(col, &dense);
                axpy(&mut residual, -c, col);
            }
            err2 += dot(&residual, &residual);
        }
        err2.sqrt()
    }
}

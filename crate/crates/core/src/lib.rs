//! Self-organizing hierarchical document indexing.
//!
//! The pipeline turns a directory of plain-text documents into a queryable
//! cluster hierarchy:
//!
//! 1. [`corpus`] — ingestion, tokenization, stopword removal, Porter
//!    stemming, and TF-IDF weighting into a sparse term-document matrix.
//! 2. [`lsi`] — a rank-k truncated SVD of that matrix; documents and
//!    queries become dense vectors in a shared semantic space.
//! 3. [`divisive`] — flat clustering by recursive binary splitting
//!    (principal-direction initialized K-Means) with an automatic,
//!    Gaussian-quality-based stopping rule.
//! 4. [`hierarchy`] — the flat clusterer applied level by level over
//!    cluster centroids, bottom-up, until a single root remains.
//! 5. [`categorize`] — tree search routing a query to its most relevant
//!    node by Mahalanobis distance.
//! 6. [`eval`] — F-measure against labeled classes, K-Means / K-Medoids
//!    baselines, a nearest-neighbor categorization accuracy protocol,
//!    and parameter sweeps.
//!
//! Everything is deterministic given a seed: rebuilding an index from the
//! same corpus bytes and arguments yields a byte-identical index file.

pub mod categorize;
pub mod corpus;
pub mod divisive;
mod error;
pub mod eval;
pub mod gauss;
mod hashing;
pub mod hierarchy;
pub mod index;
mod kmeans;
pub mod linalg;
pub mod lsi;
pub mod stem;
pub mod stopwords;

pub use error::{Error, Result};
pub use index::Index;

//! Python bindings: build, load, inspect and query document indexes
//! from Python. Built as the `hierindex_py` extension module.

use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use hierindex::categorize::categorize_text;
use hierindex::corpus::{load_corpus, CorpusLayout, PreprocessConfig};
use hierindex::eval::{accuracy_protocol, tree_f_measure};
use hierindex::index::{BuildParams, Index as CoreIndex, FORMAT_TAG};

fn to_py_err(e: hierindex::Error) -> PyErr {
    match e {
        hierindex::Error::Io { .. } | hierindex::Error::CorpusDir { .. } => {
            PyIOError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_layout(layout: &str) -> PyResult<CorpusLayout> {
    match layout {
        "newsgroups" => Ok(CorpusLayout::Newsgroups),
        "flat" => Ok(CorpusLayout::Flat),
        other => Err(PyValueError::new_err(format!(
            "unknown layout {other:?}; expected \"newsgroups\" or \"flat\""
        ))),
    }
}

/// A built document index: the cluster tree plus everything needed to
/// fold new text into its semantic space.
#[pyclass(name = "Index", module = "hierindex_py")]
struct PyIndex {
    inner: CoreIndex,
}

#[pymethods]
impl PyIndex {
    /// Build an index over a corpus directory (one file per document).
    #[staticmethod]
    #[pyo3(signature = (input_dir, *, topics=20, beta=0.5, seed=42, min_split_size=4,
                        literal_eq6=false, normalize=false, min_df=2, max_df_fraction=0.5,
                        min_token_len=2, strip_headers=true, layout="newsgroups", top_terms=10))]
    #[allow(clippy::too_many_arguments)]
    fn build(
        input_dir: PathBuf,
        topics: usize,
        beta: f64,
        seed: u64,
        min_split_size: usize,
        literal_eq6: bool,
        normalize: bool,
        min_df: usize,
        max_df_fraction: f64,
        min_token_len: usize,
        strip_headers: bool,
        layout: &str,
        top_terms: usize,
    ) -> PyResult<Self> {
        if beta <= 0.0 {
            return Err(PyValueError::new_err("beta must be positive"));
        }
        let layout = parse_layout(layout)?;
        let config = PreprocessConfig {
            min_token_len,
            min_df,
            max_df_fraction,
            strip_headers,
            ..Default::default()
        };
        let (docs, _report) =
            load_corpus(&input_dir, layout, strip_headers).map_err(to_py_err)?;
        let params = BuildParams {
            topics,
            beta,
            seed,
            min_split_size,
            literal_eq6,
            normalize,
            top_terms,
            ..Default::default()
        };
        let (inner, _diagnostics) = CoreIndex::build(&docs, config, params).map_err(to_py_err)?;
        Ok(PyIndex { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyIndex {
            inner: CoreIndex::load(&path).map_err(to_py_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(Path::new(&path)).map_err(to_py_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Categorize raw text; returns the landing node, the root-to-node
    /// path with distances, warnings, and the node's top terms.
    fn query<'py>(&self, py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
        let result = categorize_text(&self.inner, text).map_err(to_py_err)?;
        let out = PyDict::new(py);
        out.set_item("node", result.node)?;
        let path: Vec<(u32, f64)> = result
            .path
            .iter()
            .zip(&result.distances)
            .map(|(&id, &d)| (id, d))
            .collect();
        out.set_item("path", path)?;
        out.set_item("rejected_child", result.stopped_child)?;
        out.set_item(
            "warnings",
            result
                .warnings
                .iter()
                .map(|w| format!("{w:?}"))
                .collect::<Vec<String>>(),
        )?;
        let node = self.inner.tree().node(result.node).map_err(to_py_err)?;
        out.set_item("node_size", node.size())?;
        out.set_item("top_terms", self.inner.node_top_terms(result.node).to_vec())?;
        Ok(out)
    }

    /// Per-node details: level, children, size, top terms, and document
    /// ids for leaves.
    fn node<'py>(&self, py: Python<'py>, id: u32) -> PyResult<Bound<'py, PyDict>> {
        let node = self.inner.tree().node(id).map_err(to_py_err)?;
        let out = PyDict::new(py);
        out.set_item("id", node.id)?;
        out.set_item("level", node.level)?;
        out.set_item("children", node.children.clone())?;
        out.set_item("size", node.size())?;
        if node.is_leaf() {
            let docs: Vec<&str> = node
                .member_docs
                .iter()
                .map(|&d| self.inner.doc_id(d))
                .collect();
            out.set_item("documents", docs)?;
        }
        out.set_item("top_terms", self.inner.node_top_terms(id).to_vec())?;
        Ok(out)
    }

    fn level_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for (level, count) in self.inner.tree().level_counts() {
            out.set_item(level, count)?;
        }
        Ok(out)
    }

    fn doc_ids<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let ids: Vec<&str> = (0..self.inner.num_docs() as u32)
            .map(|d| self.inner.doc_id(d))
            .collect();
        PyList::new(py, ids)
    }

    /// Categorization accuracy against held-out documents in a corpus
    /// directory, plus the index's F-measure when labels exist.
    #[pyo3(signature = (test_dir, layout=None))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        test_dir: PathBuf,
        layout: Option<&str>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let layout = parse_layout(layout.unwrap_or("newsgroups"))?;
        let strip = self.inner.preprocess_config().strip_headers;
        let (docs, _) = load_corpus(&test_dir, layout, strip).map_err(to_py_err)?;
        if docs.is_empty() {
            return Err(PyValueError::new_err("test directory has no documents"));
        }
        let vectors = self.inner.project_documents(&docs);
        let accuracy = accuracy_protocol(self.inner.tree(), self.inner.doc_vectors(), &vectors)
            .map_err(to_py_err)?;
        let out = PyDict::new(py);
        out.set_item("accuracy_percent", accuracy)?;
        out.set_item(
            "f_measure",
            tree_f_measure(self.inner.tree(), self.inner.doc_labels()),
        )?;
        Ok(out)
    }

    #[getter]
    fn num_docs(&self) -> usize {
        self.inner.num_docs()
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.tree().len()
    }

    #[getter]
    fn levels(&self) -> u32 {
        self.inner.tree().height()
    }

    #[getter]
    fn leaf_clusters(&self) -> usize {
        self.inner.tree().leaf_count()
    }

    #[getter]
    fn root(&self) -> u32 {
        self.inner.tree().root()
    }

    #[getter]
    fn topics(&self) -> usize {
        self.inner.lsi().k
    }

    fn __repr__(&self) -> String {
        format!(
            "Index(docs={}, nodes={}, levels={})",
            self.inner.num_docs(),
            self.inner.tree().len(),
            self.inner.tree().height()
        )
    }
}

#[pymodule]
fn hierindex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIndex>()?;
    m.add("FORMAT_TAG", FORMAT_TAG)?;
    Ok(())
}

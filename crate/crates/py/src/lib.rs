//! Python bindings: text preprocessing, paragraph-vector training and the
//! semantic index functions.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;

use semdex::corpus::{self, ProcessedDocument};
use semdex::countries::{AliasTable, CountryGroup};
use semdex::embed::{self, EmbedError, EmbeddingModel};
use semdex::semindex::{self, PolicyTheme};
use semdex::semnet::{self, FilterConfig, SemanticGraph};
use semdex::votes;
use semdex::{DocumentSpace, TrainingConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn embed_err(e: EmbedError) -> PyErr {
    match e {
        EmbedError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => value_err(other),
    }
}

/// Lowercased, digit-free, stemmed tokens of `text`.
#[pyfunction]
fn preprocess(text: &str) -> Vec<String> {
    corpus::preprocess(text)
}

/// Snowball English stem of a single word.
#[pyfunction]
fn stem(word: &str) -> String {
    corpus::stem(word)
}

/// Reads `<ISO3>_<session>_<year>.txt` files under `directory` and returns
/// `(label, tokens)` pairs sorted by year and country.
#[pyfunction]
fn load_corpus(py: Python<'_>, directory: PathBuf) -> PyResult<Vec<(String, Vec<String>)>> {
    let docs = py
        .detach(|| corpus::ingest_corpus(&directory).map(|raw| corpus::preprocess_all(&raw)))
        .map_err(|e| PyOSError::new_err(e.to_string()))?;
    Ok(docs.into_iter().map(|d| (d.label, d.tokens)).collect())
}

/// Huffman codes as bit strings, keyed by word.
#[pyfunction]
fn huffman_codes(counts: BTreeMap<String, u64>) -> PyResult<BTreeMap<String, String>> {
    let leaves: Vec<(&str, u64)> = counts.iter().map(|(w, &c)| (w.as_str(), c)).collect();
    let tree = embed::build_huffman(&leaves).map_err(embed_err)?;
    Ok(counts
        .keys()
        .enumerate()
        .map(|(i, w)| (w.clone(), tree.code(i).iter().map(|&b| if b { '1' } else { '0' }).collect()))
        .collect())
}

#[pyfunction]
fn cosine(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    semindex::cosine(&a, &b).map_err(value_err)
}

/// Spearman's rank correlation with average ranks for ties.
#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    votes::spearman(&x, &y).map_err(value_err)
}

/// Weighted eigenvector centrality of an undirected graph given as
/// `(a, b, weight)` edges.
#[pyfunction]
fn eigenvector_centrality(edges: Vec<(String, String, f64)>) -> PyResult<BTreeMap<String, f64>> {
    let mut nodes: Vec<String> = edges.iter().flat_map(|(a, b, _)| [a.clone(), b.clone()]).collect();
    nodes.sort();
    nodes.dedup();
    let index = |n: &str| nodes.binary_search_by(|x| x.as_str().cmp(n)).unwrap();
    let mut out_edges = Vec::with_capacity(edges.len());
    for (a, b, weight) in &edges {
        let (i, j) = (index(a), index(b));
        if i == j {
            return Err(value_err(format!("self-loop on {a}")));
        }
        out_edges.push(semnet::Edge { a: i.min(j), b: i.max(j), weight: *weight });
    }
    let graph = SemanticGraph { year: 0, nodes: nodes.clone(), edges: out_edges, filtered: true };
    let cv = semnet::eigenvector_centrality(&graph).map_err(value_err)?;
    Ok(nodes.into_iter().zip(cv.values).collect())
}

fn group_from(members: Option<Vec<String>>) -> PyResult<CountryGroup> {
    match members {
        None => Ok(CountryGroup::everyone("all")),
        Some(m) => {
            let refs: Vec<&str> = m.iter().map(String::as_str).collect();
            CountryGroup::new("group", &refs).map_err(value_err)
        }
    }
}

fn aliases_from(aliases: Option<BTreeMap<String, String>>) -> AliasTable {
    aliases.map_or_else(AliasTable::default, AliasTable)
}

fn filter_from(percentile: f64, threshold: f64, apply_threshold: bool) -> FilterConfig {
    FilterConfig { percentile, threshold, apply_threshold, ..FilterConfig::default() }
}

/// A trained paragraph-vector model.
#[pyclass(module = "semdex")]
struct Model {
    inner: EmbeddingModel,
}

impl Model {
    fn space(&self, aliases: Option<BTreeMap<String, String>>) -> DocumentSpace<'_> {
        DocumentSpace::new(&self.inner, aliases_from(aliases))
    }

    fn filtered_graph(
        &self,
        year: i32,
        aliases: Option<BTreeMap<String, String>>,
        filter: &FilterConfig,
    ) -> PyResult<SemanticGraph> {
        let graph = semnet::build_graph(&self.space(aliases), year).map_err(value_err)?;
        semnet::filter_graph(&graph, filter).map_err(value_err)
    }
}

#[pymethods]
impl Model {
    /// Trains on `(label, tokens)` documents. Labels must look like
    /// `USA_1970` for the country-year functions to find them.
    #[staticmethod]
    #[pyo3(signature = (documents, min_count=5, dim=200, window=10, epochs=10, seed=1, alpha0=0.025, alpha_min=0.0001, deterministic=false, threads=1))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        py: Python<'_>,
        documents: Vec<(String, Vec<String>)>,
        min_count: u64,
        dim: usize,
        window: usize,
        epochs: usize,
        seed: u64,
        alpha0: f64,
        alpha_min: f64,
        deterministic: bool,
        threads: usize,
    ) -> PyResult<Self> {
        let docs: Vec<ProcessedDocument> =
            documents.into_iter().map(|(label, tokens)| ProcessedDocument { label, tokens }).collect();
        let config = TrainingConfig {
            dim,
            window,
            epochs,
            seed,
            alpha0,
            alpha_min,
            deterministic,
            threads,
            ..TrainingConfig::default()
        };
        let inner = py.detach(|| -> PyResult<EmbeddingModel> {
            let vocab = corpus::build_vocabulary(&docs, min_count).map_err(value_err)?;
            embed::train(&docs, &vocab, &config).map_err(embed_err)
        })?;
        Ok(Model { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Model { inner: embed::load_model(&path).map_err(embed_err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        embed::save_model(&self.inner, &path).map_err(embed_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.inner.vocab.words().to_vec()
    }

    #[getter]
    fn doc_labels(&self) -> Vec<String> {
        self.inner.vocab.doc_labels.clone()
    }

    fn word_vector(&self, word: &str) -> PyResult<Vec<f64>> {
        self.inner
            .word_vector(word)
            .map(embed::to_f64)
            .ok_or_else(|| PyKeyError::new_err(word.to_string()))
    }

    fn doc_vector(&self, label: &str) -> PyResult<Vec<f64>> {
        self.inner
            .doc_vector(label)
            .map(embed::to_f64)
            .ok_or_else(|| PyKeyError::new_err(label.to_string()))
    }

    /// p(word | context) under the hierarchical softmax.
    fn hs_probability(&self, context: Vec<f64>, word: &str) -> PyResult<f64> {
        self.inner.hs_probability(&context, word).map_err(embed_err)
    }

    /// Topic index by year for a theme (keywords are stemmed first) and an
    /// optional member list; every country when `members` is None.
    #[pyo3(signature = (keywords, base_year, first_year, last_year, members=None, aliases=None))]
    fn topic_index(
        &self,
        keywords: Vec<String>,
        base_year: i32,
        first_year: i32,
        last_year: i32,
        members: Option<Vec<String>>,
        aliases: Option<BTreeMap<String, String>>,
    ) -> PyResult<BTreeMap<i32, f64>> {
        let refs: Vec<&str> = keywords.iter().map(String::as_str).collect();
        let theme = PolicyTheme::new("theme", &refs).stemmed();
        let group = group_from(members)?;
        let series = semindex::topic_index(&self.space(aliases), &group, &theme, base_year, first_year..=last_year)
            .map_err(value_err)?;
        Ok(series.points)
    }

    /// Filtered semantic graph of one year as `(a, b, weight)` edges.
    #[pyo3(signature = (year, percentile=95.0, threshold=0.6, apply_threshold=true, aliases=None))]
    fn graph(
        &self,
        year: i32,
        percentile: f64,
        threshold: f64,
        apply_threshold: bool,
        aliases: Option<BTreeMap<String, String>>,
    ) -> PyResult<Vec<(String, String, f64)>> {
        let g = self.filtered_graph(year, aliases, &filter_from(percentile, threshold, apply_threshold))?;
        Ok(g.edges.iter().map(|e| (g.nodes[e.a].clone(), g.nodes[e.b].clone(), e.weight)).collect())
    }

    /// Eigenvector centrality of every country on the filtered graph.
    #[pyo3(signature = (year, percentile=95.0, threshold=0.6, aliases=None))]
    fn centrality(
        &self,
        year: i32,
        percentile: f64,
        threshold: f64,
        aliases: Option<BTreeMap<String, String>>,
    ) -> PyResult<BTreeMap<String, f64>> {
        let g = self.filtered_graph(year, aliases, &filter_from(percentile, threshold, true))?;
        let cv = semnet::eigenvector_centrality(&g).map_err(value_err)?;
        Ok(cv.nodes.into_iter().zip(cv.values).collect())
    }

    /// Centrality index E of a member list in one year.
    #[pyo3(signature = (year, members, percentile=95.0, threshold=0.6, aliases=None))]
    fn centrality_index(
        &self,
        year: i32,
        members: Vec<String>,
        percentile: f64,
        threshold: f64,
        aliases: Option<BTreeMap<String, String>>,
    ) -> PyResult<f64> {
        let space = self.space(aliases.clone());
        let g = self.filtered_graph(year, aliases, &filter_from(percentile, threshold, true))?;
        let cv = semnet::eigenvector_centrality(&g).map_err(value_err)?;
        let group = group_from(Some(members))?;
        Ok(semnet::centrality_index_e(&cv, &group, &space).map_err(value_err)?.value)
    }

    /// Density index by year relative to `base_year`.
    #[pyo3(signature = (base_year, percentile=95.0, threshold=0.6, apply_threshold=true, aliases=None))]
    fn density_index(
        &self,
        base_year: i32,
        percentile: f64,
        threshold: f64,
        apply_threshold: bool,
        aliases: Option<BTreeMap<String, String>>,
    ) -> PyResult<BTreeMap<i32, f64>> {
        let space = self.space(aliases);
        let filter = filter_from(percentile, threshold, apply_threshold);
        let years: Vec<i32> = space.years().collect();
        let mut graphs = Vec::new();
        for year in years {
            if let Ok(g) = semnet::build_graph(&space, year) {
                graphs.push(semnet::filter_graph(&g, &filter).map_err(value_err)?);
            }
        }
        Ok(semnet::density_index(&graphs, base_year, "density").map_err(value_err)?.points)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(dim={}, words={}, documents={})",
            self.inner.dim,
            self.inner.vocab.len(),
            self.inner.vocab.doc_labels.len()
        )
    }
}

#[pymodule]
#[pyo3(name = "semdex")]
fn semdex_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(stem, m)?)?;
    m.add_function(wrap_pyfunction!(load_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(huffman_codes, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvector_centrality, m)?)?;
    Ok(())
}

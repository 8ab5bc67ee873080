//! Per-year semantic networks over countries.
//!
//! Each year's complete graph is weighted by document-vector cosines. The
//! filter keeps an edge when its weight reaches the configured percentile of
//! at least one endpoint's edge-weight distribution and exceeds a fixed
//! threshold. Centrality is the dominant eigenvector of the weighted
//! adjacency matrix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::countries::CountryGroup;
use crate::semindex::{cosine, SemIndexError};
use crate::series::{rebase, IndexSeries, SeriesError};
use crate::space::DocumentSpace;

#[derive(Debug, Error, PartialEq)]
pub enum SemnetError {
    #[error("year {year} has {count} countries; a graph needs at least 2")]
    TooFewNodes { year: i32, count: usize },
    #[error("filter_graph expects an unfiltered graph")]
    AlreadyFiltered,
    #[error("percentile must lie strictly between 0 and 100, got {0}")]
    InvalidPercentile(f64),
    #[error("edge {a}–{b} has negative weight {weight}; centrality needs non-negative weights")]
    NegativeWeight { a: String, b: String, weight: f64 },
    #[error("mean centrality is zero (empty graph)")]
    ZeroMeanCentrality,
    #[error("no member of group {0:?} is in the graph")]
    NoMembers(String),
    #[error("no graph for base year {0}")]
    MissingBaseGraph(i32),
    #[error(transparent)]
    Similarity(#[from] SemIndexError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Undirected weighted graph over one year's countries. Edges satisfy
/// `a < b`; unfiltered graphs are complete.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticGraph {
    pub year: i32,
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub filtered: bool,
}

impl SemanticGraph {
    /// Complete graph with cosine weights between the given vectors.
    pub fn from_vectors(year: i32, nodes: Vec<String>, vectors: &[Vec<f64>]) -> Result<Self, SemnetError> {
        if nodes.len() < 2 {
            return Err(SemnetError::TooFewNodes {
                year,
                count: nodes.len(),
            });
        }
        let mut edges = Vec::with_capacity(nodes.len() * (nodes.len() - 1) / 2);
        for a in 0..nodes.len() {
            for b in a + 1..nodes.len() {
                edges.push(Edge {
                    a,
                    b,
                    weight: cosine(&vectors[a], &vectors[b])?,
                });
            }
        }
        Ok(SemanticGraph {
            year,
            nodes,
            edges,
            filtered: false,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges present over possible pairs.
    pub fn density(&self) -> f64 {
        let n = self.nodes.len();
        if n < 2 {
            return 0.0;
        }
        self.edges.len() as f64 / (n * (n - 1) / 2) as f64
    }

    /// Incident edge weights per node.
    pub fn incident_weights(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            out[e.a].push(e.weight);
            out[e.b].push(e.weight);
        }
        out
    }

    /// Dense symmetric adjacency matrix, row-major.
    pub fn adjacency(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut m = vec![0.0; n * n];
        for e in &self.edges {
            m[e.a * n + e.b] = e.weight;
            m[e.b * n + e.a] = e.weight;
        }
        m
    }
}

/// Complete cosine graph over every country with a document in `year`.
pub fn build_graph(space: &DocumentSpace, year: i32) -> Result<SemanticGraph, SemnetError> {
    let Some(countries) = space.countries(year) else {
        return Err(SemnetError::TooFewNodes { year, count: 0 });
    };
    let nodes: Vec<String> = countries.keys().cloned().collect();
    let vectors: Vec<Vec<f64>> = countries.values().map(|&r| space.vector(r)).collect();
    SemanticGraph::from_vectors(year, nodes, &vectors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercentileMethod {
    /// Linear interpolation between order statistics at rank `p/100·(m−1)`.
    Linear,
    /// Smallest value with at least `p`% of the sample at or below it.
    NearestRank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub percentile: f64,
    pub threshold: f64,
    pub percentile_method: PercentileMethod,
    pub apply_percentile: bool,
    pub apply_threshold: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            percentile: 95.0,
            threshold: 0.6,
            percentile_method: PercentileMethod::Linear,
            apply_percentile: true,
            apply_threshold: true,
        }
    }
}

/// Percentile of `values` (unsorted). NaN for an empty sample.
pub fn percentile(values: &[f64], p: f64, method: PercentileMethod) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    match method {
        PercentileMethod::Linear => {
            let rank = p / 100.0 * (m - 1) as f64;
            let lo = rank.floor() as usize;
            let hi = (lo + 1).min(m - 1);
            let frac = rank - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        }
        PercentileMethod::NearestRank => {
            let rank = (p / 100.0 * m as f64).ceil() as usize;
            sorted[rank.clamp(1, m) - 1]
        }
    }
}

/// Keeps an edge iff it passes both enabled conditions:
/// its weight is at or above the percentile of either endpoint's incident
/// weights, and it is strictly greater than the threshold. Nodes are kept.
pub fn filter_graph(graph: &SemanticGraph, cfg: &FilterConfig) -> Result<SemanticGraph, SemnetError> {
    if graph.filtered {
        return Err(SemnetError::AlreadyFiltered);
    }
    if !(cfg.percentile > 0.0 && cfg.percentile < 100.0) {
        return Err(SemnetError::InvalidPercentile(cfg.percentile));
    }
    let cutoffs: Vec<f64> = graph
        .incident_weights()
        .iter()
        .map(|w| percentile(w, cfg.percentile, cfg.percentile_method))
        .collect();
    let edges = graph
        .edges
        .iter()
        .filter(|e| {
            let salient = !cfg.apply_percentile || e.weight >= cutoffs[e.a] || e.weight >= cutoffs[e.b];
            let strong = !cfg.apply_threshold || e.weight > cfg.threshold;
            salient && strong
        })
        .copied()
        .collect();
    Ok(SemanticGraph {
        year: graph.year,
        nodes: graph.nodes.clone(),
        edges,
        filtered: true,
    })
}

/// Density of each graph as a relative deviation from the base year's.
pub fn density_index(graphs: &[SemanticGraph], base_year: i32, name: &str) -> Result<IndexSeries, SemnetError> {
    if !graphs.iter().any(|g| g.year == base_year) {
        return Err(SemnetError::MissingBaseGraph(base_year));
    }
    let densities: BTreeMap<i32, f64> = graphs.iter().map(|g| (g.year, g.density())).collect();
    let nodes = graphs.iter().map(|g| (g.year, g.node_count())).collect();
    Ok(rebase(name, &densities, nodes, base_year)?)
}

pub const POWER_ITERATION_TOLERANCE: f64 = 1e-10;
pub const POWER_ITERATION_MAX: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub year: i32,
    pub nodes: Vec<String>,
    /// Unit L2 norm unless the graph has no edges, in which case all zero.
    pub values: Vec<f64>,
    pub empty_graph: bool,
    pub iterations: usize,
    pub converged: bool,
}

impl CentralityVector {
    pub fn get(&self, country: &str) -> Option<f64> {
        self.nodes.iter().position(|n| n == country).map(|i| self.values[i])
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Weighted eigenvector centrality by power iteration.
///
/// Iterates with `A + sI`, where `s` is half the largest node strength.
/// The shift keeps the eigenvectors of `A`, makes the dominant eigenvalue
/// strictly dominant on non-negative graphs so bipartite components do not
/// oscillate, and scales with the weights so the iterates are unchanged
/// when every weight is multiplied by a constant. Starts from the uniform
/// vector over non-isolated nodes; isolated nodes stay exactly zero.
pub fn eigenvector_centrality(graph: &SemanticGraph) -> Result<CentralityVector, SemnetError> {
    if let Some(e) = graph.edges.iter().find(|e| e.weight < 0.0) {
        return Err(SemnetError::NegativeWeight {
            a: graph.nodes[e.a].clone(),
            b: graph.nodes[e.b].clone(),
            weight: e.weight,
        });
    }
    let n = graph.node_count();
    let mut x = vec![0.0; n];
    for e in graph.edges.iter().filter(|e| e.weight > 0.0) {
        x[e.a] = 1.0;
        x[e.b] = 1.0;
    }
    if normalize(&mut x) == 0.0 {
        return Ok(CentralityVector {
            year: graph.year,
            nodes: graph.nodes.clone(),
            values: x,
            empty_graph: true,
            iterations: 0,
            converged: true,
        });
    }

    let mut strength = vec![0.0; n];
    for e in &graph.edges {
        strength[e.a] += e.weight;
        strength[e.b] += e.weight;
    }
    let shift = 0.5 * strength.iter().copied().fold(0.0, f64::max);

    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < POWER_ITERATION_MAX {
        iterations += 1;
        next.iter_mut().zip(&x).for_each(|(y, v)| *y = shift * v);
        for e in &graph.edges {
            next[e.a] += e.weight * x[e.b];
            next[e.b] += e.weight * x[e.a];
        }
        normalize(&mut next);
        let change = next.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        std::mem::swap(&mut x, &mut next);
        if change < POWER_ITERATION_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("centrality for {} did not converge in {POWER_ITERATION_MAX} iterations", graph.year);
    }
    Ok(CentralityVector {
        year: graph.year,
        nodes: graph.nodes.clone(),
        values: x,
        empty_graph: false,
        iterations,
        converged,
    })
}

/// Group centrality index: relative deviation of the members' mean
/// centrality from the mean over all nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupCentrality {
    pub value: f64,
    pub members_present: usize,
}

pub fn centrality_index_e(
    centrality: &CentralityVector,
    group: &CountryGroup,
    space: &DocumentSpace,
) -> Result<GroupCentrality, SemnetError> {
    let present: Vec<f64> = space
        .members(group, centrality.year)
        .iter()
        .filter_map(|(c, _)| centrality.get(c))
        .collect();
    centrality_index_for(centrality, &present, &group.name)
}

/// Same as [`centrality_index_e`] for explicit member centralities.
pub fn centrality_index_for(
    centrality: &CentralityVector,
    members: &[f64],
    group: &str,
) -> Result<GroupCentrality, SemnetError> {
    if members.is_empty() {
        return Err(SemnetError::NoMembers(group.to_string()));
    }
    let all = centrality.mean();
    if all == 0.0 {
        return Err(SemnetError::ZeroMeanCentrality);
    }
    let group_mean = members.iter().sum::<f64>() / members.len() as f64;
    Ok(GroupCentrality {
        value: (group_mean - all) / all,
        members_present: members.len(),
    })
}

/// Ė: the E series as relative deviations from its base-year value.
pub fn centrality_index_edot(e_series: &IndexSeries, base_year: i32, name: &str) -> Result<IndexSeries, SemnetError> {
    Ok(rebase(name, &e_series.points, e_series.effective_n.clone(), base_year)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> SemanticGraph {
        SemanticGraph {
            year: 2000,
            nodes: (0..n).map(|i| format!("C{i}")).collect(),
            edges: edges.iter().map(|&(a, b, weight)| Edge { a, b, weight }).collect(),
            filtered: false,
        }
    }

    fn complete(n: usize, w: f64) -> SemanticGraph {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((a, b, w));
            }
        }
        graph(n, &e)
    }

    #[test]
    fn complete_graph_edge_counts() {
        for n in 2..7 {
            let vectors: Vec<Vec<f64>> = (0..n).map(|i| vec![1.0, i as f64]).collect();
            let g = SemanticGraph::from_vectors(1990, (0..n).map(|i| i.to_string()).collect(), &vectors).unwrap();
            assert_eq!(g.edge_count(), n * (n - 1) / 2);
            assert_eq!(g.density(), 1.0);
        }
    }

    #[test]
    fn identical_vectors_weight_one() {
        let g = SemanticGraph::from_vectors(1990, vec!["A".into(), "B".into()], &[vec![0.3, 0.4], vec![0.3, 0.4]]).unwrap();
        assert_eq!(g.edges[0].weight, 1.0);
    }

    #[test]
    fn too_few_nodes() {
        assert!(matches!(
            SemanticGraph::from_vectors(1990, vec!["A".into()], &[vec![1.0]]),
            Err(SemnetError::TooFewNodes { count: 1, .. })
        ));
    }

    #[test]
    fn percentile_methods() {
        let v = [0.3, 0.3, 0.7];
        assert!((percentile(&v, 95.0, PercentileMethod::Linear) - 0.66).abs() < 1e-12);
        assert_eq!(percentile(&v, 95.0, PercentileMethod::NearestRank), 0.7);
        assert_eq!(percentile(&[0.4], 95.0, PercentileMethod::Linear), 0.4);
        assert!((percentile(&[1.0, 2.0, 3.0, 4.0, 5.0], 50.0, PercentileMethod::Linear) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_below_threshold_all_removed() {
        let g = filter_graph(&complete(5, 0.5), &FilterConfig::default()).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 5);
    }

    #[test]
    fn strong_triangle_survives() {
        let g = filter_graph(&complete(3, 0.9), &FilterConfig::default()).unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn hub_edges_each_top_their_other_endpoint() {
        // Hub C0 with edges 0.95, 0.7, 0.65; all other pairs 0.3. Each hub
        // edge is the heaviest edge of its non-hub endpoint, so the
        // percentile condition passes through that endpoint and all three
        // clear the 0.6 threshold.
        let g = graph(
            4,
            &[(0, 1, 0.95), (0, 2, 0.7), (0, 3, 0.65), (1, 2, 0.3), (1, 3, 0.3), (2, 3, 0.3)],
        );
        let f = filter_graph(&g, &FilterConfig::default()).unwrap();
        let kept: Vec<f64> = f.edges.iter().map(|e| e.weight).collect();
        assert_eq!(kept, vec![0.95, 0.7, 0.65]);

        // Without the 0.6 threshold the 0.3 edges still fail the percentile.
        let loose = FilterConfig {
            apply_threshold: false,
            ..FilterConfig::default()
        };
        assert_eq!(filter_graph(&g, &loose).unwrap().edge_count(), 3);

        // Raising the threshold leaves only the hub's strongest edge.
        let strict = FilterConfig {
            threshold: 0.9,
            ..FilterConfig::default()
        };
        let f = filter_graph(&g, &strict).unwrap();
        assert_eq!(f.edges.len(), 1);
        assert_eq!(f.edges[0].weight, 0.95);
    }

    #[test]
    fn refiltering_is_rejected() {
        let f = filter_graph(&complete(3, 0.9), &FilterConfig::default()).unwrap();
        assert_eq!(filter_graph(&f, &FilterConfig::default()), Err(SemnetError::AlreadyFiltered));
        let bad = FilterConfig {
            percentile: 100.0,
            ..FilterConfig::default()
        };
        assert!(matches!(
            filter_graph(&complete(3, 0.9), &bad),
            Err(SemnetError::InvalidPercentile(_))
        ));
    }

    #[test]
    fn density_index_examples() {
        let mut base = complete(4, 0.9);
        base.year = 1970;
        base.edges.truncate(3); // ρ = 0.5
        let mut later = complete(8, 0.9);
        later.year = 1975;
        later.edges.truncate(7); // ρ = 7/28 = 0.25
        let s = density_index(&[base, later], 1970, "d").unwrap();
        assert_eq!(s.points[&1970], 0.0);
        assert_eq!(s.points[&1975], -0.5);

        let mut a = complete(5, 0.9);
        a.year = 1970;
        let mut b = complete(7, 0.9);
        b.year = 1971;
        assert_eq!(density_index(&[a, b], 1970, "d").unwrap().points[&1971], 0.0);
    }

    #[test]
    fn density_index_degenerate_base() {
        let mut empty = complete(3, 0.1);
        empty.edges.clear();
        empty.year = 1970;
        assert!(matches!(
            density_index(&[empty], 1970, "d"),
            Err(SemnetError::Series(SeriesError::DegenerateBase { .. }))
        ));
        assert_eq!(density_index(&[], 1970, "d"), Err(SemnetError::MissingBaseGraph(1970)));
    }

    #[test]
    fn centrality_k3() {
        let c = eigenvector_centrality(&complete(3, 1.0)).unwrap();
        for v in c.values {
            assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn centrality_path() {
        let c = eigenvector_centrality(&graph(3, &[(0, 1, 1.0), (1, 2, 1.0)])).unwrap();
        assert!(c.converged);
        assert!((c.values[0] - 0.5).abs() < 1e-9);
        assert!((c.values[1] - 2f64.sqrt() / 2.0).abs() < 1e-9);
        assert!((c.values[2] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn centrality_isolated_node_is_zero() {
        let c = eigenvector_centrality(&graph(4, &[(0, 1, 0.8), (1, 2, 0.9), (0, 2, 0.7)])).unwrap();
        assert_eq!(c.values[3], 0.0);
        let norm: f64 = c.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centrality_empty_graph() {
        let c = eigenvector_centrality(&graph(3, &[])).unwrap();
        assert!(c.empty_graph);
        assert!(c.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn centrality_rejects_negative_weights() {
        assert!(matches!(
            eigenvector_centrality(&graph(2, &[(0, 1, -0.2)])),
            Err(SemnetError::NegativeWeight { .. })
        ));
    }

    fn cv(values: &[f64]) -> CentralityVector {
        CentralityVector {
            year: 2000,
            nodes: (0..values.len()).map(|i| format!("C{i}")).collect(),
            values: values.to_vec(),
            empty_graph: false,
            iterations: 1,
            converged: true,
        }
    }

    #[test]
    fn e_index_examples() {
        let flat = cv(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(centrality_index_for(&flat, &[0.5], "g").unwrap().value, 0.0);

        // mean over all nodes 0.1, singleton at 0.2
        let c = cv(&[0.2, 0.05, 0.05, 0.1]);
        assert!((centrality_index_for(&c, &[0.2], "g").unwrap().value - 1.0).abs() < 1e-12);

        let c = cv(&[0.1, 0.7, 0.3]);
        assert!(centrality_index_for(&c, &c.values, "all").unwrap().value.abs() < 1e-15);

        assert_eq!(
            centrality_index_for(&cv(&[0.0, 0.0]), &[0.0], "g"),
            Err(SemnetError::ZeroMeanCentrality)
        );
        assert_eq!(centrality_index_for(&c, &[], "g"), Err(SemnetError::NoMembers("g".into())));
    }

    #[test]
    fn edot_examples() {
        let e = IndexSeries {
            name: "e".into(),
            base_year: 0,
            points: BTreeMap::from([(1995, 0.25), (2000, 0.5)]),
            effective_n: BTreeMap::new(),
        };
        let s = centrality_index_edot(&e, 1995, "edot").unwrap();
        assert_eq!(s.points[&1995], 0.0);
        assert_eq!(s.points[&2000], 1.0);

        let e = IndexSeries {
            points: BTreeMap::from([(1995, -0.2), (2000, -0.1)]),
            ..e
        };
        assert!((centrality_index_edot(&e, 1995, "edot").unwrap().points[&2000] - 0.5).abs() < 1e-15);
    }
}

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semdex::corpus::Vocabulary;
use semdex::countries::{AliasTable, CountryGroup};
use semdex::embed::{init_model, to_f64, EmbeddingModel};
use semdex::semindex::{cosine, topic_index, PolicyTheme};
use semdex::semnet::{
    centrality_index_for, eigenvector_centrality, filter_graph, Edge, FilterConfig, SemanticGraph,
};
use semdex::series::relative_deviation;
use semdex::votes::{spearman, yearly_pairs, VotingRecord};
use semdex::{DocumentSpace, TrainingConfig};

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, dim)
}

fn nonzero_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..32)
        .prop_flat_map(|d| (vector(d), vector(d)))
        .prop_filter("non-zero", |(a, b)| a.iter().any(|x| *x != 0.0) && b.iter().any(|x| *x != 0.0))
}

fn weighted_graph(max_nodes: usize, allow_negative: bool) -> impl Strategy<Value = SemanticGraph> {
    (2usize..=max_nodes).prop_flat_map(move |n| {
        let lo = if allow_negative { -1.0 } else { 0.0 };
        prop::collection::vec(lo..1.0f64, n * (n - 1) / 2).prop_map(move |ws| {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    edges.push(Edge { a, b, weight: ws[k] });
                    k += 1;
                }
            }
            SemanticGraph { year: 2000, nodes: (0..n).map(|i| format!("N{i}")).collect(), edges, filtered: false }
        })
    })
}

proptest! {
    #[test]
    fn cosine_is_exactly_symmetric((a, b) in nonzero_pair()) {
        prop_assert_eq!(cosine(&a, &b).unwrap(), cosine(&b, &a).unwrap());
    }

    #[test]
    fn cosine_is_scale_invariant((a, b) in nonzero_pair(), log_lambda in -3.0..3.0f64) {
        let lambda = 10f64.powf(log_lambda);
        let scaled: Vec<f64> = a.iter().map(|x| x * lambda).collect();
        prop_assert!((cosine(&scaled, &b).unwrap() - cosine(&a, &b).unwrap()).abs() <= 1e-12);
        prop_assert!((cosine(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn relative_deviation_increases_with_value(
        base in prop_oneof![-1e3..-1e-6f64, 1e-6..1e3f64],
        t in -1.0..1.0f64,
        step in 1e-6..1.0f64,
    ) {
        prop_assert!(relative_deviation(t + step, base) > relative_deviation(t, base));
    }

    #[test]
    fn filter_keeps_nodes_and_a_subset_of_edges(g in weighted_graph(12, true)) {
        let f = filter_graph(&g, &FilterConfig::default()).unwrap();
        prop_assert_eq!(&f.nodes, &g.nodes);
        prop_assert!(f.filtered);
        for e in &f.edges {
            prop_assert!(g.edges.contains(e));
            prop_assert!(e.weight > 0.6);
        }
        prop_assert!((0.0..=1.0).contains(&f.density()));
        prop_assert!((0.0..=1.0).contains(&g.density()));
    }

    #[test]
    fn centrality_is_unit_nonnegative_and_scale_invariant(g in weighted_graph(10, false), lambda in 0.01..100.0f64) {
        let base = eigenvector_centrality(&g).unwrap();
        let norm: f64 = base.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(base.values.iter().all(|&x| x >= 0.0));
        let mut scaled = g.clone();
        scaled.edges.iter_mut().for_each(|e| e.weight *= lambda);
        let s = eigenvector_centrality(&scaled).unwrap();
        for (a, b) in base.values.iter().zip(&s.values) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn singleton_indices_sum_to_node_count(g in weighted_graph(10, false)) {
        let cv = eigenvector_centrality(&g).unwrap();
        let total: f64 = cv
            .values
            .iter()
            .map(|&v| centrality_index_for(&cv, &[v], "one").unwrap().value + 1.0)
            .sum();
        prop_assert!((total - g.nodes.len() as f64).abs() < 1e-9, "{total}");
    }

    #[test]
    fn spearman_invariant_under_exp(x in prop::collection::vec(-5.0..5.0f64, 3..40), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-2.0..2.0)).collect();
        let Ok(rho) = spearman(&x, &y) else { return Ok(()) };
        let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let ey: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        prop_assert_eq!(spearman(&ex, &y).unwrap(), rho);
        prop_assert_eq!(spearman(&x, &ey).unwrap(), rho);
        prop_assert_eq!(spearman(&y, &x).unwrap(), rho);
        prop_assert!(rho.abs() <= 1.0);
    }

    #[test]
    fn spearman_self_is_one(x in prop::collection::vec(prop::sample::select(vec![0.0, 1.0, 2.5, 3.0, 7.0]), 3..30)) {
        let distinct = x.iter().any(|v| *v != x[0]);
        prop_assume!(distinct);
        prop_assert!((spearman(&x, &x).unwrap() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn centrality_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let n = 10;
        let mut edges = Vec::new();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for a in 0..n {
            for b in a + 1..n {
                let w: f64 = rng.random_range(0.0..1.0);
                edges.push(Edge { a, b, weight: w });
                m[(a, b)] = w;
                m[(b, a)] = w;
            }
        }
        let g = SemanticGraph { year: 1, nodes: (0..n).map(|i| i.to_string()).collect(), edges, filtered: true };
        let eig = SymmetricEigen::new(m);
        let (top, _) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let col = eig.eigenvectors.column(top);
        let sign = col.sum().signum();
        let cv = eigenvector_centrality(&g).unwrap();
        for (a, b) in cv.values.iter().zip(col.iter()) {
            assert!((a - sign * b).abs() < 1e-8);
        }
    }
}

/// A model over `countries` × `years` with random word and document vectors.
fn random_space_model(countries: &[&str], years: std::ops::RangeInclusive<i32>, seed: u64) -> EmbeddingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = vec![("peac".to_string(), 9), ("war".to_string(), 5), ("trade".to_string(), 3)];
    let labels: Vec<String> = years.flat_map(|y| countries.iter().map(move |c| format!("{c}_{y}"))).collect();
    let vocab = Vocabulary::from_parts(words, 1, labels);
    let mut model = init_model(&vocab, &TrainingConfig { dim: 6, ..TrainingConfig::default() }).unwrap();
    for x in model.word_in.iter_mut().chain(model.doc_in.iter_mut()) {
        *x = rng.random_range(-1.0..1.0);
    }
    model
}

#[test]
fn singleton_topic_index_is_the_country_cosine_deviation() {
    let model = random_space_model(&["IND", "FRA", "USA"], 1990..=1996, 5);
    let space = DocumentSpace::new(&model, AliasTable::none());
    let theme = PolicyTheme::new("peace", &["peac", "war"]);
    let group = CountryGroup::new("india", &["IND"]).unwrap();
    let series = topic_index(&space, &group, &theme, 1993, 1990..=1996).unwrap();

    let p = to_f64(model.word_vector("peac").unwrap());
    let w = to_f64(model.word_vector("war").unwrap());
    let target: Vec<f64> = p.iter().zip(&w).map(|(a, b)| (a + b) / 2.0).collect();
    let sim = |year: i32| {
        let d = to_f64(model.doc_vector(&format!("IND_{year}")).unwrap());
        let dot: f64 = d.iter().zip(&target).map(|(a, b)| a * b).sum();
        let nd = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nt = target.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (nd * nt)
    };
    let base = sim(1993);
    for year in 1990..=1996 {
        let expected = (sim(year) - base) / base.abs();
        let got = series.points[&year];
        assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{year}: {got} vs {expected}");
        assert_eq!(series.effective_n[&year], 1);
    }
    assert_eq!(series.points[&1993], 0.0);
}

#[test]
fn reference_country_is_never_paired() {
    let model = random_space_model(&["USA", "FRA", "GBR", "CHN", "SUN"], 1990..=1991, 8);
    let space = DocumentSpace::new(&model, AliasTable::default());
    let mut votes = Vec::new();
    for year in 1990..=1991 {
        for c in ["USA", "FRA", "GBR", "CHN", "RUS"] {
            votes.push(VotingRecord { year, country_code: c.into(), agreement: 0.5 });
        }
    }
    for year in 1990..=1991 {
        let pairs = yearly_pairs(&space, &votes, "USA", year).unwrap().unwrap();
        let names: Vec<&str> = pairs.iter().map(|p| p.country.as_str()).collect();
        assert_eq!(names, ["CHN", "FRA", "GBR", "RUS"]);
        assert!(pairs.iter().all(|p| p.similarity < 1.0));
    }
    let by_year: BTreeMap<i32, usize> = (1990..=1991).map(|y| (y, 4)).collect();
    assert_eq!(by_year.len(), 2);
}

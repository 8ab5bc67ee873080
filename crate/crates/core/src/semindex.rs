//! Cosine similarity and topic-related semantic indices.
//!
//! A theme is represented by the mean of its keywords' word vectors. For a
//! country group and year, the group score is the mean cosine between each
//! present member's document vector and the theme vector; the index is that
//! score's relative deviation from the base year.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::stem;
use crate::countries::CountryGroup;
use crate::embed::{to_f64, EmbeddingModel};
use crate::series::{rebase, IndexSeries, SeriesError};
use crate::space::DocumentSpace;

#[derive(Debug, Error, PartialEq)]
pub enum SemIndexError {
    #[error("cosine is undefined for a zero-norm vector")]
    ZeroNorm,
    #[error("vectors have different dimensions ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("theme {theme:?} has keywords missing from the vocabulary: {missing:?}")]
    MissingKeywords { theme: String, missing: Vec<String> },
    #[error("theme {0:?} has no keywords")]
    EmptyTheme(String),
    #[error("group {group:?} has no documents in base year {year}")]
    NoBaseDocuments { group: String, year: i32 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `a·b / (‖a‖ ‖b‖)`
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, SemIndexError> {
    if a.len() != b.len() {
        return Err(SemIndexError::DimensionMismatch(a.len(), b.len()));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(SemIndexError::ZeroNorm);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyTheme {
    pub name: String,
    pub keywords: Vec<String>,
}

impl PolicyTheme {
    pub fn new(name: &str, keywords: &[&str]) -> Self {
        PolicyTheme {
            name: name.to_string(),
            keywords: keywords.iter().map(|k| k.to_string()).collect(),
        }
    }

    /// Same theme with every keyword passed through the stemmer, so surface
    /// forms ("weapons") and stems ("weapon") are both accepted.
    pub fn stemmed(&self) -> Self {
        PolicyTheme {
            name: self.name.clone(),
            keywords: self.keywords.iter().map(|k| stem(&k.to_lowercase())).collect(),
        }
    }
}

/// The four themes and keyword stems used by default.
pub fn default_themes() -> Vec<PolicyTheme> {
    vec![
        PolicyTheme::new("health", &["health", "sanit"]),
        PolicyTheme::new("education", &["educ", "school"]),
        PolicyTheme::new("nuclear_weapons", &["nuclear", "weapon"]),
        PolicyTheme::new("islamic_terrorism", &["terror", "islam"]),
    ]
}

/// Mean of the keywords' word vectors.
pub fn theme_vector(model: &EmbeddingModel, theme: &PolicyTheme) -> Result<Vec<f64>, SemIndexError> {
    if theme.keywords.is_empty() {
        return Err(SemIndexError::EmptyTheme(theme.name.clone()));
    }
    let missing: Vec<String> = theme
        .keywords
        .iter()
        .filter(|k| model.vocab.index_of(k).is_none())
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(SemIndexError::MissingKeywords {
            theme: theme.name.clone(),
            missing,
        });
    }
    let mut mean = vec![0.0; model.dim];
    for k in &theme.keywords {
        for (m, v) in mean.iter_mut().zip(to_f64(model.word_vector(k).unwrap())) {
            *m += v;
        }
    }
    let n = theme.keywords.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// Mean cosine between present group members' documents and `target` in
/// `year`, with the number of members used. `None` when no member has a
/// document that year.
pub fn group_mean_similarity(
    space: &DocumentSpace,
    group: &CountryGroup,
    target: &[f64],
    year: i32,
) -> Result<Option<(f64, usize)>, SemIndexError> {
    let members = space.members(group, year);
    if members.is_empty() {
        return Ok(None);
    }
    let mut sum = 0.0;
    for &(_, row) in &members {
        sum += cosine(&space.vector(row), target)?;
    }
    Ok(Some((sum / members.len() as f64, members.len())))
}

/// Topic-related semantic index of `group` towards `theme` over `years`,
/// relative to `base_year`. Years where no member has a document are
/// omitted.
pub fn topic_index(
    space: &DocumentSpace,
    group: &CountryGroup,
    theme: &PolicyTheme,
    base_year: i32,
    years: RangeInclusive<i32>,
) -> Result<IndexSeries, SemIndexError> {
    let target = theme_vector(space.model, theme)?;
    if group_mean_similarity(space, group, &target, base_year)?.is_none() {
        return Err(SemIndexError::NoBaseDocuments {
            group: group.name.clone(),
            year: base_year,
        });
    }
    let mut means = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for year in years.clone().chain(std::iter::once(base_year)) {
        if let Some((mean, n)) = group_mean_similarity(space, group, &target, year)? {
            means.insert(year, mean);
            counts.insert(year, n);
        }
    }
    let mut series = rebase(&theme.name, &means, counts, base_year)?;
    if !years.contains(&base_year) {
        series.points.remove(&base_year);
        series.effective_n.remove(&base_year);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::countries::AliasTable;
    use crate::embed::{build_huffman, TrainingConfig};

    fn model_with(words: &[(&str, [f32; 2])], docs: &[(&str, [f32; 2])]) -> EmbeddingModel {
        let vocab = Vocabulary::from_parts(
            words.iter().map(|(w, _)| (w.to_string(), 5)).collect(),
            1,
            docs.iter().map(|(l, _)| l.to_string()).collect(),
        );
        let leaves: Vec<(&str, u64)> = words.iter().map(|(w, _)| (*w, 5)).collect();
        EmbeddingModel {
            dim: 2,
            word_in: words.iter().flat_map(|(_, v)| *v).collect(),
            doc_in: docs.iter().flat_map(|(_, v)| *v).collect(),
            node_out: vec![0.0; 2 * words.len().saturating_sub(1).max(1)],
            tree: build_huffman(&leaves).unwrap(),
            vocab,
            config: TrainingConfig {
                dim: 2,
                ..TrainingConfig::default()
            },
        }
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(SemIndexError::ZeroNorm));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(SemIndexError::DimensionMismatch(1, 2))));
    }

    #[test]
    fn theme_vectors() {
        let m = model_with(&[("a", [1.0, 0.0]), ("b", [0.0, 1.0]), ("c", [1.0, 0.0])], &[]);
        assert_eq!(theme_vector(&m, &PolicyTheme::new("t", &["a"])).unwrap(), vec![1.0, 0.0]);
        assert_eq!(theme_vector(&m, &PolicyTheme::new("t", &["a", "c"])).unwrap(), vec![1.0, 0.0]);
        assert_eq!(theme_vector(&m, &PolicyTheme::new("t", &["a", "b"])).unwrap(), vec![0.5, 0.5]);
        assert_eq!(
            theme_vector(&m, &PolicyTheme::new("t", &["a", "zz", "yy"])),
            Err(SemIndexError::MissingKeywords {
                theme: "t".into(),
                missing: vec!["zz".into(), "yy".into()]
            })
        );
    }

    #[test]
    fn default_keywords_are_stable_under_stemming() {
        for theme in default_themes() {
            assert_eq!(theme.stemmed(), theme);
        }
        let surface = PolicyTheme::new("nuclear_weapons", &["Nuclear", "weapons"]);
        assert_eq!(surface.stemmed().keywords, vec!["nuclear", "weapon"]);
    }

    #[test]
    fn topic_index_arithmetic() {
        // Theme vector (1, 0). Country docs chosen so mean cosines are known.
        let c = |cos: f32| [cos, (1.0 - cos * cos).sqrt()];
        let m = model_with(
            &[("t", [1.0, 0.0]), ("u", [0.0, 1.0])],
            &[("AAA_1995", c(0.2)), ("AAA_2000", c(0.3)), ("BBB_1995", c(0.2)), ("BBB_2000", c(0.3))],
        );
        let space = DocumentSpace::new(&m, AliasTable::none());
        let theme = PolicyTheme::new("t", &["t"]);
        let s = topic_index(&space, &CountryGroup::everyone("all"), &theme, 1995, 1990..=2005).unwrap();
        assert_eq!(s.points[&1995], 0.0);
        assert!((s.points[&2000] - 0.5).abs() < 1e-6);
        assert_eq!(s.effective_n[&2000], 2);
        assert_eq!(s.points.len(), 2);
    }

    #[test]
    fn negative_base_uses_absolute_value() {
        let c = |cos: f32| [cos, (1.0 - cos * cos).sqrt()];
        let m = model_with(&[("t", [1.0, 0.0]), ("u", [0.0, 1.0])], &[("AAA_1995", c(-0.1)), ("AAA_2000", c(-0.2))]);
        let space = DocumentSpace::new(&m, AliasTable::none());
        let s = topic_index(
            &space,
            &CountryGroup::new("a", &["AAA"]).unwrap(),
            &PolicyTheme::new("t", &["t"]),
            1995,
            1995..=2000,
        )
        .unwrap();
        assert!((s.points[&2000] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn missing_members_are_dropped() {
        let m = model_with(
            &[("t", [1.0, 0.0]), ("u", [0.0, 1.0])],
            &[("AAA_1995", [1.0, 1.0]), ("BBB_1995", [1.0, 0.0]), ("AAA_2000", [1.0, 0.0])],
        );
        let space = DocumentSpace::new(&m, AliasTable::none());
        let group = CountryGroup::new("g", &["AAA", "BBB", "CCC"]).unwrap();
        let s = topic_index(&space, &group, &PolicyTheme::new("t", &["t"]), 1995, 1995..=2000).unwrap();
        assert_eq!(s.effective_n[&1995], 2);
        assert_eq!(s.effective_n[&2000], 1);
    }

    #[test]
    fn degenerate_base_year() {
        let m = model_with(&[("t", [1.0, 0.0]), ("u", [0.0, 1.0])], &[("AAA_1995", [0.0, 1.0]), ("AAA_2000", [1.0, 0.0])]);
        let space = DocumentSpace::new(&m, AliasTable::none());
        let err = topic_index(
            &space,
            &CountryGroup::everyone("all"),
            &PolicyTheme::new("t", &["t"]),
            1995,
            1995..=2000,
        )
        .unwrap_err();
        assert!(matches!(err, SemIndexError::Series(SeriesError::DegenerateBase { .. })));
        assert!(err.to_string().contains("degenerate base year"));
    }
}

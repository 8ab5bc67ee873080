//! Voting agreement and its rank correlation with semantic similarity.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semindex::{cosine, SemIndexError};
use crate::space::DocumentSpace;

#[derive(Debug, Error)]
pub enum VotesError {
    #[error("cannot read votes file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("votes CSV header must be year,country_code,agreement (found {0:?})")]
    Header(Vec<String>),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("line {line}: duplicate record for {country} in {year}")]
    Duplicate { line: u64, country: String, year: i32 },
}

#[derive(Debug, Error, PartialEq)]
pub enum SpearmanError {
    #[error("inputs have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 pairs, got {0}")]
    TooFew(usize),
    #[error("rank correlation is undefined: an input has zero rank variance")]
    ZeroVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingRecord {
    pub year: i32,
    pub country_code: String,
    /// Share of votes matching the reference country, in [0, 1].
    pub agreement: f64,
}

#[derive(Debug, Deserialize)]
struct Row {
    year: String,
    country_code: String,
    agreement: String,
}

pub fn parse_votes<R: Read>(reader: R) -> Result<Vec<VotingRecord>, VotesError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = csv
        .headers()
        .map_err(|e| VotesError::Row {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ["year", "country_code", "agreement"] {
        return Err(VotesError::Header(header));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for result in csv.records() {
        let record = result.map_err(|e| VotesError::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record.deserialize(None).map_err(|e| VotesError::Row {
            line,
            message: e.to_string(),
        })?;
        let year: i32 = row.year.parse().map_err(|_| VotesError::Row {
            line,
            message: format!("unparseable year {:?}", row.year),
        })?;
        let agreement: f64 = row.agreement.parse().map_err(|_| VotesError::Row {
            line,
            message: format!("unparseable agreement {:?}", row.agreement),
        })?;
        if !(0.0..=1.0).contains(&agreement) {
            return Err(VotesError::Row {
                line,
                message: format!("agreement {agreement} is outside [0, 1]"),
            });
        }
        if !seen.insert((year, row.country_code.clone())) {
            return Err(VotesError::Duplicate {
                line,
                country: row.country_code,
                year,
            });
        }
        out.push(VotingRecord {
            year,
            country_code: row.country_code,
            agreement,
        });
    }
    Ok(out)
}

/// Reads a `year,country_code,agreement` CSV.
pub fn load_votes(path: &Path) -> Result<Vec<VotingRecord>, VotesError> {
    let file = std::fs::File::open(path).map_err(|source| VotesError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_votes(file)
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, SpearmanError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(SpearmanError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, SpearmanError> {
    if x.len() != y.len() {
        return Err(SpearmanError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(SpearmanError::TooFew(x.len()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationPoint {
    pub year: i32,
    pub rho: f64,
    pub n: usize,
}

/// One country's paired observation in a year.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub country: String,
    pub similarity: f64,
    pub agreement: f64,
}

/// Countries with both a document and a voting record in `year`, paired as
/// (cosine to the reference country's document, agreement). The reference
/// country itself is never paired.
pub fn yearly_pairs(
    space: &DocumentSpace,
    votes: &[VotingRecord],
    reference: &str,
    year: i32,
) -> Result<Option<Vec<Pair>>, SemIndexError> {
    let reference = space.aliases.canonical(reference).to_string();
    let (Some(countries), Some(ref_row)) = (space.countries(year), space.row_of(&reference, year)) else {
        return Ok(None);
    };
    let ref_vec = space.vector(ref_row);
    let agreement: BTreeMap<&str, f64> = votes
        .iter()
        .filter(|v| v.year == year)
        .map(|v| (space.aliases.canonical(&v.country_code), v.agreement))
        .collect();
    let mut pairs = Vec::new();
    for (country, &row) in countries {
        if *country == reference {
            continue;
        }
        if let Some(&a) = agreement.get(country.as_str()) {
            pairs.push(Pair {
                country: country.clone(),
                similarity: cosine(&space.vector(row), &ref_vec)?,
                agreement: a,
            });
        }
    }
    Ok(Some(pairs))
}

/// Yearly Spearman correlation between similarity to `reference` and
/// voting agreement with it. Years lacking a reference document or with
/// fewer than 3 pairs are skipped with a warning.
pub fn yearly_correlation(
    space: &DocumentSpace,
    votes: &[VotingRecord],
    reference: &str,
    years: RangeInclusive<i32>,
) -> Result<Vec<CorrelationPoint>, SemIndexError> {
    let mut out = Vec::new();
    for year in years {
        let Some(pairs) = yearly_pairs(space, votes, reference, year)? else {
            if space.countries(year).is_some() {
                log::warn!("{year}: no document for reference country {reference}; skipped");
            }
            continue;
        };
        let x: Vec<f64> = pairs.iter().map(|p| p.similarity).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.agreement).collect();
        match spearman(&x, &y) {
            Ok(rho) => out.push(CorrelationPoint { year, rho, n: pairs.len() }),
            Err(e) => log::warn!("{year}: skipped ({e})"),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_records() {
        let v = parse_votes("year,country_code,agreement\n1970,FRA,0.42\n".as_bytes()).unwrap();
        assert_eq!(
            v,
            vec![VotingRecord {
                year: 1970,
                country_code: "FRA".into(),
                agreement: 0.42
            }]
        );
    }

    #[test]
    fn rejects_out_of_range_agreement() {
        let err = parse_votes("year,country_code,agreement\n1970,USA,0.5\n1970,FRA,1.42\n".as_bytes()).unwrap_err();
        match err {
            VotesError::Row { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("1.42"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_year_and_duplicates() {
        assert!(matches!(
            parse_votes("year,country_code,agreement\nabc,FRA,0.4\n".as_bytes()),
            Err(VotesError::Row { line: 2, .. })
        ));
        assert!(matches!(
            parse_votes("year,country_code,agreement\n1970,FRA,0.4\n1970,FRA,0.5\n".as_bytes()),
            Err(VotesError::Duplicate { line: 3, .. })
        ));
        assert!(matches!(
            parse_votes("yr,cc,agreement\n".as_bytes()),
            Err(VotesError::Header(_))
        ));
    }

    #[test]
    fn empty_file_with_header() {
        assert!(parse_votes("year,country_code,agreement\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spearman_errors() {
        assert_eq!(spearman(&[1.0, 2.0], &[1.0]), Err(SpearmanError::LengthMismatch(2, 1)));
        assert_eq!(spearman(&[1.0, 2.0], &[1.0, 2.0]), Err(SpearmanError::TooFew(2)));
        assert_eq!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(SpearmanError::ZeroVariance)
        );
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
    }
}

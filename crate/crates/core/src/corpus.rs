//! Corpus ingestion and preprocessing.
//!
//! Speech files follow the `<ISO3>_<session>_<year>.txt` naming convention and
//! may sit in nested per-session directories. Each file becomes one
//! [`RawDocument`]; [`preprocess`] turns its text into stemmed tokens and
//! [`build_vocabulary`] derives the min-count filtered word table.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use regex::Regex;
use rust_stemmers::{Algorithm, Stemmer};
use thiserror::Error;
use walkdir::WalkDir;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus directory {path}: {source}")]
    Directory { path: PathBuf, source: io::Error },
    #[error("cannot read {path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error("duplicate document for {country} in {year}: {first} and {second}")]
    Duplicate {
        country: String,
        year: i32,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("{path}:{line}: malformed processed-corpus line (expected label<TAB>tokens)")]
    MalformedLine { path: PathBuf, line: usize },
}

/// One speech: a single country's address in a single year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub country_code: String,
    pub session: u32,
    pub year: i32,
    pub text: String,
}

impl RawDocument {
    pub fn label(&self) -> String {
        document_label(&self.country_code, self.year)
    }
}

/// A labeled, stemmed token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessedDocument {
    pub label: String,
    pub tokens: Vec<String>,
}

impl ProcessedDocument {
    pub fn from_raw(raw: &RawDocument) -> Self {
        ProcessedDocument {
            label: raw.label(),
            tokens: preprocess(&raw.text),
        }
    }
}

pub fn document_label(country_code: &str, year: i32) -> String {
    format!("{country_code}_{year}")
}

/// Splits a `<country>_<year>` label. Returns `None` for labels that do not
/// end in a year.
pub fn parse_label(label: &str) -> Option<(&str, i32)> {
    let (country, year) = label.rsplit_once('_')?;
    Some((country, year.parse().ok()?))
}

fn file_name_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"^([A-Z]{3})_(\d+)_(\d{4})\.txt$").unwrap())
}

/// Parses `USA_25_1970.txt` into `("USA", 25, 1970)`.
pub fn parse_file_name(name: &str) -> Option<(String, u32, i32)> {
    let caps = file_name_pattern().captures(name)?;
    let session = caps[2].parse().ok()?;
    let year = caps[3].parse().ok()?;
    Some((caps[1].to_string(), session, year))
}

/// Reads every `<ISO3>_<session>_<year>.txt` file below `dir`.
///
/// Files with other names are skipped with a warning. Documents come back
/// ordered by `(year, country_code)`. Empty texts are skipped as well, since a
/// document without text cannot be embedded.
pub fn ingest_corpus(dir: &Path) -> Result<Vec<RawDocument>, CorpusError> {
    let meta = fs::metadata(dir).map_err(|source| CorpusError::Directory {
        path: dir.to_path_buf(),
        source,
    })?;
    if !meta.is_dir() {
        return Err(CorpusError::Directory {
            path: dir.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotADirectory, "not a directory"),
        });
    }

    let mut seen: HashMap<(String, i32), PathBuf> = HashMap::new();
    let mut docs = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|err| CorpusError::Directory {
            path: err.path().unwrap_or(dir).to_path_buf(),
            source: err.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy();
        let Some((country_code, session, year)) = parse_file_name(&name) else {
            log::warn!("skipping {}: name does not match <ISO3>_<session>_<year>.txt", entry.path().display());
            continue;
        };
        let path = entry.path().to_path_buf();
        let bytes = fs::read(&path).map_err(|source| CorpusError::File {
            path: path.clone(),
            source,
        })?;
        let text = String::from_utf8_lossy(&bytes).into_owned();
        if text.trim().is_empty() {
            log::warn!("skipping {}: empty text", path.display());
            continue;
        }
        if let Some(first) = seen.insert((country_code.clone(), year), path.clone()) {
            return Err(CorpusError::Duplicate {
                country: country_code,
                year,
                first,
                second: path,
            });
        }
        docs.push(RawDocument {
            country_code,
            session,
            year,
            text,
        });
    }
    docs.sort_by(|a, b| (a.year, &a.country_code).cmp(&(b.year, &b.country_code)));
    Ok(docs)
}

fn english_stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

fn is_punctuation(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Splits on whitespace and peels leading/trailing punctuation characters
/// into standalone tokens: `"(peace)."` becomes `["(", "peace", ")", "."]`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let start = chars.iter().position(|&c| !is_punctuation(c));
        let Some(start) = start else {
            tokens.extend(chars.iter().map(|c| c.to_string()));
            continue;
        };
        let end = chars.iter().rposition(|&c| !is_punctuation(c)).unwrap() + 1;
        tokens.extend(chars[..start].iter().map(|c| c.to_string()));
        tokens.push(chars[start..end].iter().collect());
        tokens.extend(chars[end..].iter().map(|c| c.to_string()));
    }
    tokens
}

/// Snowball English (Porter2) stem of a single lower-cased word.
pub fn stem(word: &str) -> String {
    english_stemmer().stem(word).into_owned()
}

/// Full text pipeline: strip digits, lowercase, tokenize, stem.
///
/// Punctuation tokens pass through unchanged and stopwords are kept.
pub fn preprocess(text: &str) -> Vec<String> {
    let stripped: String = text.chars().filter(|c| !c.is_numeric()).collect();
    let lowered = stripped.to_lowercase();
    tokenize(&lowered)
        .into_iter()
        .map(|tok| {
            if tok.chars().any(char::is_alphabetic) {
                stem(&tok)
            } else {
                tok
            }
        })
        .collect()
}

/// Preprocesses every document in parallel, keeping input order.
pub fn preprocess_all(raw: &[RawDocument]) -> Vec<ProcessedDocument> {
    raw.par_iter().map(ProcessedDocument::from_raw).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabEntry {
    pub index: usize,
    pub count: u64,
}

/// Word table after min-count filtering, plus every document label.
///
/// Word indices are assigned by descending count, ties broken by the word
/// itself, so index 0 is the most frequent word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: HashMap<String, VocabEntry>,
    words: Vec<String>,
    pub min_count: u64,
    pub doc_labels: Vec<String>,
    doc_rows: HashMap<String, usize>,
}

impl Vocabulary {
    /// Assembles a vocabulary from `(word, count)` pairs in index order.
    pub fn from_parts(words: Vec<(String, u64)>, min_count: u64, doc_labels: Vec<String>) -> Self {
        let mut entries = HashMap::with_capacity(words.len());
        let mut names = Vec::with_capacity(words.len());
        for (index, (word, count)) in words.into_iter().enumerate() {
            entries.insert(word.clone(), VocabEntry { index, count });
            names.push(word);
        }
        let doc_rows = doc_labels
            .iter()
            .enumerate()
            .map(|(row, label)| (label.clone(), row))
            .collect();
        Vocabulary {
            entries,
            words: names,
            min_count,
            doc_labels,
            doc_rows,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<VocabEntry> {
        self.entries.get(word).copied()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.entries.get(word).map(|e| e.index)
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn count(&self, index: usize) -> u64 {
        self.entries[&self.words[index]].count
    }

    /// Words in index order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> Vec<u64> {
        self.words.iter().map(|w| self.entries[w].count).collect()
    }

    pub fn doc_index(&self, label: &str) -> Option<usize> {
        self.doc_rows.get(label).copied()
    }
}

pub fn build_vocabulary(docs: &[ProcessedDocument], min_count: u64) -> Result<Vocabulary, CorpusError> {
    if min_count == 0 {
        return Err(CorpusError::InvalidMinCount);
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in docs {
        for tok in &doc.tokens {
            *counts.entry(tok.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let labels = docs.iter().map(|d| d.label.clone()).collect();
    Ok(Vocabulary::from_parts(kept, min_count, labels))
}

/// Summary figures reported after preprocessing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub documents: usize,
    pub mean_unique_tokens: f64,
}

pub fn corpus_stats(docs: &[ProcessedDocument]) -> CorpusStats {
    if docs.is_empty() {
        return CorpusStats {
            documents: 0,
            mean_unique_tokens: 0.0,
        };
    }
    let total: usize = docs
        .iter()
        .map(|d| d.tokens.iter().collect::<std::collections::HashSet<_>>().len())
        .sum();
    CorpusStats {
        documents: docs.len(),
        mean_unique_tokens: total as f64 / docs.len() as f64,
    }
}

/// Writes the canonical processed-corpus file: `label<TAB>tok tok tok`.
pub fn write_processed(path: &Path, docs: &[ProcessedDocument]) -> io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for doc in docs {
        writeln!(out, "{}\t{}", doc.label, doc.tokens.join(" "))?;
    }
    out.flush()
}

pub fn read_processed(path: &Path) -> Result<Vec<ProcessedDocument>, CorpusError> {
    let file = fs::File::open(path).map_err(|source| CorpusError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut docs = Vec::new();
    for (lineno, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::File {
            path: path.to_path_buf(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let Some((label, rest)) = line.split_once('\t') else {
            return Err(CorpusError::MalformedLine {
                path: path.to_path_buf(),
                line: lineno + 1,
            });
        };
        docs.push(ProcessedDocument {
            label: label.to_string(),
            tokens: rest.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect(),
        });
    }
    Ok(docs)
}

/// Groups document labels by year, keyed by country code.
pub fn labels_by_year(labels: &[String]) -> BTreeMap<i32, BTreeMap<String, usize>> {
    let mut out: BTreeMap<i32, BTreeMap<String, usize>> = BTreeMap::new();
    for (row, label) in labels.iter().enumerate() {
        if let Some((country, year)) = parse_label(label) {
            out.entry(year).or_default().insert(country.to_string(), row);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(label: &str, text: &str) -> ProcessedDocument {
        ProcessedDocument {
            label: label.into(),
            tokens: text.split_whitespace().map(str::to_string).collect(),
        }
    }

    #[test]
    fn preprocess_empty() {
        assert!(preprocess("").is_empty());
    }

    #[test]
    fn preprocess_keeps_punctuation() {
        assert_eq!(preprocess("Peace, peace."), vec!["peac", ",", "peac", "."]);
    }

    #[test]
    fn preprocess_strips_digits_before_tokenizing() {
        assert_eq!(preprocess("In 1970, the UN"), vec!["in", ",", "the", "un"]);
        assert_eq!(preprocess("1990s"), vec!["s"]);
    }

    #[test]
    fn stopwords_are_retained() {
        assert_eq!(preprocess("the and of"), vec!["the", "and", "of"]);
    }

    #[test]
    fn snowball_reference_stems() {
        // Published Snowball English test vectors.
        for (word, expected) in [
            ("consign", "consign"),
            ("consigned", "consign"),
            ("consolation", "consol"),
            ("generously", "generous"),
            ("knightly", "knight"),
            ("sanitation", "sanit"),
            ("education", "educ"),
            ("weapons", "weapon"),
            ("terrorism", "terror"),
        ] {
            assert_eq!(stem(word), expected, "{word}");
        }
    }

    #[test]
    fn economy_and_economic_follow_snowball_not_the_illustration() {
        assert_eq!(stem("economy"), "economi");
        assert_eq!(stem("economic"), "econom");
    }

    #[test]
    fn tokenizer_peels_punctuation() {
        assert_eq!(tokenize("\"war.\""), vec!["\"", "war", ".", "\""]);
        assert_eq!(tokenize("well-being"), vec!["well-being"]);
        assert_eq!(tokenize("..."), vec![".", ".", "."]);
    }

    #[test]
    fn file_names() {
        assert_eq!(parse_file_name("USA_25_1970.txt"), Some(("USA".into(), 25, 1970)));
        assert_eq!(parse_file_name("usa_25_1970.txt"), None);
        assert_eq!(parse_file_name("USA_25_1970.md"), None);
        assert_eq!(parse_file_name("README.txt"), None);
    }

    #[test]
    fn vocabulary_threshold_is_inclusive() {
        let docs = vec![doc("A_1970", "peace peace peace war war"), doc("B_1970", "peace peace war war")];
        let vocab = build_vocabulary(&docs, 5).unwrap();
        assert_eq!(vocab.len(), 1);
        assert!(vocab.get("peace").is_some());
        assert!(vocab.get("war").is_none());
        assert_eq!(vocab.get("peace").unwrap().count, 5);
    }

    #[test]
    fn vocabulary_empty() {
        let vocab = build_vocabulary(&[], 5).unwrap();
        assert_eq!(vocab.len(), 0);
        assert!(vocab.doc_labels.is_empty());
    }

    #[test]
    fn labels_survive_filtering() {
        let vocab = build_vocabulary(&[doc("USA_1970", "rare words only")], 5).unwrap();
        assert_eq!(vocab.len(), 0);
        assert_eq!(vocab.doc_labels, vec!["USA_1970"]);
    }

    #[test]
    fn min_count_zero_rejected() {
        assert!(matches!(build_vocabulary(&[], 0), Err(CorpusError::InvalidMinCount)));
    }

    #[test]
    fn indices_are_dense_and_count_ordered() {
        let docs = vec![doc("A_1970", "b a a c c c")];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        assert_eq!(vocab.words(), ["c", "a", "b"]);
        assert_eq!(vocab.index_of("b"), Some(2));
    }

    #[test]
    fn label_parsing() {
        assert_eq!(parse_label("USA_1970"), Some(("USA", 1970)));
        assert_eq!(parse_label("USA"), None);
    }
}

//! PV-DM paragraph vectors trained with hierarchical softmax.
//!
//! The input table holds one row per vocabulary word and one per document
//! label; only words are prediction targets, so the Huffman tree (and the
//! output table, one row per internal node) covers words alone.

mod huffman;
pub mod hs;
mod io;
mod train;

use std::io as stdio;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ProcessedDocument, Vocabulary};

pub use huffman::{build_huffman, HuffmanTree, TIE_BREAK_VERSION};
pub use io::{load_model, read_model, save_model, write_model, MAGIC};
pub use train::{init_model, train, LearningRateSchedule};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("cannot build a Huffman tree over an empty vocabulary")]
    EmptyVocabulary,
    #[error("word {0:?} is not in the vocabulary")]
    UnknownWord(String),
    #[error("context vector has dimension {got}, model has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("document {0:?} has no row in the vocabulary's label table")]
    UnknownDocument(String),
    #[error("corpus and vocabulary share no trainable positions")]
    NoTrainablePositions,
    #[error("model file I/O error on {path}: {source}")]
    Io { path: PathBuf, source: stdio::Error },
    #[error("not a model file: bad magic bytes")]
    BadMagic,
    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("model file truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("model file checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("model file inconsistent: {0}")]
    Inconsistent(String),
}

fn default_reduced_window() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub dim: usize,
    /// Maximum distance between the predicted word and a context word.
    pub window: usize,
    pub alpha0: f64,
    pub alpha_min: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Forces single-threaded, bit-reproducible training.
    pub deterministic: bool,
    pub threads: usize,
    /// Draw the effective window radius uniformly from `1..=window` per
    /// position instead of always using `window`.
    #[serde(default = "default_reduced_window")]
    pub reduced_window: bool,
    /// Frequent-word subsampling threshold; 0 disables it.
    pub sample: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 200,
            window: 10,
            alpha0: 0.025,
            alpha_min: 0.0001,
            epochs: 10,
            seed: 1,
            deterministic: false,
            threads: 1,
            reduced_window: true,
            sample: 0.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |msg: &str| Err(EmbedError::InvalidConfig(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha0 && self.alpha0.is_finite()) {
            return bad("learning rates must satisfy 0 < alpha_min <= alpha0");
        }
        if self.threads == 0 {
            return bad("threads must be at least 1");
        }
        if !(self.sample >= 0.0 && self.sample.is_finite()) {
            return bad("sample must be a non-negative number");
        }
        Ok(())
    }

    pub fn effective_threads(&self) -> usize {
        if self.deterministic {
            1
        } else {
            self.threads.max(1)
        }
    }
}

/// Trained (or freshly initialized) paragraph-vector model.
///
/// Matrices are row-major `f32`. `node_out` always has at least one row so a
/// single-word vocabulary still has a well-formed output table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub dim: usize,
    pub word_in: Vec<f32>,
    pub doc_in: Vec<f32>,
    pub node_out: Vec<f32>,
    pub vocab: Vocabulary,
    pub tree: HuffmanTree,
    pub config: TrainingConfig,
}

pub(crate) fn huffman_for(vocab: &Vocabulary) -> Result<HuffmanTree, EmbedError> {
    let leaves: Vec<(&str, u64)> = vocab.words().iter().map(|w| w.as_str()).zip(vocab.counts()).collect();
    build_huffman(&leaves)
}

impl EmbeddingModel {
    pub fn word_count(&self) -> usize {
        self.vocab.len()
    }

    pub fn doc_count(&self) -> usize {
        self.vocab.doc_labels.len()
    }

    pub fn node_rows(&self) -> usize {
        self.tree.internal_node_count().max(1)
    }

    pub fn word_row(&self, index: usize) -> &[f32] {
        &self.word_in[index * self.dim..(index + 1) * self.dim]
    }

    pub fn doc_row(&self, index: usize) -> &[f32] {
        &self.doc_in[index * self.dim..(index + 1) * self.dim]
    }

    pub fn node_row(&self, index: usize) -> &[f32] {
        &self.node_out[index * self.dim..(index + 1) * self.dim]
    }

    pub fn word_vector(&self, word: &str) -> Option<&[f32]> {
        self.vocab.index_of(word).map(|i| self.word_row(i))
    }

    pub fn doc_vector(&self, label: &str) -> Option<&[f32]> {
        self.vocab.doc_index(label).map(|i| self.doc_row(i))
    }

    fn path_nodes(&self, leaf: usize) -> Vec<Vec<f64>> {
        self.tree
            .path(leaf)
            .iter()
            .map(|&n| to_f64(self.node_row(n as usize)))
            .collect()
    }

    /// p(word | context) under the hierarchical softmax.
    pub fn hs_probability(&self, context: &[f64], word: &str) -> Result<f64, EmbedError> {
        let leaf = self
            .vocab
            .index_of(word)
            .ok_or_else(|| EmbedError::UnknownWord(word.to_string()))?;
        self.check_dim(context)?;
        Ok(hs::path_probability(&self.path_nodes(leaf), self.tree.code(leaf), context))
    }

    /// `−ln p(word | context)` with gradients for the context and for each
    /// output row on the word's path.
    pub fn hs_gradient(&self, context: &[f64], word: &str) -> Result<hs::PathGradient, EmbedError> {
        let leaf = self
            .vocab
            .index_of(word)
            .ok_or_else(|| EmbedError::UnknownWord(word.to_string()))?;
        self.check_dim(context)?;
        Ok(hs::path_loss_gradient(&self.path_nodes(leaf), self.tree.code(leaf), context))
    }

    fn check_dim(&self, v: &[f64]) -> Result<(), EmbedError> {
        if v.len() != self.dim {
            return Err(EmbedError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Total `−ln p` over every in-vocabulary position of `docs`, using the
    /// full window and the mean-combined PV-DM context.
    pub fn corpus_loss(&self, docs: &[ProcessedDocument]) -> Result<f64, EmbedError> {
        let window = self.config.window;
        let mut total = 0.0;
        let mut h = vec![0.0f64; self.dim];
        for doc in docs {
            let row = self
                .vocab
                .doc_index(&doc.label)
                .ok_or_else(|| EmbedError::UnknownDocument(doc.label.clone()))?;
            let words: Vec<usize> = doc.tokens.iter().filter_map(|t| self.vocab.index_of(t)).collect();
            for (t, &target) in words.iter().enumerate() {
                h.iter_mut()
                    .zip(self.doc_row(row))
                    .for_each(|(a, &b)| *a = b as f64);
                let lo = t.saturating_sub(window);
                let hi = (t + window + 1).min(words.len());
                let mut n = 1.0;
                for (c, &w) in words.iter().enumerate().take(hi).skip(lo) {
                    if c == t {
                        continue;
                    }
                    h.iter_mut().zip(self.word_row(w)).for_each(|(a, &b)| *a += b as f64);
                    n += 1.0;
                }
                h.iter_mut().for_each(|a| *a /= n);
                total += hs::path_loss(&self.path_nodes(target), self.tree.code(target), &h);
            }
        }
        Ok(total)
    }
}

pub fn to_f64(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

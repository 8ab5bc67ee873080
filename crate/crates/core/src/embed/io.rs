//! Binary model container.
//!
//! ```text
//! "SDX1" | version u32 | payload length u64 | payload | CRC-32 u32
//! payload = header | vocabulary | word_in | doc_in | node_out
//! ```
//!
//! All integers and floats are little-endian; matrices are `f32`. The CRC
//! covers every byte before it. The Huffman tree is not stored; it is rebuilt
//! from the vocabulary counts with the recorded tie-break version.

use std::fs;
use std::path::Path;

use super::{huffman_for, EmbedError, EmbeddingModel, TrainingConfig, TIE_BREAK_VERSION};
use crate::corpus::Vocabulary;

pub const MAGIC: &[u8; 4] = b"SDX1";
const FORMAT_VERSION: u32 = 1;
const PREFIX_LEN: usize = 16;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn matrix(&mut self, m: &[f32]) {
        for v in m {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], EmbedError> {
        if self.buf.len() - self.pos < n {
            return Err(EmbedError::Inconsistent(format!("payload ends inside {what}")));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u8(&mut self, what: &str) -> Result<u8, EmbedError> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<usize, EmbedError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self, what: &str) -> Result<u64, EmbedError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64, EmbedError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn str(&mut self, what: &str) -> Result<String, EmbedError> {
        let len = self.u32(what)?;
        let bytes = self.take(len, what)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| EmbedError::Inconsistent(format!("{what} is not UTF-8")))
    }
    fn matrix(&mut self, len: usize, what: &str) -> Result<Vec<f32>, EmbedError> {
        let bytes = self.take(len * 4, what)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

/// Serializes a model to bytes.
pub fn write_model(model: &EmbeddingModel) -> Vec<u8> {
    let cfg = &model.config;
    let mut p = Writer(Vec::new());
    p.u32(model.dim);
    p.u32(model.word_count());
    p.u32(model.doc_count());
    p.u32(model.node_rows());
    p.u32(TIE_BREAK_VERSION as usize);
    p.u32(cfg.window);
    p.f64(cfg.alpha0);
    p.f64(cfg.alpha_min);
    p.u32(cfg.epochs);
    p.u64(cfg.seed);
    p.u8(cfg.deterministic as u8);
    p.u32(cfg.threads);
    p.u8(cfg.reduced_window as u8);
    p.f64(cfg.sample);
    p.u64(model.vocab.min_count);
    for (i, word) in model.vocab.words().iter().enumerate() {
        p.str(word);
        p.u64(model.vocab.count(i));
    }
    for label in &model.vocab.doc_labels {
        p.str(label);
    }
    p.matrix(&model.word_in);
    p.matrix(&model.doc_in);
    p.matrix(&model.node_out);

    let mut out = Writer(Vec::with_capacity(p.0.len() + PREFIX_LEN + 4));
    out.0.extend_from_slice(MAGIC);
    out.u32(FORMAT_VERSION as usize);
    out.u64(p.0.len() as u64);
    out.0.extend_from_slice(&p.0);
    let crc = crc32fast::hash(&out.0);
    out.0.extend_from_slice(&crc.to_le_bytes());
    out.0
}

/// Parses bytes produced by [`write_model`].
pub fn read_model(bytes: &[u8]) -> Result<EmbeddingModel, EmbedError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(EmbedError::BadMagic);
    }
    if bytes.len() < PREFIX_LEN {
        return Err(EmbedError::Truncated {
            expected: PREFIX_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(EmbedError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let payload_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = PREFIX_LEN as u64 + payload_len + 4;
    if (bytes.len() as u64) < expected {
        return Err(EmbedError::Truncated {
            expected,
            found: bytes.len() as u64,
        });
    }
    if bytes.len() as u64 > expected {
        return Err(EmbedError::Inconsistent(format!(
            "{} trailing bytes after checksum",
            bytes.len() as u64 - expected
        )));
    }
    let body_end = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[body_end..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(EmbedError::Checksum { stored, computed });
    }

    let mut r = Reader {
        buf: &bytes[PREFIX_LEN..body_end],
        pos: 0,
    };
    let dim = r.u32("header")?;
    let n_words = r.u32("header")?;
    let n_docs = r.u32("header")?;
    let node_rows = r.u32("header")?;
    let tie_break = r.u32("header")? as u32;
    if tie_break != TIE_BREAK_VERSION {
        return Err(EmbedError::Inconsistent(format!(
            "Huffman tie-break version {tie_break} is not supported (expected {TIE_BREAK_VERSION})"
        )));
    }
    let config = TrainingConfig {
        dim,
        window: r.u32("config")?,
        alpha0: r.f64("config")?,
        alpha_min: r.f64("config")?,
        epochs: r.u32("config")?,
        seed: r.u64("config")?,
        deterministic: r.u8("config")? != 0,
        threads: r.u32("config")?,
        reduced_window: r.u8("config")? != 0,
        sample: r.f64("config")?,
    };
    let min_count = r.u64("config")?;
    let mut words = Vec::with_capacity(n_words);
    for _ in 0..n_words {
        let w = r.str("vocabulary")?;
        let c = r.u64("vocabulary")?;
        words.push((w, c));
    }
    let mut labels = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        labels.push(r.str("document labels")?);
    }
    if dim == 0 {
        return Err(EmbedError::Inconsistent("dimension is zero".into()));
    }
    if node_rows != n_words.saturating_sub(1).max(1) {
        return Err(EmbedError::Inconsistent(format!(
            "{node_rows} output rows for {n_words} words"
        )));
    }
    let cells = (n_words + n_docs + node_rows) * dim;
    if r.remaining() != cells * 4 {
        return Err(EmbedError::Inconsistent(format!(
            "header declares dim {dim} ({cells} matrix cells) but payload holds {} bytes of matrices",
            r.remaining()
        )));
    }
    let word_in = r.matrix(n_words * dim, "word matrix")?;
    let doc_in = r.matrix(n_docs * dim, "document matrix")?;
    let node_out = r.matrix(node_rows * dim, "output matrix")?;

    let vocab = Vocabulary::from_parts(words, min_count, labels);
    let tree = huffman_for(&vocab)?;
    Ok(EmbeddingModel {
        dim,
        word_in,
        doc_in,
        node_out,
        vocab,
        tree,
        config,
    })
}

pub fn save_model(model: &EmbeddingModel, path: &Path) -> Result<(), EmbedError> {
    fs::write(path, write_model(model)).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<EmbeddingModel, EmbedError> {
    let bytes = fs::read(path).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_model(&bytes)
}

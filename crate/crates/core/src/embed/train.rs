use std::collections::HashSet;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{huffman_for, EmbedError, EmbeddingModel, TrainingConfig};
use crate::corpus::{ProcessedDocument, Vocabulary};

/// Linear decay from `alpha0` at position 0 to `alpha_min` at the last
/// scheduled position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRateSchedule {
    pub alpha0: f64,
    pub alpha_min: f64,
    pub total_positions: u64,
}

impl LearningRateSchedule {
    pub fn rate(&self, position: u64) -> f64 {
        if self.total_positions <= 1 {
            return self.alpha0;
        }
        let last = (self.total_positions - 1) as f64;
        let frac = (position as f64 / last).min(1.0);
        self.alpha0 - (self.alpha0 - self.alpha_min) * frac
    }
}

/// Row-major f32 matrix that several workers may update without locks.
/// Relaxed atomics give the usual Hogwild semantics without data races.
struct SharedMatrix {
    dim: usize,
    cells: Vec<AtomicU32>,
}

impl SharedMatrix {
    fn new(values: &[f32], dim: usize) -> Self {
        SharedMatrix {
            dim,
            cells: values.iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
        }
    }

    fn row(&self, r: usize) -> &[AtomicU32] {
        &self.cells[r * self.dim..(r + 1) * self.dim]
    }

    fn read_into(&self, r: usize, out: &mut [f32]) {
        for (o, c) in out.iter_mut().zip(self.row(r)) {
            *o = f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_into(&self, r: usize, out: &mut [f32]) {
        for (o, c) in out.iter_mut().zip(self.row(r)) {
            *o += f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    /// row += scale · delta
    fn add_scaled(&self, r: usize, delta: &[f32], scale: f32) {
        for (c, &d) in self.row(r).iter().zip(delta) {
            let v = f32::from_bits(c.load(Ordering::Relaxed)) + scale * d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f32> {
        self.cells.into_iter().map(|c| f32::from_bits(c.into_inner())).collect()
    }
}

/// Seeded model before any training: input rows uniform in
/// `[−0.5/dim, 0.5/dim]`, output rows zero.
pub fn init_model(vocab: &Vocabulary, config: &TrainingConfig) -> Result<EmbeddingModel, EmbedError> {
    config.validate()?;
    let tree = huffman_for(vocab)?;
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = 1.0 / dim as f32;
    let mut draw = |rows: usize| -> Vec<f32> {
        (0..rows * dim).map(|_| (rng.random::<f32>() - 0.5) * scale).collect()
    };
    let word_in = draw(vocab.len());
    let doc_in = draw(vocab.doc_labels.len());
    let node_out = vec![0.0; tree.internal_node_count().max(1) * dim];
    Ok(EmbeddingModel {
        dim,
        word_in,
        doc_in,
        node_out,
        vocab: vocab.clone(),
        tree,
        config: config.clone(),
    })
}

struct Doc {
    row: usize,
    words: Vec<u32>,
}

struct Shared<'a> {
    config: &'a TrainingConfig,
    model: &'a EmbeddingModel,
    word_in: SharedMatrix,
    doc_in: SharedMatrix,
    node_out: SharedMatrix,
    schedule: LearningRateSchedule,
    processed: AtomicU64,
    keep_prob: Vec<f32>,
}

fn sigmoid32(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot32(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Worker<'a> {
    shared: &'a Shared<'a>,
    rng: ChaCha8Rng,
    context: Vec<f32>,
    grad: Vec<f32>,
    node: Vec<f32>,
    sentence: Vec<u32>,
}

impl<'a> Worker<'a> {
    fn new(shared: &'a Shared<'a>, seed: u64) -> Self {
        let dim = shared.model.dim;
        Worker {
            shared,
            rng: ChaCha8Rng::seed_from_u64(seed),
            context: vec![0.0; dim],
            grad: vec![0.0; dim],
            node: vec![0.0; dim],
            sentence: Vec::new(),
        }
    }

    fn train_doc(&mut self, doc: &Doc) {
        let s = self.shared;
        let start = s.processed.fetch_add(doc.words.len() as u64, Ordering::Relaxed);

        self.sentence.clear();
        if s.config.sample > 0.0 {
            for &w in &doc.words {
                if s.keep_prob[w as usize] >= self.rng.random::<f32>() {
                    self.sentence.push(w);
                }
            }
        } else {
            self.sentence.extend_from_slice(&doc.words);
        }

        let window = s.config.window;
        let len = self.sentence.len();
        let dropped = (doc.words.len() - len) as u64;
        for t in 0..len {
            // Dropped words still advance the schedule, spread across the doc.
            let pos = start + t as u64 + dropped * t as u64 / len.max(1) as u64;
            let alpha = s.schedule.rate(pos) as f32;
            let radius = if s.config.reduced_window {
                self.rng.random_range(1..=window)
            } else {
                window
            };
            let lo = t.saturating_sub(radius);
            let hi = (t + radius + 1).min(len);
            self.step(doc.row, t, lo, hi, alpha);
        }
    }

    /// One SGD step on −ln p(sentence[t] | mean(doc, context words)).
    fn step(&mut self, doc_row: usize, t: usize, lo: usize, hi: usize, alpha: f32) {
        let s = self.shared;
        let model = s.model;
        s.doc_in.read_into(doc_row, &mut self.context);
        let mut count = 1usize;
        for c in lo..hi {
            if c != t {
                s.word_in.add_into(self.sentence[c] as usize, &mut self.context);
                count += 1;
            }
        }
        let inv = 1.0 / count as f32;
        self.context.iter_mut().for_each(|x| *x *= inv);
        self.grad.iter_mut().for_each(|x| *x = 0.0);

        let target = self.sentence[t] as usize;
        for (&node, &bit) in model.tree.path(target).iter().zip(model.tree.code(target)) {
            let node = node as usize;
            s.node_out.read_into(node, &mut self.node);
            let f = sigmoid32(dot32(&self.node, &self.context));
            // step along −∂loss/∂(v·h): (1 − bit − σ)
            let g = (1.0 - bit as u8 as f32 - f) * alpha;
            for (acc, &v) in self.grad.iter_mut().zip(&self.node) {
                *acc += g * v;
            }
            s.node_out.add_scaled(node, &self.context, g);
        }

        // The context is a mean, so each input receives 1/count of the error.
        s.doc_in.add_scaled(doc_row, &self.grad, inv);
        for c in lo..hi {
            if c != t {
                s.word_in.add_scaled(self.sentence[c] as usize, &self.grad, inv);
            }
        }
    }
}

fn keep_probabilities(vocab: &Vocabulary, sample: f64) -> Vec<f32> {
    if sample <= 0.0 {
        return vec![1.0; vocab.len()];
    }
    let total: u64 = vocab.counts().iter().sum();
    let threshold = sample * total as f64;
    vocab
        .counts()
        .iter()
        .map(|&c| {
            let c = c as f64;
            (((c / threshold).sqrt() + 1.0) * threshold / c).min(1.0) as f32
        })
        .collect()
}

/// Trains a PV-DM model over `corpus`.
///
/// With `deterministic` set (or a single thread) the result is a pure
/// function of inputs and seed. With several threads, workers take documents
/// round-robin and update the shared tables without locks.
pub fn train(
    corpus: &[ProcessedDocument],
    vocab: &Vocabulary,
    config: &TrainingConfig,
) -> Result<EmbeddingModel, EmbedError> {
    if corpus.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let mut model = init_model(vocab, config)?;

    let mut seen = HashSet::new();
    let mut docs = Vec::with_capacity(corpus.len());
    for doc in corpus {
        let row = vocab
            .doc_index(&doc.label)
            .ok_or_else(|| EmbedError::UnknownDocument(doc.label.clone()))?;
        seen.insert(row);
        let words: Vec<u32> = doc
            .tokens
            .iter()
            .filter_map(|t| vocab.index_of(t).map(|i| i as u32))
            .collect();
        docs.push(Doc { row, words });
    }
    let per_epoch: u64 = docs.iter().map(|d| d.words.len() as u64).sum();
    if per_epoch == 0 {
        return Err(EmbedError::NoTrainablePositions);
    }
    if config.epochs == 0 {
        return Ok(model);
    }

    let threads = config.effective_threads().min(docs.len());
    let shared = Shared {
        config,
        model: &model,
        word_in: SharedMatrix::new(&model.word_in, model.dim),
        doc_in: SharedMatrix::new(&model.doc_in, model.dim),
        node_out: SharedMatrix::new(&model.node_out, model.dim),
        schedule: LearningRateSchedule {
            alpha0: config.alpha0,
            alpha_min: config.alpha_min,
            total_positions: per_epoch * config.epochs as u64,
        },
        processed: AtomicU64::new(0),
        keep_prob: keep_probabilities(vocab, config.sample),
    };

    let run = |tid: usize| {
        let seed = config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(tid as u64 + 1));
        let mut worker = Worker::new(&shared, seed);
        for epoch in 0..config.epochs {
            for doc in docs.iter().skip(tid).step_by(threads) {
                worker.train_doc(doc);
            }
            log::debug!("worker {tid} finished epoch {}", epoch + 1);
        }
    };
    if threads == 1 {
        run(0);
    } else {
        std::thread::scope(|scope| {
            for tid in 0..threads {
                let run = &run;
                scope.spawn(move || run(tid));
            }
        });
    }

    let Shared {
        word_in,
        doc_in,
        node_out,
        ..
    } = shared;
    let (word_in, doc_in, node_out) = (word_in.into_vec(), doc_in.into_vec(), node_out.into_vec());
    model.word_in = word_in;
    model.doc_in = doc_in;
    model.node_out = node_out;
    Ok(model)
}

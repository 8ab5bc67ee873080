//! Paragraph-vector embeddings of country-year speeches and the semantic
//! indices derived from them.
//!
//! The pipeline runs [`corpus`] (ingest, stem, count) → [`embed`] (PV-DM
//! training with hierarchical softmax) → [`semindex`] (theme similarity
//! indices), [`semnet`] (similarity networks, density and centrality) and
//! [`votes`] (rank correlation against voting agreement).

pub mod corpus;
pub mod countries;
pub mod embed;
pub mod series;
pub mod space;
pub mod semindex;
pub mod semnet;
pub mod synth;
pub mod votes;

pub use corpus::{ProcessedDocument, RawDocument, Vocabulary};
pub use embed::{EmbeddingModel, HuffmanTree, TrainingConfig};
pub use series::IndexSeries;
pub use space::DocumentSpace;

//! Seeded synthetic corpora with known structure, for demos and tests.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ProcessedDocument, RawDocument};

/// `docs` documents split evenly between two topics, each topic drawing
/// `tokens_per_doc` tokens uniformly from its own 50-word vocabulary.
/// Returns the documents and each document's topic (0 or 1).
pub fn two_topic_corpus(docs: usize, tokens_per_doc: usize, seed: u64) -> (Vec<ProcessedDocument>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics: [Vec<String>; 2] = [
        (0..50).map(|i| format!("alpha{i:02}")).collect(),
        (0..50).map(|i| format!("beta{i:02}")).collect(),
    ];
    let mut out = Vec::with_capacity(docs);
    let mut labels = Vec::with_capacity(docs);
    for d in 0..docs {
        let topic = d % 2;
        let tokens = (0..tokens_per_doc)
            .map(|_| topics[topic].choose(&mut rng).unwrap().clone())
            .collect();
        out.push(ProcessedDocument {
            label: format!("D{d:02}_2000"),
            tokens,
        });
        labels.push(topic);
    }
    (out, labels)
}

const FILLER: &[&str] = &[
    "the", "of", "and", "to", "in", "our", "we", "nations", "united", "general", "assembly", "people", "world",
    "international", "peace", "security", "cooperation", "development", "government", "must", "all", "that",
];
const BLOC_A: &[&str] = &[
    "trade", "markets", "investment", "growth", "industry", "finance", "prosperity", "enterprise", "banks",
    "commerce",
];
const BLOC_B: &[&str] = &[
    "sovereignty", "colonialism", "liberation", "independence", "struggle", "solidarity", "imperialism",
    "apartheid", "selfdetermination", "justice",
];
const THEMES: &[&[&str]] = &[
    &["health", "sanitation", "hospitals"],
    &["education", "schools", "teachers"],
    &["nuclear", "weapons", "disarmament"],
    &["terrorism", "islam", "extremism"],
];

/// Raw speeches for `countries` (ISO-style codes) over `years`.
///
/// Countries alternate between two stylistic blocs; theme words appear with
/// year-dependent frequency so that theme indices vary over time (nuclear
/// vocabulary fades, health and education vocabulary grows). Text includes
/// punctuation, capitals and digits so it exercises the full preprocessing
/// pipeline.
pub fn synthetic_speeches(countries: &[&str], years: std::ops::RangeInclusive<i32>, words_per_speech: usize, seed: u64) -> Vec<RawDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = *years.start();
    let span = (*years.end() - first).max(1) as f64;
    let mut docs = Vec::new();
    for year in years {
        let t = (year - first) as f64 / span;
        // health, education, nuclear, terrorism
        let theme_rates = [0.02 + 0.06 * t, 0.02 + 0.05 * t, 0.08 - 0.07 * t, 0.01 + 0.03 * (t * 6.0).sin().abs()];
        for (i, &country) in countries.iter().enumerate() {
            let bloc = if i % 2 == 0 { BLOC_A } else { BLOC_B };
            let mut words = Vec::with_capacity(words_per_speech);
            for w in 0..words_per_speech {
                let roll: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = None;
                for (theme, &rate) in THEMES.iter().zip(&theme_rates) {
                    acc += rate;
                    if roll < acc {
                        chosen = Some(*theme.choose(&mut rng).unwrap());
                        break;
                    }
                }
                let word = chosen.unwrap_or_else(|| {
                    if rng.random_bool(0.35) {
                        bloc.choose(&mut rng).unwrap()
                    } else {
                        FILLER.choose(&mut rng).unwrap()
                    }
                });
                let mut word = word.to_string();
                if w % 17 == 0 {
                    word = capitalize(&word);
                }
                words.push(word);
                if w % 23 == 22 {
                    words.push(format!("in {year},"));
                }
                if w % 11 == 10 {
                    if let Some(last) = words.last_mut() {
                        last.push('.');
                    }
                }
            }
            docs.push(RawDocument {
                country_code: country.to_string(),
                session: (year - 1945) as u32,
                year,
                text: words.join(" "),
            });
        }
    }
    docs
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

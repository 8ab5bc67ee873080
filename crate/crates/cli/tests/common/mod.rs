#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semdex::synth::synthetic_speeches;

pub const COUNTRIES: &[&str] = &[
    "USA", "RUS", "FRA", "CHN", "DEU", "IND", "GBR", "BRA", "ITA", "MEX", "ESP", "ZAF", "SWE", "TUR", "NLD", "IDN",
];
pub const FIRST_YEAR: i32 = 1990;
pub const LAST_YEAR: i32 = 2014;

/// Writes speeches as `<CCC>_<session>_<year>.txt` in per-session folders.
/// Russia files before 1992 carry the USSR code.
pub fn write_corpus(dir: &Path, words: usize, seed: u64) {
    for doc in synthetic_speeches(COUNTRIES, FIRST_YEAR..=LAST_YEAR, words, seed) {
        let code = if doc.country_code == "RUS" && doc.year < 1992 { "SUN" } else { doc.country_code.as_str() };
        let session = dir.join(format!("Session {} - {}", doc.session, doc.year));
        fs::create_dir_all(&session).unwrap();
        fs::write(session.join(format!("{code}_{}_{}.txt", doc.session, doc.year)), &doc.text).unwrap();
    }
}

/// Agreement with the USA: high for its own bloc, low for the other.
pub fn write_votes(path: &Path, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("year,country_code,agreement\n");
    for year in FIRST_YEAR..=LAST_YEAR {
        for (i, c) in COUNTRIES.iter().enumerate().skip(1) {
            let base = if i % 2 == 0 { 0.7 } else { 0.3 };
            let a: f64 = (base + rng.random_range(-0.2..0.2f64)).clamp(0.0, 1.0);
            writeln!(csv, "{year},{c},{a:.4}").unwrap();
        }
    }
    fs::write(path, csv).unwrap();
}

pub const CONFIG: &str = r#"
corpus_dir = "corpus"
processed_path = "work/processed.tsv"
model_path = "work/model.sdx"
output_dir = "out"
votes_path = "votes.csv"
min_count = 2

[training]
dim = 24
window = 5
epochs = 8
seed = 7
deterministic = true

[filter]
threshold = 0.3

[base_years]
topic = 1995
density = 1990
edot = 1995
"#;

pub struct Project {
    pub dir: tempfile::TempDir,
}

impl Project {
    /// A corpus, votes file and config in a fresh directory.
    pub fn new() -> Self {
        Self::with_config(CONFIG)
    }

    pub fn with_config(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(&dir.path().join("corpus"), 250, 42);
        write_votes(&dir.path().join("votes.csv"), 3);
        fs::write(dir.path().join("semdex.toml"), config).unwrap();
        Project { dir }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn config(&self) -> PathBuf {
        self.path("semdex.toml")
    }

    pub fn run(&self, args: &[&str]) -> Output {
        semdex(&[&["--config", self.config().to_str().unwrap()], args].concat())
    }

    pub fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }
}

pub fn semdex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semdex"))
        .args(args)
        .env("SEMDEX_LOG", "error")
        .output()
        .expect("semdex runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub const PIPELINE: &[&str] = &["preprocess", "train", "topic", "centrality", "density", "correlate", "export-graph"];

/// Runs every stage, panicking with the stage's stderr on failure.
pub fn run_pipeline(project: &Project) {
    for cmd in PIPELINE {
        let out = project.run(&[cmd]);
        assert_eq!(code(&out), 0, "{cmd} failed: {}", stderr(&out));
    }
}

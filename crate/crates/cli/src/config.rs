use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use semdex::countries::{eu15, emerging_economies, AliasTable, CountryGroup};
use semdex::semindex::{default_themes, PolicyTheme};
use semdex::semnet::FilterConfig;
use semdex::TrainingConfig;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseYears {
    pub topic: i32,
    pub density: i32,
    pub edot: i32,
}

impl Default for BaseYears {
    fn default() -> Self {
        BaseYears {
            topic: 1995,
            density: 1970,
            edot: 1995,
        }
    }
}

/// Inclusive `[first, last]` year range.
pub type YearSpan = [i32; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus_dir: PathBuf,
    pub processed_path: PathBuf,
    pub model_path: PathBuf,
    pub output_dir: PathBuf,
    pub votes_path: Option<PathBuf>,
    pub reference_country: String,
    pub min_count: u64,
    /// Restricts every index to these years; all corpus years when absent.
    pub years: Option<YearSpan>,
    pub training: TrainingConfig,
    pub filter: FilterConfig,
    pub base_years: BaseYears,
    pub aliases: AliasTable,
    pub themes: Vec<PolicyTheme>,
    /// Groups whose topic indices are computed.
    pub topic_groups: Vec<CountryGroup>,
    /// Groups whose centrality index E is computed.
    pub groups: Vec<CountryGroup>,
    pub e_years: Option<YearSpan>,
    /// Countries whose Ė series is computed.
    pub edot_countries: Vec<String>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub root: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus_dir: "corpus".into(),
            processed_path: "work/processed.tsv".into(),
            model_path: "work/model.sdx".into(),
            output_dir: "out".into(),
            votes_path: None,
            reference_country: "USA".into(),
            min_count: 5,
            years: None,
            training: TrainingConfig::default(),
            filter: FilterConfig::default(),
            base_years: BaseYears::default(),
            aliases: AliasTable::default(),
            themes: default_themes(),
            topic_groups: vec![CountryGroup::everyone("all")],
            groups: vec![eu15(), emerging_economies()],
            e_years: Some([2000, 2014]),
            edot_countries: vec!["USA".into(), "RUS".into()],
            root: PathBuf::from("."),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.root = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        Ok(cfg)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_relative() {
            self.root.join(path)
        } else {
            path.to_path_buf()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.training
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if self.min_count == 0 {
            return Err(CliError::Usage("min_count must be at least 1".into()));
        }
        for g in self.groups.iter().chain(&self.topic_groups) {
            g.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        }
        for span in [self.years, self.e_years].into_iter().flatten() {
            if span[0] > span[1] {
                return Err(CliError::Usage(format!("year range {span:?} is reversed")));
            }
        }
        if !(self.filter.percentile > 0.0 && self.filter.percentile < 100.0) {
            return Err(CliError::Usage("filter.percentile must lie in (0, 100)".into()));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the effective config. Paths
    /// enter as written, so moving a project directory keeps its hash.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn stemmed_themes(&self) -> Vec<PolicyTheme> {
        self.themes.iter().map(PolicyTheme::stemmed).collect()
    }
}

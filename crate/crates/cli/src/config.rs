//! Run configuration file: flat TOML keys plus a list of criteria.
//!
//! ```toml
//! input = "quality.csv"
//! delta = 0.0
//! alpha = 0.05
//! resamples = 1000        # or "auto" / "exhaustive"
//! seed = 1
//! correction = "bonferroni"
//! ordinal_only = false
//! pooling = "all"
//! scheme = "pooled"
//!
//! [[criteria]]
//! name = "accuracy"
//! scale = "metric"
//! direction = "maximize"
//! ```

use std::path::{Path, PathBuf};

use gsd::model::{CriterionSpec, Direction, Scale};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub resamples: Option<ResamplesValue>,
    pub seed: Option<u64>,
    pub correction: Option<String>,
    pub ordinal_only: Option<bool>,
    pub pooling: Option<String>,
    pub scheme: Option<String>,
    pub criteria: Option<Vec<CriterionEntry>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ResamplesValue {
    Count(usize),
    Name(String),
}

impl ResamplesValue {
    pub fn as_text(&self) -> String {
        match self {
            ResamplesValue::Count(n) => n.to_string(),
            ResamplesValue::Name(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionEntry {
    pub name: String,
    pub scale: String,
    pub direction: String,
}

impl CriterionEntry {
    pub fn to_spec(&self) -> Result<CriterionSpec, String> {
        let scale = match self.scale.to_ascii_lowercase().as_str() {
            "metric" => Scale::Metric,
            "ordinal" => Scale::Ordinal,
            other => return Err(format!("criterion `{}`: unknown scale `{other}` (metric or ordinal)", self.name)),
        };
        let direction = match self.direction.to_ascii_lowercase().as_str() {
            "maximize" | "max" => Direction::Maximize,
            "minimize" | "min" => Direction::Minimize,
            other => return Err(format!("criterion `{}`: unknown direction `{other}` (maximize or minimize)", self.name)),
        };
        Ok(CriterionSpec::new(self.name.clone(), scale, direction))
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn criteria_specs(&self) -> Result<Option<Vec<CriterionSpec>>, String> {
        self.criteria
            .as_ref()
            .map(|list| list.iter().map(CriterionEntry::to_spec).collect())
            .transpose()
    }
}

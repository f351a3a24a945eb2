use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use megazord_neural::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineConfig, BaselineMethod};
use crate::error::{Error, Result};
use crate::megazord::{MegazordConfig, NetKind, VariantSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data_path: Option<PathBuf>,
    /// Explicit symbols; empty means "use `sample` or every symbol".
    pub symbols: Vec<String>,
    /// Seeded random sample of this many symbols.
    pub sample: Option<usize>,
    pub variants: Vec<String>,
    pub baselines: Vec<String>,
    pub split_fraction: f64,
    pub lookback: usize,
    pub window: usize,
    pub root_seed: u64,
    pub output_dir: PathBuf,
    pub jobs: usize,
    pub alpha: f64,
    pub ses_alpha: f64,
    pub ma_window: usize,
    pub knn_window: usize,
    pub knn_neighbors: usize,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data_path: None,
            symbols: Vec::new(),
            sample: None,
            variants: VariantSpec::ALL.iter().map(|v| v.name()).collect(),
            baselines: BaselineMethod::ALL
                .iter()
                .map(|m| m.name().to_string())
                .collect(),
            split_fraction: 0.8,
            lookback: 10,
            window: 10,
            root_seed: 0,
            output_dir: PathBuf::from("results"),
            jobs: 1,
            alpha: 0.05,
            ses_alpha: 0.95,
            ma_window: 10,
            knn_window: 5,
            knn_neighbors: 3,
            train: TrainConfig::default(),
        }
    }
}

/// A variant or a baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Megazord(VariantSpec),
    Baseline(BaselineMethod),
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Megazord(v) => v.name(),
            Method::Baseline(b) => b.name().to_string(),
        }
    }

    pub fn is_megazord(&self) -> bool {
        matches!(self, Method::Megazord(_))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn megazord_config(&self) -> MegazordConfig {
        MegazordConfig {
            lookback: self.lookback,
            window: self.window,
            train: self.train.clone(),
        }
    }

    pub fn baseline_config(&self, method: BaselineMethod, rw_seed: u64) -> BaselineConfig {
        BaselineConfig {
            method,
            alpha: self.ses_alpha,
            ma_window: self.ma_window,
            knn_window: self.knn_window,
            knn_neighbors: self.knn_neighbors,
            rw_seed,
        }
    }

    /// Checks every field and resolves method names, variants first.
    pub fn validate(&self) -> Result<Vec<Method>> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.variants.is_empty() {
            return bad("at least one variant is required".into());
        }
        let mut methods = Vec::new();
        for name in &self.variants {
            match VariantSpec::parse(name) {
                Some(v) => methods.push(Method::Megazord(v)),
                None => return bad(format!("unknown variant `{name}`")),
            }
        }
        for name in &self.baselines {
            match BaselineMethod::parse(name) {
                Some(b) => methods.push(Method::Baseline(b)),
                None => return bad(format!("unknown baseline `{name}`")),
            }
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = methods
            .iter()
            .map(Method::name)
            .find(|n| !seen.insert(n.clone()))
        {
            return bad(format!("method `{dup}` listed twice"));
        }
        if !self.symbols.is_empty() && self.sample.is_some() {
            return bad("give either symbols or sample, not both".into());
        }
        if self.sample == Some(0) {
            return bad("sample must be >= 1".into());
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = self.symbols.iter().find(|s| !seen.insert(s.as_str())) {
            return bad(format!("symbol `{dup}` listed twice"));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return bad(format!(
                "split_fraction {} outside (0, 1)",
                self.split_fraction
            ));
        }
        if self.window == 0 || self.lookback == 0 {
            return bad("window and lookback must be >= 1".into());
        }
        let uses_cnn = methods.iter().any(|m| {
            matches!(m, Method::Megazord(v)
                if v.trend == NetKind::Cnn || v.seasonal == Some(NetKind::Cnn))
        });
        if uses_cnn && self.lookback < 4 {
            return bad(format!(
                "CNN variants need lookback >= 4, got {}",
                self.lookback
            ));
        }
        if self.jobs == 0 {
            return bad("jobs must be >= 1".into());
        }
        if (self.alpha - 0.05).abs() > 1e-12 {
            return bad(format!(
                "alpha {} unsupported; only 0.05 is tabulated",
                self.alpha
            ));
        }
        self.baseline_config(BaselineMethod::Ses, 0)
            .validate()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        self.train
            .validate()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        Ok(methods)
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::app::{AppId, Method};
use crate::error::{Error, Result};
use crate::metrics::GROUND_TRUTH_SAMPLES;

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "MCPROP_OUT_DIR";

pub const DEFAULT_REPETITIONS: u32 = 30;
pub const DEFAULT_SEED: u64 = 20_240_501;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub app: String,
    pub method: String,
    /// Sample counts `n`, or representation sizes `r` for dirac-prop. Empty
    /// selects the default grid for the pair.
    #[serde(default)]
    pub params: Vec<u64>,
    #[serde(default = "default_reps")]
    pub repetitions: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub delay_s: f64,
    #[serde(default = "default_gt")]
    pub gt_samples: usize,
    /// Basis size for grappa runs.
    #[serde(default = "default_k")]
    pub grappa_k: usize,
}

fn default_reps() -> u32 {
    DEFAULT_REPETITIONS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_out() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn default_gt() -> usize {
    GROUND_TRUTH_SAMPLES
}

fn default_k() -> usize {
    crate::app::DEFAULT_GRAPPA_K
}

/// The grids used in the published comparison.
pub fn default_params(app: AppId, method: Method) -> Vec<u64> {
    match (app, method) {
        (AppId::ConvergenceChallenge, Method::DiracProp) => vec![16, 32, 64, 256, 2048],
        (AppId::Poiseuille, Method::DiracProp) => vec![16, 32, 64, 128, 256, 2048],
        (AppId::Poiseuille, _) => vec![4, 256, 1152, 4096, 8192, 32000, 128000, 256000, 512000, 640000],
        _ => vec![4, 256, 1152, 2048, 4096, 8192, 16000, 32000, 128000, 256000],
    }
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub app: AppId,
    pub method: Method,
    pub params: Vec<u64>,
    pub repetitions: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub delay_s: f64,
    pub gt_samples: usize,
    pub grappa_k: usize,
}

impl ExperimentConfig {
    pub fn new(app: AppId, method: Method) -> Self {
        Self {
            app: app.id().to_string(),
            method: method.id().to_string(),
            params: Vec::new(),
            repetitions: DEFAULT_REPETITIONS,
            seed: DEFAULT_SEED,
            out: default_out(),
            delay_s: 0.0,
            gt_samples: GROUND_TRUTH_SAMPLES,
            grappa_k: default_k(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<Experiment> {
        let app: AppId = self.app.parse()?;
        let method: Method = self.method.parse()?;
        let supported = match app {
            AppId::Buffon => method == Method::MonteCarlo,
            AppId::Poiseuille => method != Method::Spot,
            AppId::ConvergenceChallenge => true,
        };
        if !supported {
            return Err(Error::Config(format!(
                "application `{app}` does not support method `{method}`"
            )));
        }
        let params = if self.params.is_empty() {
            default_params(app, method)
        } else {
            self.params.clone()
        };
        let min = if method.is_representation() { 2 } else { 1 };
        if let Some(p) = params.iter().find(|&&p| p < min) {
            return Err(Error::Config(format!(
                "parameter {p} is below the minimum {min} for {method}"
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.delay_s >= 0.0 && self.delay_s.is_finite()) {
            return Err(Error::Config(format!(
                "delay must be a non-negative number of seconds, got {}",
                self.delay_s
            )));
        }
        if self.gt_samples == 0 {
            return Err(Error::Config("ground truth needs at least one sample".into()));
        }
        if method == Method::Grappa && self.grappa_k == 0 {
            return Err(Error::Config("grappa basis size must be at least 1".into()));
        }
        Ok(Experiment {
            app,
            method,
            params,
            repetitions: self.repetitions,
            seed: self.seed,
            out: self.out.clone(),
            delay_s: self.delay_s,
            gt_samples: self.gt_samples,
            grappa_k: self.grappa_k,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_with_defaults() {
        let cfg = ExperimentConfig::from_toml("app = \"poiseuille\"\nmethod = \"dirac-prop\"\n").unwrap();
        let exp = cfg.validate().unwrap();
        assert_eq!(exp.params, [16, 32, 64, 128, 256, 2048]);
        assert_eq!(exp.repetitions, 30);
        assert_eq!(exp.gt_samples, 1_000_000);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            "app = \"buffon\"\nmethod = \"dirac-prop\"\n",
            "app = \"poiseuille\"\nmethod = \"spot\"\n",
            "app = \"heat\"\nmethod = \"monte-carlo\"\n",
            "app = \"buffon\"\nmethod = \"monte-carlo\"\nrepetitions = 0\n",
            "app = \"buffon\"\nmethod = \"monte-carlo\"\nparams = [0]\n",
            "app = \"buffon\"\nmethod = \"monte-carlo\"\ndelay_s = -1.0\n",
        ];
        for text in bad {
            let err = ExperimentConfig::from_toml(text)
                .and_then(|c| c.validate())
                .unwrap_err();
            assert!(err.is_config(), "{text}: {err}");
        }
        assert!(ExperimentConfig::from_toml("app = \"buffon\"\nmethod = \"monte-carlo\"\ncolour = 1\n").is_err());
    }
}

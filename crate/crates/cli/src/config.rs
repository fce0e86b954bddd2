use std::path::{Path, PathBuf};

use ftflow_core::GaConfig;
use serde::Deserialize;

use crate::CliError;

/// Seed used when neither the command line nor a config file sets one.
pub const DEFAULT_SEED: u64 = 0;

/// Settings shared by the subcommands, read from a flat TOML file.
///
/// Every key is optional. Command-line flags take precedence over file values.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub catalog: Option<PathBuf>,
    pub objective: Option<String>,
    pub balance_weight: Option<f64>,
    pub tolerance: Option<f64>,
    pub streaming_ratio: Option<f64>,
    // Signed so that negative values are reported as validation errors
    // rather than type errors.
    pub population_size: Option<i64>,
    pub elite_k: Option<i64>,
    pub max_generations: Option<i64>,
    pub stagnation_limit: Option<i64>,
    pub crossover_rate: Option<f64>,
    pub mutation_rate: Option<f64>,
    pub beta: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            catalog: None,
            objective: None,
            balance_weight: None,
            tolerance: None,
            streaming_ratio: None,
            population_size: None,
            elite_k: None,
            max_generations: None,
            stagnation_limit: None,
            crossover_rate: None,
            mutation_rate: None,
            beta: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            CliError::Config {
                line,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let counts = [
            ("population_size", self.population_size),
            ("elite_k", self.elite_k),
            ("max_generations", self.max_generations),
            ("stagnation_limit", self.stagnation_limit),
        ];
        for (key, v) in counts {
            if let Some(v) = v.filter(|&v| v < 0) {
                return Err(CliError::Invalid(format!("{key} must be non-negative, got {v}")));
            }
        }
        if let Some(t) = self.tolerance.filter(|t| !(*t >= 0.0 && *t < 1.0)) {
            return Err(CliError::Invalid(format!("tolerance must lie in [0, 1), got {t}")));
        }
        self.ga_config(None, None)?;
        Ok(())
    }

    /// GA settings with file overrides applied, then the given flag values.
    pub fn ga_config(&self, seed: Option<u64>, beta: Option<f64>) -> Result<GaConfig, CliError> {
        let mut ga = GaConfig {
            seed: seed.unwrap_or(self.seed),
            ..GaConfig::default()
        };
        let count = |v: i64| v as usize;
        if let Some(v) = self.population_size {
            ga.population_size = count(v);
        }
        if let Some(v) = self.elite_k {
            ga.elite_k = count(v);
        }
        if let Some(v) = self.max_generations {
            ga.max_generations = count(v);
        }
        if let Some(v) = self.stagnation_limit {
            ga.stagnation_limit = count(v);
        }
        if let Some(v) = self.crossover_rate {
            ga.crossover_rate = v;
        }
        if let Some(v) = self.mutation_rate {
            ga.mutation_rate = v;
        }
        if let Some(v) = beta.or(self.beta) {
            ga.beta = v;
        }
        ga.validate()?;
        Ok(ga)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    RunConfig::parse(&text)
}

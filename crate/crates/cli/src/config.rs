//! Flat `key = value` configuration files and their merging with presets
//! and command-line flags.
//!
//! Resolution order for training runs: named preset defaults, then the
//! config file, then command-line flags. The fully resolved configuration
//! is logged before the run starts.

use std::collections::BTreeMap;
use std::path::Path;

use d2t_core::corpus::TokenMode;
use d2t_core::optim::OptimizerKind;
use d2t_core::seq2seq::{ModelConfig, TrainingSchedule};

use crate::error::{CliError, CliResult};

/// Every overridable training parameter; `None` means "keep the current
/// value".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub mode: Option<TokenMode>,
    pub embedding_dim: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub num_layers: Option<usize>,
    pub bidirectional: Option<bool>,
    pub dropout: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
    pub learning_rate: Option<f64>,
    pub max_epochs: Option<usize>,
    pub lr_halve_from_epoch: Option<usize>,
    pub clip_max_norm: Option<f64>,
    pub batch_size: Option<usize>,
}

impl Overrides {
    /// Apply onto a model/schedule pair, later wins.
    pub fn apply(&self, model: &mut ModelConfig, schedule: &mut TrainingSchedule) {
        if let Some(v) = self.mode {
            model.mode = v;
        }
        if let Some(v) = self.embedding_dim {
            model.embedding_dim = v;
        }
        if let Some(v) = self.hidden_dim {
            model.hidden_dim = v;
        }
        if let Some(v) = self.num_layers {
            model.num_layers = v;
        }
        if let Some(v) = self.bidirectional {
            model.bidirectional_encoder = v;
        }
        if let Some(v) = self.dropout {
            model.dropout_p = v;
        }
        if let Some(v) = self.optimizer {
            schedule.optimizer = v;
        }
        if let Some(v) = self.learning_rate {
            schedule.learning_rate = v;
        }
        if let Some(v) = self.max_epochs {
            schedule.max_epochs = v;
        }
        if let Some(v) = self.lr_halve_from_epoch {
            schedule.lr_halve_from_epoch = v;
        }
        if let Some(v) = self.clip_max_norm {
            schedule.clip_max_norm = v;
        }
        if let Some(v) = self.batch_size {
            schedule.batch_size = v;
        }
    }
}

/// A parsed flat config file: `key = value` lines, `#` comments, UTF-8.
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

const KNOWN_KEYS: [&str; 12] = [
    "mode",
    "embedding_dim",
    "hidden_dim",
    "num_layers",
    "bidirectional",
    "dropout",
    "optimizer",
    "learning_rate",
    "max_epochs",
    "lr_halve_from_epoch",
    "clip_max_norm",
    "batch_size",
];

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Core(d2t_core::error::Error::from(e)))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{origin}:{}: expected 'key = value', got {line:?}",
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "{origin}:{}: unknown config key {key:?} (known: {})",
                    idx + 1,
                    KNOWN_KEYS.join(", ")
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(CliError::usage(format!(
                    "{origin}:{}: duplicate config key {key:?}",
                    idx + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Convert the raw strings into typed overrides.
    pub fn overrides(&self) -> CliResult<Overrides> {
        let mut o = Overrides::default();
        for (key, value) in &self.entries {
            let bad = |what: &str| {
                CliError::usage(format!("config key {key} = {value:?}: expected {what}"))
            };
            match key.as_str() {
                "mode" => {
                    o.mode = Some(
                        TokenMode::from_str_opt(value).ok_or_else(|| bad("word or char"))?,
                    )
                }
                "embedding_dim" => o.embedding_dim = Some(value.parse().map_err(|_| bad("a positive integer"))?),
                "hidden_dim" => o.hidden_dim = Some(value.parse().map_err(|_| bad("a positive integer"))?),
                "num_layers" => o.num_layers = Some(value.parse().map_err(|_| bad("a positive integer"))?),
                "bidirectional" => {
                    o.bidirectional = Some(match value.as_str() {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => return Err(bad("true or false")),
                    })
                }
                "dropout" => o.dropout = Some(value.parse().map_err(|_| bad("a number"))?),
                "optimizer" => {
                    o.optimizer = Some(match value.to_ascii_lowercase().as_str() {
                        "sgd" => OptimizerKind::Sgd,
                        "adam" => OptimizerKind::Adam,
                        _ => return Err(bad("sgd or adam")),
                    })
                }
                "learning_rate" => o.learning_rate = Some(value.parse().map_err(|_| bad("a number"))?),
                "max_epochs" => o.max_epochs = Some(value.parse().map_err(|_| bad("a positive integer"))?),
                "lr_halve_from_epoch" => o.lr_halve_from_epoch = Some(value.parse().map_err(|_| bad("a positive integer"))?),
                "clip_max_norm" => o.clip_max_norm = Some(value.parse().map_err(|_| bad("a number"))?),
                "batch_size" => o.batch_size = Some(value.parse().map_err(|_| bad("a positive integer"))?),
                _ => unreachable!("keys validated at parse time"),
            }
        }
        Ok(o)
    }
}

/// Render the fully resolved configuration for the run log.
pub fn describe(model: &ModelConfig, schedule: &TrainingSchedule, seed: u64) -> String {
    let optimizer = match schedule.optimizer {
        OptimizerKind::Sgd => "sgd",
        OptimizerKind::Adam => "adam",
    };
    [
        format!("  mode = {}", model.mode.as_str()),
        format!("  embedding_dim = {}", model.embedding_dim),
        format!("  hidden_dim = {}", model.hidden_dim),
        format!("  num_layers = {}", model.num_layers),
        format!("  bidirectional = {}", model.bidirectional_encoder),
        format!("  dropout = {}", model.dropout_p),
        format!("  optimizer = {optimizer}"),
        format!("  learning_rate = {}", schedule.learning_rate),
        format!("  max_epochs = {}", schedule.max_epochs),
        format!("  lr_halve_from_epoch = {}", schedule.lr_halve_from_epoch),
        format!("  clip_max_norm = {}", schedule.clip_max_norm),
        format!("  batch_size = {}", schedule.batch_size),
        format!("  seed = {seed}"),
    ]
    .join("\n")
}

//! Model and training configuration, with the named default presets.

use crate::corpus::tokenize::TokenMode;
use crate::error::{Error, Result};
use crate::optim::OptimizerKind;

/// Architecture of one encoder-decoder model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub mode: TokenMode,
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    /// 1 or 2 stacked LSTM layers on each side.
    pub num_layers: usize,
    pub bidirectional_encoder: bool,
    /// Dropout probability applied to context vectors during training.
    pub dropout_p: f64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::contract(format!(
                "dimensions must be positive: E={}, H={}",
                self.embedding_dim, self.hidden_dim
            )));
        }
        if !(1..=2).contains(&self.num_layers) {
            return Err(Error::contract(format!(
                "num_layers must be 1 or 2, got {}",
                self.num_layers
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::contract(format!(
                "dropout_p must be in [0,1), got {}",
                self.dropout_p
            )));
        }
        Ok(())
    }
}

/// Optimization recipe: optimizer, epoch budget, learning-rate halving,
/// clipping, and batching.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingSchedule {
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// The learning rate halves unconditionally at the end of every epoch
    /// `>= lr_halve_from_epoch` (1-based), and at the end of any epoch whose
    /// dev perplexity did not improve on the best seen so far.
    pub lr_halve_from_epoch: usize,
    pub clip_max_norm: f64,
    pub batch_size: usize,
}

impl TrainingSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 || self.clip_max_norm <= 0.0 {
            return Err(Error::contract(format!(
                "learning rate and clip norm must be positive: lr={}, clip={}",
                self.learning_rate, self.clip_max_norm
            )));
        }
        if self.max_epochs == 0 || self.batch_size == 0 {
            return Err(Error::contract(format!(
                "epochs and batch size must be positive: epochs={}, batch={}",
                self.max_epochs, self.batch_size
            )));
        }
        Ok(())
    }
}

/// A named default configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub key: &'static str,
    pub model: ModelConfig,
    pub schedule: TrainingSchedule,
    pub beam_size: usize,
}

pub const PRESET_KEYS: [&str; 7] = [
    "e2e-word",
    "e2e-char",
    "webnlg-word",
    "webnlg-char",
    "template-t1",
    "template-t2",
    "template-t1t2",
];

/// Look up a named preset; `None` for unknown keys.
pub fn preset(key: &str) -> Option<Preset> {
    let dataset_schedule = |optimizer, learning_rate| TrainingSchedule {
        optimizer,
        learning_rate,
        max_epochs: 13,
        lr_halve_from_epoch: 8,
        clip_max_norm: 5.0,
        batch_size: 64,
    };
    let template_schedule = |optimizer, learning_rate, max_epochs, batch_size| TrainingSchedule {
        optimizer,
        learning_rate,
        max_epochs,
        lr_halve_from_epoch: 8,
        clip_max_norm: 2.0,
        batch_size,
    };
    let big = |mode, bidirectional_encoder, dropout_p| ModelConfig {
        mode,
        embedding_dim: 500,
        hidden_dim: 500,
        num_layers: 2,
        bidirectional_encoder,
        dropout_p,
    };
    let template = |embedding_dim, bidirectional_encoder, dropout_p| ModelConfig {
        mode: TokenMode::Word,
        embedding_dim,
        hidden_dim: 64,
        num_layers: 1,
        bidirectional_encoder,
        dropout_p,
    };

    let p = match key {
        "e2e-word" => Preset {
            key: "e2e-word",
            model: ModelConfig {
                mode: TokenMode::Word,
                embedding_dim: 64,
                hidden_dim: 64,
                num_layers: 1,
                bidirectional_encoder: false,
                dropout_p: 0.3,
            },
            schedule: dataset_schedule(OptimizerKind::Sgd, 1.0),
            beam_size: 15,
        },
        "e2e-char" => Preset {
            key: "e2e-char",
            model: big(TokenMode::Char, true, 0.3),
            schedule: dataset_schedule(OptimizerKind::Adam, 0.001),
            beam_size: 5,
        },
        "webnlg-word" => Preset {
            key: "webnlg-word",
            model: big(TokenMode::Word, false, 0.3),
            schedule: dataset_schedule(OptimizerKind::Adam, 0.001),
            beam_size: 15,
        },
        "webnlg-char" => Preset {
            key: "webnlg-char",
            model: big(TokenMode::Char, true, 0.3),
            schedule: dataset_schedule(OptimizerKind::Adam, 0.001),
            beam_size: 5,
        },
        "template-t1" => Preset {
            key: "template-t1",
            model: template(28, false, 0.4),
            schedule: template_schedule(OptimizerKind::Adam, 0.001, 25, 4),
            beam_size: 30,
        },
        "template-t2" => Preset {
            key: "template-t2",
            model: template(28, false, 0.5),
            schedule: template_schedule(OptimizerKind::Sgd, 1.0, 13, 4),
            beam_size: 30,
        },
        "template-t1t2" => Preset {
            key: "template-t1t2",
            model: template(30, true, 0.3),
            schedule: template_schedule(OptimizerKind::Sgd, 1.0, 15, 16),
            beam_size: 30,
        },
        _ => return None,
    };
    Some(p)
}

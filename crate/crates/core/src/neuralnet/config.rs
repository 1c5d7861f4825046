use serde::{Deserialize, Serialize};

use super::lstm::Nonlinearity;
use crate::error::NetError;

/// How the declaration triple is produced from one `ID` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputMode {
    /// Three softmax heads on a shared LSTM trunk, one per target code.
    #[default]
    ThreeHead,
    /// One softmax head trained on `ID→Decl`, `Decl→TypeDecl` and
    /// `TypeDecl→IdentifierType`; prediction follows the chain.
    Chained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub embedding_dim: usize,
    pub hidden_units: usize,
    pub num_lstm_layers: usize,
    pub dropout: f64,
    pub seq_len: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub split_fraction: f64,
    pub epochs: usize,
    pub rng_seed: u64,
    pub candidate_nonlinearity: Nonlinearity,
    pub output_mode: OutputMode,
}

pub const RMSPROP_RHO: f64 = 0.9;
pub const RMSPROP_EPS: f64 = 1e-8;

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embedding_dim: 512,
            hidden_units: 512,
            num_lstm_layers: 2,
            dropout: 0.5,
            seq_len: 1,
            batch_size: 3,
            learning_rate: 0.01,
            split_fraction: 0.8,
            epochs: 100,
            rng_seed: 0,
            candidate_nonlinearity: Nonlinearity::Sigmoid,
            output_mode: OutputMode::ThreeHead,
        }
    }
}

impl ModelConfig {
    /// 512 embedding and hidden units; same as `default()`.
    pub fn full_size() -> Self {
        Self::default()
    }

    /// Same hyperparameters at 64 units, small enough to train in seconds.
    pub fn desk() -> Self {
        ModelConfig {
            embedding_dim: 64,
            hidden_units: 64,
            epochs: 2000,
            ..Self::default()
        }
    }

    pub fn heads(&self) -> usize {
        match self.output_mode {
            OutputMode::ThreeHead => 3,
            OutputMode::Chained => 1,
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let positive = [
            ("embedding_dim", self.embedding_dim),
            ("hidden_units", self.hidden_units),
            ("num_lstm_layers", self.num_lstm_layers),
            ("seq_len", self.seq_len),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(NetError::Config(format!("{name} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(NetError::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NetError::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction <= 1.0) {
            return Err(NetError::Config(format!("split fraction {} outside (0, 1]", self.split_fraction)));
        }
        Ok(())
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autoencoder::mlp::{MlpParams, MlpSpec};
use crate::autoencoder::objective::Autoencoder;
use crate::autoencoder::optim::OptimizerState;
use crate::autoencoder::train::{TrainConfig, TrainState};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Single-document model snapshot: architecture, flattened parameters,
/// optimizer moments and the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub encoder_spec: MlpSpec,
    pub decoder_spec: MlpSpec,
    pub encoder_params: Vec<f64>,
    pub decoder_params: Vec<f64>,
    /// Absent for best-on-validation snapshots.
    pub optimizer: Option<OptimizerState>,
    pub iteration: usize,
    pub config: TrainConfig,
}

impl Checkpoint {
    pub fn from_model(model: &Autoencoder, iteration: usize, config: &TrainConfig) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            encoder_spec: model.encoder_spec.clone(),
            decoder_spec: model.decoder_spec.clone(),
            encoder_params: model.encoder.to_flat(),
            decoder_params: model.decoder.to_flat(),
            optimizer: None,
            iteration,
            config: config.clone(),
        }
    }

    pub fn from_state(state: &TrainState, config: &TrainConfig) -> Self {
        Self {
            optimizer: Some(state.optimizer.clone()),
            ..Self::from_model(&state.model, state.iteration, config)
        }
    }

    pub fn model(&self) -> Result<Autoencoder> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "checkpoint format {} is not supported (expected {})",
                self.format_version, CHECKPOINT_FORMAT_VERSION
            )));
        }
        let encoder = MlpParams::from_flat(&self.encoder_spec, &self.encoder_params)?;
        let decoder = MlpParams::from_flat(&self.decoder_spec, &self.decoder_params)?;
        if let Some(opt) = &self.optimizer {
            let n = self.encoder_params.len() + self.decoder_params.len();
            if opt.first_moment.len() != n || opt.second_moment.len() != n {
                return Err(Error::Dimension("optimizer moments do not match parameters".into()));
            }
        }
        Ok(Autoencoder {
            encoder_spec: self.encoder_spec.clone(),
            decoder_spec: self.decoder_spec.clone(),
            encoder,
            decoder,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::mlp::Activation;
    use crate::math::Rng;

    #[test]
    fn json_round_trip_is_exact() {
        let enc = MlpSpec::uniform(vec![5, 7, 2], Activation::Tanh).unwrap();
        let model = Autoencoder::new(enc.clone(), enc.mirrored(), &mut Rng::seed_from(1)).unwrap();
        let mut state = TrainState::new(model);
        state.optimizer.first_moment[3] = 0.1 + 0.2;
        let cfg = TrainConfig::default();
        let ck = Checkpoint::from_state(&state, &cfg);
        let back: Checkpoint = serde_json::from_str(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.model().unwrap(), state.model);
    }

    #[test]
    fn rejects_mismatched_parameters() {
        let enc = MlpSpec::uniform(vec![3, 2], Activation::Tanh).unwrap();
        let model = Autoencoder::new(enc.clone(), enc.mirrored(), &mut Rng::seed_from(1)).unwrap();
        let mut ck = Checkpoint::from_model(&model, 0, &TrainConfig::default());
        ck.encoder_params.pop();
        assert!(ck.model().is_err());
        ck.format_version = 99;
        assert!(ck.model().is_err());
    }
}

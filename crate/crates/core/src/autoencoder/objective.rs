use serde::{Deserialize, Serialize};

use crate::autoencoder::mlp::{backward, forward, forward_traced, MlpParams, MlpSpec};
use crate::error::{Error, Result};
use crate::independence::{
    cramer_wold_dist_sq, cramer_wold_dist_sq_with_grad, dcor_pairwise, dcor_pairwise_sum_with_grad,
    CwParams, Reduce, ShiftIndices, ShiftMode, ZeroDistance,
};
use crate::math::{
    standardize_columns, standardize_columns_backward, standardize_columns_with_stats, Matrix, Rng,
};

/// Encoder/decoder pair. The encoder's output width is the number of
/// recovered sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    pub encoder_spec: MlpSpec,
    pub decoder_spec: MlpSpec,
    pub encoder: MlpParams,
    pub decoder: MlpParams,
}

impl Autoencoder {
    pub fn new(encoder_spec: MlpSpec, decoder_spec: MlpSpec, rng: &mut Rng) -> Result<Self> {
        if encoder_spec.output_size() != decoder_spec.input_size()
            || decoder_spec.output_size() != encoder_spec.input_size()
        {
            return Err(Error::Config(format!(
                "encoder {:?} and decoder {:?} do not compose",
                encoder_spec.layer_sizes(),
                decoder_spec.layer_sizes()
            )));
        }
        let encoder = MlpParams::init(&encoder_spec, rng);
        let decoder = MlpParams::init(&decoder_spec, rng);
        Ok(Self {
            encoder_spec,
            decoder_spec,
            encoder,
            decoder,
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder_spec.output_size()
    }

    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        encode(&self.encoder, &self.encoder_spec, x)
    }

    pub fn decode(&self, z: &Matrix) -> Result<Matrix> {
        forward(&self.decoder, &self.decoder_spec, z)
    }

    pub fn reconstruct(&self, x: &Matrix) -> Result<Matrix> {
        self.decode(&self.encode(x)?)
    }

    pub fn num_params(&self) -> usize {
        self.encoder.num_params() + self.decoder.num_params()
    }

    /// Encoder parameters followed by decoder parameters.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.encoder.values().chain(self.decoder.values())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.encoder.values_mut().chain(self.decoder.values_mut())
    }
}

pub fn encode(params: &MlpParams, spec: &MlpSpec, x: &Matrix) -> Result<Matrix> {
    forward(params, spec, x)
}

/// `Σ_i ‖x_i − x̂_i‖²`.
pub fn rec_error(x: &Matrix, xhat: &Matrix) -> Result<f64> {
    x.ensure_same_shape(xhat)?;
    Ok(x
        .as_slice()
        .iter()
        .zip(xhat.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Cramer-Wold independence index × reconstruction error.
    #[default]
    Cw,
    /// Summed pairwise dCor of the normalized latents × reconstruction error.
    Dcor,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cw" => Ok(Self::Cw),
            "dcor" => Ok(Self::Dcor),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParts {
    pub cost: f64,
    pub indep: f64,
    pub rec: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub encoder: MlpParams,
    pub decoder: MlpParams,
}

impl Gradients {
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.encoder.values().chain(self.decoder.values())
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }
}

/// The training objective `independence term × rec_error`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: LossKind,
    /// Scales Silverman's bandwidth for the batch size.
    pub bandwidth_multiplier: f64,
    pub shift_mode: ShiftMode,
    /// Treat the shifted sample as a constant (stop-gradient ablation).
    pub detach_shift: bool,
    pub zero_distance: ZeroDistance,
}

impl Default for Objective {
    fn default() -> Self {
        Self {
            kind: LossKind::Cw,
            bandwidth_multiplier: 1.0,
            shift_mode: ShiftMode::Replacement,
            detach_shift: false,
            zero_distance: ZeroDistance::Continuous,
        }
    }
}

impl Objective {
    pub fn cw_params(&self, n: usize, latent_dim: usize) -> Result<CwParams> {
        Ok(CwParams::silverman(n, latent_dim, self.bandwidth_multiplier)?
            .with_zero_distance(self.zero_distance))
    }

    /// Draws the shift indices for one evaluation (none for the dCor loss).
    pub fn draw_shift(&self, n: usize, latent_dim: usize, rng: &mut Rng) -> Result<Option<ShiftIndices>> {
        match self.kind {
            LossKind::Cw => ShiftIndices::draw(n, latent_dim, self.shift_mode, rng).map(Some),
            LossKind::Dcor => Ok(None),
        }
    }

    fn require_shift<'a>(&self, shift: Option<&'a ShiftIndices>) -> Result<&'a ShiftIndices> {
        shift.ok_or_else(|| Error::Config("the Cramer-Wold loss needs shift indices".into()))
    }

    /// Cost with the shift draw held fixed.
    pub fn cost_with_shift(
        &self,
        model: &Autoencoder,
        x: &Matrix,
        shift: Option<&ShiftIndices>,
    ) -> Result<CostParts> {
        let z = model.encode(x)?;
        let xhat = model.decode(&z)?;
        let rec = rec_error(x, &xhat)?;
        let indep = match self.kind {
            LossKind::Cw => {
                let shifted = self.require_shift(shift)?.apply(&z)?;
                let normalized = standardize_columns(&shifted)?;
                cramer_wold_dist_sq(&z, &normalized, &self.cw_params(x.rows(), z.cols())?)?
            }
            LossKind::Dcor => dcor_pairwise(&standardize_columns(&z)?, Reduce::Sum)?,
        };
        Ok(CostParts {
            cost: indep * rec,
            indep,
            rec,
        })
    }

    /// Cost and exact gradient with the shift draw held fixed.
    ///
    /// For the Cramer-Wold loss the gradient flows through both arguments
    /// of the distance: directly through `Z`, and through the normalized
    /// shifted copy back onto the rows each entry was drawn from (including
    /// the normalization's mean and standard deviation).
    pub fn grad_with_shift(
        &self,
        model: &Autoencoder,
        x: &Matrix,
        shift: Option<&ShiftIndices>,
    ) -> Result<(CostParts, Gradients)> {
        let enc_trace = forward_traced(&model.encoder, &model.encoder_spec, x)?;
        let z = enc_trace.output().clone();
        let dec_trace = forward_traced(&model.decoder, &model.decoder_spec, &z)?;
        let xhat = dec_trace.output();
        let rec = rec_error(x, xhat)?;

        let (indep, grad_indep) = match self.kind {
            LossKind::Cw => {
                let idx = self.require_shift(shift)?;
                let shifted = idx.apply(&z)?;
                let (normalized, stats) = standardize_columns_with_stats(&shifted)?;
                let p = self.cw_params(x.rows(), z.cols())?;
                let (value, mut gz, g_norm) = cramer_wold_dist_sq_with_grad(&z, &normalized, &p)?;
                if !self.detach_shift {
                    let g_shifted = standardize_columns_backward(&normalized, &stats, &g_norm);
                    idx.scatter_add(&g_shifted, &mut gz);
                }
                (value, gz)
            }
            LossKind::Dcor => {
                let (normalized, stats) = standardize_columns_with_stats(&z)?;
                let (value, g_norm) = dcor_pairwise_sum_with_grad(&normalized)?;
                (value, standardize_columns_backward(&normalized, &stats, &g_norm))
            }
        };

        // d(indep · rec)/dx̂ = indep · 2(x̂ − x)
        let g_xhat = xhat.zip_with(x, |a, b| 2.0 * indep * (a - b))?;
        let (g_decoder, g_z_rec) = backward(&model.decoder, &model.decoder_spec, &dec_trace, &g_xhat);
        let g_z = grad_indep.zip_with(&g_z_rec, |gi, gr| rec * gi + gr)?;
        let (g_encoder, _) = backward(&model.encoder, &model.encoder_spec, &enc_trace, &g_z);

        Ok((
            CostParts {
                cost: indep * rec,
                indep,
                rec,
            },
            Gradients {
                encoder: g_encoder,
                decoder: g_decoder,
            },
        ))
    }
}

/// Objective on a batch with a fresh shift draw from `rng`.
pub fn total_cost(x: &Matrix, model: &Autoencoder, obj: &Objective, rng: &mut Rng) -> Result<CostParts> {
    let shift = obj.draw_shift(x.rows(), model.latent_dim(), rng)?;
    obj.cost_with_shift(model, x, shift.as_ref())
}

/// Gradient of [`total_cost`]; consumes the same draws from `rng`.
pub fn grad_total_cost(
    x: &Matrix,
    model: &Autoencoder,
    obj: &Objective,
    rng: &mut Rng,
) -> Result<(CostParts, Gradients)> {
    let shift = obj.draw_shift(x.rows(), model.latent_dim(), rng)?;
    obj.grad_with_shift(model, x, shift.as_ref())
}

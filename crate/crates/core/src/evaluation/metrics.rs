use serde::{Deserialize, Serialize};

use crate::autoencoder::rec_error;
use crate::error::{Error, Result};
use crate::evaluation::assignment::{assignment_total, max_assignment};
use crate::independence::{dcor_pairwise, Reduce};
use crate::math::{pearson_corr, standardize_columns, Matrix};

fn abs_corr_matrix(y: &Matrix, z: &Matrix) -> Result<Vec<Vec<f64>>> {
    if y.cols() != z.cols() {
        return Err(Error::Dimension(format!(
            "{} sources but {} recovered signals",
            y.cols(),
            z.cols()
        )));
    }
    if y.rows() != z.rows() {
        return Err(Error::Dimension(format!(
            "sources have {} rows, recovered signals {}",
            y.rows(),
            z.rows()
        )));
    }
    let ys: Vec<Vec<f64>> = (0..y.cols()).map(|j| y.column(j)).collect();
    let zs: Vec<Vec<f64>> = (0..z.cols()).map(|j| z.column(j)).collect();
    ys.iter()
        .map(|a| {
            zs.iter()
                .map(|b| pearson_corr(a, b).map(f64::abs))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Mean absolute correlation between sources and recovered signals under the
/// one-to-one matching that maximizes it.
pub fn max_corr(y: &Matrix, z: &Matrix) -> Result<f64> {
    let c = abs_corr_matrix(y, z)?;
    let a = max_assignment(&c);
    Ok(assignment_total(&c, &a) / c.len() as f64)
}

/// Diagnostic: mean over sources of the best absolute correlation with any
/// recovered signal, without one-to-one matching.
pub fn unmatched_max_corr(y: &Matrix, z: &Matrix) -> Result<f64> {
    let c = abs_corr_matrix(y, z)?;
    Ok(c.iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .sum::<f64>()
        / c.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentMetrics {
    pub max_corr: Option<f64>,
    pub unmatched_max_corr: Option<f64>,
    /// Mean pairwise dCor of the standardized latents.
    pub dcor: f64,
    /// Per-entry reconstruction error `rec_error / (n·D)`.
    pub mse: Option<f64>,
}

/// Metrics for recovered signals `z`. Correlations need the true sources;
/// MSE needs `(x, x̂)`.
pub fn eval_latents(
    sources: Option<&Matrix>,
    z: &Matrix,
    reconstruction: Option<(&Matrix, &Matrix)>,
) -> Result<LatentMetrics> {
    let dcor = dcor_pairwise(&standardize_columns(z)?, Reduce::Mean)?;
    let (max_corr, unmatched) = match sources {
        Some(y) => (Some(self::max_corr(y, z)?), Some(unmatched_max_corr(y, z)?)),
        None => (None, None),
    };
    let mse = match reconstruction {
        Some((x, xhat)) => Some(rec_error(x, xhat)? / (x.rows() * x.cols()) as f64),
        None => None,
    };
    Ok(LatentMetrics {
        max_corr,
        unmatched_max_corr: unmatched,
        dcor,
        mse,
    })
}

//! Independence measures on a sample matrix: the Cramer-Wold distance, the
//! column-shift resampling that turns it into an independence index, and
//! pairwise distance correlation.

mod cw;
mod dcor;
mod shift;

pub use cw::{
    cramer_wold_dist_sq, cramer_wold_dist_sq_with_grad, phi_d, silverman_gamma, CwParams,
    ZeroDistance,
};
pub use dcor::{dcor, dcor_pairwise, dcor_pairwise_sum_with_grad, pairwise_values, Reduce, DVAR_EPS};
pub use shift::{resample_shift, resample_shift_with, ShiftIndices, ShiftMode, ShiftSample};

use crate::error::Result;
use crate::math::{standardize_columns, Matrix, Rng};

/// `d²_cw(Z, cn(Z_shift))` with a fresh with-replacement shift draw.
pub fn independence_index(z: &Matrix, p: &CwParams, rng: &mut Rng) -> Result<f64> {
    independence_index_with(z, p, ShiftMode::Replacement, rng)
}

pub fn independence_index_with(
    z: &Matrix,
    p: &CwParams,
    mode: ShiftMode,
    rng: &mut Rng,
) -> Result<f64> {
    let shift = resample_shift_with(z, mode, rng)?;
    let normalized = standardize_columns(&shift.shifted)?;
    cramer_wold_dist_sq(z, &normalized, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_sample_has_zero_index() {
        let z = Matrix::zeros(2, 1);
        let p = CwParams::new(1.0, 1).unwrap();
        assert_eq!(independence_index(&z, &p, &mut Rng::seed_from(0)).unwrap(), 0.0);
    }
}

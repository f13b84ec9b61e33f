//! Numeric primitives shared by the rest of the crate.

pub mod csv;
mod matrix;
mod rng;
mod stats;

pub use matrix::Matrix;
pub use rng::Rng;
pub(crate) use stats::sq_dist;
pub use stats::{
    column_stats, pairwise_sq_dists, pearson_corr, standardize_columns,
    standardize_columns_backward, standardize_columns_with_stats, ColumnStats, STD_EPS,
};

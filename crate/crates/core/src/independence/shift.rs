use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Matrix, Rng};

/// How each column's rows are redrawn when building the shifted sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMode {
    /// Independent uniform row draw per entry (maps, not bijections).
    #[default]
    Replacement,
    /// One random permutation of the rows per column.
    Permutation,
}

impl std::str::FromStr for ShiftMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replacement" => Ok(Self::Replacement),
            "permutation" => Ok(Self::Permutation),
            other => Err(Error::Config(format!("unknown shift mode {other:?}"))),
        }
    }
}

/// Row indices chosen for every entry of a shifted sample, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftIndices {
    rows: usize,
    cols: usize,
    source_rows: Vec<usize>,
}

impl ShiftIndices {
    /// Draws indices for an `rows × cols` sample. In replacement mode the
    /// draws run row by row, column by column.
    pub fn draw(rows: usize, cols: usize, mode: ShiftMode, rng: &mut Rng) -> Result<Self> {
        if rows < 2 {
            return Err(Error::Dimension(format!(
                "shift resampling needs at least 2 rows, got {rows}"
            )));
        }
        let source_rows = match mode {
            ShiftMode::Replacement => (0..rows * cols).map(|_| rng.index(rows)).collect(),
            ShiftMode::Permutation => {
                let mut idx = vec![0; rows * cols];
                for j in 0..cols {
                    for (i, r) in rng.permutation(rows).into_iter().enumerate() {
                        idx[i * cols + j] = r;
                    }
                }
                idx
            }
        };
        Ok(Self {
            rows,
            cols,
            source_rows,
        })
    }

    #[inline]
    pub fn source_row(&self, i: usize, j: usize) -> usize {
        self.source_rows[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.source_rows
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// `out[i][j] = z[source_row(i, j)][j]`.
    pub fn apply(&self, z: &Matrix) -> Result<Matrix> {
        if z.shape() != self.shape() {
            return Err(Error::Dimension(format!(
                "indices drawn for {}x{}, matrix is {}x{}",
                self.rows,
                self.cols,
                z.rows(),
                z.cols()
            )));
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            z.get(self.source_row(i, j), j)
        }))
    }

    /// Adjoint of [`apply`](Self::apply): scatters a gradient on the shifted
    /// sample back onto the rows it was drawn from.
    pub fn scatter_add(&self, grad_shifted: &Matrix, into: &mut Matrix) {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let r = self.source_row(i, j);
                let v = into.get(r, j) + grad_shifted.get(i, j);
                into.set(r, j, v);
            }
        }
    }
}

/// A column-resampled copy of a sample: every column keeps its marginal
/// values while the joint structure across columns is broken.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftSample {
    pub shifted: Matrix,
    pub source_indices: ShiftIndices,
}

pub fn resample_shift(z: &Matrix, rng: &mut Rng) -> Result<ShiftSample> {
    resample_shift_with(z, ShiftMode::Replacement, rng)
}

pub fn resample_shift_with(z: &Matrix, mode: ShiftMode, rng: &mut Rng) -> Result<ShiftSample> {
    let source_indices = ShiftIndices::draw(z.rows(), z.cols(), mode, rng)?;
    let shifted = source_indices.apply(z)?;
    Ok(ShiftSample {
        shifted,
        source_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rng: &mut Rng) -> Matrix {
        Matrix::from_fn(20, 3, |i, j| if j == 1 { 7.5 } else { (i * 3 + j) as f64 + rng.uniform() })
    }

    #[test]
    fn constant_column_stays_constant() {
        let mut rng = Rng::seed_from(1);
        let z = sample(&mut rng);
        let s = resample_shift(&z, &mut rng).unwrap();
        assert!(s.shifted.column(1).iter().all(|&v| v == 7.5));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let z = sample(&mut Rng::seed_from(2));
        let a = resample_shift(&z, &mut Rng::seed_from(9)).unwrap();
        let b = resample_shift(&z, &mut Rng::seed_from(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entries_come_from_their_own_column() {
        let z = sample(&mut Rng::seed_from(3));
        for mode in [ShiftMode::Replacement, ShiftMode::Permutation] {
            let s = resample_shift_with(&z, mode, &mut Rng::seed_from(4)).unwrap();
            for j in 0..z.cols() {
                let pool = z.column(j);
                for i in 0..z.rows() {
                    let v = s.shifted.get(i, j);
                    assert!(pool.contains(&v));
                    assert_eq!(v, z.get(s.source_indices.source_row(i, j), j));
                }
            }
        }
    }

    #[test]
    fn permutation_mode_preserves_multisets() {
        let z = sample(&mut Rng::seed_from(5));
        let s = resample_shift_with(&z, ShiftMode::Permutation, &mut Rng::seed_from(6)).unwrap();
        for j in 0..z.cols() {
            let mut a = z.column(j);
            let mut b = s.shifted.column(j);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn needs_two_rows() {
        let z = Matrix::zeros(1, 2);
        assert!(resample_shift(&z, &mut Rng::seed_from(0)).is_err());
    }
}

use crate::error::{Error, Result};
use crate::math::Matrix;

/// Columns whose population standard deviation falls below this are treated
/// as constant.
pub const STD_EPS: f64 = 1e-12;

/// Per-column statistics captured by [`standardize_columns_with_stats`],
/// needed to back-propagate through the normalization.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    /// Population standard deviations (divisor n).
    pub stds: Vec<f64>,
}

impl ColumnStats {
    pub fn is_degenerate(&self, j: usize) -> bool {
        self.stds[j] < STD_EPS
    }

    /// Applies these statistics to another matrix with the same columns.
    /// Degenerate columns map to zero.
    pub fn apply(&self, m: &Matrix) -> Result<Matrix> {
        if m.cols() != self.means.len() {
            return Err(Error::Dimension(format!(
                "statistics cover {} columns, matrix has {}",
                self.means.len(),
                m.cols()
            )));
        }
        Ok(Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            if self.is_degenerate(j) {
                0.0
            } else {
                (m.get(i, j) - self.means[j]) / self.stds[j]
            }
        }))
    }
}

/// Column means and population standard deviations.
pub fn column_stats(m: &Matrix) -> ColumnStats {
    let means = m.column_means();
    let mut var = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        for ((v, x), mu) in var.iter_mut().zip(m.row(i)).zip(&means) {
            let d = x - mu;
            *v += d * d;
        }
    }
    let n = m.rows() as f64;
    let stds = var.iter().map(|v| (v / n).sqrt()).collect();
    ColumnStats { means, stds }
}

/// Componentwise normalization: every column shifted to mean 0 and scaled to
/// unit population standard deviation. Constant columns become zeros.
pub fn standardize_columns(m: &Matrix) -> Result<Matrix> {
    standardize_columns_with_stats(m).map(|(z, _)| z)
}

pub fn standardize_columns_with_stats(m: &Matrix) -> Result<(Matrix, ColumnStats)> {
    if m.rows() < 2 {
        return Err(Error::Dimension(format!(
            "standardization needs at least 2 rows, got {}",
            m.rows()
        )));
    }
    let stats = column_stats(m);
    let z = stats.apply(m)?;
    Ok((z, stats))
}

/// Back-propagates `grad_out` (gradient w.r.t. the standardized matrix) to
/// the input of [`standardize_columns_with_stats`].
pub fn standardize_columns_backward(
    standardized: &Matrix,
    stats: &ColumnStats,
    grad_out: &Matrix,
) -> Matrix {
    let (n, d) = standardized.shape();
    let nf = n as f64;
    let mut g_mean = vec![0.0; d];
    let mut gy_mean = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            let g = grad_out.get(i, j);
            g_mean[j] += g;
            gy_mean[j] += g * standardized.get(i, j);
        }
    }
    for j in 0..d {
        g_mean[j] /= nf;
        gy_mean[j] /= nf;
    }
    Matrix::from_fn(n, d, |i, j| {
        if stats.is_degenerate(j) {
            0.0
        } else {
            (grad_out.get(i, j) - g_mean[j] - standardized.get(i, j) * gy_mean[j]) / stats.stds[j]
        }
    })
}

/// `out[i][j] = ‖x_i − y_j‖²`.
pub fn pairwise_sq_dists(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    if x.cols() != y.cols() {
        return Err(Error::Dimension(format!(
            "points have {} and {} coordinates",
            x.cols(),
            y.cols()
        )));
    }
    Ok(Matrix::from_fn(x.rows(), y.rows(), |i, j| {
        sq_dist(x.row(i), y.row(j))
    }))
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| {
            let d = u - v;
            d * d
        })
        .sum()
}

/// Pearson product-moment correlation. Returns 0 when either input is
/// constant.
pub fn pearson_corr(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "vectors have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Dimension("correlation needs at least 2 samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    let sx = (sxx / n).sqrt();
    let sy = (syy / n).sqrt();
    if sx < STD_EPS || sy < STD_EPS {
        return Ok(0.0);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> Matrix {
        Matrix::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize_columns(&col(&[1.0, -1.0])).unwrap().as_slice(), &[1.0, -1.0]);
        assert_eq!(
            standardize_columns(&col(&[5.0, 5.0, 5.0])).unwrap().as_slice(),
            &[0.0, 0.0, 0.0]
        );
        // (x - 2) / sqrt(8/3), computed with mpmath at 50 digits.
        let z = standardize_columns(&col(&[0.0, 2.0, 4.0])).unwrap();
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!(standardize_columns(&col(&[1.0])).is_err());
    }

    #[test]
    fn sq_dist_examples() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let d = pairwise_sq_dists(&x, &x).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 25.0, 25.0, 0.0]);
        let one = col(&[1.0]);
        assert_eq!(pairwise_sq_dists(&one, &one).unwrap().as_slice(), &[0.0]);
        let y = Matrix::zeros(2, 3);
        assert!(matches!(pairwise_sq_dists(&x, &y), Err(Error::Dimension(_))));
    }

    #[test]
    fn sq_dist_matches_loop_oracle() {
        let mut rng = crate::math::Rng::seed_from(11);
        let x = Matrix::from_fn(4, 3, |_, _| rng.normal());
        let y = Matrix::from_fn(5, 3, |_, _| rng.normal());
        let d = pairwise_sq_dists(&x, &y).unwrap();
        for i in 0..4 {
            for j in 0..5 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += (x.get(i, k) - y.get(j, k)) * (x.get(i, k) - y.get(j, k));
                }
                assert!((d.get(i, j) - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson_corr(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_corr(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson_corr(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert!(matches!(pearson_corr(&[1.0, 2.0], &[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn standardize_backward_matches_finite_differences() {
        let mut rng = crate::math::Rng::seed_from(2);
        let m = Matrix::from_fn(6, 2, |_, _| rng.normal());
        let w = Matrix::from_fn(6, 2, |_, _| rng.normal());
        let loss = |m: &Matrix| -> f64 {
            let z = standardize_columns(m).unwrap();
            z.as_slice().iter().zip(w.as_slice()).map(|(a, b)| a * b * a).sum()
        };
        let (z, stats) = standardize_columns_with_stats(&m).unwrap();
        let g_out = z.zip_with(&w, |a, b| 2.0 * a * b).unwrap();
        let g = standardize_columns_backward(&z, &stats, &g_out);
        let h = 1e-6;
        for k in 0..12 {
            let mut p = m.clone();
            p.as_mut_slice()[k] += h;
            let mut q = m.clone();
            q.as_mut_slice()[k] -= h;
            let fd = (loss(&p) - loss(&q)) / (2.0 * h);
            assert!((fd - g.as_slice()[k]).abs() < 1e-6, "{fd} vs {}", g.as_slice()[k]);
        }
    }

    fn small_matrix() -> impl Strategy<Value = Matrix> {
        (2usize..12, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-50.0f64..50.0, r * c)
                .prop_map(move |v| Matrix::new(r, c, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn standardize_is_idempotent(m in small_matrix()) {
            let once = standardize_columns(&m).unwrap();
            let twice = standardize_columns(&once).unwrap();
            for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn self_distances_symmetric_zero_diagonal(m in small_matrix()) {
            let d = pairwise_sq_dists(&m, &m).unwrap();
            for i in 0..m.rows() {
                prop_assert_eq!(d.get(i, i), 0.0);
                for j in 0..m.rows() {
                    prop_assert_eq!(d.get(i, j), d.get(j, i));
                    prop_assert!(d.get(i, j) >= 0.0);
                }
            }
        }

        #[test]
        fn pearson_symmetric_and_affine_invariant(
            xs in proptest::collection::vec(-10.0f64..10.0, 3..30),
            a in 0.1f64..10.0, b in -5.0f64..5.0,
        ) {
            let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x.sin() + i as f64 * 0.1).collect();
            let r = pearson_corr(&xs, &ys).unwrap();
            prop_assert_eq!(r, pearson_corr(&ys, &xs).unwrap());
            let scaled: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            prop_assert!((pearson_corr(&scaled, &ys).unwrap() - r).abs() < 1e-10);
        }
    }
}

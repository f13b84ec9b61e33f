use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{sq_dist, Matrix};

/// Distance variances at or below this make the correlation 0.
pub const DVAR_EPS: f64 = 1e-12;

/// How per-pair distance correlations are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduce {
    Sum,
    Mean,
}

/// Row means and grand mean of a distance matrix.
struct Centering {
    row_means: Vec<f64>,
    grand_mean: f64,
}

impl Centering {
    fn new(n: usize, dist: impl Fn(usize, usize) -> f64) -> Self {
        let nf = n as f64;
        let row_means: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|l| dist(k, l)).sum::<f64>() / nf)
            .collect();
        let grand_mean = row_means.iter().sum::<f64>() / nf;
        Self {
            row_means,
            grand_mean,
        }
    }

    #[inline]
    fn centered(&self, d: f64, k: usize, l: usize) -> f64 {
        d - self.row_means[k] - self.row_means[l] + self.grand_mean
    }
}

fn correlation_from(cov: f64, var_x: f64, var_y: f64) -> f64 {
    if var_x <= DVAR_EPS || var_y <= DVAR_EPS {
        return 0.0;
    }
    let r = cov / (var_x * var_y).sqrt();
    r.max(0.0).sqrt().min(1.0)
}

fn dcor_with(
    n: usize,
    dx: impl Fn(usize, usize) -> f64,
    cx: &Centering,
    dy: impl Fn(usize, usize) -> f64,
    cy: &Centering,
) -> f64 {
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        for l in 0..n {
            let a = cx.centered(dx(k, l), k, l);
            let b = cy.centered(dy(k, l), k, l);
            cov += a * b;
            vx += a * a;
            vy += b * b;
        }
    }
    let nn = (n * n) as f64;
    correlation_from(cov / nn, vx / nn, vy / nn)
}

/// Sample distance correlation (Székely–Rizzo V-statistic) between the rows
/// of `x` and the rows of `y`. Distance matrices are never materialized.
pub fn dcor(x: &Matrix, y: &Matrix) -> Result<f64> {
    if x.rows() != y.rows() {
        return Err(Error::Dimension(format!(
            "dCor needs paired samples, got {} and {} rows",
            x.rows(),
            y.rows()
        )));
    }
    let n = x.rows();
    if n < 2 {
        return Err(Error::Dimension("dCor needs at least 2 rows".into()));
    }
    let dx = |k: usize, l: usize| sq_dist(x.row(k), x.row(l)).sqrt();
    let dy = |k: usize, l: usize| sq_dist(y.row(k), y.row(l)).sqrt();
    let cx = Centering::new(n, dx);
    let cy = Centering::new(n, dy);
    Ok(dcor_with(n, dx, &cx, dy, &cy))
}

/// dCor between every unordered pair of columns, summed or averaged.
pub fn dcor_pairwise(z: &Matrix, reduce: Reduce) -> Result<f64> {
    let pairs = pairwise_values(z)?;
    let total: f64 = pairs.iter().sum();
    Ok(match reduce {
        Reduce::Sum => total,
        Reduce::Mean => total / pairs.len() as f64,
    })
}

/// Per-pair dCor values in `(0,1), (0,2), …, (1,2), …` order.
pub fn pairwise_values(z: &Matrix) -> Result<Vec<f64>> {
    let (n, d) = z.shape();
    if d < 2 {
        return Err(Error::Dimension(format!(
            "pairwise dCor needs at least 2 columns, got {d}"
        )));
    }
    if n < 2 {
        return Err(Error::Dimension("dCor needs at least 2 rows".into()));
    }
    let columns: Vec<Vec<f64>> = (0..d).map(|j| z.column(j)).collect();
    let centerings: Vec<Centering> = columns
        .iter()
        .map(|c| Centering::new(n, |k, l| (c[k] - c[l]).abs()))
        .collect();
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for a in 0..d {
        for b in (a + 1)..d {
            let (ca, cb) = (&columns[a], &columns[b]);
            out.push(dcor_with(
                n,
                |k, l| (ca[k] - ca[l]).abs(),
                &centerings[a],
                |k, l| (cb[k] - cb[l]).abs(),
                &centerings[b],
            ));
        }
    }
    Ok(out)
}

/// Sum of pairwise column dCor and its gradient w.r.t. every entry of `z`.
///
/// Double centering is a self-adjoint projection, so for distance matrices
/// `A`, `B` the gradient of `mean(Ã∘B̃)` w.r.t. `A` is `B̃/n²`; the chain
/// rule through `|a_k − a_l|` then gives `2 Σ_l G_kl sign(a_k − a_l)`.
pub fn dcor_pairwise_sum_with_grad(z: &Matrix) -> Result<(f64, Matrix)> {
    let (n, d) = z.shape();
    if d < 2 {
        return Err(Error::Dimension(format!(
            "pairwise dCor needs at least 2 columns, got {d}"
        )));
    }
    if n < 2 {
        return Err(Error::Dimension("dCor needs at least 2 rows".into()));
    }
    let nn = (n * n) as f64;
    let columns: Vec<Vec<f64>> = (0..d).map(|j| z.column(j)).collect();
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let cen = Centering::new(n, |k, l| (c[k] - c[l]).abs());
            let mut m = vec![0.0; n * n];
            for k in 0..n {
                for l in 0..n {
                    m[k * n + l] = cen.centered((c[k] - c[l]).abs(), k, l);
                }
            }
            m
        })
        .collect();
    let variances: Vec<f64> = centered
        .iter()
        .map(|m| m.iter().map(|v| v * v).sum::<f64>() / nn)
        .collect();

    let mut total = 0.0;
    let mut grad = Matrix::zeros(n, d);
    // Gradient w.r.t. a column's raw distance matrix, reused per pair.
    let mut g_mat = vec![0.0; n * n];
    for a in 0..d {
        for b in (a + 1)..d {
            let (ma, mb) = (&centered[a], &centered[b]);
            let cov = ma.iter().zip(mb).map(|(x, y)| x * y).sum::<f64>() / nn;
            let (va, vb) = (variances[a], variances[b]);
            let value = correlation_from(cov, va, vb);
            total += value;
            if value <= 0.0 || value >= 1.0 {
                continue;
            }
            let ratio = cov / (va * vb).sqrt();
            let outer = 1.0 / (2.0 * value * nn);
            let root = (va * vb).sqrt();
            for (this, other, var, col) in [(ma, mb, va, a), (mb, ma, vb, b)] {
                for (g, (t, o)) in g_mat.iter_mut().zip(this.iter().zip(other)) {
                    *g = outer * (o / root - ratio * t / var);
                }
                let c = &columns[col];
                for k in 0..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        let diff = c[k] - c[l];
                        if diff > 0.0 {
                            acc += g_mat[k * n + l];
                        } else if diff < 0.0 {
                            acc -= g_mat[k * n + l];
                        }
                    }
                    let v = grad.get(k, col) + 2.0 * acc;
                    grad.set(k, col, v);
                }
            }
        }
    }
    Ok((total, grad))
}

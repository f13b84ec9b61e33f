//! Linear ICA reference methods: PCA whitening, symmetric FastICA and the
//! standardized-observations baseline.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{standardize_columns, Matrix, Rng};

/// Covariance eigenvalues below this are treated as zero.
pub const EIGEN_FLOOR: f64 = 1e-10;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `z = (x − mean) · matrix`, mapping D observed columns to d whitened ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Whitening {
    pub mean: Vec<f64>,
    /// D × d.
    pub matrix: Matrix,
}

impl Whitening {
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "whitening expects {} columns, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let centered = Matrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) - self.mean[j]);
        centered.matmul(&self.matrix)
    }
}

/// Projects onto the top-`d` principal components and rescales them to unit
/// variance (population covariance, divisor n).
pub fn whiten(x: &Matrix, d: usize) -> Result<(Matrix, Whitening)> {
    let (n, big_d) = x.shape();
    if d == 0 || d > big_d || n <= big_d {
        return Err(Error::Dimension(format!(
            "whitening needs rows > cols >= d >= 1, got {n}×{big_d} with d = {d}"
        )));
    }
    let mean = x.column_means();
    let centered = Matrix::from_fn(n, big_d, |i, j| x.get(i, j) - mean[j]);
    let cov = centered.t_matmul(&centered)?.scale(1.0 / n as f64);
    let eig = SymmetricEigen::new(to_na(&cov));
    let mut order: Vec<usize> = (0..big_d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&k| eig.eigenvalues[k] >= EIGEN_FLOOR)
        .take(d)
        .collect();
    if kept.len() < d {
        return Err(Error::Degenerate(format!(
            "covariance has numerical rank {} < {d}",
            kept.len()
        )));
    }
    let mut matrix = Matrix::zeros(big_d, d);
    for (c, &k) in kept.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        // Fix the eigenvector sign: largest-magnitude entry positive.
        let pivot = (0..big_d)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        let s = sign / eig.eigenvalues[k].sqrt();
        for r in 0..big_d {
            matrix.set(r, c, v[r] * s);
        }
    }
    let w = Whitening { mean, matrix };
    Ok((centered.matmul(&w.matrix)?, w))
}

/// `(W Wᵀ)^{-1/2} W`: the nearest matrix with orthonormal rows.
pub fn symmetric_orthogonalize(w: &Matrix) -> Result<Matrix> {
    let wn = to_na(w);
    let eig = SymmetricEigen::new(&wn * wn.transpose());
    if eig.eigenvalues.iter().any(|&l| l < EIGEN_FLOOR) {
        return Err(Error::Degenerate("rows are linearly dependent".into()));
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let root = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    Ok(from_na(&(root * wn)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    Logcosh,
    Exp,
    Kurtosis,
}

impl Nonlinearity {
    /// `(g(u), g'(u))`.
    fn eval(self, u: f64) -> (f64, f64) {
        match self {
            Self::Logcosh => {
                let t = u.tanh();
                (t, 1.0 - t * t)
            }
            Self::Exp => {
                let e = (-0.5 * u * u).exp();
                (u * e, (1.0 - u * u) * e)
            }
            Self::Kurtosis => (u * u * u, 3.0 * u * u),
        }
    }
}

impl std::str::FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logcosh" => Ok(Self::Logcosh),
            "exp" => Ok(Self::Exp),
            "kurtosis" | "cube" => Ok(Self::Kurtosis),
            other => Err(Error::Config(format!("unknown FastICA nonlinearity {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastIcaConfig {
    pub nonlinearity: Nonlinearity,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FastIcaConfig {
    fn default() -> Self {
        Self {
            nonlinearity: Nonlinearity::Logcosh,
            max_iter: 1000,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearIcaResult {
    /// d × D map from centered observations to sources.
    pub unmixing: Matrix,
    /// d × d orthogonal rotation in whitened space.
    pub rotation: Matrix,
    pub whitening: Whitening,
    pub sources: Matrix,
    pub iterations: usize,
    pub converged: bool,
}

impl LinearIcaResult {
    /// Recovered sources for new observations.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.whitening.apply(x)?.matmul_t(&self.rotation)
    }
}

/// Largest `1 − |⟨w_new_k, w_k⟩|` over rows.
fn max_angle_change(new: &Matrix, old: &Matrix) -> f64 {
    (0..new.rows())
        .map(|k| {
            let c: f64 = new.row(k).iter().zip(old.row(k)).map(|(a, b)| a * b).sum();
            1.0 - c.abs()
        })
        .fold(0.0, f64::max)
}

/// Symmetric fixed-point FastICA. Non-convergence is reported through
/// `converged`, and the iterate with the smallest update is returned.
pub fn fastica(x: &Matrix, d: usize, cfg: &FastIcaConfig, rng: &mut Rng) -> Result<LinearIcaResult> {
    let (z, whitening) = whiten(x, d)?;
    let n = z.rows() as f64;
    let mut w = symmetric_orthogonalize(&Matrix::from_fn(d, d, |_, _| rng.normal()))?;
    let mut best = (f64::INFINITY, w.clone());
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let u = z.matmul_t(&w)?;
        let mut g = Matrix::zeros(u.rows(), d);
        let mut mean_dg = vec![0.0; d];
        for i in 0..u.rows() {
            for k in 0..d {
                let (gv, dg) = cfg.nonlinearity.eval(u.get(i, k));
                g.set(i, k, gv);
                mean_dg[k] += dg;
            }
        }
        // E[g(wᵀz) z] − E[g'(wᵀz)] w, row by row.
        let mut next = g.t_matmul(&z)?.scale(1.0 / n);
        for k in 0..d {
            let m = mean_dg[k] / n;
            for (a, b) in next.row_mut(k).iter_mut().zip(w.row(k)) {
                *a -= m * b;
            }
        }
        if !next.is_finite() {
            break;
        }
        let next = match symmetric_orthogonalize(&next) {
            Ok(m) => m,
            Err(_) => break,
        };
        let change = max_angle_change(&next, &w);
        w = next;
        if change < best.0 {
            best = (change, w.clone());
        }
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    let rotation = if converged { w } else { best.1 };
    let unmixing = rotation.matmul_t(&whitening.matrix)?;
    let sources = z.matmul_t(&rotation)?;
    Ok(LinearIcaResult {
        unmixing,
        rotation,
        whitening,
        sources,
        iterations,
        converged,
    })
}

/// The first `d` standardized observation columns, used as the do-nothing
/// reference row in comparison tables.
pub fn identity_baseline(x: &Matrix, d: usize) -> Result<Matrix> {
    if d == 0 || d > x.cols() {
        return Err(Error::Dimension(format!(
            "baseline needs 1 <= d <= {} columns, got {d}",
            x.cols()
        )));
    }
    standardize_columns(&x.select_cols(&(0..d).collect::<Vec<_>>())?)
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{sq_dist, Matrix};

/// Kernel value assigned to pairs at exactly zero distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroDistance {
    /// `φ(0) = 0`: coincident pairs, the diagonal included, drop out of the
    /// sums. The estimate is then biased downward by `1/(n·√(πγ))` and can
    /// be negative.
    #[default]
    Excluded,
    /// `φ(0) = 1`, the continuous limit. The kernel is positive definite and
    /// the distance never negative.
    Continuous,
}

impl std::str::FromStr for ZeroDistance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "excluded" => Ok(Self::Excluded),
            "continuous" => Ok(Self::Continuous),
            other => Err(Error::Config(format!("unknown zero-distance rule {other:?}"))),
        }
    }
}

/// Bandwidth and ambient dimension of the Cramer-Wold kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CwParams {
    gamma: f64,
    dim_d: usize,
    zero_distance: ZeroDistance,
}

impl CwParams {
    pub fn new(gamma: f64, dim_d: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("bandwidth must be positive, got {gamma}")));
        }
        if dim_d == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        Ok(Self {
            gamma,
            dim_d,
            zero_distance: ZeroDistance::Excluded,
        })
    }

    /// `multiplier × silverman_gamma(n)`.
    pub fn silverman(n: usize, dim_d: usize, multiplier: f64) -> Result<Self> {
        Self::new(multiplier * silverman_gamma(n)?, dim_d)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn zero_distance(&self) -> ZeroDistance {
        self.zero_distance
    }

    pub fn with_zero_distance(self, zero_distance: ZeroDistance) -> Self {
        Self { zero_distance, ..self }
    }
}

/// Asymptotic Cramer-Wold kernel `(1 + 2s/D)^(-1/2)`, with the value at
/// exactly `s = 0` defined as 0.
pub fn phi_d(s: f64, dim_d: usize) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("phi_D needs s >= 0, got {s}")));
    }
    if dim_d == 0 {
        return Err(Error::Domain("phi_D needs D >= 1".into()));
    }
    Ok(phi(s, dim_d as f64))
}

#[inline]
fn phi(s: f64, d: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        1.0 / (1.0 + 2.0 * s / d).sqrt()
    }
}

#[inline]
fn phi_with(s: f64, d: f64, rule: ZeroDistance) -> f64 {
    match rule {
        ZeroDistance::Excluded => phi(s, d),
        ZeroDistance::Continuous => 1.0 / (1.0 + 2.0 * s / d).sqrt(),
    }
}

/// `dφ/ds`. Under the excluded rule it is taken as 0 at `s = 0`; either way
/// a zero-distance pair contributes no gradient since `x_i − x_j = 0`.
#[inline]
fn phi_prime(s: f64, d: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        let t = 1.0 + 2.0 * s / d;
        -1.0 / (d * t * t.sqrt())
    }
}

/// Silverman's rule of thumb `(4 / (3n))^(1/5)`.
pub fn silverman_gamma(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("Silverman's rule needs n >= 1".into()));
    }
    Ok((4.0 / (3.0 * n as f64)).powf(0.2))
}

struct Kernel {
    values: Vec<f64>,
    /// `φ'(s)/γ` per pair, only when gradients are requested.
    weights: Option<Vec<f64>>,
    rows: usize,
    cols: usize,
}

impl Kernel {
    fn build(a: &Matrix, b: &Matrix, p: &CwParams, with_weights: bool) -> Self {
        let (rows, cols) = (a.rows(), b.rows());
        let d = p.dim_d as f64;
        let inv4g = 1.0 / (4.0 * p.gamma);
        let mut values = Vec::with_capacity(rows * cols);
        let mut weights = with_weights.then(|| Vec::with_capacity(rows * cols));
        for i in 0..rows {
            let ai = a.row(i);
            for j in 0..cols {
                let s = sq_dist(ai, b.row(j)) * inv4g;
                values.push(phi_with(s, d, p.zero_distance));
                if let Some(w) = weights.as_mut() {
                    w.push(phi_prime(s, d) / p.gamma);
                }
            }
        }
        Kernel {
            values,
            weights,
            rows,
            cols,
        }
    }

    /// Row-major sum plus column-major sum of the kernel matrix. Transposing
    /// the kernel swaps the two partial sums, which makes the distance
    /// bit-exactly symmetric in its arguments.
    fn two_way_sum(&self) -> f64 {
        let mut by_rows = 0.0;
        for v in &self.values {
            by_rows += v;
        }
        let mut by_cols = 0.0;
        for j in 0..self.cols {
            for i in 0..self.rows {
                by_cols += self.values[i * self.cols + j];
            }
        }
        by_rows + by_cols
    }
}

fn check_shapes(x: &Matrix, y: &Matrix, p: &CwParams) -> Result<()> {
    if x.rows() != y.rows() {
        return Err(Error::Dimension(format!(
            "Cramer-Wold distance needs equal sample sizes, got {} and {}",
            x.rows(),
            y.rows()
        )));
    }
    if x.cols() != y.cols() || x.cols() != p.dim_d {
        return Err(Error::Dimension(format!(
            "samples have {} and {} columns, kernel dimension is {}",
            x.cols(),
            y.cols(),
            p.dim_d
        )));
    }
    if x.rows() < 2 {
        return Err(Error::Dimension("Cramer-Wold distance needs n >= 2".into()));
    }
    Ok(())
}

fn normalizer(n: usize, gamma: f64) -> f64 {
    let nf = n as f64;
    1.0 / (2.0 * nf * nf * (std::f64::consts::PI * gamma).sqrt())
}

/// Squared Cramer-Wold distance between two equally sized samples.
pub fn cramer_wold_dist_sq(x: &Matrix, y: &Matrix, p: &CwParams) -> Result<f64> {
    check_shapes(x, y, p)?;
    let kxx = Kernel::build(x, x, p, false);
    let kyy = Kernel::build(y, y, p, false);
    let kxy = Kernel::build(x, y, p, false);
    let c = normalizer(x.rows(), p.gamma);
    // Each two-way sum counts every ordered pair twice.
    Ok(0.5 * c * (kxx.two_way_sum() + kyy.two_way_sum() - 2.0 * kxy.two_way_sum()))
}

/// Distance plus its gradient with respect to every entry of `x` and `y`.
pub fn cramer_wold_dist_sq_with_grad(
    x: &Matrix,
    y: &Matrix,
    p: &CwParams,
) -> Result<(f64, Matrix, Matrix)> {
    check_shapes(x, y, p)?;
    let kxx = Kernel::build(x, x, p, true);
    let kyy = Kernel::build(y, y, p, true);
    let kxy = Kernel::build(x, y, p, true);
    let n = x.rows();
    let dims = x.cols();
    let c = normalizer(n, p.gamma);
    let value = 0.5 * c * (kxx.two_way_sum() + kyy.two_way_sum() - 2.0 * kxy.two_way_sum());

    let wxx = kxx.weights.as_deref().expect("weights requested");
    let wyy = kyy.weights.as_deref().expect("weights requested");
    let wxy = kxy.weights.as_deref().expect("weights requested");
    let mut gx = Matrix::zeros(n, dims);
    let mut gy = Matrix::zeros(n, dims);
    for i in 0..n {
        let xi = x.row(i);
        let yi = y.row(i);
        let mut acc_x = vec![0.0; dims];
        let mut acc_y = vec![0.0; dims];
        for j in 0..n {
            let w_self_x = wxx[i * n + j];
            let w_self_y = wyy[i * n + j];
            let w_cross_x = wxy[i * n + j];
            let w_cross_y = wxy[j * n + i];
            let (xj, yj) = (x.row(j), y.row(j));
            for k in 0..dims {
                acc_x[k] += w_self_x * (xi[k] - xj[k]) - w_cross_x * (xi[k] - yj[k]);
                acc_y[k] += w_self_y * (yi[k] - yj[k]) - w_cross_y * (yi[k] - xj[k]);
            }
        }
        for k in 0..dims {
            gx.set(i, k, c * acc_x[k]);
            gy.set(i, k, c * acc_y[k]);
        }
    }
    Ok((value, gx, gy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Rng;

    #[test]
    fn phi_examples() {
        assert_eq!(phi_d(0.0, 6).unwrap(), 0.0);
        assert!((phi_d(8.0, 8).unwrap() - 3f64.powf(-0.5)).abs() < 1e-15);
        assert!((phi_d(4.0, 8).unwrap() - 2f64.powf(-0.5)).abs() < 1e-15);
        assert!(matches!(phi_d(-1.0, 3), Err(Error::Domain(_))));
        assert!(matches!(phi_d(1.0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_monotonicity() {
        let mut prev = phi_d(1e-9, 4).unwrap();
        for k in 1..200 {
            let v = phi_d(k as f64 * 0.1, 4).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let mut prev = 0.0;
        for d in 1..50 {
            let v = phi_d(2.0, d).unwrap();
            assert!(v > prev && v < 1.0);
            prev = v;
        }
    }

    #[test]
    fn silverman_examples() {
        // Oracle values from mpmath at 50 digits.
        assert!((silverman_gamma(1).unwrap() - 1.0592238410488123).abs() < 1e-12);
        assert!((silverman_gamma(4000).unwrap() - 0.2016395636994333).abs() < 1e-12);
        assert!(silverman_gamma(256).unwrap() > silverman_gamma(4000).unwrap());
        assert!(matches!(silverman_gamma(0), Err(Error::Domain(_))));
    }

    #[test]
    fn identical_samples_are_at_distance_zero() {
        let mut rng = Rng::seed_from(4);
        let x = Matrix::from_fn(10, 3, |_, _| rng.normal());
        let p = CwParams::new(0.5, 3).unwrap();
        assert_eq!(cramer_wold_dist_sq(&x, &x, &p).unwrap(), 0.0);
    }

    #[test]
    fn shape_errors() {
        let p = CwParams::new(1.0, 2).unwrap();
        let a = Matrix::zeros(3, 2);
        assert!(cramer_wold_dist_sq(&a, &Matrix::zeros(4, 2), &p).is_err());
        assert!(cramer_wold_dist_sq(&a, &Matrix::zeros(3, 3), &p).is_err());
        assert!(cramer_wold_dist_sq(&Matrix::zeros(1, 2), &Matrix::zeros(1, 2), &p).is_err());
        assert!(CwParams::new(0.0, 2).is_err());
        assert!(CwParams::new(1.0, 0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::seed_from(21);
        let x = Matrix::from_fn(7, 3, |_, _| rng.normal());
        let y = Matrix::from_fn(7, 3, |_, _| rng.normal() * 0.7 + 0.2);
        let p = CwParams::new(0.4, 3).unwrap();
        let (v, gx, gy) = cramer_wold_dist_sq_with_grad(&x, &y, &p).unwrap();
        assert_eq!(v, cramer_wold_dist_sq(&x, &y, &p).unwrap());
        let h = 1e-6;
        for k in 0..21 {
            for (which, g) in [(0, &gx), (1, &gy)] {
                let bump = |delta: f64| {
                    let (mut a, mut b) = (x.clone(), y.clone());
                    if which == 0 {
                        a.as_mut_slice()[k] += delta;
                    } else {
                        b.as_mut_slice()[k] += delta;
                    }
                    cramer_wold_dist_sq(&a, &b, &p).unwrap()
                };
                let fd = (bump(h) - bump(-h)) / (2.0 * h);
                let an = g.as_slice()[k];
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "{fd} vs {an}");
            }
        }
    }
}

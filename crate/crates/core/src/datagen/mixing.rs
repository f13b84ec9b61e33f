use crate::error::Result;
use crate::math::{Matrix, Rng};

/// Entries drawn i.i.d. uniform on [-2, 2].
pub fn sample_mixing_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    assert!(rows >= 1 && cols >= 1, "mixing matrix needs rows, cols >= 1");
    Matrix::from_fn(rows, cols, |_, _| rng.uniform_range(-2.0, 2.0))
}

/// `X = tanh(tanh(Y A) B)`.
pub fn mix_nonlinear(y: &Matrix, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    y.matmul(a)?.map(f64::tanh).matmul(b).map(|m| m.map(f64::tanh))
}

/// `X = Y A`.
pub fn mix_linear(y: &Matrix, a: &Matrix) -> Result<Matrix> {
    y.matmul(a)
}

/// Elementwise `f(x) = x² + x³`.
pub fn poly_activation(x: f64) -> f64 {
    x * x + x * x * x
}

/// `X = f(tanh(Y A) B)` with `f(x) = x² + x³`.
pub fn mix_image(y: &Matrix, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    y.matmul(a)?
        .map(f64::tanh)
        .matmul(b)
        .map(|m| m.map(poly_activation))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_determinism() {
        let m = sample_mixing_matrix(100, 100, &mut Rng::seed_from(3));
        assert!(m.as_slice().iter().all(|v| (-2.0..=2.0).contains(v)));
        assert_eq!(m, sample_mixing_matrix(100, 100, &mut Rng::seed_from(3)));
    }

    #[test]
    fn entries_are_centered() {
        let m = sample_mixing_matrix(1000, 1000, &mut Rng::seed_from(11));
        let mean = m.as_slice().iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 0.01, "{mean}");
    }

    #[test]
    fn zero_sources_give_zero_observations() {
        let mut rng = Rng::seed_from(1);
        let y = Matrix::zeros(4, 3);
        let a = sample_mixing_matrix(3, 3, &mut rng);
        let b = sample_mixing_matrix(3, 3, &mut rng);
        assert_eq!(mix_nonlinear(&y, &a, &b).unwrap(), y);
        assert_eq!(mix_linear(&y, &a).unwrap(), y);
        assert_eq!(mix_image(&y, &a, &b).unwrap(), y);
    }

    #[test]
    fn nonlinear_hand_case() {
        let y = Matrix::from_rows(&[vec![0.5, -1.0], vec![2.0, 0.25], vec![-0.3, 0.7]]).unwrap();
        let a = Matrix::from_rows(&[vec![1.0, -0.5, 0.2], vec![0.3, 0.8, -1.1]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.9, -0.4], vec![1.5, 0.2], vec![-0.7, 1.3]]).unwrap();
        let x = mix_nonlinear(&y, &a, &b).unwrap();
        for i in 0..3 {
            for k in 0..2 {
                let mut outer = 0.0;
                for h in 0..3 {
                    let inner = (0..2).map(|j| y.get(i, j) * a.get(j, h)).sum::<f64>().tanh();
                    outer += inner * b.get(h, k);
                }
                assert!((x.get(i, k) - outer.tanh()).abs() < 1e-12);
            }
        }
        assert!(x.as_slice().iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn linear_matches_loop_oracle() {
        let mut rng = Rng::seed_from(9);
        let y = Matrix::from_fn(7, 3, |_, _| rng.normal());
        let a = sample_mixing_matrix(3, 5, &mut rng);
        let x = mix_linear(&y, &a).unwrap();
        for i in 0..7 {
            for k in 0..5 {
                let v: f64 = (0..3).map(|j| y.get(i, j) * a.get(j, k)).sum();
                assert!((x.get(i, k) - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
        assert_eq!(mix_linear(&y, &Matrix::identity(3)).unwrap(), y);
    }

    #[test]
    fn image_scalar_path() {
        assert_eq!(poly_activation(1.0), 2.0);
        assert_eq!(poly_activation(-1.0), 0.0);
        let y = Matrix::from_rows(&[vec![0.4]]).unwrap();
        let a = Matrix::from_rows(&[vec![1.7]]).unwrap();
        let b = Matrix::from_rows(&[vec![-1.2]]).unwrap();
        let u = (0.4f64 * 1.7).tanh() * -1.2;
        let want = u * u + u * u * u;
        assert!((mix_image(&y, &a, &b).unwrap().get(0, 0) - want).abs() < 1e-15);
    }

    #[test]
    fn saturation_with_scaled_identity() {
        // Inner activations bounded away from zero, B = 10·I.
        let y = Matrix::from_rows(&[vec![1.0, -2.0], vec![-1.5, 0.8], vec![3.0, 1.0]]).unwrap();
        let b = Matrix::identity(2).scale(10.0);
        let x = mix_nonlinear(&y, &Matrix::identity(2), &b).unwrap();
        assert!(x.as_slice().iter().all(|v| v.abs() > 0.99));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let y = Matrix::zeros(4, 3);
        assert!(mix_linear(&y, &Matrix::zeros(2, 2)).is_err());
        assert!(mix_nonlinear(&y, &Matrix::zeros(3, 4), &Matrix::zeros(3, 4)).is_err());
        assert!(mix_image(&y, &Matrix::zeros(3, 3), &Matrix::zeros(2, 3)).is_err());
    }
}

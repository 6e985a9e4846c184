#![allow(dead_code)]

use adalasso::{CoefficientVector, Dataset, SeededRng};
use nalgebra::{DMatrix, DVector};

pub fn gaussian_design(n: usize, p: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.normal())
}

/// `y = X b + noise` with `b` given and unit-variance noise scaled by `sd`.
pub fn linear_data(x: DMatrix<f64>, beta: &[f64], sd: f64, rng: &mut SeededRng) -> Dataset {
    let b = DVector::from_column_slice(beta);
    let noise = DVector::from_fn(x.nrows(), |_, _| rng.normal() * sd);
    let y = &x * b + noise;
    Dataset::new(x, y).unwrap()
}

/// `n x p` design with `X^T X = n I`.
pub fn orthonormal_design(n: usize, p: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    let g = gaussian_design(n, p, rng);
    g.qr().q() * (n as f64).sqrt()
}

/// Lasso objective `(1/n)||y - X b - c||^2 + lambda * sum w_j |b_j|`, with
/// the convention `0 * inf = 0`.
pub fn objective(data: &Dataset, coef: &CoefficientVector, w: &[f64], lambda: f64) -> f64 {
    let n = data.n();
    let mut loss = 0.0;
    for i in 0..n {
        let mut fit = coef.intercept;
        for j in 0..data.p() {
            fit += data.x()[(i, j)] * coef.beta[j];
        }
        loss += (data.y()[i] - fit).powi(2);
    }
    let mut pen = 0.0;
    for (b, wj) in coef.beta.iter().zip(w) {
        if *b != 0.0 {
            pen += wj * b.abs();
        }
    }
    loss / n as f64 + lambda * pen
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

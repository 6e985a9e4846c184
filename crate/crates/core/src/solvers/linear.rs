use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::solvers::lasso::log_spaced_path;
use crate::solvers::{PreparedDesign, SolverConfig};
use crate::types::{CoefficientVector, Dataset, LambdaPath};

fn centered(data: &Dataset, intercept: bool) -> PreparedDesign {
    PreparedDesign::new(
        data,
        &SolverConfig {
            standardize: false,
            intercept,
            ..Default::default()
        },
    )
}

/// Least squares through a Householder QR of the (centered) design.
pub fn ols_fit(data: &Dataset, intercept: bool) -> Result<CoefficientVector> {
    let (n, p) = (data.n(), data.p());
    if p >= n {
        return Err(Error::SingularDesign(format!(
            "OLS needs p < n, got p = {p}, n = {n}"
        )));
    }
    let design = centered(data, intercept);
    let qr = design.z.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    if let Some(j) = (0..p).find(|&j| r[(j, j)].abs() <= 1e-10 * diag_max.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularDesign(format!(
            "column {j} is linearly dependent on the preceding columns"
        )));
    }
    let qty = qr.q().transpose() * &design.y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    Ok(design.to_original(&beta))
}

/// Minimizer of `(1/n)||y - X b||^2 + lambda ||b||^2`, i.e.
/// `(X^T X + n lambda I)^{-1} X^T y`, solved by Cholesky on whichever of the
/// primal (`p x p`) or dual (`n x n`) systems is smaller.
pub fn ridge_fit(data: &Dataset, lambda: f64, intercept: bool) -> Result<CoefficientVector> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ridge lambda must be positive, got {lambda}"
        )));
    }
    let design = centered(data, intercept);
    let z = &design.z;
    let (n, p) = (z.nrows(), z.ncols());
    let shift = n as f64 * lambda;
    let beta = if p <= n {
        let mut gram = z.tr_mul(z);
        for j in 0..p {
            gram[(j, j)] += shift;
        }
        let rhs = z.tr_mul(&design.y);
        gram.cholesky()
            .ok_or_else(|| Error::SingularDesign("ridge system is not positive definite".into()))?
            .solve(&rhs)
    } else {
        let mut kernel = z * z.transpose();
        for i in 0..n {
            kernel[(i, i)] += shift;
        }
        let alpha = kernel
            .cholesky()
            .ok_or_else(|| Error::SingularDesign("ridge system is not positive definite".into()))?
            .solve(&design.y);
        z.tr_mul(&alpha)
    };
    Ok(design.to_original(&beta))
}

/// Ridge fits for many lambdas from one symmetric eigendecomposition of the
/// Gram (or kernel, when `p > n`) matrix.
pub struct RidgePath {
    design: PreparedDesign,
    /// Maps spectral coordinates back to coefficients (`p x m`).
    basis: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    projected: DVector<f64>,
}

impl RidgePath {
    pub fn new(data: &Dataset, intercept: bool) -> Self {
        let design = centered(data, intercept);
        let z = &design.z;
        let (n, p) = (z.nrows(), z.ncols());
        let (basis, eigenvalues, projected) = if p <= n {
            let eig = SymmetricEigen::new(z.tr_mul(z));
            let projected = eig.eigenvectors.tr_mul(&z.tr_mul(&design.y));
            (eig.eigenvectors, eig.eigenvalues, projected)
        } else {
            let eig = SymmetricEigen::new(z * z.transpose());
            let projected = eig.eigenvectors.tr_mul(&design.y);
            (z.tr_mul(&eig.eigenvectors), eig.eigenvalues, projected)
        };
        let eigenvalues = eigenvalues.map(|d| d.max(0.0));
        Self {
            design,
            basis,
            eigenvalues,
            projected,
        }
    }

    pub fn fit(&self, lambda: f64) -> CoefficientVector {
        let shift = self.design.n() as f64 * lambda;
        let coords = DVector::from_iterator(
            self.projected.len(),
            self.projected
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(c, d)| c / (d + shift)),
        );
        self.design.to_original(&(&self.basis * coords))
    }
}

/// `n_lambda` log-spaced ridge penalties from `10 ||X^T y||_inf / n` down by a
/// factor `1e-4`.
pub fn ridge_lambda_grid(data: &Dataset, n_lambda: usize, intercept: bool) -> Result<LambdaPath> {
    let design = centered(data, intercept);
    let top = design.z.tr_mul(&design.y).amax() * 10.0 / design.n() as f64;
    if top <= 0.0 {
        return Err(Error::ZeroSignal);
    }
    log_spaced_path(top, n_lambda, 1e-4)
}

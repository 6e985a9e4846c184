//! Penalized least-squares solvers.
//!
//! The lasso criterion is `(1/n)||y - X b||^2 + lambda * sum_j w_j |b_j|`,
//! with no 1/2 factor in front of the loss. The gradient of the loss is
//! therefore `-(2/n) X^T r`, and every threshold in this module carries the
//! matching factor 2: a coordinate with weight `w_j` stays at zero while
//! `2 |x_j^T r| / n <= lambda * w_j`.

mod design;
mod kkt;
mod lasso;
mod linear;

use serde::{Deserialize, Serialize};

pub use design::PreparedDesign;
pub use kkt::{kkt_certificate, KktReport};
pub use lasso::{
    build_lambda_path, effective_weights, lambda_max, lasso_path_fit, weighted_lasso_fit,
    CoordinateDescent,
};
pub use linear::{ols_fit, ridge_fit, ridge_lambda_grid, RidgePath};

pub(crate) mod lasso_internals {
    pub(crate) use super::lasso::{lambda_max_prepared, log_spaced_path, path_prepared};
}

/// Numerical settings shared by the lasso and ridge fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Stop once no coordinate moves by more than this in a sweep. Changes are
    /// measured on the solver's internal scale, `sqrt(||x_j||^2 / n) * |db_j|`,
    /// which is the plain coefficient change when columns are standardized.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Scale columns to unit standard deviation before fitting. Coefficients
    /// and lambda are still reported on the original scale, so the effective
    /// penalty on coordinate `j` becomes `lambda * w_j * sd_j`.
    pub standardize: bool,
    pub intercept: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_sweeps: 100_000,
            standardize: true,
            intercept: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(crate::Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_sweeps == 0 {
            return Err(crate::Error::InvalidArgument(
                "max_sweeps must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Length and depth of a data-driven lambda path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathSpec {
    pub n_lambda: usize,
    /// Smallest lambda as a fraction of lambda_max. `None` picks `1e-4` when
    /// `n > p` and `1e-2` otherwise.
    pub min_ratio: Option<f64>,
}

impl Default for PathSpec {
    fn default() -> Self {
        Self {
            n_lambda: 100,
            min_ratio: None,
        }
    }
}

impl PathSpec {
    pub fn resolve_min_ratio(&self, n: usize, p: usize) -> f64 {
        self.min_ratio.unwrap_or(if n > p { 1e-4 } else { 1e-2 })
    }
}

/// `sign(z) * max(|z| - gamma, 0)`.
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        for z in [-2.5, -1e-9, 0.0, 0.3, 17.0] {
            assert_eq!(soft_threshold(z, 0.0), z);
        }
    }

    #[test]
    fn default_min_ratio_depends_on_shape() {
        let spec = PathSpec::default();
        assert_eq!(spec.resolve_min_ratio(100, 10), 1e-4);
        assert_eq!(spec.resolve_min_ratio(100, 100), 1e-2);
        assert_eq!(spec.resolve_min_ratio(100, 1000), 1e-2);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            max_sweeps: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}

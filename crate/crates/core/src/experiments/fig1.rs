//! Cross-validated versus test-sample prediction error along the lambda path,
//! for the lasso, the one-step lasso and the ridge-adaptive lasso on a single
//! simulated sample.

use serde::{Deserialize, Serialize};

use crate::calibration::{
    calibration_path, make_weights, nested_cv_lasso_with_folds, simple_cv_lasso_with_folds,
    simple_cv_ridge_with_folds, CvConfig, WeightKind, WeightScheme,
};
use crate::datagen::{draw_beta_star, CovarianceKind, SimDesign, Simulator, SupportKind};
use crate::error::Result;
use crate::folds::partition_folds;
use crate::metrics::pred_error;
use crate::rng::SeededRng;
use crate::solvers::lasso_path_fit;
use crate::types::{argmin_first, Dataset, LambdaPath, WeightVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub n: usize,
    pub p: usize,
    pub p0: usize,
    pub beta_mag: f64,
    pub test_size: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub cv: CvConfig,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            n: 1000,
            p: 1000,
            p0: 10,
            beta_mag: 0.5,
            test_size: 10_000,
            seed: 1,
            epsilon: 0.0,
            cv: CvConfig::default(),
        }
    }
}

impl Fig1Config {
    pub fn design(&self) -> SimDesign {
        SimDesign {
            n: self.n,
            p: self.p,
            p0: self.p0,
            beta_mag: self.beta_mag,
            covariance: CovarianceKind::Identity,
            noise_sd: 1.0,
            support: SupportKind::FirstP0,
        }
    }
}

/// Error curves of one estimator over its lambda path.
#[derive(Debug, Clone)]
pub struct Fig1Panel {
    pub weights: WeightKind,
    pub lambdas: LambdaPath,
    pub cv_simple: Vec<f64>,
    /// Only for data-driven weights.
    pub cv_nested: Option<Vec<f64>>,
    pub test_error: Vec<f64>,
    pub simple_index: usize,
    pub nested_index: Option<usize>,
    pub test_index: usize,
}

impl Fig1Panel {
    pub fn label(&self) -> &'static str {
        self.weights.label()
    }

    pub fn lambda_ratio(&self, r: usize) -> f64 {
        self.lambdas.get(r) / self.lambdas.max()
    }

    pub fn min_test_error(&self) -> f64 {
        self.test_error[self.test_index]
    }

    /// `(test_error[r] - min) / min`.
    pub fn relative_excess(&self, r: usize) -> f64 {
        (self.test_error[r] - self.min_test_error()) / self.min_test_error()
    }
}

#[derive(Debug, Clone)]
pub struct Fig1Result {
    pub panels: Vec<Fig1Panel>,
    pub train: Dataset,
}

fn test_curve(
    train: &Dataset,
    test: &Dataset,
    w: &WeightVector,
    path: &LambdaPath,
    cv: &CvConfig,
) -> Result<Vec<f64>> {
    lasso_path_fit(train, w, path, &cv.solver)?
        .iter()
        .map(|b| pred_error(test, b))
        .collect()
}

/// Draws one training and one test sample, then evaluates the three panels
/// on a shared fold assignment.
pub fn replicate_fig1(cfg: &Fig1Config) -> Result<Fig1Result> {
    let design = cfg.design();
    let sim = Simulator::new(&design)?;
    let mut root = SeededRng::new(cfg.seed);
    let beta_star = draw_beta_star(&design, &mut root.fork());
    let train = sim.sample(&beta_star, cfg.n, &mut root.fork())?;
    let test = sim.sample(&beta_star, cfg.test_size, &mut root.fork())?;
    let folds = partition_folds(cfg.n, cfg.cv.folds, &mut root.fork())?;

    let unit = WeightVector::unit(cfg.p);
    let lasso = simple_cv_lasso_with_folds(&train, &unit, &folds, &cfg.cv)?;
    let path = lasso.curve.lambdas().clone();
    let test_error = test_curve(&train, &test, &unit, &path, &cfg.cv)?;
    let mut panels = vec![Fig1Panel {
        weights: WeightKind::Unit,
        cv_simple: lasso.curve.mean_errors().to_vec(),
        cv_nested: None,
        simple_index: lasso.curve.selected_index(),
        nested_index: None,
        test_index: argmin_first(&test_error),
        test_error,
        lambdas: path,
    }];

    let ridge_init = simple_cv_ridge_with_folds(&train, &folds, &cfg.cv)?.beta;
    for (kind, init) in [
        (WeightKind::LassoCv, lasso.beta.clone()),
        (WeightKind::RidgeCv, ridge_init),
    ] {
        let scheme = WeightScheme::new(kind, cfg.epsilon)?;
        let w = make_weights(&init, scheme.epsilon);
        let simple = simple_cv_lasso_with_folds(&train, &w, &folds, &cfg.cv)?;
        let nested =
            nested_cv_lasso_with_folds(&train, &w, &scheme, &folds, &cfg.cv, &mut root.fork())?;
        let path = calibration_path(&train, &w, &cfg.cv)?;
        let test_error = test_curve(&train, &test, &w, &path, &cfg.cv)?;
        panels.push(Fig1Panel {
            weights: kind,
            cv_simple: simple.curve.mean_errors().to_vec(),
            cv_nested: Some(nested.curve.mean_errors().to_vec()),
            simple_index: simple.curve.selected_index(),
            nested_index: Some(nested.curve.selected_index()),
            test_index: argmin_first(&test_error),
            test_error,
            lambdas: path,
        });
    }
    Ok(Fig1Result { panels, train })
}

//! Cross-validation calibration of the (adaptive) lasso.
//!
//! Two schemes are implemented:
//!
//! * **simple**: the weights are treated as fixed, and K-fold CV runs over
//!   the lambda path with those same weights on every training fold. This is
//!   valid for the plain lasso (unit weights) but leaks held-out data when the
//!   weights were estimated from the full sample.
//! * **nested**: on every outer training fold the initial estimate, and hence
//!   the weights, is recomputed from the training rows only (running an inner
//!   CV when the initial estimator has its own tuning parameter) before the
//!   path is fitted and scored on the held-out fold.
//!
//! In both schemes the lambda path is computed once from the full sample and
//! the final estimate is refitted on the full sample with full-sample weights.
//!
//! Outer folds are processed in parallel. Every random draw (fold labels,
//! per-fold sub-stream seeds) happens sequentially before the parallel section,
//! so results are bitwise identical to a sequential run.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::folds::partition_folds;
use crate::metrics::pred_error;
use crate::rng::SeededRng;
use crate::solvers::lasso_internals as li;
use crate::solvers::{
    ols_fit, ridge_fit, ridge_lambda_grid, PathSpec, PreparedDesign, RidgePath, SolverConfig,
};
use crate::types::{CoefficientVector, CvCurve, Dataset, FoldAssignment, LambdaPath, WeightVector};

/// How the initial estimate behind the weights is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// `w = 1`: the plain lasso.
    Unit,
    /// Weights from the least-squares fit (ols-adaptive lasso).
    Ols,
    /// Weights from a CV-calibrated ridge fit (ridge-adaptive lasso).
    RidgeCv,
    /// Weights from a CV-calibrated lasso fit (one-step lasso).
    LassoCv,
}

impl WeightKind {
    pub fn label(self) -> &'static str {
        match self {
            WeightKind::Unit => "lasso",
            WeightKind::Ols => "ols-adaptive",
            WeightKind::RidgeCv => "ridge-adaptive",
            WeightKind::LassoCv => "one-step",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub kind: WeightKind,
    /// Offset in `w_j = 1 / (|b_j| + epsilon)`.
    pub epsilon: f64,
}

impl WeightScheme {
    pub fn new(kind: WeightKind, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvScheme {
    Simple,
    Nested,
}

impl CvScheme {
    pub fn label(self) -> &'static str {
        match self {
            CvScheme::Simple => "simple",
            CvScheme::Nested => "nested",
        }
    }
}

/// Which weights define the candidate lambda path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaPathStrategy {
    /// Path from the full sample and the full-sample weights.
    #[default]
    DataWeights,
    /// Path from the full sample with unit weights, whatever the weights.
    UnitWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
    pub solver: SolverConfig,
    pub path: PathSpec,
    pub lambda_path: LambdaPathStrategy,
    /// Number of ridge penalties tried by the ridge CV.
    pub ridge_n_lambda: usize,
    /// Run outer folds on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            solver: SolverConfig::default(),
            path: PathSpec::default(),
            lambda_path: LambdaPathStrategy::DataWeights,
            ridge_n_lambda: 100,
            parallel: true,
        }
    }
}

/// A CV-calibrated estimate.
#[derive(Debug, Clone)]
pub struct CalibratedFit {
    /// Fit on the full sample at `lambda_selected` with `weights_used`.
    pub beta: CoefficientVector,
    pub lambda_selected: f64,
    pub curve: CvCurve,
    pub weights_used: WeightVector,
    pub scheme: CvScheme,
    /// Per-fold weights of the nested scheme (empty for the simple scheme).
    pub fold_weights: Vec<WeightVector>,
}

/// Ridge estimate with the penalty chosen by simple K-fold CV.
#[derive(Debug, Clone)]
pub struct RidgeCvFit {
    pub beta: CoefficientVector,
    pub lambda_selected: f64,
    pub curve: CvCurve,
}

/// `w_j = 1 / (|b_j| + epsilon)`; a zero coefficient with `epsilon = 0` gets
/// an infinite weight.
pub fn make_weights(beta_init: &CoefficientVector, epsilon: f64) -> WeightVector {
    let w = beta_init
        .beta
        .iter()
        .map(|b| {
            let d = b.abs() + epsilon;
            if d == 0.0 {
                f64::INFINITY
            } else {
                1.0 / d
            }
        })
        .collect();
    WeightVector::new(w).expect("reciprocals of non-negative values are valid weights")
}

/// The lambda path used by both schemes, computed on the full sample.
pub fn calibration_path(data: &Dataset, w: &WeightVector, cfg: &CvConfig) -> Result<LambdaPath> {
    let design = PreparedDesign::new(data, &cfg.solver);
    let top = match cfg.lambda_path {
        LambdaPathStrategy::DataWeights => li::lambda_max_prepared(&design, w)?,
        LambdaPathStrategy::UnitWeights => {
            li::lambda_max_prepared(&design, &WeightVector::unit(data.p()))?
        }
    };
    li::log_spaced_path(
        top,
        cfg.path.n_lambda,
        cfg.path.resolve_min_ratio(data.n(), data.p()),
    )
}

fn map_folds<T, F>(k: usize, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel {
        (0..k).into_par_iter().map(f).collect()
    } else {
        (0..k).map(f).collect()
    }
}

/// Held-out errors of a path fitted on the training rows of `fold`, one per
/// lambda. All-infinite weights give the null model at every lambda.
fn fold_path_errors(
    data: &Dataset,
    w: &WeightVector,
    path: &LambdaPath,
    folds: &FoldAssignment,
    fold: usize,
    solver: &SolverConfig,
) -> Result<Vec<f64>> {
    let train = data.select_rows(&folds.train_indices(fold));
    let test = data.select_rows(&folds.test_indices(fold));
    let fits = if w.all_infinite() {
        let null = null_model(&train, solver);
        vec![null; path.len()]
    } else {
        let design = PreparedDesign::new(&train, solver);
        li::path_prepared(&design, w, path, solver)?
    };
    fits.iter().map(|b| pred_error(&test, b)).collect()
}

fn null_model(data: &Dataset, solver: &SolverConfig) -> CoefficientVector {
    let intercept = if solver.intercept {
        data.y().mean()
    } else {
        0.0
    };
    CoefficientVector::with_intercept(nalgebra::DVector::zeros(data.p()), intercept)
}

fn curve_from_columns(path: LambdaPath, columns: Vec<Vec<f64>>) -> Result<CvCurve> {
    let r = path.len();
    let k = columns.len();
    let errors = DMatrix::from_fn(r, k, |i, j| columns[j][i]);
    CvCurve::from_fold_errors(path, errors)
}

/// Full-sample fit at `path[index]`, warm-started down the path.
fn refit_at(
    data: &Dataset,
    w: &WeightVector,
    path: &LambdaPath,
    index: usize,
    solver: &SolverConfig,
) -> Result<CoefficientVector> {
    let design = PreparedDesign::new(data, solver);
    let head = LambdaPath::new(path.as_slice()[..=index].to_vec())?;
    let mut fits = li::path_prepared(&design, w, &head, solver)?;
    Ok(fits.pop().expect("path is non-empty"))
}

/// Simple K-fold CV with weights `w` held fixed across folds.
pub fn simple_cv_lasso(
    data: &Dataset,
    w: &WeightVector,
    cfg: &CvConfig,
    rng: &mut SeededRng,
) -> Result<CalibratedFit> {
    let folds = partition_folds(data.n(), cfg.folds, rng)?;
    simple_cv_lasso_with_folds(data, w, &folds, cfg)
}

pub fn simple_cv_lasso_with_folds(
    data: &Dataset,
    w: &WeightVector,
    folds: &FoldAssignment,
    cfg: &CvConfig,
) -> Result<CalibratedFit> {
    cfg.solver.validate()?;
    check_folds(data, folds)?;
    let path = calibration_path(data, w, cfg)?;
    let columns = map_folds(folds.k(), cfg.parallel, |k| {
        fold_path_errors(data, w, &path, folds, k, &cfg.solver)
    })?;
    let curve = curve_from_columns(path, columns)?;
    let beta = refit_at(
        data,
        w,
        curve.lambdas(),
        curve.selected_index(),
        &cfg.solver,
    )?;
    Ok(CalibratedFit {
        beta,
        lambda_selected: curve.selected_lambda(),
        curve,
        weights_used: w.clone(),
        scheme: CvScheme::Simple,
        fold_weights: Vec::new(),
    })
}

fn check_folds(data: &Dataset, folds: &FoldAssignment) -> Result<()> {
    if folds.n() != data.n() {
        return Err(Error::Shape(format!(
            "fold assignment covers {} rows, dataset has {}",
            folds.n(),
            data.n()
        )));
    }
    Ok(())
}

/// Ridge with its penalty chosen by simple K-fold CV over
/// [`ridge_lambda_grid`].
pub fn simple_cv_ridge(data: &Dataset, cfg: &CvConfig, rng: &mut SeededRng) -> Result<RidgeCvFit> {
    let folds = partition_folds(data.n(), cfg.folds, rng)?;
    simple_cv_ridge_with_folds(data, &folds, cfg)
}

pub fn simple_cv_ridge_with_folds(
    data: &Dataset,
    folds: &FoldAssignment,
    cfg: &CvConfig,
) -> Result<RidgeCvFit> {
    check_folds(data, folds)?;
    let intercept = cfg.solver.intercept;
    let grid = ridge_lambda_grid(data, cfg.ridge_n_lambda, intercept)?;
    let columns = map_folds(folds.k(), cfg.parallel, |k| {
        let train = data.select_rows(&folds.train_indices(k));
        let test = data.select_rows(&folds.test_indices(k));
        let spectral = RidgePath::new(&train, intercept);
        grid.as_slice()
            .iter()
            .map(|&l| pred_error(&test, &spectral.fit(l)))
            .collect()
    })?;
    let curve = curve_from_columns(grid, columns)?;
    let lambda_selected = curve.selected_lambda();
    Ok(RidgeCvFit {
        beta: ridge_fit(data, lambda_selected, intercept)?,
        lambda_selected,
        curve,
    })
}

/// Step 1 of the adaptive pipeline on `data`. Only the CV-calibrated kinds use
/// `folds`.
pub fn initial_estimate(
    data: &Dataset,
    kind: WeightKind,
    folds: &FoldAssignment,
    cfg: &CvConfig,
) -> Result<CoefficientVector> {
    match kind {
        WeightKind::Unit => Ok(CoefficientVector::from_vec(vec![1.0; data.p()])),
        WeightKind::Ols => ols_fit(data, cfg.solver.intercept),
        WeightKind::RidgeCv => Ok(simple_cv_ridge_with_folds(data, folds, cfg)?.beta),
        WeightKind::LassoCv => {
            Ok(simple_cv_lasso_with_folds(data, &WeightVector::unit(data.p()), folds, cfg)?.beta)
        }
    }
}

/// Weights recomputed from the training rows of one outer fold. The inner CV
/// (ridge or lasso) partitions the training rows with its own stream.
pub fn training_fold_weights(
    train: &Dataset,
    scheme: &WeightScheme,
    cfg: &CvConfig,
    rng: &mut SeededRng,
) -> Result<WeightVector> {
    let beta = match scheme.kind {
        WeightKind::Unit => return Ok(WeightVector::unit(train.p())),
        WeightKind::Ols => ols_fit(train, cfg.solver.intercept)?,
        kind => {
            let inner = partition_folds(train.n(), cfg.folds, rng)?;
            initial_estimate(train, kind, &inner, cfg)?
        }
    };
    Ok(make_weights(&beta, scheme.epsilon))
}

/// Nested K-fold CV: the weights are re-estimated on every training fold.
/// `w` are the full-sample weights, which set the lambda path and the final
/// refit.
pub fn nested_cv_lasso(
    data: &Dataset,
    w: &WeightVector,
    scheme: &WeightScheme,
    cfg: &CvConfig,
    rng: &mut SeededRng,
) -> Result<CalibratedFit> {
    let folds = partition_folds(data.n(), cfg.folds, rng)?;
    nested_cv_lasso_with_folds(data, w, scheme, &folds, cfg, rng)
}

pub fn nested_cv_lasso_with_folds(
    data: &Dataset,
    w: &WeightVector,
    scheme: &WeightScheme,
    folds: &FoldAssignment,
    cfg: &CvConfig,
    rng: &mut SeededRng,
) -> Result<CalibratedFit> {
    cfg.solver.validate()?;
    check_folds(data, folds)?;
    if scheme.kind == WeightKind::Unit {
        return Err(Error::InvalidArgument(
            "nested CV needs data-driven weights; use simple CV for the plain lasso".into(),
        ));
    }
    let path = calibration_path(data, w, cfg)?;
    let seeds: Vec<u64> = (0..folds.k()).map(|_| rng.next_u64()).collect();
    let per_fold = map_folds(folds.k(), cfg.parallel, |k| {
        let train = data.select_rows(&folds.train_indices(k));
        let mut fold_rng = SeededRng::new(seeds[k]);
        let wk = training_fold_weights(&train, scheme, cfg, &mut fold_rng)?;
        let errors = fold_path_errors(data, &wk, &path, folds, k, &cfg.solver)?;
        Ok((wk, errors))
    })?;
    let (fold_weights, columns): (Vec<_>, Vec<_>) = per_fold.into_iter().unzip();
    let curve = curve_from_columns(path, columns)?;
    let beta = refit_at(
        data,
        w,
        curve.lambdas(),
        curve.selected_index(),
        &cfg.solver,
    )?;
    Ok(CalibratedFit {
        beta,
        lambda_selected: curve.selected_lambda(),
        curve,
        weights_used: w.clone(),
        scheme: CvScheme::Nested,
        fold_weights,
    })
}

/// The full adaptive-lasso pipeline: initial estimate and weights on the full
/// sample, then the lambda calibrated by the chosen scheme.
///
/// One outer fold assignment is drawn and shared by the Step-1 CV (for the
/// CV-calibrated initial estimators) and Step 2. `WeightKind::Unit` is the
/// plain lasso and always uses simple CV.
pub fn adaptive_lasso(
    data: &Dataset,
    scheme: &WeightScheme,
    cv: CvScheme,
    cfg: &CvConfig,
    rng: &mut SeededRng,
) -> Result<CalibratedFit> {
    let folds = partition_folds(data.n(), cfg.folds, rng)?;
    if scheme.kind == WeightKind::Unit {
        return simple_cv_lasso_with_folds(data, &WeightVector::unit(data.p()), &folds, cfg);
    }
    let beta_init = initial_estimate(data, scheme.kind, &folds, cfg)?;
    let w = make_weights(&beta_init, scheme.epsilon);
    match cv {
        CvScheme::Simple => simple_cv_lasso_with_folds(data, &w, &folds, cfg),
        CvScheme::Nested => nested_cv_lasso_with_folds(data, &w, scheme, &folds, cfg, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn cfg(k: usize) -> CvConfig {
        CvConfig {
            folds: k,
            path: PathSpec {
                n_lambda: 30,
                min_ratio: None,
            },
            ridge_n_lambda: 30,
            ..Default::default()
        }
    }

    fn sparse_data(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = SeededRng::new(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.normal());
        let y = DVector::from_fn(n, |i, _| 2.0 * x[(i, 0)] - 1.5 * x[(i, 1)] + rng.normal());
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn weights_from_initial_estimate() {
        let b = CoefficientVector::from_vec(vec![2.0, 0.0]);
        assert_eq!(make_weights(&b, 0.0).as_slice(), &[0.5, f64::INFINITY]);
        assert_eq!(make_weights(&b, 0.5).as_slice(), &[0.4, 2.0]);
        assert!(make_weights(&CoefficientVector::zeros(3), 0.0).all_infinite());
        assert!(WeightScheme::new(WeightKind::Ols, -1.0).is_err());
    }

    #[test]
    fn curve_invariants_hold() {
        let d = sparse_data(60, 8, 1);
        let fit =
            simple_cv_lasso(&d, &WeightVector::unit(8), &cfg(5), &mut SeededRng::new(3)).unwrap();
        let c = &fit.curve;
        for r in 0..c.lambdas().len() {
            let m: f64 = c.fold_errors().row(r).iter().sum::<f64>() / 5.0;
            assert!((m - c.mean_errors()[r]).abs() <= 1e-12 * m);
        }
        let min = c
            .mean_errors()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(c.mean_errors()[c.selected_index()], min);
        assert!(c.lambdas().as_slice().contains(&fit.lambda_selected));
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let d = sparse_data(50, 10, 2);
        let scheme = WeightScheme::new(WeightKind::LassoCv, 0.0).unwrap();
        let mut seq = cfg(4);
        seq.parallel = false;
        let a = adaptive_lasso(
            &d,
            &scheme,
            CvScheme::Nested,
            &cfg(4),
            &mut SeededRng::new(9),
        )
        .unwrap();
        let b =
            adaptive_lasso(&d, &scheme, CvScheme::Nested, &seq, &mut SeededRng::new(9)).unwrap();
        assert_eq!(a.beta, b.beta);
        assert_eq!(a.curve, b.curve);
    }

    #[test]
    fn null_fold_gives_mean_square_of_response() {
        // The response is pure noise, so the inner lasso selects nothing on
        // each training fold and every fold weight is infinite.
        let mut rng = SeededRng::new(11);
        let x = DMatrix::from_fn(40, 3, |_, _| rng.normal());
        let y = DVector::from_fn(40, |_, _| 0.01 * rng.normal());
        let d = Dataset::new(x, y).unwrap();
        let full_w = WeightVector::unit(3);
        let scheme = WeightScheme::new(WeightKind::LassoCv, 0.0).unwrap();
        let folds = partition_folds(40, 2, &mut SeededRng::new(1)).unwrap();
        let mut c = cfg(2);
        c.solver.standardize = false;
        let fit =
            nested_cv_lasso_with_folds(&d, &full_w, &scheme, &folds, &c, &mut SeededRng::new(5))
                .unwrap();
        let mut saw_null = false;
        for (k, wk) in fit.fold_weights.iter().enumerate() {
            if wk.all_infinite() {
                saw_null = true;
                let test = d.select_rows(&folds.test_indices(k));
                let msy = test.y().norm_squared() / test.n() as f64;
                for r in 0..fit.curve.lambdas().len() {
                    assert_eq!(fit.curve.fold_errors()[(r, k)], msy);
                }
            }
        }
        assert!(saw_null, "expected at least one null fold");
    }

    #[test]
    fn unit_weights_reject_nested() {
        let d = sparse_data(30, 3, 4);
        let scheme = WeightScheme::new(WeightKind::Unit, 0.0).unwrap();
        assert!(nested_cv_lasso(
            &d,
            &WeightVector::unit(3),
            &scheme,
            &cfg(3),
            &mut SeededRng::new(1)
        )
        .is_err());
    }

    #[test]
    fn unit_path_strategy_uses_unit_lambda_max() {
        let d = sparse_data(40, 5, 6);
        let w = WeightVector::new(vec![0.5, 2.0, 3.0, 1.0, 8.0]).unwrap();
        let mut c = cfg(4);
        c.lambda_path = LambdaPathStrategy::UnitWeights;
        let path = calibration_path(&d, &w, &c).unwrap();
        let unit_max = crate::solvers::lambda_max(&d, &WeightVector::unit(5), &c.solver).unwrap();
        assert_eq!(path.max(), unit_max);
    }
}

mod common;

use adalasso::calibration::{
    adaptive_lasso, calibration_path, initial_estimate, make_weights, nested_cv_lasso_with_folds,
    simple_cv_lasso, simple_cv_lasso_with_folds, simple_cv_ridge, CvConfig, CvScheme, WeightKind,
    WeightScheme,
};
use adalasso::datagen::{CovarianceKind, SupportKind};
use adalasso::experiments::simulate::{paired_rows, run_simulation, DesignGrid, ExperimentConfig};
use adalasso::folds::partition_folds;
use adalasso::metrics::pred_error;
use adalasso::solvers::{ols_fit, weighted_lasso_fit, PathSpec};
use adalasso::{Dataset, Error, SeededRng, WeightVector};
use common::*;

fn small_cfg(k: usize, n_lambda: usize) -> CvConfig {
    CvConfig {
        folds: k,
        path: PathSpec {
            n_lambda,
            min_ratio: None,
        },
        ridge_n_lambda: n_lambda,
        ..Default::default()
    }
}

fn sparse_data(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = SeededRng::new(seed);
    let x = gaussian_design(n, p, &mut rng);
    let mut beta = vec![0.0; p];
    beta[0] = 2.0;
    beta[1.min(p - 1)] = -1.5;
    linear_data(x, &beta, 1.0, &mut rng)
}

/// Replaces row `i` with something far from the rest of the data.
fn perturb_row(data: &Dataset, i: usize) -> Dataset {
    let p = data.p();
    let x: Vec<f64> = (0..p).map(|j| 3.0 + j as f64 * 0.7).collect();
    data.with_row(i, &x, -25.0).unwrap()
}

#[test]
fn nested_fold_weights_ignore_held_out_rows() {
    for kind in [WeightKind::LassoCv, WeightKind::RidgeCv, WeightKind::Ols] {
        let data = sparse_data(20, 3, 9);
        let cfg = small_cfg(2, 20);
        let scheme = WeightScheme::new(kind, 0.0).unwrap();
        let folds = partition_folds(20, 2, &mut SeededRng::new(1)).unwrap();
        let w = WeightVector::unit(3);
        let base =
            nested_cv_lasso_with_folds(&data, &w, &scheme, &folds, &cfg, &mut SeededRng::new(2))
                .unwrap();
        for k in 0..2 {
            for &i in &folds.test_indices(k) {
                let changed = perturb_row(&data, i);
                let fit = nested_cv_lasso_with_folds(
                    &changed,
                    &w,
                    &scheme,
                    &folds,
                    &cfg,
                    &mut SeededRng::new(2),
                )
                .unwrap();
                assert_eq!(
                    fit.fold_weights[k], base.fold_weights[k],
                    "{kind:?} fold {k} row {i}"
                );
                assert_ne!(
                    fit.fold_weights[1 - k],
                    base.fold_weights[1 - k],
                    "{kind:?} fold {k} row {i}"
                );
            }
        }
    }
}

#[test]
fn simple_scheme_weights_see_held_out_rows() {
    let data = sparse_data(40, 6, 3);
    let cfg = small_cfg(4, 30);
    let folds = partition_folds(40, 4, &mut SeededRng::new(5)).unwrap();
    let i = folds.test_indices(0)[0];
    let changed = perturb_row(&data, i);
    for kind in [WeightKind::LassoCv, WeightKind::RidgeCv, WeightKind::Ols] {
        let w = make_weights(&initial_estimate(&data, kind, &folds, &cfg).unwrap(), 0.0);
        let w2 = make_weights(
            &initial_estimate(&changed, kind, &folds, &cfg).unwrap(),
            0.0,
        );
        assert_ne!(w, w2, "{kind:?}");
        // Fold 0 is evaluated on row i, yet its training fit uses w2, which
        // was computed with row i in the sample.
        let fit = simple_cv_lasso_with_folds(&changed, &w2, &folds, &cfg).unwrap();
        assert_eq!(fit.weights_used, w2);
        assert!(fit.fold_weights.is_empty());
    }
}

/// CV error of one fold, recomputed from scratch with cold starts.
fn brute_force_curve(data: &Dataset, w: &WeightVector, cfg: &CvConfig, seed: u64) -> Vec<f64> {
    let folds = partition_folds(data.n(), cfg.folds, &mut SeededRng::new(seed)).unwrap();
    let path = calibration_path(data, w, cfg).unwrap();
    path.as_slice()
        .iter()
        .map(|&lambda| {
            let mut total = 0.0;
            for k in 0..folds.k() {
                let train = data.select_rows(&folds.train_indices(k));
                let test = data.select_rows(&folds.test_indices(k));
                let fit = weighted_lasso_fit(&train, w, lambda, &cfg.solver, None).unwrap();
                total += pred_error(&test, &fit).unwrap();
            }
            total / folds.k() as f64
        })
        .collect()
}

#[test]
fn strong_predictor_is_selected_and_curve_matches_refits() {
    let mut rng = SeededRng::new(40);
    let x = gaussian_design(40, 2, &mut rng);
    let data = linear_data(x, &[5.0, 0.0], 1.0, &mut rng);
    let cfg = small_cfg(5, 50);
    let w = WeightVector::unit(2);
    let fit = simple_cv_lasso(&data, &w, &cfg, &mut SeededRng::new(77)).unwrap();
    assert!(fit.beta.beta[0] > 3.0, "{:?}", fit.beta);

    let oracle = brute_force_curve(&data, &w, &cfg, 77);
    for (r, (a, b)) in fit.curve.mean_errors().iter().zip(&oracle).enumerate() {
        assert!((a - b).abs() < 1e-6 * b.max(1.0), "r = {r}: {a} vs {b}");
    }
    let best = oracle.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(fit.curve.mean_errors()[fit.curve.selected_index()] <= best + 1e-6);
    assert_eq!(
        fit.lambda_selected,
        fit.curve.lambdas().get(fit.curve.selected_index())
    );
}

#[test]
fn ridge_cv_on_pure_noise_shrinks_hard() {
    let mut rng = SeededRng::new(12);
    let x = gaussian_design(80, 20, &mut rng);
    let data = linear_data(x, &[0.0; 20], 1.0, &mut rng);
    let cfg = small_cfg(10, 50);
    let fit = simple_cv_ridge(&data, &cfg, &mut SeededRng::new(1)).unwrap();
    let ols = ols_fit(&data, false).unwrap();
    assert!(
        fit.curve.selected_index() < 10,
        "selected {}",
        fit.curve.selected_index()
    );
    // For a near-orthogonal design ridge shrinks OLS by about 1 / (1 + lambda).
    let shrink = 1.0 / (1.0 + fit.lambda_selected);
    let ratio = fit.beta.beta.norm() / ols.beta.norm();
    assert!(
        ratio < 0.5 && (ratio - shrink).abs() < 0.2,
        "ratio {ratio}, 1/(1+lambda) = {shrink}"
    );
}

#[test]
fn ridge_cv_with_strong_signal_prefers_small_penalties() {
    let mut rng = SeededRng::new(13);
    let x = gaussian_design(80, 10, &mut rng);
    let data = linear_data(
        x,
        &[2.0, -1.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        0.1,
        &mut rng,
    );
    let cfg = small_cfg(10, 50);
    let fit = simple_cv_ridge(&data, &cfg, &mut SeededRng::new(1)).unwrap();
    assert!(
        fit.curve.selected_index() >= 25,
        "selected {}",
        fit.curve.selected_index()
    );
}

#[test]
fn same_seed_same_result() {
    let data = sparse_data(50, 12, 4);
    let cfg = small_cfg(5, 30);
    for kind in [WeightKind::Unit, WeightKind::LassoCv, WeightKind::RidgeCv] {
        for cv in [CvScheme::Simple, CvScheme::Nested] {
            let scheme = WeightScheme::new(kind, 0.0).unwrap();
            let a = adaptive_lasso(&data, &scheme, cv, &cfg, &mut SeededRng::new(8)).unwrap();
            let b = adaptive_lasso(&data, &scheme, cv, &cfg, &mut SeededRng::new(8)).unwrap();
            assert_eq!(a.beta, b.beta);
            assert_eq!(a.curve, b.curve);
            assert_eq!(a.fold_weights, b.fold_weights);
        }
    }
}

#[test]
fn step_one_is_shared_between_schemes() {
    let data = sparse_data(50, 12, 6);
    let cfg = small_cfg(5, 30);
    for kind in [WeightKind::LassoCv, WeightKind::RidgeCv, WeightKind::Ols] {
        let scheme = WeightScheme::new(kind, 0.0).unwrap();
        let s = adaptive_lasso(
            &data,
            &scheme,
            CvScheme::Simple,
            &cfg,
            &mut SeededRng::new(3),
        )
        .unwrap();
        let n = adaptive_lasso(
            &data,
            &scheme,
            CvScheme::Nested,
            &cfg,
            &mut SeededRng::new(3),
        )
        .unwrap();
        assert_eq!(s.weights_used, n.weights_used, "{kind:?}");
        assert_eq!(s.curve.lambdas(), n.curve.lambdas());
        assert_eq!(n.fold_weights.len(), 5);
    }
}

#[test]
fn ols_weights_need_more_rows_than_columns() {
    let data = sparse_data(30, 30, 1);
    let cfg = small_cfg(5, 20);
    let scheme = WeightScheme::new(WeightKind::Ols, 0.0).unwrap();
    for cv in [CvScheme::Simple, CvScheme::Nested] {
        let err = adaptive_lasso(&data, &scheme, cv, &cfg, &mut SeededRng::new(0)).unwrap_err();
        assert!(matches!(err, Error::SingularDesign(_)), "{err:?}");
    }
    // enough rows in full data but not in the training folds
    let data = sparse_data(30, 26, 1);
    let err = adaptive_lasso(
        &data,
        &scheme,
        CvScheme::Nested,
        &cfg,
        &mut SeededRng::new(0),
    )
    .unwrap_err();
    assert!(matches!(err, Error::SingularDesign(_)), "{err:?}");
}

#[test]
fn folds_cover_every_row_once() {
    let fit_cfg = small_cfg(7, 20);
    let data = sparse_data(45, 5, 2);
    let folds = partition_folds(45, 7, &mut SeededRng::new(3)).unwrap();
    let mut seen = [0; 45];
    for k in 0..7 {
        for i in folds.test_indices(k) {
            seen[i] += 1;
        }
    }
    assert!(seen.iter().all(|&c| c == 1));
    let fit = simple_cv_lasso_with_folds(&data, &WeightVector::unit(5), &folds, &fit_cfg).unwrap();
    assert_eq!(fit.curve.fold_errors().ncols(), 7);
}

/// Paired replications on the n = 500, p = 100 design: the nested scheme
/// selects a smaller one-step support than the simple one.
#[test]
fn nested_one_step_is_sparser_on_most_replications() {
    let cfg = ExperimentConfig {
        seed: 77,
        replications: 20,
        test_size: 100,
        methods: vec![
            "one-step/simple".parse().unwrap(),
            "one-step/nested".parse().unwrap(),
        ],
        epsilon: 0.0,
        design: DesignGrid {
            n: 500,
            p: vec![100],
            p0: vec![10],
            beta: vec![1.0],
            noise_sd: 1.0,
            support: SupportKind::Random,
            covariance: CovarianceKind::ArDecay { rho: 0.3 },
        },
        cv: CvConfig::default(),
        output_dir: None,
    };
    let out = run_simulation(&cfg).unwrap();
    let pairs = paired_rows(&out.rows, WeightKind::LassoCv);
    assert_eq!(pairs.len(), 20);
    let sparser = pairs
        .iter()
        .filter(|(s, n)| n.support_size < s.support_size)
        .count();
    assert!(sparser >= 16, "nested support smaller on {sparser}/20");
}

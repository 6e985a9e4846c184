//! Estimation criteria: prediction error and support recovery.

use crate::error::{Error, Result};
use crate::types::{sign, CoefficientVector, Dataset};

/// Mean squared prediction error of `coef` on `data`.
pub fn pred_error(data: &Dataset, coef: &CoefficientVector) -> Result<f64> {
    if coef.len() != data.p() {
        return Err(Error::Shape(format!(
            "{} coefficients for a design with {} columns",
            coef.len(),
            data.p()
        )));
    }
    let resid = data.y() - coef.predict(data.x());
    Ok(resid.norm_squared() / data.n() as f64)
}

fn check_lengths(a: &CoefficientVector, b: &CoefficientVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "coefficient vectors have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Fraction of coordinates whose sign (with `sign(0) = 0`) is recovered.
pub fn signed_support_accuracy(
    beta_true: &CoefficientVector,
    beta_hat: &CoefficientVector,
) -> Result<f64> {
    check_lengths(beta_true, beta_hat)?;
    let matches = beta_true
        .beta
        .iter()
        .zip(beta_hat.beta.iter())
        .filter(|(t, h)| sign(**t) == sign(**h))
        .count();
    Ok(matches as f64 / beta_true.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    /// `None` when nothing was selected.
    pub precision: Option<f64>,
    /// `None` when the true support is empty.
    pub recall: Option<f64>,
}

pub fn precision_recall(
    beta_true: &CoefficientVector,
    beta_hat: &CoefficientVector,
) -> Result<PrecisionRecall> {
    check_lengths(beta_true, beta_hat)?;
    let mut selected = 0usize;
    let mut relevant = 0usize;
    let mut hits = 0usize;
    for (t, h) in beta_true.beta.iter().zip(beta_hat.beta.iter()) {
        let (t, h) = (*t != 0.0, *h != 0.0);
        selected += h as usize;
        relevant += t as usize;
        hits += (t && h) as usize;
    }
    Ok(PrecisionRecall {
        precision: (selected > 0).then(|| hits as f64 / selected as f64),
        recall: (relevant > 0).then(|| hits as f64 / relevant as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn cv(v: &[f64]) -> CoefficientVector {
        CoefficientVector::from_vec(v.to_vec())
    }

    #[test]
    fn pred_error_single_row() {
        let d = Dataset::from_rows(1, 2, &[1.0, 1.0], vec![2.0]).unwrap();
        assert_eq!(pred_error(&d, &cv(&[1.0, 0.0])).unwrap(), 1.0);
        assert!(matches!(pred_error(&d, &cv(&[1.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn pred_error_zero_for_noiseless_truth() {
        let x = DMatrix::from_row_slice(3, 2, &[1., 2., -1., 0.5, 3., 3.]);
        let b = DVector::from_vec(vec![0.5, -1.0]);
        let d = Dataset::new(x.clone(), &x * &b).unwrap();
        assert_eq!(pred_error(&d, &CoefficientVector::new(b)).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_support_metrics() {
        let truth = cv(&[1.0, -1.0, 0.0, 0.0]);
        let hat = cv(&[0.5, -2.0, 0.0, 0.1]);
        assert_eq!(signed_support_accuracy(&truth, &hat).unwrap(), 0.75);
        let pr = precision_recall(&truth, &hat).unwrap();
        assert_eq!(pr.precision, Some(2.0 / 3.0));
        assert_eq!(pr.recall, Some(1.0));
    }

    #[test]
    fn identity_and_empty_cases() {
        let truth = cv(&[1.0, -1.0, 0.0, 0.0]);
        assert_eq!(signed_support_accuracy(&truth, &truth).unwrap(), 1.0);
        let pr = precision_recall(&truth, &truth).unwrap();
        assert_eq!((pr.precision, pr.recall), (Some(1.0), Some(1.0)));

        let dense = cv(&[1.0, 2.0, 3.0]);
        assert_eq!(
            signed_support_accuracy(&dense, &cv(&[0.0; 3])).unwrap(),
            0.0
        );
        let pr = precision_recall(&truth, &cv(&[0.0; 4])).unwrap();
        assert_eq!(pr.precision, None);
        assert_eq!(pr.recall, Some(0.0));
        assert!(precision_recall(&truth, &cv(&[0.0; 3])).is_err());
    }

    fn coef_strategy(p: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), -3.0..3.0f64], p)
    }

    proptest! {
        #[test]
        fn metric_ranges_and_exact_recovery((t, h) in (1usize..20).prop_flat_map(|p| (coef_strategy(p), coef_strategy(p)))) {
            let (t, h) = (cv(&t), cv(&h));
            let acc = signed_support_accuracy(&t, &h).unwrap();
            prop_assert!((0.0..=1.0).contains(&acc));
            let pr = precision_recall(&t, &h).unwrap();
            if let Some(p) = pr.precision { prop_assert!((0.0..=1.0).contains(&p)); }
            if let Some(r) = pr.recall {
                prop_assert!((0.0..=1.0).contains(&r));
                let same = t.support() == h.support();
                prop_assert_eq!(pr.precision == Some(1.0) && r == 1.0, same);
            }
        }

        #[test]
        fn pred_error_invariant_to_permutations(seed in any::<u64>(), n in 2usize..12, p in 1usize..6) {
            let mut rng = crate::rng::SeededRng::new(seed);
            let x = DMatrix::from_fn(n, p, |_, _| rng.normal());
            let y = DVector::from_fn(n, |_, _| rng.normal());
            let b = DVector::from_fn(p, |_, _| rng.normal());
            let d = Dataset::new(x.clone(), y.clone()).unwrap();
            let base = pred_error(&d, &CoefficientVector::new(b.clone())).unwrap();

            let rows = rng.permutation(n);
            let rd = d.select_rows(&rows);
            let e_rows = pred_error(&rd, &CoefficientVector::new(b.clone())).unwrap();
            prop_assert!((e_rows - base).abs() <= 1e-12 * base.max(1.0));

            let cols = rng.permutation(p);
            let cd = Dataset::new(x.select_columns(&cols), y).unwrap();
            let cb = DVector::from_iterator(p, cols.iter().map(|&j| b[j]));
            let e_cols = pred_error(&cd, &CoefficientVector::new(cb)).unwrap();
            prop_assert!((e_cols - base).abs() <= 1e-12 * base.max(1.0));
        }
    }
}

use crate::error::{Error, Result};
use crate::types::{CoefficientVector, Dataset, WeightVector};

/// Outcome of checking the subgradient optimality conditions of
/// `(1/n)||y - X b - c||^2 + lambda * sum_j w_j |b_j|` on the original data.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Largest violation over penalized coordinates.
    pub max_violation: f64,
    pub worst_coordinate: Option<usize>,
    /// Coordinates with infinite weight that are not exactly zero.
    pub excluded_nonzero: Vec<usize>,
    /// `|2 * mean(residual)|` when an intercept was fitted, else 0.
    pub intercept_violation: f64,
}

impl KktReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.excluded_nonzero.is_empty()
            && self.max_violation <= tol
            && self.intercept_violation <= tol
    }
}

/// Checks a candidate solution with plain loops over the raw data, sharing no
/// code with the coordinate-descent solver. `weights` must be the effective
/// weights on the original scale (see `effective_weights`).
///
/// With `g_j = (2/n) x_j^T (y - X b - c)`, the conditions are
/// `g_j = lambda * w_j * sign(b_j)` when `b_j != 0` and `|g_j| <= lambda * w_j`
/// when `b_j == 0`.
pub fn kkt_certificate(
    data: &Dataset,
    coef: &CoefficientVector,
    weights: &WeightVector,
    lambda: f64,
    intercept: bool,
) -> Result<KktReport> {
    let n = data.n();
    let p = data.p();
    if coef.len() != p || weights.len() != p {
        return Err(Error::Shape(format!(
            "coefficients ({}) and weights ({}) must both have length {p}",
            coef.len(),
            weights.len()
        )));
    }
    let x = data.x();
    let y = data.y();

    let mut resid = vec![0.0; n];
    for (i, r) in resid.iter_mut().enumerate() {
        let mut fitted = coef.intercept;
        for j in 0..p {
            fitted += x[(i, j)] * coef.beta[j];
        }
        *r = y[i] - fitted;
    }

    let mut report = KktReport {
        max_violation: 0.0,
        worst_coordinate: None,
        excluded_nonzero: Vec::new(),
        intercept_violation: 0.0,
    };
    if intercept {
        report.intercept_violation = (2.0 * resid.iter().sum::<f64>() / n as f64).abs();
    }
    for j in 0..p {
        let w = weights.get(j);
        let b = coef.beta[j];
        if w.is_infinite() {
            if b != 0.0 {
                report.excluded_nonzero.push(j);
            }
            continue;
        }
        let mut g = 0.0;
        for i in 0..n {
            g += x[(i, j)] * resid[i];
        }
        g *= 2.0 / n as f64;
        let bound = lambda * w;
        let violation = if b > 0.0 {
            (g - bound).abs()
        } else if b < 0.0 {
            (g + bound).abs()
        } else {
            (g.abs() - bound).max(0.0)
        };
        if violation > report.max_violation {
            report.max_violation = violation;
            report.worst_coordinate = Some(j);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_a_non_optimal_point() {
        // (1 - b)^2 + lambda |b| with lambda = 1 is minimized at b = 0.5.
        let d = Dataset::from_rows(2, 1, &[1.0, -1.0], vec![1.0, -1.0]).unwrap();
        let w = WeightVector::unit(1);
        let good =
            kkt_certificate(&d, &CoefficientVector::from_vec(vec![0.5]), &w, 1.0, false).unwrap();
        assert!(good.passes(1e-12));
        let bad =
            kkt_certificate(&d, &CoefficientVector::from_vec(vec![0.3]), &w, 1.0, false).unwrap();
        assert!((bad.max_violation - 0.4).abs() < 1e-12);
        assert!(!bad.passes(1e-3));
        let zero = kkt_certificate(&d, &CoefficientVector::zeros(1), &w, 1.0, false).unwrap();
        assert!((zero.max_violation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excluded_coordinate_must_be_zero() {
        let d = Dataset::from_rows(2, 1, &[1.0, -1.0], vec![1.0, -1.0]).unwrap();
        let w = WeightVector::new(vec![f64::INFINITY]).unwrap();
        let rep =
            kkt_certificate(&d, &CoefficientVector::from_vec(vec![0.1]), &w, 1.0, false).unwrap();
        assert_eq!(rep.excluded_nonzero, vec![0]);
        assert!(!rep.passes(1.0));
    }
}

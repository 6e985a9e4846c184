//! Domain types shared by the solvers, the calibration schemes and the
//! simulation harness. All of them validate their invariants on construction
//! and are immutable afterwards, so they can be shared across worker threads.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A response vector paired with its dense design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Shape(format!(
                "design has {} rows but response has length {}",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Shape(format!(
                "dataset must have n >= 1 and p >= 1 (got n = {}, p = {})",
                x.nrows(),
                x.ncols()
            )));
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "response",
                index,
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "design",
                index,
            });
        }
        Ok(Self { x, y })
    }

    /// Builds a dataset from row-major design values.
    pub fn from_rows(n: usize, p: usize, x_row_major: &[f64], y: Vec<f64>) -> Result<Self> {
        if x_row_major.len() != n * p {
            return Err(Error::Shape(format!(
                "expected {} design values for {n}x{p}, got {}",
                n * p,
                x_row_major.len()
            )));
        }
        Self::new(
            DMatrix::from_row_slice(n, p, x_row_major),
            DVector::from_vec(y),
        )
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Sub-sample holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(rows),
            y: self.y.select_rows(rows),
        }
    }

    /// Returns a copy with row `row` replaced. Used to probe leakage.
    pub fn with_row(&self, row: usize, x_row: &[f64], y: f64) -> Result<Dataset> {
        if x_row.len() != self.p() || row >= self.n() {
            return Err(Error::Shape(format!(
                "row {row} with {} values does not fit a {}x{} dataset",
                x_row.len(),
                self.n(),
                self.p()
            )));
        }
        let mut out = self.clone();
        for (j, v) in x_row.iter().enumerate() {
            out.x[(row, j)] = *v;
        }
        out.y[row] = y;
        Dataset::new(out.x, out.y)
    }
}

/// A dense coefficient estimate, plus the intercept when one was fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub beta: DVector<f64>,
    pub intercept: f64,
}

impl CoefficientVector {
    pub fn new(beta: DVector<f64>) -> Self {
        Self {
            beta,
            intercept: 0.0,
        }
    }

    pub fn with_intercept(beta: DVector<f64>, intercept: f64) -> Self {
        Self { beta, intercept }
    }

    pub fn zeros(p: usize) -> Self {
        Self::new(DVector::zeros(p))
    }

    pub fn from_vec(beta: Vec<f64>) -> Self {
        Self::new(DVector::from_vec(beta))
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    /// Indices of the exactly-nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }

    /// Sign pattern with `sign(0) = 0`.
    pub fn signed_support(&self) -> Vec<i8> {
        self.beta.iter().map(|b| sign(*b)).collect()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut out = x * &self.beta;
        out.add_scalar_mut(self.intercept);
        out
    }
}

pub(crate) fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Non-negative penalty weights. `+inf` marks a coordinate that is forced to
/// zero and skipped by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    /// Validates that every entry is `>= 0` (infinity allowed, NaN rejected).
    /// An all-infinite vector is representable; the solvers reject it.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(j) = w.iter().position(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weight {j} is {} (must be >= 0)",
                w[j]
            )));
        }
        Ok(Self { w })
    }

    pub fn unit(p: usize) -> Self {
        Self { w: vec![1.0; p] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.w[j]
    }

    pub fn is_excluded(&self, j: usize) -> bool {
        self.w[j].is_infinite()
    }

    pub fn all_infinite(&self) -> bool {
        self.w.iter().all(|v| v.is_infinite())
    }

    /// Multiplies every weight by the matching factor. Infinite weights stay
    /// infinite.
    pub fn scaled(&self, factors: &[f64]) -> WeightVector {
        WeightVector {
            w: self
                .w
                .iter()
                .zip(factors)
                .map(|(w, s)| if w.is_infinite() { *w } else { w * s })
                .collect(),
        }
    }
}

/// Strictly decreasing, strictly positive candidate penalty levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPath {
    lambdas: Vec<f64>,
}

impl LambdaPath {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument("lambda path is empty".into()));
        }
        if let Some(r) = lambdas.iter().position(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "lambda[{r}] = {} is not a positive finite value",
                lambdas[r]
            )));
        }
        if let Some(r) = lambdas.windows(2).position(|w| w[0] <= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "lambda path is not strictly decreasing at index {r}"
            )));
        }
        Ok(Self { lambdas })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn get(&self, r: usize) -> f64 {
        self.lambdas[r]
    }
}

/// Balanced assignment of `n` observations to `k` folds. Folds are numbered
/// `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn new(fold_of: Vec<usize>, k: usize) -> Result<Self> {
        let n = fold_of.len();
        if k < 2 || k > n {
            return Err(Error::InvalidFolds { n, k });
        }
        let mut sizes = vec![0usize; k];
        for &f in &fold_of {
            if f >= k {
                return Err(Error::InvalidArgument(format!(
                    "fold label {f} out of range 0..{k}"
                )));
            }
            sizes[f] += 1;
        }
        let min = *sizes.iter().min().unwrap();
        let max = *sizes.iter().max().unwrap();
        if min == 0 || max - min > 1 {
            return Err(Error::InvalidArgument(format!(
                "folds are not balanced: sizes {sizes:?}"
            )));
        }
        Ok(Self { fold_of, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.fold_of.len()
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Cross-validated prediction errors over a lambda path.
#[derive(Debug, Clone, PartialEq)]
pub struct CvCurve {
    lambdas: LambdaPath,
    /// `fold_errors[(r, k)]`: mean squared error on fold `k` at `lambdas[r]`.
    fold_errors: DMatrix<f64>,
    mean_errors: Vec<f64>,
    selected_index: usize,
}

impl CvCurve {
    /// Averages the per-fold errors and selects the minimizing index. Ties go
    /// to the smaller index, i.e. the larger lambda.
    pub fn from_fold_errors(lambdas: LambdaPath, fold_errors: DMatrix<f64>) -> Result<Self> {
        if fold_errors.nrows() != lambdas.len() || fold_errors.ncols() == 0 {
            return Err(Error::Shape(format!(
                "fold error matrix is {}x{} for a path of length {}",
                fold_errors.nrows(),
                fold_errors.ncols(),
                lambdas.len()
            )));
        }
        if let Some(index) = fold_errors.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "fold errors",
                index,
            });
        }
        let k = fold_errors.ncols() as f64;
        let mean_errors: Vec<f64> = fold_errors
            .row_iter()
            .map(|row| row.iter().sum::<f64>() / k)
            .collect();
        let selected_index = argmin_first(&mean_errors);
        Ok(Self {
            lambdas,
            fold_errors,
            mean_errors,
            selected_index,
        })
    }

    pub fn lambdas(&self) -> &LambdaPath {
        &self.lambdas
    }

    pub fn fold_errors(&self) -> &DMatrix<f64> {
        &self.fold_errors
    }

    pub fn mean_errors(&self) -> &[f64] {
        &self.mean_errors
    }

    pub fn selected_index(&self) -> usize {
        self.selected_index
    }

    pub fn selected_lambda(&self) -> f64 {
        self.lambdas.get(self.selected_index)
    }
}

/// Index of the first minimum.
pub fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

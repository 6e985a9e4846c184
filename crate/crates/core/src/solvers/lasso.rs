use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::solvers::{PreparedDesign, SolverConfig};
use crate::types::{CoefficientVector, Dataset, LambdaPath, WeightVector};

/// Cyclic coordinate descent on the weighted lasso criterion, working on a
/// [`PreparedDesign`]. Coordinates with infinite weight (and constant columns)
/// are never visited and stay at exactly zero.
///
/// The solver keeps the residual `y - Z b` up to date, so a sweep costs one
/// pass over the design.
pub struct CoordinateDescent<'a> {
    design: &'a PreparedDesign,
    weights: &'a [f64],
    lambda: f64,
    beta: DVector<f64>,
    resid: DVector<f64>,
    active: Vec<usize>,
    sweeps: usize,
}

impl<'a> CoordinateDescent<'a> {
    /// `warm_start` is on the internal (scaled) coordinate system; see
    /// [`PreparedDesign::to_internal`].
    pub fn new(
        design: &'a PreparedDesign,
        weights: &'a WeightVector,
        lambda: f64,
        warm_start: Option<&DVector<f64>>,
    ) -> Result<Self> {
        let p = design.p();
        if weights.len() != p {
            return Err(Error::Shape(format!(
                "{} weights for {} coordinates",
                weights.len(),
                p
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        if weights.all_infinite() {
            return Err(Error::DegenerateWeights);
        }
        let weights = weights.as_slice();
        let active: Vec<usize> = (0..p)
            .filter(|&j| weights[j].is_finite() && design.col_sq[j] > 0.0)
            .collect();

        let mut beta = DVector::zeros(p);
        if let Some(warm) = warm_start {
            if warm.len() != p {
                return Err(Error::Shape(format!(
                    "warm start has length {}, expected {p}",
                    warm.len()
                )));
            }
            for &j in &active {
                beta[j] = warm[j];
            }
        }
        let mut resid = design.y.clone();
        for &j in &active {
            if beta[j] != 0.0 {
                resid.axpy(-beta[j], &design.z.column(j), 1.0);
            }
        }
        Ok(Self {
            design,
            weights,
            lambda,
            beta,
            resid,
            active,
            sweeps: 0,
        })
    }

    /// One full cyclic pass. Returns the largest scaled coordinate change.
    pub fn sweep(&mut self) -> f64 {
        let n = self.design.n() as f64;
        let mut max_change: f64 = 0.0;
        for &j in &self.active {
            let a = self.design.col_sq[j];
            let col = self.design.z.column(j);
            let old = self.beta[j];
            let g = col.dot(&self.resid) / n + a * old;
            let w = self.weights[j];
            let new = if w == 0.0 {
                g / a
            } else if 2.0 * g.abs() / w <= self.lambda {
                0.0
            } else {
                (g - g.signum() * self.lambda * w / 2.0) / a
            };
            if new != old {
                self.resid.axpy(old - new, &col, 1.0);
                self.beta[j] = new;
                max_change = max_change.max(a.sqrt() * (new - old).abs());
            }
        }
        self.sweeps += 1;
        max_change
    }

    /// Penalized criterion at the current iterate.
    pub fn objective(&self) -> f64 {
        let n = self.design.n() as f64;
        let penalty: f64 = self
            .active
            .iter()
            .filter(|&&j| self.beta[j] != 0.0)
            .map(|&j| self.weights[j] * self.beta[j].abs())
            .sum();
        self.resid.norm_squared() / n + self.lambda * penalty
    }

    /// Subgradient conditions on the internal scale. Coordinate `j` is allowed
    /// a slack of `slack * sqrt(||z_j||^2 / n)`.
    pub fn kkt_holds(&self, slack: f64) -> bool {
        let n = self.design.n() as f64;
        self.active.iter().all(|&j| {
            let g = 2.0 * self.design.z.column(j).dot(&self.resid) / n;
            let bound = self.lambda * self.weights[j];
            let tol = slack * self.design.col_sq[j].sqrt();
            let b = self.beta[j];
            if b != 0.0 {
                (g - bound * b.signum()).abs() <= tol
            } else {
                g.abs() <= bound + tol
            }
        })
    }

    /// Sweeps until the largest change drops below `cfg.tol` and the KKT
    /// conditions hold within `10 * cfg.tol`.
    pub fn solve(&mut self, cfg: &SolverConfig) -> Result<()> {
        let mut last_change = f64::INFINITY;
        while self.sweeps < cfg.max_sweeps {
            last_change = self.sweep();
            if last_change < cfg.tol && self.kkt_holds(10.0 * cfg.tol) {
                return Ok(());
            }
        }
        Err(Error::Convergence {
            sweeps: self.sweeps,
            last_change,
            last_iterate: Box::new(self.design.to_original(&self.beta)),
        })
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn into_beta(self) -> DVector<f64> {
        self.beta
    }
}

/// Minimizer of `(1/n)||y - X b||^2 + lambda * sum_j w_j |b_j|`.
///
/// With `cfg.standardize` the weights apply to the standardized coefficients,
/// i.e. the effective weights on the original scale are
/// [`effective_weights`].
pub fn weighted_lasso_fit(
    data: &Dataset,
    w: &WeightVector,
    lambda: f64,
    cfg: &SolverConfig,
    warm_start: Option<&CoefficientVector>,
) -> Result<CoefficientVector> {
    cfg.validate()?;
    let design = PreparedDesign::new(data, cfg);
    let warm = warm_start.map(|c| design.to_internal(c));
    let beta = fit_prepared(&design, w, lambda, cfg, warm.as_ref())?;
    Ok(design.to_original(&beta))
}

pub(crate) fn fit_prepared(
    design: &PreparedDesign,
    w: &WeightVector,
    lambda: f64,
    cfg: &SolverConfig,
    warm: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    let mut cd = CoordinateDescent::new(design, w, lambda, warm)?;
    cd.solve(cfg)?;
    Ok(cd.into_beta())
}

/// Weights as they act on the original-scale coefficients.
pub fn effective_weights(data: &Dataset, w: &WeightVector, cfg: &SolverConfig) -> WeightVector {
    w.scaled(PreparedDesign::new(data, cfg).scale())
}

/// Smallest lambda for which the fit is identically zero:
/// `max_j 2 |x_j^T y| / (n w_j)` over coordinates with `0 < w_j < inf`.
pub fn lambda_max(data: &Dataset, w: &WeightVector, cfg: &SolverConfig) -> Result<f64> {
    lambda_max_prepared(&PreparedDesign::new(data, cfg), w)
}

pub(crate) fn lambda_max_prepared(design: &PreparedDesign, w: &WeightVector) -> Result<f64> {
    let p = design.p();
    if w.len() != p {
        return Err(Error::Shape(format!(
            "{} weights for {p} coordinates",
            w.len()
        )));
    }
    if w.all_infinite() {
        return Err(Error::DegenerateWeights);
    }
    let n = design.n() as f64;
    let mut best: f64 = 0.0;
    for j in 0..p {
        let wj = w.get(j);
        if wj.is_infinite() || design.col_sq[j] == 0.0 {
            continue;
        }
        if wj == 0.0 {
            return Err(Error::UnpenalizedCoordinate(j));
        }
        // Same expression as the zero test in `CoordinateDescent::sweep`, so a
        // fit at exactly lambda_max is exactly zero.
        let g = design.z.column(j).dot(&design.y) / n;
        best = best.max(2.0 * g.abs() / wj);
    }
    if best > 0.0 {
        Ok(best)
    } else {
        Err(Error::ZeroSignal)
    }
}

/// `n_lambda` log-equally spaced values from lambda_max down to
/// `min_ratio * lambda_max`.
pub fn build_lambda_path(
    data: &Dataset,
    w: &WeightVector,
    n_lambda: usize,
    min_ratio: f64,
    cfg: &SolverConfig,
) -> Result<LambdaPath> {
    let lmax = lambda_max(data, w, cfg)?;
    log_spaced_path(lmax, n_lambda, min_ratio)
}

pub(crate) fn log_spaced_path(top: f64, n_lambda: usize, min_ratio: f64) -> Result<LambdaPath> {
    if n_lambda < 2 {
        return Err(Error::InvalidArgument(format!(
            "a lambda path needs at least 2 values, got {n_lambda}"
        )));
    }
    if !(min_ratio > 0.0 && min_ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "min_ratio must lie in (0, 1), got {min_ratio}"
        )));
    }
    let last = (n_lambda - 1) as f64;
    LambdaPath::new(
        (0..n_lambda)
            .map(|r| top * min_ratio.powf(r as f64 / last))
            .collect(),
    )
}

/// Fits every lambda of the path in decreasing order, each warm-started from
/// the previous solution.
pub fn lasso_path_fit(
    data: &Dataset,
    w: &WeightVector,
    path: &LambdaPath,
    cfg: &SolverConfig,
) -> Result<Vec<CoefficientVector>> {
    cfg.validate()?;
    let design = PreparedDesign::new(data, cfg);
    path_prepared(&design, w, path, cfg)
}

pub(crate) fn path_prepared(
    design: &PreparedDesign,
    w: &WeightVector,
    path: &LambdaPath,
    cfg: &SolverConfig,
) -> Result<Vec<CoefficientVector>> {
    let mut out = Vec::with_capacity(path.len());
    let mut warm: Option<DVector<f64>> = None;
    for &lambda in path.as_slice() {
        let beta = fit_prepared(design, w, lambda, cfg, warm.as_ref())?;
        out.push(design.to_original(&beta));
        warm = Some(beta);
    }
    Ok(out)
}

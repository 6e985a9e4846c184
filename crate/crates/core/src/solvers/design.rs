use nalgebra::{DMatrix, DVector};

use crate::solvers::SolverConfig;
use crate::types::{CoefficientVector, Dataset};

/// A design matrix transformed once for repeated fitting: centered when an
/// intercept is fitted, scaled to unit standard deviation when standardizing.
///
/// Scale factors use a `1/n` divisor. Without an intercept the columns are not
/// centered and the scale is the root mean square.
#[derive(Debug, Clone)]
pub struct PreparedDesign {
    pub(crate) z: DMatrix<f64>,
    pub(crate) y: DVector<f64>,
    pub(crate) x_mean: DVector<f64>,
    pub(crate) y_mean: f64,
    pub(crate) scale: Vec<f64>,
    /// `||z_j||^2 / n`; zero marks a constant column that can never enter.
    pub(crate) col_sq: Vec<f64>,
    intercept: bool,
}

impl PreparedDesign {
    pub fn new(data: &Dataset, cfg: &SolverConfig) -> Self {
        let n = data.n();
        let p = data.p();
        let nf = n as f64;
        let mut z = data.x().clone();
        let mut y = data.y().clone();

        let (x_mean, y_mean) = if cfg.intercept {
            let x_mean = DVector::from_iterator(p, z.column_iter().map(|c| c.sum() / nf));
            let y_mean = y.sum() / nf;
            for (j, mut col) in z.column_iter_mut().enumerate() {
                col.add_scalar_mut(-x_mean[j]);
            }
            y.add_scalar_mut(-y_mean);
            (x_mean, y_mean)
        } else {
            (DVector::zeros(p), 0.0)
        };

        let mut scale = vec![1.0; p];
        let mut col_sq = vec![0.0; p];
        for (j, mut col) in z.column_iter_mut().enumerate() {
            let sq = col.norm_squared() / nf;
            if cfg.standardize && sq > 0.0 {
                let s = sq.sqrt();
                col.unscale_mut(s);
                scale[j] = s;
                col_sq[j] = col.norm_squared() / nf;
            } else {
                col_sq[j] = sq;
            }
        }

        Self {
            z,
            y,
            x_mean,
            y_mean,
            scale,
            col_sq,
            intercept: cfg.intercept,
        }
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn p(&self) -> usize {
        self.z.ncols()
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Coefficients on the original scale, with the intercept restored.
    pub fn to_original(&self, internal: &DVector<f64>) -> CoefficientVector {
        let beta = DVector::from_iterator(
            self.p(),
            internal.iter().zip(&self.scale).map(|(g, s)| g / s),
        );
        let intercept = if self.intercept {
            self.y_mean - self.x_mean.dot(&beta)
        } else {
            0.0
        };
        CoefficientVector::with_intercept(beta, intercept)
    }

    pub fn to_internal(&self, coef: &CoefficientVector) -> DVector<f64> {
        DVector::from_iterator(
            self.p(),
            coef.beta.iter().zip(&self.scale).map(|(b, s)| b * s),
        )
    }
}

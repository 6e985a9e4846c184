//! Seeded synthetic data from the sparse Gaussian linear model
//! `y = X b* + noise`, with rows `x_i ~ N(0, Sigma)`.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::types::{CoefficientVector, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CovarianceKind {
    Identity,
    /// `Sigma[k][j] = rho^|k - j|`.
    ArDecay {
        rho: f64,
    },
    /// `p x p` comma-separated matrix without header.
    File {
        path: PathBuf,
    },
    /// [`stand_in_covariance`]; requires `p = 44`.
    StandIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportKind {
    /// The first `p0` coordinates.
    FirstP0,
    /// `p0` coordinates drawn uniformly without replacement.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDesign {
    pub n: usize,
    pub p: usize,
    /// Number of relevant covariates.
    pub p0: usize,
    /// Magnitude of every nonzero coefficient.
    pub beta_mag: f64,
    pub covariance: CovarianceKind,
    pub noise_sd: f64,
    pub support: SupportKind,
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n == 0 || self.p == 0 {
            return bad(format!(
                "n and p must be positive (n = {}, p = {})",
                self.n, self.p
            ));
        }
        if self.p0 > self.p {
            return bad(format!("p0 = {} exceeds p = {}", self.p0, self.p));
        }
        if !(self.beta_mag > 0.0 && self.beta_mag.is_finite()) {
            return bad(format!(
                "beta magnitude must be positive, got {}",
                self.beta_mag
            ));
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) && self.noise_sd != 0.0 {
            return bad(format!("noise sd must be >= 0, got {}", self.noise_sd));
        }
        if let CovarianceKind::ArDecay { rho } = self.covariance {
            if !(0.0..1.0).contains(&rho) {
                return bad(format!("AR decay rho must lie in [0, 1), got {rho}"));
            }
        }
        Ok(())
    }
}

pub const STAND_IN_P: usize = 44;

/// Synthetic stand-in for an empirical covariance of 44 correlated
/// predictors: `AR_DECAY(0.6)` with `p = 44`. It is not derived from any
/// real data set.
pub fn stand_in_covariance() -> DMatrix<f64> {
    ar_decay(STAND_IN_P, 0.6)
}

fn ar_decay(p: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |k, j| rho.powi(k.abs_diff(j) as i32))
}

pub fn build_covariance(design: &SimDesign) -> Result<DMatrix<f64>> {
    design.validate()?;
    let sigma = match &design.covariance {
        CovarianceKind::Identity => DMatrix::identity(design.p, design.p),
        CovarianceKind::ArDecay { rho } => ar_decay(design.p, *rho),
        CovarianceKind::File { path } => {
            let m = load_covariance_csv(path)?;
            if m.nrows() != design.p {
                return Err(Error::InvalidCovariance(format!(
                    "{} is {}x{} but the design has p = {}",
                    path.display(),
                    m.nrows(),
                    m.ncols(),
                    design.p
                )));
            }
            m
        }
        CovarianceKind::StandIn => {
            if design.p != STAND_IN_P {
                return Err(Error::InvalidCovariance(format!(
                    "the stand-in covariance has p = {STAND_IN_P}, the design has p = {}",
                    design.p
                )));
            }
            stand_in_covariance()
        }
    };
    Ok(sigma)
}

/// Reads a symmetric positive (semi-)definite matrix and symmetrizes it
/// exactly. Asymmetry or negative eigenvalues beyond `1e-8` (relative to the
/// largest entry) are rejected.
pub fn load_covariance_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("'{}': {e}", v.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let p = rows.len();
    if p == 0 {
        return Err(Error::InvalidCovariance(format!(
            "{} is empty",
            path.display()
        )));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != p) {
        return Err(Error::InvalidCovariance(format!(
            "row {} has {} entries, expected {p}",
            i + 1,
            rows[i].len()
        )));
    }
    let m = DMatrix::from_fn(p, p, |i, j| rows[i][j]);
    validate_covariance(&m)?;
    Ok((&m + m.transpose()) * 0.5)
}

pub fn validate_covariance(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidCovariance("matrix is not square".into()));
    }
    if let Some(i) = m.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidCovariance(format!("entry {i} is not finite")));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let tol = 1e-8 * scale;
    let asym = (m - m.transpose()).amax();
    if asym > tol {
        return Err(Error::InvalidCovariance(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let min = eig.eigenvalues.min();
    if min < -tol {
        return Err(Error::InvalidCovariance(format!(
            "matrix is not positive semi-definite (smallest eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Factor `F` with `F F^T = Sigma`: Cholesky when it succeeds, otherwise a
/// symmetric eigendecomposition with eigenvalues clipped at `1e-10`.
pub fn covariance_factor(sigma: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = sigma.clone().cholesky() {
        return chol.l();
    }
    let eig = SymmetricEigen::new(sigma.clone());
    let clipped = eig.eigenvalues.iter().filter(|&&d| d < 1e-10).count();
    log::warn!(
        "covariance is not numerically positive definite; clipping {clipped} eigenvalue(s) at 1e-10"
    );
    let roots = eig.eigenvalues.map(|d| d.max(1e-10).sqrt());
    let mut factor = eig.eigenvectors;
    for (j, mut col) in factor.column_iter_mut().enumerate() {
        col *= roots[j];
    }
    factor
}

/// Random sparse truth: `p0` coordinates of magnitude `beta_mag` with fair
/// random signs.
pub fn draw_beta_star(design: &SimDesign, rng: &mut SeededRng) -> CoefficientVector {
    let support = match design.support {
        SupportKind::FirstP0 => (0..design.p0).collect::<Vec<_>>(),
        SupportKind::Random => rng.sample_without_replacement(design.p, design.p0),
    };
    let mut beta = DVector::zeros(design.p);
    for j in support {
        beta[j] = if rng.coin() {
            design.beta_mag
        } else {
            -design.beta_mag
        };
    }
    CoefficientVector::new(beta)
}

/// Draws samples for a fixed design, reusing one covariance factor.
#[derive(Debug, Clone)]
pub struct Simulator {
    design: SimDesign,
    /// `None` for the identity covariance.
    factor: Option<DMatrix<f64>>,
}

impl Simulator {
    pub fn new(design: &SimDesign) -> Result<Self> {
        let factor = match design.covariance {
            CovarianceKind::Identity => {
                design.validate()?;
                None
            }
            _ => Some(covariance_factor(&build_covariance(design)?)),
        };
        Ok(Self {
            design: design.clone(),
            factor,
        })
    }

    pub fn design(&self) -> &SimDesign {
        &self.design
    }

    /// `m` independent rows. Each row consumes `p` normals for the covariates
    /// followed by one for the noise.
    pub fn sample(
        &self,
        beta_star: &CoefficientVector,
        m: usize,
        rng: &mut SeededRng,
    ) -> Result<Dataset> {
        let p = self.design.p;
        if m == 0 {
            return Err(Error::InvalidArgument("sample size must be >= 1".into()));
        }
        if beta_star.len() != p {
            return Err(Error::Shape(format!(
                "beta* has length {}, design has p = {p}",
                beta_star.len()
            )));
        }
        let mut z = DMatrix::zeros(m, p);
        let mut noise = DVector::zeros(m);
        for i in 0..m {
            for j in 0..p {
                z[(i, j)] = rng.normal();
            }
            noise[i] = rng.normal();
        }
        let x = match &self.factor {
            None => z,
            Some(f) => z * f.transpose(),
        };
        let y = &x * &beta_star.beta + noise * self.design.noise_sd;
        Dataset::new(x, y)
    }
}

pub fn sample_dataset(
    design: &SimDesign,
    beta_star: &CoefficientVector,
    m: usize,
    rng: &mut SeededRng,
) -> Result<Dataset> {
    Simulator::new(design)?.sample(beta_star, m, rng)
}

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{adaptive_lasso, CvConfig, CvScheme, WeightKind, WeightScheme};
use crate::datagen::{draw_beta_star, CovarianceKind, SimDesign, Simulator, SupportKind};
use crate::error::{Error, Result};
use crate::experiments::stats::MeanCi;
use crate::experiments::Method;
use crate::metrics::{precision_recall, pred_error, signed_support_accuracy};
use crate::rng::SeededRng;
use crate::types::{CoefficientVector, Dataset};

/// Factorial grid of simulation designs. Every combination of `p`, `p0` and
/// `beta` is one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignGrid {
    pub n: usize,
    pub p: Vec<usize>,
    pub p0: Vec<usize>,
    pub beta: Vec<f64>,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    #[serde(default = "default_support")]
    pub support: SupportKind,
    #[serde(default = "default_covariance")]
    pub covariance: CovarianceKind,
}

fn default_noise_sd() -> f64 {
    1.0
}

fn default_support() -> SupportKind {
    SupportKind::Random
}

fn default_covariance() -> CovarianceKind {
    CovarianceKind::Identity
}

impl DesignGrid {
    pub fn cells(&self) -> Vec<SimDesign> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &p0 in &self.p0 {
                for &beta_mag in &self.beta {
                    out.push(SimDesign {
                        n: self.n,
                        p,
                        p0,
                        beta_mag,
                        covariance: self.covariance.clone(),
                        noise_sd: self.noise_sd,
                        support: self.support,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub replications: usize,
    /// Size of the independent test sample drawn for every replication.
    pub test_size: usize,
    pub methods: Vec<Method>,
    /// Offset in the weights `1 / (|b| + epsilon)`.
    #[serde(default)]
    pub epsilon: f64,
    pub design: DesignGrid,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.replications == 0 {
            return bad("replications must be >= 1");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if self.test_size == 0 {
            return bad("test_size must be >= 1");
        }
        if self.design.p.is_empty() || self.design.p0.is_empty() || self.design.beta.is_empty() {
            return bad("design grids p, p0 and beta must be non-empty");
        }
        if self.cv.folds < 2 || self.cv.folds > self.design.n {
            return Err(Error::InvalidFolds {
                n: self.design.n,
                k: self.cv.folds,
            });
        }
        WeightScheme::new(WeightKind::Unit, self.epsilon)?;
        self.cv.solver.validate()?;
        for cell in self.design.cells() {
            cell.validate()?;
        }
        Ok(())
    }

    /// Whether a method can run on a cell. Least-squares weights need more
    /// training rows than covariates in every fold.
    pub fn is_feasible(&self, method: &Method, cell: &SimDesign) -> bool {
        if method.weights != WeightKind::Ols {
            return true;
        }
        let n = cell.n;
        let smallest_train = n - n.div_ceil(self.cv.folds);
        cell.p < smallest_train
    }
}

/// One method on one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRow {
    pub cell: usize,
    pub p: usize,
    pub p0: usize,
    pub beta: f64,
    pub replication: usize,
    pub method: Method,
    pub sacc: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub pred_error: f64,
    pub support_size: usize,
    /// `None` when the initial estimate was identically zero.
    pub lambda_selected: Option<f64>,
    pub status: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub cell: usize,
    pub p: usize,
    pub p0: usize,
    pub beta: f64,
    pub method: Method,
    pub replications: usize,
    pub sacc: MeanCi,
    pub precision: MeanCi,
    /// Replications where nothing was selected and precision is undefined.
    pub precision_undefined: usize,
    pub recall: MeanCi,
    pub pred_error: MeanCi,
    pub support_size: MeanCi,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub rows: Vec<ReplicationRow>,
    pub summary: Vec<SummaryRow>,
    /// `(cell, method)` pairs skipped as infeasible.
    pub skipped: Vec<(usize, Method)>,
}

/// The estimate of one method plus how it was obtained.
#[derive(Debug, Clone)]
pub struct MethodFit {
    pub beta: CoefficientVector,
    pub lambda_selected: Option<f64>,
    pub status: &'static str,
}

/// Calibrates one method on `train`. An identically-zero initial estimate
/// (all weights infinite) yields the null model with status `null-initial`.
pub fn fit_method(
    train: &Dataset,
    method: &Method,
    epsilon: f64,
    cv: &CvConfig,
    calibration_seed: u64,
) -> Result<MethodFit> {
    let scheme = WeightScheme::new(method.weights, epsilon)?;
    let mut rng = SeededRng::new(calibration_seed);
    match adaptive_lasso(train, &scheme, method.cv, cv, &mut rng) {
        Ok(fit) => Ok(MethodFit {
            beta: fit.beta,
            lambda_selected: Some(fit.lambda_selected),
            status: "ok",
        }),
        Err(Error::DegenerateWeights) => {
            let intercept = if cv.solver.intercept {
                train.y().mean()
            } else {
                0.0
            };
            Ok(MethodFit {
                beta: CoefficientVector::with_intercept(
                    nalgebra::DVector::zeros(train.p()),
                    intercept,
                ),
                lambda_selected: None,
                status: "null-initial",
            })
        }
        Err(e) => Err(e),
    }
}

/// Random stream of replication `rep` in cell `cell`.
pub fn replication_stream(seed: u64, cell: usize, rep: usize) -> SeededRng {
    SeededRng::derive(seed, ((cell as u64) << 32) | rep as u64)
}

fn run_replication(
    cfg: &ExperimentConfig,
    cells: &[(SimDesign, Simulator)],
    cell: usize,
    rep: usize,
) -> Result<Vec<ReplicationRow>> {
    let (design, sim) = &cells[cell];
    let mut rng = replication_stream(cfg.seed, cell, rep);
    let beta_star = draw_beta_star(design, &mut rng.fork());
    let train = sim.sample(&beta_star, design.n, &mut rng.fork())?;
    let test = sim.sample(&beta_star, cfg.test_size, &mut rng.fork())?;
    let calibration_seed = rng.next_u64();

    let mut rows = Vec::new();
    for method in cfg.methods.iter().filter(|m| cfg.is_feasible(m, design)) {
        let fit = fit_method(&train, method, cfg.epsilon, &cfg.cv, calibration_seed)?;
        let pr = precision_recall(&beta_star, &fit.beta)?;
        rows.push(ReplicationRow {
            cell,
            p: design.p,
            p0: design.p0,
            beta: design.beta_mag,
            replication: rep,
            method: *method,
            sacc: signed_support_accuracy(&beta_star, &fit.beta)?,
            precision: pr.precision,
            recall: pr.recall,
            pred_error: pred_error(&test, &fit.beta)?,
            support_size: fit.beta.support_size(),
            lambda_selected: fit.lambda_selected,
            status: fit.status,
        });
    }
    Ok(rows)
}

/// Runs every replication of every cell on the rayon pool. Row order is
/// fixed: cell, then replication, then method in configuration order.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let designs = cfg.design.cells();
    let cells = designs
        .iter()
        .map(|d| Ok((d.clone(), Simulator::new(d)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut skipped = Vec::new();
    for (c, d) in designs.iter().enumerate() {
        for m in cfg.methods.iter().filter(|m| !cfg.is_feasible(m, d)) {
            log::warn!(
                "skipping {m} for cell {c} (p = {}, n = {}): too few training rows",
                d.p,
                d.n
            );
            skipped.push((c, *m));
        }
    }

    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.replications).map(move |r| (c, r)))
        .collect();
    let rows: Vec<ReplicationRow> = tasks
        .par_iter()
        .map(|&(c, r)| run_replication(cfg, &cells, c, r))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let summary = summarize(&rows, &designs, &cfg.methods);
    Ok(SimulationOutput {
        rows,
        summary,
        skipped,
    })
}

pub fn summarize(
    rows: &[ReplicationRow],
    cells: &[SimDesign],
    methods: &[Method],
) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for (c, design) in cells.iter().enumerate() {
        for method in methods {
            let group: Vec<&ReplicationRow> = rows
                .iter()
                .filter(|r| r.cell == c && r.method == *method)
                .collect();
            if group.is_empty() {
                continue;
            }
            out.push(SummaryRow {
                cell: c,
                p: design.p,
                p0: design.p0,
                beta: design.beta_mag,
                method: *method,
                replications: group.len(),
                sacc: MeanCi::from_values(group.iter().map(|r| Some(r.sacc))),
                precision: MeanCi::from_values(group.iter().map(|r| r.precision)),
                precision_undefined: group.iter().filter(|r| r.precision.is_none()).count(),
                recall: MeanCi::from_values(group.iter().map(|r| r.recall)),
                pred_error: MeanCi::from_values(group.iter().map(|r| Some(r.pred_error))),
                support_size: MeanCi::from_values(
                    group.iter().map(|r| Some(r.support_size as f64)),
                ),
            });
        }
    }
    out
}

/// The paired one-step comparison used by the directional checks:
/// `(simple, nested)` rows of the same replication.
pub fn paired_rows(
    rows: &[ReplicationRow],
    weights: WeightKind,
) -> Vec<(&ReplicationRow, &ReplicationRow)> {
    let simple = Method::new(weights, CvScheme::Simple);
    let nested = Method::new(weights, CvScheme::Nested);
    rows.iter()
        .filter(|r| r.method == simple)
        .filter_map(|s| {
            rows.iter()
                .find(|r| r.method == nested && r.cell == s.cell && r.replication == s.replication)
                .map(|n| (s, n))
        })
        .collect()
}

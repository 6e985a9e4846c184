//! Command-line front end. The binary is a thin wrapper around [`main`].
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calibration::{
    adaptive_lasso, CvConfig, CvScheme, LambdaPathStrategy, WeightKind, WeightScheme,
};
use crate::datagen::{
    build_covariance, draw_beta_star, CovarianceKind, SimDesign, Simulator, SupportKind,
};
use crate::error::{Error, Result};
use crate::experiments::fig1::{replicate_fig1, Fig1Config};
use crate::experiments::simulate::{run_simulation, ExperimentConfig, SimulationOutput};
use crate::experiments::stats::MeanCi;
use crate::experiments::svg::render_panel;
use crate::io::{
    fmt_f64, fmt_opt, read_dataset_csv, read_text, write_dataset_csv, write_matrix_csv, Table,
};
use crate::rng::SeededRng;
use crate::solvers::{PathSpec, SolverConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ADALASSO_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "adalasso",
    version,
    about = "Adaptive lasso with simple and nested cross-validation"
)]
pub struct Cli {
    /// Maximum number of worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a CV-calibrated (adaptive) lasso to a CSV dataset.
    Fit(FitArgs),
    /// Run a replicated simulation study described by a TOML file.
    Simulate(SimulateArgs),
    /// CV versus test-sample error curves for the lasso, one-step and
    /// ridge-adaptive lasso on one simulated sample.
    #[command(name = "replicate-fig1")]
    ReplicateFig1(Fig1Args),
    /// Write a simulated dataset and/or covariance matrix to CSV.
    #[command(name = "gen-data")]
    GenData(GenDataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightsArg {
    Unit,
    Ols,
    Ridge,
    OneStep,
}

impl From<WeightsArg> for WeightKind {
    fn from(w: WeightsArg) -> Self {
        match w {
            WeightsArg::Unit => WeightKind::Unit,
            WeightsArg::Ols => WeightKind::Ols,
            WeightsArg::Ridge => WeightKind::RidgeCv,
            WeightsArg::OneStep => WeightKind::LassoCv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CvArg {
    Simple,
    Nested,
}

impl From<CvArg> for CvScheme {
    fn from(c: CvArg) -> Self {
        match c {
            CvArg::Simple => CvScheme::Simple,
            CvArg::Nested => CvScheme::Nested,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Data,
    Unit,
}

/// Calibration settings shared by `fit` and `replicate-fig1`.
#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    /// Number of CV folds.
    #[arg(long, short = 'k', default_value_t = 10)]
    pub folds: usize,
    /// Number of lambda values on the path.
    #[arg(long, default_value_t = 100)]
    pub n_lambda: usize,
    /// Smallest lambda as a fraction of lambda_max (default 1e-4 if n > p, else 1e-2).
    #[arg(long)]
    pub min_ratio: Option<f64>,
    /// Weights defining the candidate lambda path.
    #[arg(long, value_enum, default_value_t = PathArg::Data)]
    pub lambda_path: PathArg,
    /// Number of ridge penalties tried when calibrating ridge weights.
    #[arg(long, default_value_t = 100)]
    pub ridge_n_lambda: usize,
    /// Do not scale covariates to unit variance before fitting.
    #[arg(long)]
    pub no_standardize: bool,
    /// Fit an unpenalized intercept.
    #[arg(long)]
    pub intercept: bool,
    /// Coordinate descent convergence tolerance.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_sweeps: usize,
}

impl CvArgs {
    pub fn to_config(&self) -> CvConfig {
        CvConfig {
            folds: self.folds,
            solver: SolverConfig {
                tol: self.tol,
                max_sweeps: self.max_sweeps,
                standardize: !self.no_standardize,
                intercept: self.intercept,
            },
            path: PathSpec {
                n_lambda: self.n_lambda,
                min_ratio: self.min_ratio,
            },
            lambda_path: match self.lambda_path {
                PathArg::Data => LambdaPathStrategy::DataWeights,
                PathArg::Unit => LambdaPathStrategy::UnitWeights,
            },
            ridge_n_lambda: self.ridge_n_lambda,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV file: first column is the response, the others are covariates.
    pub data: PathBuf,
    /// The first non-comment line of the file is a header.
    #[arg(long)]
    pub header: bool,
    #[arg(long, value_enum, default_value_t = WeightsArg::OneStep)]
    pub weights: WeightsArg,
    #[arg(long, value_enum, default_value_t = CvArg::Nested)]
    pub cv: CvArg,
    /// Offset in the weights 1 / (|b| + epsilon).
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long, short = 'o', default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub cv_args: CvArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML experiment configuration.
    pub config: PathBuf,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, short = 'o')]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub test_size: Option<usize>,
    #[arg(long, short = 'k')]
    pub folds: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct Fig1Args {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub p0: usize,
    /// Magnitude of the nonzero coefficients.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Size of the independent test sample.
    #[arg(long, default_value_t = 10_000)]
    pub test_size: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, short = 'o', default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub cv_args: CvArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    #[arg(long, default_value_t = 5)]
    pub p0: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// identity, ar:RHO, stand-in (p = 44) or file:PATH.
    #[arg(long, default_value = "identity", value_parser = parse_covariance)]
    pub covariance: CovarianceKind,
    #[arg(long, value_enum, default_value_t = SupportArg::Random)]
    pub support: SupportArg,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset CSV (response first, with a header line).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// True coefficient vector CSV.
    #[arg(long)]
    pub beta_out: Option<PathBuf>,
    /// Covariance matrix CSV (no header).
    #[arg(long)]
    pub covariance_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SupportArg {
    Random,
    First,
}

pub fn parse_covariance(s: &str) -> std::result::Result<CovarianceKind, String> {
    match s {
        "identity" => Ok(CovarianceKind::Identity),
        "stand-in" => Ok(CovarianceKind::StandIn),
        _ => {
            if let Some(rho) = s.strip_prefix("ar:") {
                let rho = rho
                    .parse::<f64>()
                    .map_err(|e| format!("bad AR decay '{rho}': {e}"))?;
                Ok(CovarianceKind::ArDecay { rho })
            } else if let Some(path) = s.strip_prefix("file:") {
                Ok(CovarianceKind::File { path: path.into() })
            } else {
                Err(format!(
                    "unknown covariance '{s}' (identity, ar:RHO, stand-in, file:PATH)"
                ))
            }
        }
    }
}

/// Maps a library error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::InvalidFolds { .. } => 2,
        Error::Shape(_)
        | Error::NonFinite { .. }
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::InvalidCovariance(_) => 3,
        Error::DegenerateWeights
        | Error::UnpenalizedCoordinate(_)
        | Error::ZeroSignal
        | Error::SingularDesign(_)
        | Error::Convergence { .. } => 4,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidArgument(format!(
                "{THREADS_ENV} must be >= 1"
            )));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::ReplicateFig1(a) => cmd_replicate_fig1(&a),
        Command::GenData(a) => cmd_gen_data(&a),
    }
}

/// `#` header lines: program, command and the resolved configuration as TOML.
fn provenance<T: Serialize>(command: &str, config: &T) -> Result<Vec<String>> {
    let body = toml::to_string(config)
        .map_err(|e| Error::InvalidArgument(format!("cannot serialize configuration: {e}")))?;
    let mut lines = vec![format!("adalasso {VERSION} {command}")];
    lines.extend(body.lines().map(String::from));
    Ok(lines)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FitSettings {
    data: PathBuf,
    header: bool,
    weights: WeightsArg,
    cv_scheme: CvScheme,
    epsilon: f64,
    seed: u64,
    cv: CvConfig,
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    version: &'a str,
    settings: &'a FitSettings,
    method: String,
    n: usize,
    p: usize,
    lambda_selected: f64,
    selected_index: usize,
    support_size: usize,
    intercept: f64,
    /// Infinite weights are written as `null`.
    weights: Vec<Option<f64>>,
}

pub fn cmd_fit(a: &FitArgs) -> Result<()> {
    let data = read_dataset_csv(&a.data, a.header)?;
    let cfg = a.cv_args.to_config();
    cfg.solver.validate()?;
    let kind = WeightKind::from(a.weights);
    let scheme = WeightScheme::new(kind, a.epsilon)?;
    let cv_scheme = if kind == WeightKind::Unit {
        CvScheme::Simple
    } else {
        CvScheme::from(a.cv)
    };
    let settings = FitSettings {
        data: a.data.clone(),
        header: a.header,
        weights: a.weights,
        cv_scheme,
        epsilon: a.epsilon,
        seed: a.seed,
        cv: cfg,
    };
    let fit = adaptive_lasso(&data, &scheme, cv_scheme, &cfg, &mut SeededRng::new(a.seed))?;

    ensure_dir(&a.out_dir)?;
    let prov = provenance("fit", &settings)?;

    let mut coefs = Table::new(vec!["term", "coefficient", "weight"]);
    coefs.push(vec![
        "intercept".into(),
        fmt_f64(fit.beta.intercept),
        "0".into(),
    ]);
    for j in 0..data.p() {
        coefs.push(vec![
            format!("x{}", j + 1),
            fmt_f64(fit.beta.beta[j]),
            fmt_f64(fit.weights_used.get(j)),
        ]);
    }
    coefs.write(&a.out_dir.join("coefficients.csv"), &prov)?;

    let k = fit.curve.fold_errors().ncols();
    let mut header = vec!["lambda".to_string(), "cv_error".to_string()];
    header.extend((1..=k).map(|f| format!("fold_{f}")));
    let mut curve = Table::new(header);
    for r in 0..fit.curve.lambdas().len() {
        let mut row = vec![
            fmt_f64(fit.curve.lambdas().get(r)),
            fmt_f64(fit.curve.mean_errors()[r]),
        ];
        row.extend((0..k).map(|f| fmt_f64(fit.curve.fold_errors()[(r, f)])));
        curve.push(row);
    }
    curve.write(&a.out_dir.join("cv_curve.csv"), &prov)?;

    let report = FitReport {
        version: VERSION,
        settings: &settings,
        method: crate::experiments::Method::new(kind, cv_scheme).to_string(),
        n: data.n(),
        p: data.p(),
        lambda_selected: fit.lambda_selected,
        selected_index: fit.curve.selected_index(),
        support_size: fit.beta.support_size(),
        intercept: fit.beta.intercept,
        weights: fit
            .weights_used
            .as_slice()
            .iter()
            .map(|w| w.is_finite().then_some(*w))
            .collect(),
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::InvalidArgument(format!("cannot serialize report: {e}")))?;
    fs::write(a.out_dir.join("report.json"), json + "\n")?;
    println!(
        "{}: lambda = {}, {} nonzero coefficient(s); wrote {}",
        report.method,
        fmt_f64(fit.lambda_selected),
        report.support_size,
        a.out_dir.display()
    );
    Ok(())
}

pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig> {
    let text = read_text(path)?;
    toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut cfg = load_experiment_config(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.replications {
        cfg.replications = r;
    }
    if let Some(t) = a.test_size {
        cfg.test_size = t;
    }
    if let Some(k) = a.folds {
        cfg.cv.folds = k;
    }
    if let Some(dir) = &a.out_dir {
        cfg.output_dir = Some(dir.clone());
    }
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    cfg.validate()?;
    let out = run_simulation(&cfg)?;
    ensure_dir(&dir)?;
    write_simulation(&dir, &cfg, &out)?;
    println!(
        "{} replication row(s), {} summary row(s); wrote {}",
        out.rows.len(),
        out.summary.len(),
        dir.display()
    );
    Ok(())
}

pub fn write_simulation(dir: &Path, cfg: &ExperimentConfig, out: &SimulationOutput) -> Result<()> {
    // The output directory does not affect results, so it is left out of the
    // embedded configuration.
    let mut resolved = cfg.clone();
    resolved.output_dir = None;
    let mut prov = provenance("simulate", &resolved)?;
    for (cell, m) in &out.skipped {
        prov.push(format!(
            "skipped: {m} in cell {cell} (too few training rows)"
        ));
    }

    let mut rows = Table::new(vec![
        "cell",
        "p",
        "p0",
        "beta",
        "replication",
        "method",
        "sacc",
        "precision",
        "recall",
        "pred_error",
        "support_size",
        "lambda_selected",
        "status",
    ]);
    for r in &out.rows {
        rows.push(vec![
            r.cell.to_string(),
            r.p.to_string(),
            r.p0.to_string(),
            fmt_f64(r.beta),
            r.replication.to_string(),
            r.method.to_string(),
            fmt_f64(r.sacc),
            fmt_opt(r.precision),
            fmt_opt(r.recall),
            fmt_f64(r.pred_error),
            r.support_size.to_string(),
            fmt_opt(r.lambda_selected),
            r.status.to_string(),
        ]);
    }
    rows.write(&dir.join("results.csv"), &prov)?;

    let mut summary = Table::new(vec![
        "cell",
        "p",
        "p0",
        "beta",
        "method",
        "metric",
        "count",
        "undefined",
        "mean",
        "ci_lower",
        "ci_upper",
    ]);
    for s in &out.summary {
        let metrics: [(&str, &MeanCi); 5] = [
            ("sacc", &s.sacc),
            ("precision", &s.precision),
            ("recall", &s.recall),
            ("pred_error", &s.pred_error),
            ("support_size", &s.support_size),
        ];
        for (name, ci) in metrics {
            summary.push(vec![
                s.cell.to_string(),
                s.p.to_string(),
                s.p0.to_string(),
                fmt_f64(s.beta),
                s.method.to_string(),
                name.to_string(),
                ci.count.to_string(),
                (s.replications - ci.count).to_string(),
                fmt_f64(ci.mean),
                fmt_f64(ci.lower),
                fmt_f64(ci.upper),
            ]);
        }
    }
    let mut summary_prov = prov;
    summary_prov.push("ci: mean +/- 1.96 * sd / sqrt(count), normal approximation".into());
    summary.write(&dir.join("summary.csv"), &summary_prov)
}

pub fn cmd_replicate_fig1(a: &Fig1Args) -> Result<()> {
    let cfg = Fig1Config {
        n: a.n,
        p: a.p,
        p0: a.p0,
        beta_mag: a.beta,
        test_size: a.test_size,
        seed: a.seed,
        epsilon: a.epsilon,
        cv: a.cv_args.to_config(),
    };
    cfg.cv.solver.validate()?;
    let result = replicate_fig1(&cfg)?;
    ensure_dir(&a.out_dir)?;
    let prov = provenance("replicate-fig1", &cfg)?;

    let mut summary = Table::new(vec![
        "panel",
        "criterion",
        "index",
        "lambda",
        "lambda_ratio",
        "test_error",
        "relative_excess",
    ]);
    for panel in &result.panels {
        let label = panel.label();
        let mut t = Table::new(vec![
            "lambda",
            "lambda_ratio",
            "cv_simple",
            "cv_nested",
            "test_error",
        ]);
        for r in 0..panel.lambdas.len() {
            t.push(vec![
                fmt_f64(panel.lambdas.get(r)),
                fmt_f64(panel.lambda_ratio(r)),
                fmt_f64(panel.cv_simple[r]),
                fmt_opt(panel.cv_nested.as_ref().map(|c| c[r])),
                fmt_f64(panel.test_error[r]),
            ]);
        }
        t.write(&a.out_dir.join(format!("fig1_{label}.csv")), &prov)?;
        fs::write(
            a.out_dir.join(format!("fig1_{label}.svg")),
            render_panel(panel),
        )?;

        let picks = [
            Some(("simple-cv", panel.simple_index)),
            panel.nested_index.map(|i| ("nested-cv", i)),
            Some(("test-sample", panel.test_index)),
        ];
        for (criterion, idx) in picks.into_iter().flatten() {
            summary.push(vec![
                label.to_string(),
                criterion.to_string(),
                idx.to_string(),
                fmt_f64(panel.lambdas.get(idx)),
                fmt_f64(panel.lambda_ratio(idx)),
                fmt_f64(panel.test_error[idx]),
                fmt_f64(panel.relative_excess(idx)),
            ]);
        }
        println!(
            "{label}: simple-CV excess {:.4}{}",
            panel.relative_excess(panel.simple_index),
            panel
                .nested_index
                .map(|i| format!(", nested-CV excess {:.4}", panel.relative_excess(i)))
                .unwrap_or_default()
        );
    }
    summary.write(&a.out_dir.join("fig1_summary.csv"), &prov)
}

#[derive(Debug, Serialize)]
struct GenDataSettings<'a> {
    seed: u64,
    design: &'a SimDesign,
}

pub fn cmd_gen_data(a: &GenDataArgs) -> Result<()> {
    if a.out.is_none() && a.beta_out.is_none() && a.covariance_out.is_none() {
        return Err(Error::InvalidArgument(
            "nothing to write: pass --out, --beta-out and/or --covariance-out".into(),
        ));
    }
    let design = SimDesign {
        n: a.n,
        p: a.p,
        p0: a.p0,
        beta_mag: a.beta,
        covariance: a.covariance.clone(),
        noise_sd: a.noise_sd,
        support: match a.support {
            SupportArg::Random => SupportKind::Random,
            SupportArg::First => SupportKind::FirstP0,
        },
    };
    design.validate()?;
    let prov = provenance(
        "gen-data",
        &GenDataSettings {
            seed: a.seed,
            design: &design,
        },
    )?;

    if let Some(path) = &a.covariance_out {
        write_matrix_csv(path, &build_covariance(&design)?)?;
    }
    if a.out.is_some() || a.beta_out.is_some() {
        let sim = Simulator::new(&design)?;
        let mut root = SeededRng::new(a.seed);
        let beta_star = draw_beta_star(&design, &mut root.fork());
        if let Some(path) = &a.beta_out {
            let mut t = Table::new(vec!["term", "beta"]);
            for j in 0..design.p {
                t.push(vec![format!("x{}", j + 1), fmt_f64(beta_star.beta[j])]);
            }
            t.write(path, &prov)?;
        }
        if let Some(path) = &a.out {
            let data = sim.sample(&beta_star, design.n, &mut root.fork())?;
            write_dataset_csv(path, &data, &prov)?;
        }
    }
    Ok(())
}

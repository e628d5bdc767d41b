//! Command-line surface: estimation on CSV data, scenario simulation,
//! dictionary diagnostics, sparse PCA and signal/dictionary export.
//!
//! Exit codes: 0 success, 2 input validation, 3 solver non-convergence,
//! 4 diagnostics budget refusal. Verbosity comes from the `COVGL_LOG`
//! environment variable.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::Array1;

use crate::diagnostics::{diagnose, DEFAULT_SUBSET_BUDGET};
use crate::dictionary::{build_dictionary, DesignMatrix, DesignPoints};
use crate::error::{Error, Result};
use crate::estimator::{
    estimate, sparse_pca, EstimatorConfig, LambdaRule, SampleSet, SolveMode, SupportRule,
};
use crate::io::{
    read_json, read_matrix_csv, write_columns_csv, write_json, write_matrix_csv,
    write_replicates_csv, write_vector_csv, DiagnosticsJson, DictSpecFile, EstimateReportJson,
    MetricsJson, SCHEMA_VERSION,
};
use crate::matrix::SymmetricMatrix;
use crate::simulation::{run_experiment, run_sweep, test_signal, ScenarioConfig, SignalSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "covgl",
    version,
    about = "Group-Lasso covariance estimation toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a covariance matrix from replicated samples.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo scenario and report error norms.
    Simulate(SimulateArgs),
    /// Dictionary-quality diagnostics for a design matrix.
    Diagnose(DiagnoseArgs),
    /// Leading eigenpairs of a symmetric matrix.
    Pca(PcaArgs),
    /// Export test signals or dictionary matrices as CSV.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Samples CSV, one replicate per row.
    #[arg(long)]
    pub samples: PathBuf,
    /// Dictionary spec JSON.
    #[arg(long)]
    pub dict: PathBuf,
    /// Penalty level, a number or "auto".
    #[arg(long, default_value = "auto")]
    pub lambda: String,
    /// Confidence exponent of the automatic penalty.
    #[arg(long, default_value_t = 1.1)]
    pub delta: f64,
    #[arg(long, value_parser = parse_mode, default_value = "symmetric")]
    pub mode: SolveMode,
    /// Support rule: "lcurve", "epsilon=V" or "theory=V".
    #[arg(long, value_parser = parse_support, default_value = "lcurve")]
    pub support: SupportRule,
    /// Subtract the sample mean before covariance formation.
    #[arg(long)]
    pub center: bool,
    /// Wavelet used by the noise-level estimator.
    #[arg(long, value_parser = parse_wavelet, default_value = "symmlet8")]
    pub mad_wavelet: crate::dictionary::WaveletFamily,
    /// Design points CSV (one value in `[0,1]` per line); defaults to the
    /// equispaced grid matching the sample width.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Iteration cap for the iterative solver.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Override the scenario's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the replicate loop (default: available cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write replicates.csv with the per-replicate norms.
    #[arg(long)]
    pub per_replicate: bool,
    /// Also write eigvec.csv (signal vs estimated leading eigenvector).
    #[arg(long)]
    pub plot_data: bool,
    /// Run the scenario once per design size and write sweep.csv.
    #[arg(long, value_delimiter = ',')]
    pub sweep_n: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Design matrix CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Largest subset size for the restricted eigenvalue.
    #[arg(long)]
    pub s: usize,
    /// Constants c0 to evaluate kappa at.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub c0: Vec<f64>,
    /// Cap on enumerated Gram sub-matrices.
    #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
    pub budget: u128,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    /// Symmetric matrix CSV.
    #[arg(long)]
    pub sigma: PathBuf,
    /// Number of leading eigenpairs.
    #[arg(short, long)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Named signal to sample on the equispaced grid.
    #[arg(long, value_parser = parse_signal)]
    pub signal: Option<SignalSpec>,
    /// Grid size for `--signal`.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Dictionary spec JSON to evaluate on its full grid.
    #[arg(long)]
    pub dict: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_mode(s: &str) -> std::result::Result<SolveMode, String> {
    match s {
        "symmetric" => Ok(SolveMode::Symmetric),
        "unconstrained" => Ok(SolveMode::Unconstrained),
        other => Err(format!(
            "unknown mode {other:?} (expected symmetric|unconstrained)"
        )),
    }
}

fn parse_wavelet(s: &str) -> std::result::Result<crate::dictionary::WaveletFamily, String> {
    match s {
        "haar" => Ok(crate::dictionary::WaveletFamily::Haar),
        "symmlet8" => Ok(crate::dictionary::WaveletFamily::Symmlet8),
        other => Err(format!(
            "unknown wavelet {other:?} (expected haar|symmlet8)"
        )),
    }
}

fn parse_support(s: &str) -> std::result::Result<SupportRule, String> {
    if s == "lcurve" {
        return Ok(SupportRule::LCurve);
    }
    if let Some(v) = s.strip_prefix("epsilon=") {
        let e: f64 = v.parse().map_err(|_| format!("bad epsilon value {v:?}"))?;
        return Ok(SupportRule::Epsilon(e));
    }
    if let Some(v) = s.strip_prefix("theory=") {
        let c: f64 = v
            .parse()
            .map_err(|_| format!("bad theory constant {v:?}"))?;
        return Ok(SupportRule::Theory(c));
    }
    Err(format!(
        "unknown support rule {s:?} (expected lcurve|epsilon=V|theory=V)"
    ))
}

fn parse_signal(s: &str) -> std::result::Result<SignalSpec, String> {
    match s {
        "heavisine" => Ok(SignalSpec::HeaviSine),
        "blocks" => Ok(SignalSpec::Blocks),
        other => Err(format!(
            "unknown signal {other:?} (expected heavisine|blocks)"
        )),
    }
}

fn parse_lambda(s: &str) -> Result<LambdaRule> {
    if s == "auto" {
        return Ok(LambdaRule::Auto);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::invalid(format!("--lambda expects a number or \"auto\", got {s:?}")))?;
    Ok(LambdaRule::Fixed(v))
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Maps every error onto the documented exit codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::Replicate { source, .. } => exit_code(source),
        _ => EXIT_INVALID_INPUT,
    }
}

/// Parses argv and runs; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Estimate(args) => cmd_estimate(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Diagnose(args) => cmd_diagnose(&args),
        Command::Pca(args) => cmd_pca(&args),
        Command::Export(args) => cmd_export(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let mut cause = std::error::Error::source(&err);
            while let Some(c) = cause {
                eprintln!("  caused by: {c}");
                cause = c.source();
            }
            exit_code(&err)
        }
    }
}

fn cmd_estimate(args: &EstimateArgs) -> Result<i32> {
    ensure_out_dir(&args.out)?;
    let samples = SampleSet::new(read_matrix_csv(&args.samples)?)?;
    let dict_file: DictSpecFile = read_json(&args.dict)?;
    let base = args.dict.parent().unwrap_or(Path::new("."));
    let spec = dict_file.resolve(base)?;
    let pts = match &args.points {
        Some(path) => {
            let column = read_matrix_csv(path)?;
            if column.ncols() != 1 {
                return Err(Error::invalid(
                    "design points CSV must have one value per line",
                ));
            }
            DesignPoints::new(column.column(0).to_vec())?
        }
        None => DesignPoints::full_grid(samples.points()),
    };
    if pts.len() != samples.points() {
        return Err(Error::dims(format!(
            "{} design points for samples with {} columns",
            pts.len(),
            samples.points()
        )));
    }
    let g = build_dictionary(&spec, &pts)?;
    let mut cfg = EstimatorConfig {
        lambda: parse_lambda(&args.lambda)?,
        delta_conf: args.delta,
        mode: args.mode,
        support_rule: args.support,
        center: args.center,
        mad_wavelet: args.mad_wavelet,
        ..EstimatorConfig::default()
    };
    if let Some(max_iter) = args.max_iter {
        cfg.max_iter = max_iter;
    }
    let report = estimate(&samples, &g, &cfg)?;
    write_json(
        &args.out.join("report.json"),
        &EstimateReportJson::from_report(&report),
    )?;
    write_matrix_csv(
        &args.out.join("sigma_lambda.csv"),
        report.sigma_lambda.as_array(),
    )?;
    write_matrix_csv(
        &args.out.join("sigma_refit.csv"),
        report.sigma_refit.as_array(),
    )?;
    log::info!(
        "estimate: lambda = {:.6e}, |J| = {}, kkt = {:.3e}",
        report.lambda_used,
        report.j_hat.len(),
        report.solver.kkt_residual
    );
    Ok(if report.solver.converged {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    ensure_out_dir(&args.out)?;
    let mut scenario: ScenarioConfig = read_json(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.base_seed = seed;
    }
    if let Some(threads) = args.threads {
        // a failed build means a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    scenario.validate()?;

    let metrics = run_experiment(&scenario)?;
    write_json(
        &args.out.join("metrics.json"),
        &MetricsJson::new(&metrics, &scenario),
    )?;
    if args.per_replicate {
        write_replicates_csv(&args.out.join("replicates.csv"), &metrics.per_replicate)?;
    }
    if args.plot_data {
        write_eigvec_plot(&scenario, &args.out.join("eigvec.csv"))?;
    }
    if !args.sweep_n.is_empty() {
        let sweep = run_sweep(&scenario, &args.sweep_n)?;
        let ns: Vec<f64> = sweep.iter().map(|(n, _)| *n as f64).collect();
        let eafn: Vec<f64> = sweep.iter().map(|(_, m)| m.eafn).collect();
        let eaon: Vec<f64> = sweep.iter().map(|(_, m)| m.eaon).collect();
        let eaon_star: Vec<f64> = sweep.iter().map(|(_, m)| m.eaon_star).collect();
        write_columns_csv(
            &args.out.join("sweep.csv"),
            &[&ns, &eafn, &eaon, &eaon_star],
        )?;
    }
    log::info!(
        "simulate: EAFN = {:.4}, EAON = {:.4}, EAON* = {:.4} over {} runs",
        metrics.eafn,
        metrics.eaon,
        metrics.eaon_star,
        metrics.runs
    );
    Ok(EXIT_OK)
}

/// First-replicate plot data: design point, true signal(s), estimated
/// leading eigenvector(s) of the refit estimator.
fn write_eigvec_plot(scenario: &ScenarioConfig, path: &Path) -> Result<()> {
    use crate::simulation::{generate, make_truth, ModelSpec};
    let (pts, g) = scenario.design()?;
    let truth = make_truth(scenario, &pts, &g)?;
    let x = generate(scenario, &truth, 0)?;
    let report = estimate(&x, &g, &scenario.estimator)?;
    let k = if matches!(scenario.model, ModelSpec::Two { .. }) {
        2
    } else {
        1
    };
    let pairs = sparse_pca(&report.sigma_refit, k)?;
    let t: Vec<f64> = pts.points().to_vec();
    let f1: Vec<f64> = truth.f1.to_vec();
    let v1: Vec<f64> = pairs[0].1.to_vec();
    match (&truth.f2, pairs.get(1)) {
        (Some(f2), Some((_, v2))) => {
            let f2v = f2.to_vec();
            let v2v = v2.to_vec();
            write_columns_csv(path, &[&t, &f1, &v1, &f2v, &v2v])
        }
        _ => write_columns_csv(path, &[&t, &f1, &v1]),
    }
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<i32> {
    ensure_out_dir(&args.out)?;
    let matrix = read_matrix_csv(&args.matrix)?;
    let g = DesignMatrix::from_matrix(matrix)?;
    let report = diagnose(&g, args.s, &args.c0, args.budget)?;
    write_json(
        &args.out.join("diagnostics.json"),
        &DiagnosticsJson {
            schema_version: SCHEMA_VERSION,
            report: &report,
        },
    )?;
    Ok(EXIT_OK)
}

fn cmd_pca(args: &PcaArgs) -> Result<i32> {
    ensure_out_dir(&args.out)?;
    let matrix = read_matrix_csv(&args.sigma)?;
    let sigma = SymmetricMatrix::new(matrix)?;
    let pairs = sparse_pca(&sigma, args.k)?;
    // eigenpairs.csv: eigenvalue in the first field, vector entries after
    let mut rows = ndarray::Array2::zeros((pairs.len(), sigma.dim() + 1));
    for (i, (val, vec)) in pairs.iter().enumerate() {
        rows[[i, 0]] = *val;
        for (j, &v) in vec.iter().enumerate() {
            rows[[i, j + 1]] = v;
        }
    }
    write_matrix_csv(&args.out.join("eigenpairs.csv"), &rows)?;
    Ok(EXIT_OK)
}

fn cmd_export(args: &ExportArgs) -> Result<i32> {
    ensure_out_dir(&args.out)?;
    match (&args.signal, &args.dict) {
        (Some(signal), None) => {
            if args.n == 0 {
                return Err(Error::invalid("--n must be positive"));
            }
            let pts = DesignPoints::full_grid(args.n);
            let values: Result<Vec<f64>> = pts
                .points()
                .iter()
                .map(|&t| test_signal(signal, t))
                .collect();
            write_vector_csv(&args.out.join("signal.csv"), &Array1::from_vec(values?))?;
        }
        (None, Some(dict)) => {
            let dict_file: DictSpecFile = read_json(dict)?;
            let base = dict.parent().unwrap_or(Path::new("."));
            let spec = dict_file.resolve(base)?;
            let n = match &spec {
                crate::dictionary::BasisSpec::Custom { matrix } => matrix.0.nrows(),
                other => other.size(),
            };
            let g = build_dictionary(&spec, &DesignPoints::full_grid(n))?;
            write_matrix_csv(&args.out.join("dictionary.csv"), g.matrix())?;
        }
        _ => {
            return Err(Error::invalid(
                "export needs exactly one of --signal or --dict",
            ));
        }
    }
    Ok(EXIT_OK)
}

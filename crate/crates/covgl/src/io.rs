//! File formats: headerless CSV matrices with round-trip-exact floats,
//! and versioned JSON reports.
//!
//! CSV conventions: comma separator, period decimal, no header, one
//! matrix row per line. Numbers are written with 17 significant digits
//! so every double survives a write/read cycle bit-for-bit. JSON reports
//! carry `schema_version: 1` and expose dictionary indices 1-based, the
//! way the accompanying schemas document them.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsReport;
use crate::dictionary::{BasisSpec, CustomMatrix};
use crate::error::{Error, Result};
use crate::estimator::EstimateReport;
use crate::simulation::{MetricsSummary, ReplicateMetrics, ScenarioConfig};

pub const SCHEMA_VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a headerless numeric CSV matrix; every row must have the same
/// number of fields. Parse failures carry 1-based line and column.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (colno, field) in line.split(',').enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::CsvParse {
                path: path.to_path_buf(),
                line: lineno + 1,
                column: colno + 1,
                message: format!("cannot parse {:?} as a number", field.trim()),
            })?;
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::CsvParse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    column: row.len(),
                    message: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::CsvParse {
            path: path.to_path_buf(),
            line: 1,
            column: 1,
            message: "empty matrix".into(),
        });
    }
    let (r, c) = (rows.len(), rows[0].len());
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((r, c), flat).map_err(|e| Error::invalid(e.to_string()))
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a matrix as headerless CSV with 17 significant digits.
pub fn write_matrix_csv(path: &Path, a: &Array2<f64>) -> Result<()> {
    let mut out = String::new();
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Writes a column vector as one CSV line per entry.
pub fn write_vector_csv(path: &Path, v: &Array1<f64>) -> Result<()> {
    let mut out = String::new();
    for &x in v {
        out.push_str(&fmt_f64(x));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Writes rows of named columns, still headerless; used for plot data.
pub fn write_columns_csv(path: &Path, columns: &[&[f64]]) -> Result<()> {
    let len = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != len) {
        return Err(Error::dims("plot columns must have equal length"));
    }
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    for i in 0..len {
        let line: Vec<String> = columns.iter().map(|c| fmt_f64(c[i])).collect();
        writeln!(file, "{}", line.join(",")).map_err(io_err(path))?;
    }
    Ok(())
}

/// Dictionary description as it appears in CLI JSON files. Custom
/// dictionaries may be inline rows or a path to a CSV matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DictSpecFile {
    Haar {
        size: usize,
    },
    Symmlet8 {
        size: usize,
    },
    Fourier {
        size: usize,
    },
    Mixed {
        children: Vec<DictSpecFile>,
    },
    Custom {
        path: Option<String>,
        matrix: Option<CustomMatrix>,
    },
}

impl DictSpecFile {
    /// Resolves CSV paths (relative to `base`) into an in-memory spec.
    pub fn resolve(&self, base: &Path) -> Result<BasisSpec> {
        Ok(match self {
            DictSpecFile::Haar { size } => BasisSpec::Haar { size: *size },
            DictSpecFile::Symmlet8 { size } => BasisSpec::Symmlet8 { size: *size },
            DictSpecFile::Fourier { size } => BasisSpec::Fourier { size: *size },
            DictSpecFile::Mixed { children } => BasisSpec::Mixed {
                children: children
                    .iter()
                    .map(|c| c.resolve(base))
                    .collect::<Result<_>>()?,
            },
            DictSpecFile::Custom { path, matrix } => match (path, matrix) {
                (Some(p), None) => BasisSpec::Custom {
                    matrix: CustomMatrix(read_matrix_csv(&base.join(p))?),
                },
                (None, Some(m)) => BasisSpec::Custom { matrix: m.clone() },
                _ => {
                    return Err(Error::invalid(
                        "custom dictionary needs exactly one of `path` or `matrix`",
                    ))
                }
            },
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// `report.json` payload for the `estimate` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReportJson {
    pub schema_version: u32,
    pub lambda_used: f64,
    pub sigma2_noise_hat: Option<f64>,
    /// Selected dictionary columns, 1-based.
    pub j_hat: Vec<usize>,
    pub column_norms: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub kkt_residual: f64,
    pub converged: bool,
}

impl EstimateReportJson {
    pub fn from_report(r: &EstimateReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            lambda_used: r.lambda_used,
            sigma2_noise_hat: r.sigma2_noise_hat,
            j_hat: r.j_hat.iter().map(|k| k + 1).collect(),
            column_norms: r.column_norms.clone(),
            objective: r.solver.objective,
            iterations: r.solver.iterations,
            primal_residual: r.solver.primal_residual,
            dual_residual: r.solver.dual_residual,
            kkt_residual: r.solver.kkt_residual,
            converged: r.solver.converged,
        }
    }
}

/// `metrics.json` payload for the `simulate` subcommand; echoes the
/// scenario for provenance.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsJson<'a> {
    pub schema_version: u32,
    pub eafn: f64,
    pub eaon: f64,
    pub eaon_star: f64,
    pub runs: usize,
    pub seeds: &'a [u64],
    pub scenario: &'a ScenarioConfig,
}

impl<'a> MetricsJson<'a> {
    pub fn new(m: &'a MetricsSummary, scenario: &'a ScenarioConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            eafn: m.eafn,
            eaon: m.eaon,
            eaon_star: m.eaon_star,
            runs: m.runs,
            seeds: &m.seeds,
            scenario,
        }
    }
}

/// `diagnostics.json` payload for the `diagnose` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsJson<'a> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub report: &'a DiagnosticsReport,
}

/// Per-replicate CSV: one line per replicate with the three norms.
pub fn write_replicates_csv(path: &Path, rows: &[ReplicateMetrics]) -> Result<()> {
    let eafn: Vec<f64> = rows.iter().map(|r| r.eafn).collect();
    let eaon: Vec<f64> = rows.iter().map(|r| r.eaon).collect();
    let eaon_star: Vec<f64> = rows.iter().map(|r| r.eaon_star).collect();
    write_columns_csv(path, &[&eafn, &eaon, &eaon_star])
}

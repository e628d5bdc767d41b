//! End-to-end checks of the `covgl` binary: file formats, exit codes,
//! determinism and schema conformance.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn covgl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covgl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

fn schema_for(name: &str) -> jsonschema::Validator {
    let text = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("schemas")
            .join(name),
    )
    .unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(schema: &str, json_path: &Path) {
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(json_path).unwrap()).unwrap();
    let validator = schema_for(schema);
    let errors: Vec<String> = validator
        .iter_errors(&value)
        .map(|e| e.to_string())
        .collect();
    assert!(
        errors.is_empty(),
        "{json_path:?} violates {schema}: {errors:?}"
    );
}

#[test]
fn estimate_identity_dictionary_single_sample() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(dir.path(), "samples.csv", "1,2\n");
    let dict = write(
        dir.path(),
        "dict.json",
        r#"{"kind":"custom","matrix":[[1.0,0.0],[0.0,1.0]]}"#,
    );
    let out = dir.path().join("out");
    let result = covgl(
        &[
            "estimate",
            "--samples",
            &samples,
            "--dict",
            &dict,
            "--lambda",
            "0",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );

    // sigma_lambda is the unpenalised fit [[1,2],[2,4]], exact to the
    // iterative solver's stopping tolerance
    let sigma = covgl::io::read_matrix_csv(&out.join("sigma_lambda.csv")).unwrap();
    let expect = ndarray::array![[1.0, 2.0], [2.0, 4.0]];
    assert!(sigma
        .iter()
        .zip(expect.iter())
        .all(|(a, b)| (a - b).abs() < 1e-7));

    assert_valid("estimate_report.schema.json", &out.join("report.json"));
}

#[test]
fn estimate_missing_file_exits_2_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let dict = write(dir.path(), "dict.json", r#"{"kind":"haar","size":4}"#);
    let result = covgl(
        &[
            "estimate",
            "--samples",
            "no_such_file.csv",
            "--dict",
            &dict,
            "--out",
            "out",
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("no_such_file.csv"), "stderr: {stderr}");
}

#[test]
fn estimate_malformed_csv_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(dir.path(), "samples.csv", "1,2,3,x\n");
    let dict = write(dir.path(), "dict.json", r#"{"kind":"haar","size":4}"#);
    let result = covgl(
        &[
            "estimate",
            "--samples",
            &samples,
            "--dict",
            &dict,
            "--out",
            "out",
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line 1"), "stderr: {stderr}");
    assert!(stderr.contains("column 4"), "stderr: {stderr}");
}

#[test]
fn estimate_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::new();
    for i in 0..6 {
        let row: Vec<String> = (0..8)
            .map(|j| format!("{}", ((i * 13 + j * 7) % 11) as f64 / 3.0 - 1.5))
            .collect();
        rows.push_str(&row.join(","));
        rows.push('\n');
    }
    let samples = write(dir.path(), "samples.csv", &rows);
    let dict = write(dir.path(), "dict.json", r#"{"kind":"haar","size":8}"#);
    for out in ["out_a", "out_b"] {
        let result = covgl(
            &[
                "estimate",
                "--samples",
                &samples,
                "--dict",
                &dict,
                "--out",
                out,
            ],
            dir.path(),
        );
        assert!(result.status.success());
    }
    for file in ["report.json", "sigma_lambda.csv", "sigma_refit.csv"] {
        let a = fs::read(dir.path().join("out_a").join(file)).unwrap();
        let b = fs::read(dir.path().join("out_b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

fn saturation_scenario() -> &'static str {
    r#"{
      "model": "one", "signal": "heavisine", "gamma": 0.5,
      "sigma": 1.0, "n": 64, "replicates": 10, "runs": 3,
      "dictionary": {"kind": "symmlet8", "size": 64},
      "design": "equispaced", "base_seed": 42,
      "estimator": {"mode": "unconstrained"}
    }"#
}

#[test]
fn simulate_saturation_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "scenario.json", saturation_scenario());
    for out in ["m1", "m2"] {
        let result = covgl(
            &[
                "simulate",
                "--scenario",
                &scenario,
                "--per-replicate",
                "--plot-data",
                "--out",
                out,
            ],
            dir.path(),
        );
        assert!(
            result.status.success(),
            "{}",
            String::from_utf8_lossy(&result.stderr)
        );
    }
    let a = fs::read(dir.path().join("m1/metrics.json")).unwrap();
    let b = fs::read(dir.path().join("m2/metrics.json")).unwrap();
    assert_eq!(a, b, "same seed must give identical metrics.json");

    let metrics: serde_json::Value = serde_json::from_slice(&a).unwrap();
    // deep saturation: the estimator collapses and EAON* = gamma^2 + sigma^2
    let eaon_star = metrics["eaon_star"].as_f64().unwrap();
    assert!((eaon_star - 1.25).abs() < 0.01, "eaon_star {eaon_star}");
    assert_valid("metrics.schema.json", &dir.path().join("m1/metrics.json"));

    let reps = covgl::io::read_matrix_csv(&dir.path().join("m1/replicates.csv")).unwrap();
    assert_eq!(reps.dim(), (3, 3));
    let eig = covgl::io::read_matrix_csv(&dir.path().join("m1/eigvec.csv")).unwrap();
    assert_eq!(eig.dim(), (64, 3));
}

#[test]
fn simulate_rejects_zero_runs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "scenario.json",
        &saturation_scenario().replace("\"runs\": 3", "\"runs\": 0"),
    );
    let result = covgl(
        &["simulate", "--scenario", &scenario, "--out", "out"],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn diagnose_identity_and_budget_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let eye = "1,0,0\n0,1,0\n0,0,1\n";
    let matrix = write(dir.path(), "eye.csv", eye);
    let result = covgl(
        &[
            "diagnose", "--matrix", &matrix, "--s", "2", "--c0", "1.0,3.0", "--out", "d",
        ],
        dir.path(),
    );
    assert!(result.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d/diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(report["theta"].as_f64().unwrap(), 0.0);
    assert_eq!(report["rho_min"][0]["value"].as_f64().unwrap(), 1.0);
    assert!(report["kappa"][0]["assumption_holds"].as_bool().unwrap());
    assert_valid(
        "diagnostics.schema.json",
        &dir.path().join("d/diagnostics.json"),
    );

    // a 20-column matrix at s=3 has 1350 subsets: budget 1 must refuse
    let mut rows = String::new();
    for i in 0..20 {
        let row: Vec<&str> = (0..20).map(|j| if i == j { "1" } else { "0" }).collect();
        rows.push_str(&row.join(","));
        rows.push('\n');
    }
    let big = write(dir.path(), "big.csv", &rows);
    let result = covgl(
        &[
            "diagnose", "--matrix", &big, "--s", "3", "--budget", "1", "--out", "d2",
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(
        stderr.contains("1350"),
        "stderr should name the subset count: {stderr}"
    );

    // duplicated column: the coherence assumption fails at s = 2
    let dup = write(dir.path(), "dup.csv", "1,1\n0,0\n");
    let result = covgl(
        &[
            "diagnose", "--matrix", &dup, "--s", "2", "--c0", "1.0", "--out", "d3",
        ],
        dir.path(),
    );
    assert!(result.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d3/diagnostics.json")).unwrap())
            .unwrap();
    let entries = report["kappa"].as_array().unwrap();
    let s2 = entries.iter().find(|e| e["s"] == 2).unwrap();
    assert_eq!(s2["assumption_holds"].as_bool(), Some(false));
    assert_eq!(s2["kappa"].as_str(), Some("violated"));
}

#[test]
fn pca_diagonal_and_dimension_check() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "sigma.csv", "2,0\n0,1\n");
    let result = covgl(
        &["pca", "--sigma", &sigma, "-k", "1", "--out", "p"],
        dir.path(),
    );
    assert!(result.status.success());
    let pairs = covgl::io::read_matrix_csv(&dir.path().join("p/eigenpairs.csv")).unwrap();
    assert_eq!(pairs.dim(), (1, 3));
    assert!((pairs[[0, 0]] - 2.0).abs() < 1e-12);
    assert!((pairs[[0, 1]] - 1.0).abs() < 1e-12);
    assert!(pairs[[0, 2]].abs() < 1e-12);

    // k > n is a validation error
    let result = covgl(
        &["pca", "--sigma", &sigma, "-k", "3", "--out", "p2"],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(2));

    // rank-one recovers the generating direction
    let f = [0.6, -0.8];
    let rows = format!(
        "{},{}\n{},{}\n",
        f[0] * f[0],
        f[0] * f[1],
        f[1] * f[0],
        f[1] * f[1]
    );
    let r1 = write(dir.path(), "rank1.csv", &rows);
    let result = covgl(
        &["pca", "--sigma", &r1, "-k", "1", "--out", "p3"],
        dir.path(),
    );
    assert!(result.status.success());
    let pairs = covgl::io::read_matrix_csv(&dir.path().join("p3/eigenpairs.csv")).unwrap();
    let cos = (pairs[[0, 1]] * f[0] + pairs[[0, 2]] * f[1]).abs();
    assert!(cos >= 1.0 - 1e-10);
}

#[test]
fn export_signal_and_dictionary() {
    let dir = tempfile::tempdir().unwrap();
    let result = covgl(
        &["export", "--signal", "blocks", "--n", "16", "--out", "e"],
        dir.path(),
    );
    assert!(result.status.success());
    let signal = covgl::io::read_matrix_csv(&dir.path().join("e/signal.csv")).unwrap();
    assert_eq!(signal.dim(), (16, 1));

    let dict = write(dir.path(), "dict.json", r#"{"kind":"fourier","size":8}"#);
    let result = covgl(&["export", "--dict", &dict, "--out", "e2"], dir.path());
    assert!(result.status.success());
    let g = covgl::io::read_matrix_csv(&dir.path().join("e2/dictionary.csv")).unwrap();
    assert_eq!(g.dim(), (8, 8));

    // exactly one of --signal / --dict
    let result = covgl(&["export", "--out", "e3"], dir.path());
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn solver_non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // a non-orthogonal custom dictionary forces the iterative solver;
    // a one-iteration budget cannot converge
    let mut rows = String::new();
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| {
                if i == j {
                    "1.0".into()
                } else {
                    format!("{}", 0.3 / (1 + i + j) as f64)
                }
            })
            .collect();
        rows.push_str(&row.join(","));
        rows.push('\n');
    }
    write(dir.path(), "g.csv", &rows);
    let dict = write(
        dir.path(),
        "dict.json",
        r#"{"kind":"custom","path":"g.csv"}"#,
    );
    let samples = write(
        dir.path(),
        "samples.csv",
        "0.9,0.1,0.2,0.4\n0.2,0.8,0.1,0.3\n",
    );
    let result = covgl(
        &[
            "estimate",
            "--samples",
            &samples,
            "--dict",
            &dict,
            "--lambda",
            "0.05",
            "--max-iter",
            "1",
            "--out",
            "nc",
        ],
        dir.path(),
    );
    assert_eq!(
        result.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    // the report is still written, flagged as non-converged
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("nc/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["converged"].as_bool(), Some(false));
}

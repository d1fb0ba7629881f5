use std::process::{Command, Output};

use pdirac::{Results, RunReport, Status};

fn pdirac(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pdirac"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn flag_overrides_file_and_report_goes_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"params": {"z": 1}, "grid": {"n": 64}, "solver": {"k": 2}}"#).unwrap();
    let out = pdirac(&["spectrum", "--config", path.to_str().unwrap(), "--Z", "2"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.config.params.z, 2.0);
    assert_eq!(report.config.grid.n, 64);
    let Some(Results::Spectrum(rows)) = &report.results else {
        panic!("wrong payload")
    };
    // hydrogen-like ground state Z²/2
    assert!((rows[0].primary().binding_energies()[0] - 2.0).abs() < 2e-2);
    assert_eq!(report.report_hash, report.compute_hash());
}

#[test]
fn config_errors_exit_with_two_and_name_the_key() {
    let out = pdirac(&["spectrum", "--set", "grid.n=4"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("grid.n") && stderr(&out).contains("n ≥ 16"),
        "{}",
        stderr(&out)
    );
    let out = pdirac(&["spectrum", "--set", "solver.speed=3"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("solver.speed"));
    let out = pdirac(&["spectrum", "--config", "/nonexistent/run.json"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = pdirac(&["spectrum", "--set", "n=32"], &[("PDIRAC_THREADS", "lots")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("PDIRAC_THREADS"));
}

#[test]
fn flagged_runs_exit_nonzero() {
    // a loose minimizer tolerance makes the two routes disagree
    let out = pdirac(&["spectrum", "--set", "n=64", "--set", "solver.tol=1e-2"], &[]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let report = RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.status, Status::Flagged);
    assert!(
        report.flags.iter().any(|f| f.contains("routes differ")),
        "{:?}",
        report.flags
    );
}

#[test]
fn module_errors_are_reported() {
    let out = pdirac(
        &["nonrel-limit", "--set", "z=0", "--set", "experiments.nonrel.n=32"],
        &[],
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let report = RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.status, Status::Error);
    assert!(report.error.unwrap().contains("Z > 0"));
}

#[test]
fn output_directory_gets_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let out = pdirac(
        &[
            "commutator-decay",
            "-o",
            out_dir.to_str().unwrap(),
            "--set",
            "experiments.commutator.n=48",
        ],
        &[("PDIRAC_THREADS", "2")],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let json = std::fs::read_to_string(out_dir.join("commutator-decay.json")).unwrap();
    let report = RunReport::from_json(&json).unwrap();
    assert_eq!(report.config.output.directory.as_deref(), out_dir.to_str());
    let mut reader = csv::Reader::from_path(out_dir.join("commutator-decay.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["r", "norm"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    let norm: f64 = rows[0][1].parse().unwrap();
    let Some(Results::CommutatorDecay(r)) = &report.results else {
        panic!("wrong payload")
    };
    assert_eq!(norm, r.norms[0]);
    // 17 significant digits
    assert_eq!(rows[0][1].split('e').next().unwrap().len(), 18);
}

#[test]
fn repeated_runs_hash_identically() {
    let args = ["scaling-limit", "--set", "experiments.scaling.eta_values=[0.5,0.2,0.1]"];
    let a = RunReport::from_json(std::str::from_utf8(&pdirac(&args, &[]).stdout).unwrap()).unwrap();
    let b =
        RunReport::from_json(std::str::from_utf8(&pdirac(&args, &[("PDIRAC_THREADS", "1")]).stdout).unwrap()).unwrap();
    assert_eq!(a.report_hash, b.report_hash);
    assert_eq!(a.results, b.results);
}

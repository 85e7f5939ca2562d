//! End-to-end tests against the compiled binary: file round-trips, exit
//! codes, and the values the front end must print.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

use qtangle::state::{DensityMatrix, PureState};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qtangle"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qtangle-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_pure(path: &Path, dims: &[usize], amps: &[(f64, f64)], label: &str) {
    let file = json!({
        "schema": 1,
        "kind": "pure",
        "dims": dims,
        "data": amps.iter().map(|(re, im)| json!([re, im])).collect::<Vec<_>>(),
        "metadata": { "label": label },
    });
    std::fs::write(path, serde_json::to_string_pretty(&file).unwrap()).unwrap();
}

fn write_density(path: &Path, rho: &DensityMatrix, label: &str) {
    let n = rho.dim_total();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let c = rho.matrix()[(i, j)];
            data.push(json!([c.re, c.im]));
        }
    }
    let file = json!({
        "schema": 1,
        "kind": "density",
        "dims": rho.dims(),
        "data": data,
        "metadata": { "label": label },
    });
    std::fs::write(path, serde_json::to_string_pretty(&file).unwrap()).unwrap();
}

fn ghz3_path(dir: &Path) -> PathBuf {
    let path = dir.join("ghz3.json");
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![(0.0, 0.0); 8];
    amps[0] = (a, 0.0);
    amps[7] = (a, 0.0);
    write_pure(&path, &[2, 2, 2], &amps, "ghz3");
    path
}

#[test]
fn compute_ghz3_reports_unit_residual() {
    let dir = temp_dir("ghz");
    let input = ghz3_path(&dir);
    let report_path = dir.join("report.json");
    let out = run(&[
        "compute",
        input.to_str().unwrap(),
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("residual = 1.000000"));

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["semantics"], "exact");
    assert_eq!(report["foci"].as_array().unwrap().len(), 3);
    assert!((report["residual"].as_f64().unwrap() - 1.0).abs() < 1e-7);

    // Lossless round-trip of the report record.
    let reparsed: Value = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, reparsed);
}

#[test]
fn compute_basis_state_reports_zero_residual() {
    let dir = temp_dir("zero");
    let input = dir.join("zero.json");
    let mut amps = vec![(0.0, 0.0); 8];
    amps[0] = (1.0, 0.0);
    write_pure(&input, &[2, 2, 2], &amps, "basis");
    let out = run(&["compute", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("residual = 0.000000"));
}

#[test]
fn compute_two_singlets_finds_zero_total_pair_focus() {
    let dir = temp_dir("singlets");
    let input = dir.join("two_singlets.json");
    let psi = PureState::singlet().tensor(&PureState::singlet());
    let amps: Vec<(f64, f64)> = psi.amplitudes().iter().map(|c| (c.re, c.im)).collect();
    write_pure(&input, &[2, 2, 2, 2], &amps, "two singlets");
    let report_path = dir.join("report.json");
    let out = run(&[
        "compute",
        input.to_str().unwrap(),
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("residual = 0.000000"));

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let zero_total = report["foci"].as_array().unwrap().iter().any(|f| {
        f["focus"].as_array().unwrap().len() == 2 && f["total_sq"].as_f64().unwrap() <= 1e-8
    });
    assert!(zero_total, "no zero-total size-2 focus in {report}");
}

#[test]
fn compute_routes_two_party_input_to_concurrence() {
    let dir = temp_dir("bell");
    let input = dir.join("bell.json");
    let a = std::f64::consts::FRAC_1_SQRT_2;
    write_pure(
        &input,
        &[2, 2],
        &[(a, 0.0), (0.0, 0.0), (0.0, 0.0), (a, 0.0)],
        "bell",
    );
    let out = run(&["compute", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("notice"));
    assert!(text.contains("1.000000"));
}

#[test]
fn malformed_and_invalid_inputs_exit_with_validation_error() {
    let dir = temp_dir("bad");

    let garbled = dir.join("garbled.json");
    std::fs::write(&garbled, "{ not json").unwrap();
    let out = run(&["compute", garbled.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed"));

    // Norm off by far more than the tolerance.
    let unnormalized = dir.join("unnormalized.json");
    write_pure(
        &unnormalized,
        &[2, 2],
        &[(0.9, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
        "bad norm",
    );
    let out = run(&["compute", unnormalized.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    // A single party has no entanglement structure.
    let single = dir.join("single.json");
    write_pure(&single, &[2], &[(1.0, 0.0), (0.0, 0.0)], "single");
    let out = run(&["compute", single.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    let out = run(&[
        "random",
        "--dims",
        "2",
        "--seed",
        "1",
        "--out",
        dir.join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);

    // Unknown flags are validation errors too.
    let out = run(&["compute", "--no-such-flag"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn random_is_deterministic_and_normalized() {
    let dir = temp_dir("rand");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "random",
            "--dims",
            "2,2,2",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed must give byte-identical files");

    let parsed: Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(parsed["kind"], "pure");
    assert_eq!(parsed["metadata"]["seed"], 7);
    let norm_sq: f64 = parsed["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|pair| {
            let re = pair[0].as_f64().unwrap();
            let im = pair[1].as_f64().unwrap();
            re * re + im * im
        })
        .sum();
    assert!((norm_sq - 1.0).abs() < 1e-12);

    let different = dir.join("c.json");
    let out = run(&[
        "random",
        "--dims",
        "2,2,2",
        "--seed",
        "8",
        "--out",
        different.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_ne!(std::fs::read(&different).unwrap(), bytes_a);
}

#[test]
fn concurrence_values_match_known_examples() {
    let dir = temp_dir("conc");

    let bell = dir.join("bell.json");
    let a = std::f64::consts::FRAC_1_SQRT_2;
    write_pure(
        &bell,
        &[2, 2],
        &[(a, 0.0), (0.0, 0.0), (0.0, 0.0), (a, 0.0)],
        "bell",
    );
    let out = run(&["concurrence", bell.to_str().unwrap(), "--focus", "0"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("1.000000"));

    // GHZ3 pair state: separable, bound 0.
    let ghz_pair = dir.join("ghz_pair.json");
    let rho = DensityMatrix::from_pure(&PureState::ghz(3))
        .partial_trace(&[2])
        .unwrap();
    write_density(&ghz_pair, &rho, "ghz3 pair");
    let out = run(&["concurrence", ghz_pair.to_str().unwrap(), "--focus", "0"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("0.000000"));

    // W3 pair state: Wootters concurrence 2/3, squared 4/9.
    let w_pair = dir.join("w_pair.json");
    let c = num_complex::Complex64::new(f64::sqrt(3.0).recip(), 0.0);
    let w3 = PureState::w_state(&[c, c, c]).unwrap();
    let rho = DensityMatrix::from_pure(&w3).partial_trace(&[2]).unwrap();
    write_density(&w_pair, &rho, "w3 pair");
    let report_path = dir.join("w_pair_report.json");
    let out = run(&[
        "concurrence",
        w_pair.to_str().unwrap(),
        "--focus",
        "0",
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("0.444444"));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["semantics"], "lower-bound");
    assert!((report["concurrence_sq"].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-9);

    // Focus must name valid parties.
    let out = run(&["concurrence", bell.to_str().unwrap(), "--focus", "5"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn reports_are_deterministic_up_to_runtime() {
    let dir = temp_dir("det");
    let input = ghz3_path(&dir);
    let mut reports = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let path = dir.join(name);
        let out = run(&[
            "compute",
            input.to_str().unwrap(),
            "--seed",
            "3",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("runtime_seconds");
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn nonconvergence_maps_to_exit_code_three() {
    let dir = temp_dir("conv");
    let input = dir.join("mixed23.json");
    let rho = qtangle::state::random_density(&[2, 3], 4, 99).unwrap();
    write_density(&input, &rho, "mixed");
    // One restart capped at a single iteration cannot stall out.
    let starved = [
        "concurrence",
        input.to_str().unwrap(),
        "--focus",
        "0",
        "--restarts",
        "1",
        "--max-iter",
        "1",
    ];
    let out = run(&starved);
    assert_eq!(
        code(&out),
        3,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let mut allowed = starved.to_vec();
    allowed.push("--allow-nonconverged");
    let out = run(&allowed);
    assert_eq!(code(&out), 0);
}

#[test]
fn verify_suites_pass_and_set_exit_codes() {
    for (suite, extra) in [
        ("identities", vec!["--dims", "2,2,3"]),
        ("monogamy", vec!["--dims", "2,2,2"]),
        ("reduction", vec![]),
        ("oracle", vec![]),
    ] {
        let mut args = vec!["verify", "--suite", suite, "--trials", "10"];
        args.extend(extra.iter());
        let out = run(&args);
        assert_eq!(
            code(&out),
            0,
            "suite {suite} failed: {}\n{}",
            stdout(&out),
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(stdout(&out).contains("PASS"));
    }

    let out = run(&["verify", "--suite", "identities", "--dims", "2,2"]);
    assert_eq!(code(&out), 1);
}

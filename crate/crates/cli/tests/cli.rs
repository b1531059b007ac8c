use std::path::Path;
use std::process::{Command, Output};

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toeplitz-lab"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn trace_sweep_writes_reports_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["trace", "--N-list", "16,24,32"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("metric,N,value\n"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace.json")).unwrap())
            .unwrap();
    assert_eq!(json["verdict"], "pass");
    assert_eq!(json["config_echo"]["geometry"], "cp1");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(
            code(&lab(
                d.path(),
                &["trace", "--N-list", "16,24,32", "--jobs", "1"]
            )),
            0
        );
    }
    for f in ["trace.csv", "trace.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn compose_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("out.json");
    let o = lab(
        dir.path(),
        &[
            "compose",
            "--N-list",
            "16,24,32",
            "--f",
            "z*conj(z)",
            "--g",
            "z*conj(z)",
            "--J",
            "1",
            "--report",
            report.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let rows = v["per_N"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for key in ["N", "err_norm", "normalized_err"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["predicted_slope"], -2.0);
    assert_eq!(v["pass"], true);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let two_levels = lab(dir.path(), &["compose", "--N-list", "32,64"]);
    assert_eq!(code(&two_levels), 2);
    let bad_symbol = lab(dir.path(), &["trace", "--symbol", "bump(0"]);
    assert_eq!(code(&bad_symbol), 2);
    let bad_delta = lab(dir.path(), &["compose", "--delta", "0.5"]);
    assert_eq!(code(&bad_delta), 2);
    let no_config = lab(dir.path(), &["sweep"]);
    assert_eq!(code(&no_config), 2);
}

#[test]
fn config_file_drives_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "kernel", "n_list": [16, 24, 32, 48], "seed": 7}"#,
    )
    .unwrap();
    let o = lab(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("kernel.json")).unwrap())
            .unwrap();
    assert_eq!(json["config_echo"]["seed"], 7);
    let mismatch = lab(dir.path(), &["--config", cfg.to_str().unwrap(), "trace"]);
    assert_eq!(code(&mismatch), 2);
    std::fs::write(&cfg, r#"{"experiment": "kernel", "typo": 1}"#).unwrap();
    assert_eq!(
        code(&lab(
            dir.path(),
            &["--config", cfg.to_str().unwrap(), "sweep"]
        )),
        2
    );
}

#[test]
fn check_symbols_reports_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let ok = lab(dir.path(), &["check-symbols", "--symbol", "bump(0, 1)"]);
    assert_eq!(code(&ok), 0);
    let cert: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(cert["certified"], true);
    assert!(cert.get("per_alpha").is_some() && cert.get("C").is_some());
    let bad = lab(
        dir.path(),
        &["check-symbols", "--symbol", "N^0.3*bump(0, 1)"],
    );
    assert_eq!(code(&bad), 1);
}

#[test]
fn quantize_writes_binary_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("t.bin");
    let o = lab(
        dir.path(),
        &[
            "quantize",
            "--geometry",
            "cp1",
            "--N",
            "6",
            "--symbol",
            "z*conj(z)",
            "--out",
            bin.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0);
    let bytes = std::fs::read(&bin).unwrap();
    assert_eq!(&bytes[..8], b"TQMAT01\0");
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 7);
    let csv = dir.path().join("t.csv");
    let o = lab(
        dir.path(),
        &[
            "quantize",
            "--geometry",
            "bargmann",
            "--N",
            "8",
            "--symbol",
            "1",
            "--out",
            csv.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(csv).unwrap();
    let first: Vec<f64> = text
        .lines()
        .next()
        .unwrap()
        .split(',')
        .map(|t| t.parse().unwrap())
        .collect();
    assert!((first[0] - 1.0).abs() < 1e-9 && first[1].abs() < 1e-12);
}

#[test]
fn kernel_csv_at_one_level() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        dir.path(),
        &[
            "kernel",
            "--geometry",
            "bargmann",
            "--N",
            "32",
            "--pair",
            "0.1,0,0.1,0",
            "--pair",
            "0,0,0.1,0.1",
        ],
    );
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x_re,x_im,y_re,y_im,value");
    assert_eq!(lines.len(), 3);
    let diag: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!((diag - 32.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-9);
    let off: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    let gauss = 32.0 / (2.0 * std::f64::consts::PI) * (-0.5 * 32.0 * 0.02f64).exp();
    assert!((off - gauss).abs() < 1e-9 * gauss);
}

use num_complex::Complex64;
use proptest::prelude::*;
use toeplitz_core::harness::{emit_report, run_experiment, Experiment, SweepConfig, Verdict};
use toeplitz_core::toeplitz::{assemble, read_binary, write_binary, MATRIX_MAGIC};
use toeplitz_core::{build_basis, build_quadrature, ModelGeometry, QuadratureSpec, Symbol};

fn small_trace() -> SweepConfig {
    let mut c = SweepConfig::new(Experiment::Trace);
    c.n_list = Some(vec![16, 24, 32]);
    c
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let c = small_trace();
    let a = run_experiment(&c).unwrap();
    let b = run_experiment(&c).unwrap();
    let (csv1, json1) = emit_report(&a, &dir.path().join("a"), "trace").unwrap();
    let (csv2, json2) = emit_report(&b, &dir.path().join("b"), "trace").unwrap();
    assert_eq!(std::fs::read(csv1).unwrap(), std::fs::read(csv2).unwrap());
    assert_eq!(std::fs::read(json1).unwrap(), std::fs::read(json2).unwrap());
}

#[test]
fn config_echo_reproduces_the_report() {
    let r = run_experiment(&small_trace()).unwrap();
    let echo: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    let again = SweepConfig::from_json(&echo["config_echo"].to_string()).unwrap();
    assert_eq!(run_experiment(&again).unwrap().to_json(), r.to_json());
}

#[test]
fn csv_has_one_row_per_level_and_metric() {
    let mut c = SweepConfig::new(Experiment::Commutator);
    c.n_list = Some(vec![16, 24, 32, 48]);
    let r = run_experiment(&c).unwrap();
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "metric,N,value");
    assert_eq!(lines.len() - 1, 4);
    assert!(lines[1..].iter().all(|l| l.starts_with("commutator,")));
    // every fit is recomputable from the rows
    let fit = r.fit("commutator").unwrap();
    let refit = toeplitz_core::harness::fit_rate(&r.series("commutator")).unwrap();
    assert_eq!(fit.slope, Some(refit.slope));
}

#[test]
fn uncertified_symbol_class_fails_without_error() {
    let mut c = SweepConfig::new(Experiment::SymbolClass);
    c.f = Some("N^0.3*bump(0, 1)".into());
    c.n_list = Some(vec![16, 32, 64]);
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(!r.check("uncertified").unwrap().pass);
}

#[test]
fn binary_matrix_round_trip() {
    let g = ModelGeometry::projective_line();
    let b = build_basis(&g, 12, 1.0).unwrap();
    let rule = build_quadrature(&b, &QuadratureSpec::default()).unwrap();
    let t = assemble(&Symbol::parse("z + 2*conj(z)*z").unwrap(), &b, &rule).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    write_binary(&t.entries, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], MATRIX_MAGIC);
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 13);
    assert_eq!(bytes.len(), 16 + 13 * 13 * 16);
    assert_eq!(read_binary(&path).unwrap(), t.entries);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quantization_is_linear_and_respects_conjugation(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        cp1 in any::<bool>(),
    ) {
        let g = if cp1 { ModelGeometry::projective_line() } else { ModelGeometry::bargmann() };
        let basis = build_basis(&g, 16, 1.0).unwrap();
        let rule = build_quadrature(&basis, &QuadratureSpec::default()).unwrap();
        let q = |s: &str| assemble(&Symbol::parse(s).unwrap(), &basis, &rule).unwrap().entries;
        let f = "z*z*conj(z) + bump(0.1, 0.7)";
        let h = "exp(-z*conj(z))*conj(z)";
        let lhs = q(&format!("{a}*({f}) + {b}*({h})"));
        let rhs = q(f) * Complex64::new(a, 0.0) + q(h) * Complex64::new(b, 0.0);
        prop_assert!((&lhs - &rhs).norm() < 1e-10);
        let adj = q(&format!("conj({f})"));
        prop_assert!((&adj - q(f).adjoint()).norm() < 1e-10);
    }
}

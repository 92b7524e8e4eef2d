use std::path::Path;
use std::process::{Command as Proc, Output};

use rg2lab::formats::{
    read_curvature_csv, read_symbol_csv, read_verify_csv, write_curvature_csv, write_symbol_csv, write_verify_csv,
    CurvatureRow, SymbolEntry,
};
use rg2lab::{exit, Command, ExperimentConfig, RawConfig};
use rg2lab_core::flow::{read_trace_csv, Termination};
use rg2lab_core::oracle::CheckResult;
use rg2lab_core::symbol::read_sweep_csv;
use rg2lab_core::{ParabolicityReport, Verdict, VERSION};

fn rg2lab(args: &[&str]) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_rg2lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> u8 {
    o.status.code().expect("exited normally") as u8
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn curvature_sphere_scalar_is_constant() {
    let o = rg2lab(&["curvature", "--family", "sphere", "--dim", "4", "--params", "1", "--samples", "6"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let (n, rows) = read_curvature_csv(o.stdout.as_slice()).unwrap();
    assert_eq!((n, rows.len()), (4, 6));
    for r in &rows {
        assert!((r.scalar - 12.0).abs() < 1e-10, "{}", r.scalar);
        assert!((r.sectional_min - 1.0).abs() < 1e-10 && (r.sectional_max - 1.0).abs() < 1e-10);
    }
}

#[test]
fn curvature_flat_is_zero() {
    let o = rg2lab(&["curvature", "--family", "flat", "--dim", "3"]);
    let (_, rows) = read_curvature_csv(o.stdout.as_slice()).unwrap();
    for r in rows {
        let all = [r.scalar, r.sectional_min, r.sectional_max].into_iter().chain(r.ricci).chain(r.rm_sq);
        assert!(all.into_iter().all(|v| v == 0.0));
    }
}

#[test]
fn curvature_product_spans_zero_to_one() {
    let o = rg2lab(&["curvature", "--family", "product", "--dim", "4", "--samples", "4"]);
    let (_, rows) = read_curvature_csv(o.stdout.as_slice()).unwrap();
    for r in rows {
        assert!(r.sectional_min.abs() < 1e-9, "{}", r.sectional_min);
        assert!((r.sectional_max - 1.0).abs() < 1e-9, "{}", r.sectional_max);
    }
}

#[test]
fn parabolicity_verdicts_and_exit_codes() {
    let cases = [
        ("sphere", "1", Verdict::Parabolic, exit::OK),
        ("sphere", "-2", Verdict::BackwardParabolic, exit::BACKWARD_PARABOLIC),
        ("product", "-2", Verdict::Indefinite, exit::INDEFINITE),
        ("hyperbolic", "1", Verdict::Degenerate, exit::DEGENERATE),
    ];
    for (family, alpha, verdict, status) in cases {
        let o = rg2lab(&["parabolicity", "--family", family, "--dim", "4", "--alpha", alpha]);
        assert_eq!(code(&o), status, "{family} α = {alpha}: {}", stderr(&o));
        let report = ParabolicityReport::from_toml_str(&stdout(&o)).unwrap();
        assert_eq!(report.verdict, verdict);
        if family == "sphere" && alpha == "1" {
            assert!((report.min_one_plus_alpha_k - 2.0).abs() < 1e-10);
        }
        if family == "product" {
            assert!((report.min_one_plus_alpha_k + 1.0).abs() < 1e-9);
            assert!((report.max_one_plus_alpha_k - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn sweep_thresholds() {
    for (family, lo, hi, expected) in [("sphere", "-2", "1", -1.0), ("hyperbolic", "0", "2", 1.0)] {
        let o = rg2lab(&["sweep", "--family", family, "--alpha-min", lo, "--alpha-max", hi, "--alpha-count", "16"]);
        assert_eq!(code(&o), exit::OK);
        let rows = read_sweep_csv(o.stdout.as_slice()).unwrap();
        let thresholds: Vec<f64> = rows.iter().filter(|r| r.kind == "threshold").map(|r| r.alpha).collect();
        assert!(!thresholds.is_empty());
        for a in thresholds {
            assert!((a - expected).abs() <= 1e-6, "{family}: {a}");
        }
        let text = stdout(&o);
        assert!(text.lines().any(|l| l.starts_with("# crossing: quantity=min")));
        assert!(text.contains("# tolerance.threshold_bracket = 1e-6"));
    }
    let o = rg2lab(&["sweep", "--family", "flat", "--alpha-min", "-5", "--alpha-max", "5"]);
    let rows = read_sweep_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 31);
    assert!(rows.iter().all(|r| r.kind == "sample" && r.verdict == Verdict::Parabolic));
}

#[test]
fn flow_ansatz_zero_alpha_is_linear() {
    let o = rg2lab(&["flow", "--family", "sphere", "--dim", "3", "--c0", "9", "--alpha", "0", "--t-end", "1", "--dt", "0.01"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let trace = read_trace_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(trace.termination, Termination::Completed);
    let last = trace.records.last().unwrap();
    assert!((last.t - 1.0).abs() < 1e-12);
    assert!((last.c.unwrap() - (9.0 - 4.0)).abs() < 1e-10);
}

#[test]
fn flow_collapse_writes_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = rg2lab(&["flow", "--dim", "4", "--c0", "1", "--alpha", "1", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), exit::FLOW_STOPPED, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let trace = read_trace_csv(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert!(matches!(trace.termination, Termination::PositivityLoss { .. }));
    assert!(trace.records.windows(2).all(|w| w[1].c < w[0].c));
}

#[test]
fn flow_refuses_non_parabolic_start() {
    let o = rg2lab(&["flow", "--family", "hyperbolic", "--alpha", "1"]);
    assert_eq!(code(&o), exit::ERROR);
    assert!(stderr(&o).contains("refusing"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn flow_on_grid() {
    let o = rg2lab(&[
        "flow", "--family", "conformal", "--dim", "2", "--flow-mode", "grid", "--grid", "12", "--alpha", "0.5", "--t-end",
        "0.01",
    ]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let trace = read_trace_csv(o.stdout.as_slice()).unwrap();
    assert!(trace.records.iter().all(|r| r.c.is_none()));
    assert!(stdout(&o).lines().any(|l| l.starts_with("# dt = ")));
    let o = rg2lab(&["flow", "--family", "sphere", "--flow-mode", "grid"]);
    assert_eq!(code(&o), exit::ERROR);
}

#[test]
fn verify_default_passes() {
    let o = rg2lab(&["verify"]);
    assert_eq!(code(&o), exit::OK, "{}", stdout(&o));
    let checks = read_verify_csv(o.stdout.as_slice()).unwrap();
    assert!(checks.len() >= 10 && checks.iter().all(|c| c.passed));
}

#[test]
fn verify_catches_corrupted_convention() {
    let o = rg2lab(&["verify", "--family", "perturbed", "--params", "0.15,7", "--convention", "corrupted"]);
    assert_eq!(code(&o), exit::VERIFY_FAILED);
    let checks = read_verify_csv(o.stdout.as_slice()).unwrap();
    let sym = checks.iter().find(|c| c.name == "riemann_symmetry").unwrap();
    assert!(!sym.passed);
}

#[test]
fn verify_zero_alpha_identity() {
    let o = rg2lab(&["verify", "--alpha", "0"]);
    let checks = read_verify_csv(o.stdout.as_slice()).unwrap();
    let id = checks.iter().find(|c| c.name == "symbol_identity_at_zero_alpha").unwrap();
    assert!(id.passed && id.residual <= 1e-12);
}

#[test]
fn symbol_table_has_full_sigma() {
    let o = rg2lab(&["symbol", "--family", "sphere", "--dim", "3", "--samples", "2", "--alpha", "1", "--xi", "0,1,1"]);
    assert_eq!(code(&o), exit::OK);
    let entries = read_symbol_csv(o.stdout.as_slice()).unwrap();
    for p in 0..2 {
        let at = |q: &str| entries.iter().filter(|e| e.point == p && e.quantity == q).count();
        assert_eq!((at("x"), at("xi"), at("sigma"), at("nu_eigenvalue"), at("det_sigma")), (3, 3, 36, 6, 1));
        let det = entries.iter().find(|e| e.point == p && e.quantity == "det_sigma").unwrap().value;
        assert!((det - 8.0).abs() < 1e-10, "{det}");
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# sphere, backward side\nfamily = sphere\ndim = 4\nalpha = -2\n");
    let o = rg2lab(&["parabolicity", "--config", &cfg]);
    assert_eq!(code(&o), exit::BACKWARD_PARABOLIC);
    let o = rg2lab(&["parabolicity", "--config", &cfg, "--alpha", "0.5"]);
    assert_eq!(code(&o), exit::OK);
    let o = rg2lab(&["parabolicity", "--config", &cfg, "--alpha=0.5"]);
    assert_eq!(code(&o), exit::OK);
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "family = sphere\n\nalpha: 2\n");
    let o = rg2lab(&["parabolicity", "--config", &cfg]);
    assert_eq!(code(&o), exit::ERROR);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let cfg = write_config(dir.path(), "family = sphere\ndim = two\n");
    let o = rg2lab(&["curvature", "--config", &cfg]);
    assert!(stderr(&o).contains("line 2: key `dim`"), "{}", stderr(&o));
    let o = rg2lab(&["sweep", "--alpha-min", "1", "--alpha-max", "0"]);
    assert_eq!(code(&o), exit::ERROR);
    let o = rg2lab(&["curvature", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(code(&o), exit::ERROR);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&rg2lab(&[])), exit::USAGE);
    assert_eq!(code(&rg2lab(&["integrate"])), exit::USAGE);
}

#[test]
fn outputs_are_deterministic_and_self_describing() {
    for cmd in ["curvature", "symbol", "parabolicity", "sweep", "flow", "verify"] {
        let args = [cmd, "--family", "sphere", "--dim", "3", "--seed", "42", "--samples", "3", "--t-end", "0.1", "--dt", "0.01"];
        let a = rg2lab(&args);
        let b = rg2lab(&args);
        assert_eq!(a.stdout, b.stdout, "{cmd} is not deterministic");
        let text = stdout(&a);
        let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
        assert_eq!(header[0], format!("# rg2lab {VERSION} {cmd}"));
        assert!(header.contains(&"# seed = 42"));
        assert!(header.iter().any(|l| l.starts_with("# tolerance.")));

        // the recorded configuration reproduces the run
        let recorded: String = header
            .iter()
            .filter_map(|l| l.strip_prefix("# config."))
            .map(|l| format!("{l}\n"))
            .collect();
        let command: Command = cmd.parse().unwrap();
        let cfg = ExperimentConfig::from_raw(command, &RawConfig::parse(&recorded).unwrap()).unwrap();
        let mut rerun = Vec::new();
        rg2lab::execute(&cfg, &mut rerun).unwrap();
        assert_eq!(rerun, a.stdout, "{cmd} header does not reproduce the run");
    }
}

#[test]
fn curvature_table_round_trips() {
    let rows = vec![
        CurvatureRow {
            point: vec![0.1, -0.2],
            scalar: 2.0,
            sectional_min: 1.0 / 3.0,
            sectional_max: 1e-300,
            ricci: vec![1.0, 0.1, std::f64::consts::PI],
            rm_sq: vec![-0.0, 5e-17, 123456.789],
        };
        3
    ];
    let mut buf = Vec::new();
    write_curvature_csv(&mut buf, &["header".into()], 2, &rows).unwrap();
    let (n, back) = read_curvature_csv(buf.as_slice()).unwrap();
    assert_eq!((n, back), (2, rows));
}

#[test]
fn symbol_table_round_trips() {
    let entries: Vec<SymbolEntry> = ["x", "xi", "sigma", "nu_eigenvalue", "det_sigma"]
        .iter()
        .enumerate()
        .map(|(k, q)| SymbolEntry { point: k / 2, quantity: q.to_string(), i: k, j: k % 2, value: 0.1 * k as f64 - 1e-20 })
        .collect();
    let mut buf = Vec::new();
    write_symbol_csv(&mut buf, &[], &entries).unwrap();
    assert_eq!(read_symbol_csv(buf.as_slice()).unwrap(), entries);
}

#[test]
fn verify_table_round_trips() {
    let checks = vec![
        CheckResult { name: "a".into(), residual: 1e-13, tolerance: 1e-9, passed: true },
        CheckResult { name: "b".into(), residual: f64::INFINITY, tolerance: 1e-10, passed: false },
    ];
    let mut buf = Vec::new();
    write_verify_csv(&mut buf, &["h".into()], &checks).unwrap();
    assert_eq!(read_verify_csv(buf.as_slice()).unwrap(), checks);
}

use std::path::Path;
use std::process::{Command, Output};

use nuds::config::{Config, Cx, FamilySpec, MatrixSpec, Onb, Params, SubspaceSpec, Full};
use nuds::report::{ReportJson, Status};
use proptest::prelude::*;

fn nuds(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nuds"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn basis(dim: usize, i: usize) -> Vec<Cx> {
    (0..dim).map(|j| Cx(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()
}

fn small_config(k: usize) -> Config {
    let dim = 4 * k;
    Config {
        schema: 1,
        params: Params { n: 2, r: 1 },
        dim,
        k,
        a: MatrixSpec::ScaledIdentity(Cx(0.5, 0.0)),
        g: FamilySpec::Named(Onb::Onb),
        w_space: SubspaceSpec::Named(Full::Full),
        w: (0..dim).map(|i| Cx(1.0 / (i + 1) as f64, -0.25)).collect(),
        x0: basis(dim, 0),
        xm2: basis(dim, dim - 1),
        tolerances: Default::default(),
    }
}

fn write(dir: &Path, name: &str, cfg: &Config) {
    std::fs::write(dir.join(name), cfg.to_json()).unwrap();
}

#[test]
fn simulate_writes_one_row_per_window_point() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.json", &small_config(3));
    let out = nuds(tmp.path(), &["simulate", "c.json", "-o", "out"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let traj = std::fs::read_to_string(tmp.path().join("out/trajectory.csv")).unwrap();
    let lines: Vec<&str> = traj.lines().collect();
    assert_eq!(lines.len(), 1 + 12);
    assert!(lines[0].starts_with("lambda,m,eps,re_0,im_0"));
    let data = std::fs::read_to_string(tmp.path().join("out/data.csv")).unwrap();
    assert_eq!(data.lines().count(), 1 + 12 * 12);
}

#[test]
fn finite_recover_reports_the_case() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.json", &small_config(2));
    for (at, case) in [("0", "i"), ("r/N", "ii"), ("-2+r/N", "iii")] {
        let out = nuds(tmp.path(), &["recover", "--config", "c.json", "--mode", "finite", "--at", at]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let report: ReportJson = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report.status, Status::Ok);
        assert_eq!(report.diagnostics.case.as_deref(), Some(case));
        assert!(report.abs_error.unwrap() <= 1e-10);
    }
}

#[test]
fn invalid_r_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config(1);
    cfg.params.r = 4;
    write(tmp.path(), "c.json", &cfg);
    let out = nuds(tmp.path(), &["check", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("r must be odd"));
}

#[test]
fn missing_and_malformed_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(nuds(tmp.path(), &["check", "nope.json"]).status.code(), Some(2));
    std::fs::write(tmp.path().join("bad.json"), "{\"schema\": 1}").unwrap();
    assert_eq!(nuds(tmp.path(), &["check", "bad.json"]).status.code(), Some(2));
    write(tmp.path(), "c.json", &small_config(1));
    let out = nuds(tmp.path(), &["recover", "c.json", "--at", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rank_deficient_sampling_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config(1);
    cfg.g = FamilySpec::Vectors {
        vectors: vec![basis(4, 0), basis(4, 1), basis(4, 2)],
        labels: None,
    };
    write(tmp.path(), "c.json", &cfg);
    let out = nuds(tmp.path(), &["recover", "c.json", "--mode", "finite", "-o", "r.json"]);
    assert_eq!(out.status.code(), Some(3));
    let report: ReportJson =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report.status, Status::NotStablyRecoverable);
    assert_eq!(report.diagnostics.alpha, 0.0);
    assert!(report.residual.is_none());
}

#[test]
fn infinite_mode_needs_a_contraction() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config(2);
    cfg.a = MatrixSpec::ScaledIdentity(Cx(1.5, 0.0));
    write(tmp.path(), "c.json", &cfg);
    let out = nuds(tmp.path(), &["recover", "c.json", "--mode", "infinite"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("ρ(A) < 1"), "{}", stderr(&out));
    let report: ReportJson = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.diagnostics.rho, Some(1.5));
}

#[test]
fn infinite_mode_recovers_from_a_long_window() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.json", &small_config(12));
    let out = nuds(tmp.path(), &["recover", "c.json", "--mode", "infinite", "-o", "reports"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(tmp.path().join("reports/report.json")).unwrap();
    let report: ReportJson = serde_json::from_str(&text).unwrap();
    assert!(report.abs_error.unwrap() <= 1e-6);
    assert!(report.diagnostics.tail_gap.unwrap() <= 1e-6);
}

#[test]
fn demo_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    for id in ["thm312_diagonal", "thm38_onb", "thm314_counterexample", "thm317_generalized", "thm319_quarter"] {
        let out = nuds(tmp.path(), &["demo", id]);
        assert_eq!(out.status.code(), Some(0), "{id}: {}", stderr(&out));
    }
    assert_eq!(nuds(tmp.path(), &["demo", "thm1_unknown"]).status.code(), Some(2));
    assert_eq!(nuds(tmp.path(), &["demo", "thm319_quarter", "-K", "2"]).status.code(), Some(4));
}

#[test]
fn counterexample_check_is_marked_necessary_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nuds(tmp.path(), &["demo", "thm314_counterexample", "--emit-config", "-o", "c.json"]);
    assert_eq!(out.status.code(), Some(0));
    let out = nuds(tmp.path(), &["check", "c.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("necessary"), "{table}");
}

#[test]
fn tolerance_overrides_are_validated() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.json", &small_config(1));
    assert_eq!(nuds(tmp.path(), &["check", "c.json", "--tol-override", "bs=1e-9"]).status.code(), Some(0));
    assert_eq!(nuds(tmp.path(), &["check", "c.json", "--tol-override", "bogus=1"]).status.code(), Some(2));
}

fn cx() -> impl Strategy<Value = Cx> {
    (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Cx(a, b))
}

fn config_strategy() -> impl Strategy<Value = Config> {
    (1usize..3, cx(), any::<bool>()).prop_flat_map(|(k, s, dense)| {
        let dim = 4 * k;
        let a = if dense {
            prop::collection::vec(prop::collection::vec(cx(), dim), dim).prop_map(MatrixSpec::Dense).boxed()
        } else {
            prop::collection::vec(cx(), dim).prop_map(MatrixSpec::Diag).boxed()
        };
        let v = move || prop::collection::vec(cx(), dim);
        (a, v(), v(), v(), prop::collection::vec(v(), 1..4)).prop_map(move |(a, w, x0, xm2, vectors)| Config {
            schema: 1,
            params: Params { n: 4, r: 3 },
            dim,
            k,
            a: if s.0 > 9.0 { MatrixSpec::ScaledIdentity(s) } else { a },
            g: FamilySpec::Vectors { vectors, labels: None },
            w_space: SubspaceSpec::Named(Full::Full),
            w,
            x0,
            xm2,
            tolerances: [("bs".to_string(), 1e-7)].into_iter().collect(),
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips(cfg in config_strategy()) {
        let parsed = Config::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(Config::from_json(&parsed.to_json()).unwrap(), parsed);
    }

    #[test]
    fn report_round_trips(w in prop::collection::vec(cx(), 0..6), alpha in 0.0f64..2.0, gap in prop::option::of(0.0f64..1.0)) {
        let report = ReportJson {
            schema: 1,
            status: Status::Ok,
            mode: "infinite".into(),
            w_hat: w,
            abs_error: Some(alpha / 3.0),
            residual: Some(1e-12),
            diagnostics: nuds::report::DiagnosticsJson { alpha, beta: alpha + 1.0, rho: Some(0.5), tail_gap: gap, case: None },
            message: None,
        };
        let back: ReportJson = serde_json::from_str(&report.to_json()).unwrap();
        prop_assert_eq!(back, report);
    }
}

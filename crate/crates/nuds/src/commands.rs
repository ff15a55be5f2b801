//! The four subcommands. Each returns the artifact it produced or a classified error.

use std::fs;
use std::path::{Path, PathBuf};

use nuds_core::dynamics::{bs_membership, data_matrix, simulate as run, sup_row_norm, DataMatrix, SystemSpec};
use nuds_core::frames::frame_bounds;
use nuds_core::numerics::spectral_radius;
use nuds_core::recovery::{
    finite_report, reconstruct_infinite, stationary_map_from_a, subspace_condition, RecoveryCase,
};
use nuds_core::scenarios::{build, verify, ScenarioId};
use nuds_core::{Error, LambdaIndex, SpectralParams, Tolerances};

use crate::config::{apply_tolerance, parse_override, Config};
use crate::report::{write_data_csv, write_trajectory_csv, DemoJson, DiagnosticsJson, ReportJson};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Finite,
    Infinite,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Finite => "finite",
            Mode::Infinite => "infinite",
        }
    }
}

/// Load a config and apply `KEY=VAL` overrides on top of its own tolerances.
pub fn load(path: &Path, overrides: &[String]) -> Result<(Config, Tolerances, SystemSpec), CliError> {
    let cfg = Config::load(path)?;
    let mut tol = cfg.tolerances()?;
    apply_overrides(&mut tol, overrides)?;
    let spec = cfg.to_spec(&tol)?;
    Ok((cfg, tol, spec))
}

pub fn apply_overrides(tol: &mut Tolerances, overrides: &[String]) -> Result<(), CliError> {
    for o in overrides {
        let (key, value) = parse_override(o)?;
        apply_tolerance(tol, &key, value)?;
    }
    Ok(())
}

fn data_of(spec: &SystemSpec) -> Result<DataMatrix, CliError> {
    Ok(data_matrix(&run(spec), &spec.g)?)
}

/// `path` itself if it names a `.json` file, otherwise `path/default_name`.
fn json_target(path: &Path, default_name: &str) -> Result<PathBuf, CliError> {
    if path.extension().is_some_and(|e| e == "json") {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        Ok(path.to_path_buf())
    } else {
        fs::create_dir_all(path)?;
        Ok(path.join(default_name))
    }
}

/// Print to stdout; a reader that closed the pipe early is not an error.
pub fn print_stdout(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(text: &str, out: Option<&Path>, default_name: &str) -> Result<Option<PathBuf>, CliError> {
    match out {
        Some(path) => {
            let target = json_target(path, default_name)?;
            fs::write(&target, text)?;
            Ok(Some(target))
        }
        None => {
            print_stdout(text)?;
            Ok(None)
        }
    }
}

/// Files written by `simulate`.
#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub trajectory: PathBuf,
    pub data: PathBuf,
    pub rows: usize,
}

pub fn simulate(config: &Path, overrides: &[String], out_dir: &Path) -> Result<SimulateOutput, CliError> {
    let (_, _, spec) = load(config, overrides)?;
    let traj = run(&spec);
    let d = data_matrix(&traj, &spec.g)?;
    fs::create_dir_all(out_dir)?;
    let trajectory = out_dir.join("trajectory.csv");
    let data = out_dir.join("data.csv");
    write_trajectory_csv(fs::File::create(&trajectory)?, &traj)?;
    write_data_csv(fs::File::create(&data)?, &d)?;
    Ok(SimulateOutput {
        trajectory,
        data,
        rows: traj.len(),
    })
}

fn refuse(mode: Mode, diagnostics: DiagnosticsJson, message: String, out: Option<&Path>) -> CliError {
    let report = ReportJson::refused(mode.name(), diagnostics, message.clone());
    if let Err(e) = emit(&report.to_json(), out, "report.json") {
        return e;
    }
    CliError::Condition(message)
}

/// Recover `w` from the simulated data of a config and write the report.
///
/// Finite mode uses rows `at` and its successor; infinite mode uses the `tail` outermost rows
/// at both ends of the window.
pub fn recover(
    config: &Path,
    overrides: &[String],
    mode: Mode,
    at: &str,
    tail: usize,
    out: Option<&Path>,
) -> Result<ReportJson, CliError> {
    let (_, tol, spec) = load(config, overrides)?;
    let d = data_of(&spec)?;
    let rho = spectral_radius(&spec.a).ok();
    let report = match mode {
        Mode::Finite => {
            let at = LambdaIndex::parse_label(at)
                .ok_or_else(|| CliError::Config(format!("--at {at:?} is not a point of the index set")))?;
            for idx in [at, at.successor()] {
                if d.row(idx).is_err() {
                    return Err(CliError::Config(format!(
                        "row {} is outside the window; choose --at inside window(K - 1)",
                        idx.label()
                    )));
                }
            }
            let bounds = frame_bounds(&spec.g, &tol)?;
            if !bounds.is_frame(&tol) {
                let diag = DiagnosticsJson {
                    alpha: bounds.alpha,
                    beta: bounds.beta,
                    rho,
                    tail_gap: None,
                    case: Some(RecoveryCase::of(at).tag().to_string()),
                };
                let msg = format!(
                    "not stably recoverable: the sampling family is not a frame (alpha = {:e})",
                    bounds.alpha
                );
                return Err(refuse(mode, diag, msg, out));
            }
            let r = finite_report(&d, at, &spec.a, &spec.g, Some(&spec.w), &tol)?;
            let scale = 1.0 + d.row(at)?.norm() + d.row(at.successor())?.norm();
            if r.residual > tol.dual * scale {
                return Err(CliError::Numerical(format!(
                    "data residual {:e} above tolerance",
                    r.residual
                )));
            }
            ReportJson::from_report(mode.name(), &r)
        }
        Mode::Infinite => {
            let smap = match stationary_map_from_a(&spec.a, &spec.g, &spec.w_basis, &tol) {
                Ok(s) => s,
                Err(e @ Error::SpectralRadiusTooLarge { .. }) => {
                    let bounds = frame_bounds(&spec.g, &tol)?;
                    let diag = DiagnosticsJson {
                        alpha: bounds.alpha,
                        beta: bounds.beta,
                        rho,
                        tail_gap: None,
                        case: None,
                    };
                    return Err(refuse(mode, diag, format!("not stably recoverable: {e}"), out));
                }
                Err(e) => return Err(e.into()),
            };
            match reconstruct_infinite(&d, &smap, &spec.g, tail, Some(&spec.w), &tol) {
                Ok(mut r) => {
                    r.diagnostics.rho = rho;
                    let limit = bs_membership(&d, tail, &tol)?.limit_row;
                    if r.residual > tol.bs * (1.0 + limit.norm()) {
                        return Err(CliError::Numerical(format!(
                            "limit residual {:e} above tolerance",
                            r.residual
                        )));
                    }
                    ReportJson::from_report(mode.name(), &r)
                }
                Err(e @ (Error::NotStablyRecoverable { .. } | Error::NotInBs { .. })) => {
                    let bounds = frame_bounds(&smap.adjoint_family, &tol)?;
                    let diag = DiagnosticsJson {
                        alpha: bounds.alpha,
                        beta: bounds.beta,
                        rho,
                        tail_gap: bs_membership(&d, tail, &tol).ok().map(|m| m.tail_gap),
                        case: None,
                    };
                    let msg = match e {
                        Error::NotInBs { .. } => format!("rows have not converged in this window: {e}"),
                        _ => e.to_string(),
                    };
                    return Err(refuse(mode, diag, msg, out));
                }
                Err(Error::WindowTooSmall { rows, tail }) => {
                    return Err(CliError::Config(format!(
                        "--tail {tail} needs at least {} rows, the window has {rows}",
                        2 * tail
                    )))
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    emit(&report.to_json(), out, "report.json")?;
    Ok(report)
}

/// One line of the `check` table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub quantity: String,
    pub value: String,
    pub verdict: String,
}

fn bounds_cell(b: nuds_core::frames::FrameBounds) -> String {
    format!("alpha = {:.10}, beta = {:.10}", b.alpha, b.beta)
}

/// Evaluate every recoverability predicate for a config.
pub fn check(config: &Path, overrides: &[String]) -> Result<Vec<CheckRow>, CliError> {
    let (_, tol, spec) = load(config, overrides)?;
    let mut rows = Vec::new();
    let row = |q: &str, v: String, verdict: &str| CheckRow {
        quantity: q.to_string(),
        value: v,
        verdict: verdict.to_string(),
    };

    let g_bounds = frame_bounds(&spec.g, &tol)?;
    let g_frame = g_bounds.is_frame(&tol);
    rows.push(row("g frame bounds", bounds_cell(g_bounds), if g_frame { "frame" } else { "not a frame" }));

    let sub = match subspace_condition(&spec.a, &spec.g, &spec.w_basis, &tol) {
        Ok(b) => Some(b),
        Err(Error::OneInSpectrum) => None,
        Err(e) => return Err(e.into()),
    };
    let sub_ok = sub.is_some_and(|b| b.is_frame(&tol));
    rows.push(match sub {
        Some(b) => row("subspace condition", bounds_cell(b), if sub_ok { "pass (necessary only)" } else { "fail" }),
        None => row("subspace condition", "n/a".into(), "1 in spectrum of A"),
    });

    let finite_verdict = if g_frame {
        "recoverable"
    } else if sub_ok {
        "necessary-only"
    } else {
        "not recoverable"
    };
    rows.push(row("finite recovery", String::new(), finite_verdict));

    let rho = spectral_radius(&spec.a)?;
    rows.push(row("spectral radius", format!("{rho:.10}"), if rho < 1.0 - tol.rho_margin { "< 1" } else { ">= 1" }));

    match stationary_map_from_a(&spec.a, &spec.g, &spec.w_basis, &tol) {
        Ok(smap) => {
            let b = frame_bounds(&smap.adjoint_family, &tol)?;
            let ok = b.is_frame(&tol);
            rows.push(row("S*g family bounds", bounds_cell(b), if ok { "frame for W" } else { "not a frame for W" }));
        }
        Err(Error::SpectralRadiusTooLarge { .. }) => {
            rows.push(row("S*g family bounds", "n/a".into(), "requires rho(A) < 1"));
        }
        Err(e) => return Err(e.into()),
    }

    let d = data_of(&spec)?;
    let gap = bs_membership(&d, 1, &tol)?;
    rows.push(row(
        "tail gap",
        format!("{:e}", gap.tail_gap),
        if gap.member { "rows converge" } else { "rows not settled" },
    ));
    rows.push(row("sup row norm", format!("{:.10}", sup_row_norm(&d)), ""));
    Ok(rows)
}

pub fn format_table(rows: &[CheckRow]) -> String {
    let w0 = rows.iter().map(|r| r.quantity.len()).max().unwrap_or(0);
    let w1 = rows.iter().map(|r| r.value.chars().count()).max().unwrap_or(0);
    rows.iter()
        .map(|r| format!("{:<w0$}  {:<w1$}  {}", r.quantity, r.value, r.verdict).trim_end().to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn default_k(id: ScenarioId) -> usize {
    match id {
        ScenarioId::Quarter => 20,
        ScenarioId::Diagonal => 4,
        _ => 3,
    }
}

/// What `demo` produced.
#[derive(Debug, Clone)]
pub enum DemoOutput {
    Config(Config),
    Report(DemoJson),
}

pub fn demo(
    id: &str,
    k: Option<usize>,
    params: (u32, u32),
    overrides: &[String],
    emit_config: bool,
    out: Option<&Path>,
) -> Result<DemoOutput, CliError> {
    let id: ScenarioId = id.parse().map_err(|e: Error| CliError::Config(e.to_string()))?;
    let params = SpectralParams::new(params.0, params.1).map_err(|e| CliError::Config(e.to_string()))?;
    let k = k.unwrap_or_else(|| default_k(id));
    if k == 0 {
        return Err(CliError::Config("K must be at least 1".into()));
    }
    let mut tol = Tolerances::default();
    apply_overrides(&mut tol, overrides)?;
    let sc = build(id, params, k, &tol)?;
    if emit_config {
        let cfg = Config::from_spec(&sc.spec);
        emit(&cfg.to_json(), out, &format!("{}.json", id.name()))?;
        return Ok(DemoOutput::Config(cfg));
    }
    let checks = verify(&sc, &tol)?;
    let report = DemoJson::new(&sc, &checks, &sc.data()?);
    emit(
        &serde_json::to_string_pretty(&report).expect("report serialises"),
        out,
        &format!("{}.report.json", id.name()),
    )?;
    if !report.passed {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        return Err(CliError::Expectation(format!(
            "{} did not meet its expectations: {}",
            id.name(),
            failed.join(", ")
        )));
    }
    Ok(DemoOutput::Report(report))
}

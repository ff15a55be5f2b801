//! JSON reports and CSV dumps.

use std::io::Write;

use nuds_core::dynamics::{DataMatrix, StateTrajectory};
use nuds_core::recovery::{Diagnostics, RecoveryCase, RecoveryReport};
use nuds_core::scenarios::{Check, Scenario};
use serde::{Deserialize, Serialize};

use crate::config::{to_pairs, Cx, SCHEMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotStablyRecoverable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub alpha: f64,
    pub beta: f64,
    pub rho: Option<f64>,
    pub tail_gap: Option<f64>,
    pub case: Option<String>,
}

impl From<&Diagnostics> for DiagnosticsJson {
    fn from(d: &Diagnostics) -> Self {
        Self {
            alpha: d.alpha,
            beta: d.beta,
            rho: d.rho,
            tail_gap: d.tail_gap,
            case: d.case.map(|c| c.tag().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema: u32,
    pub status: Status,
    pub mode: String,
    pub w_hat: Vec<Cx>,
    pub abs_error: Option<f64>,
    /// Absent when the recovery was refused.
    pub residual: Option<f64>,
    pub diagnostics: DiagnosticsJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ReportJson {
    pub fn from_report(mode: &str, report: &RecoveryReport) -> Self {
        Self {
            schema: SCHEMA,
            status: Status::Ok,
            mode: mode.to_string(),
            w_hat: to_pairs(&report.w_hat),
            abs_error: report.abs_error,
            residual: Some(report.residual),
            diagnostics: (&report.diagnostics).into(),
            message: None,
        }
    }

    /// A report for a recovery refused because its frame condition fails.
    pub fn refused(mode: &str, diagnostics: DiagnosticsJson, message: String) -> Self {
        Self {
            schema: SCHEMA,
            status: Status::NotStablyRecoverable,
            mode: mode.to_string(),
            w_hat: Vec::new(),
            abs_error: None,
            residual: None,
            diagnostics,
            message: Some(message),
        }
    }

    pub fn case(&self) -> Option<RecoveryCase> {
        self.diagnostics.case.as_deref().and_then(RecoveryCase::from_tag)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckJson {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl From<&Check> for CheckJson {
    fn from(c: &Check) -> Self {
        Self {
            name: c.name.to_string(),
            passed: c.passed,
            detail: c.detail.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementJson {
    pub lambda: String,
    pub m: i64,
    pub eps: u8,
    pub value: Cx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoJson {
    pub schema: u32,
    pub scenario: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub should_recover_finite: bool,
    pub should_recover_infinite: bool,
    pub tags: Vec<String>,
    pub notes: Vec<String>,
    pub checks: Vec<CheckJson>,
    /// Samples against a single sampling vector, listed when there is only one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measurements: Vec<MeasurementJson>,
    pub passed: bool,
}

impl DemoJson {
    pub fn new(sc: &Scenario, checks: &[Check], data: &DataMatrix) -> Self {
        let measurements = if data.width() == 1 {
            data.iter()
                .map(|(idx, row)| MeasurementJson {
                    lambda: idx.label(),
                    m: idx.m(),
                    eps: idx.eps(),
                    value: row[0].into(),
                })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            schema: SCHEMA,
            scenario: sc.id.name().to_string(),
            k: sc.spec.k,
            should_recover_finite: sc.expectations.should_recover_finite,
            should_recover_infinite: sc.expectations.should_recover_infinite,
            tags: sc.tags.iter().map(|t| t.to_string()).collect(),
            notes: sc.expectations.notes.clone(),
            checks: checks.iter().map(CheckJson::from).collect(),
            measurements,
            passed: checks.iter().all(|c| c.passed),
        }
    }
}

/// One row per `λ`: label, `m`, `eps`, then `re_i, im_i` for every coordinate.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &StateTrajectory) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let dim = traj.iter().next().map(|(_, x)| x.len()).unwrap_or(0);
    let mut header = vec!["lambda".to_string(), "m".to_string(), "eps".to_string()];
    for i in 0..dim {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
    }
    wtr.write_record(&header)?;
    for (idx, x) in traj.iter() {
        let mut rec = vec![idx.label(), idx.m().to_string(), idx.eps().to_string()];
        for z in x.iter() {
            rec.push(z.re.to_string());
            rec.push(z.im.to_string());
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Long format with header `lambda,j,re,im`, rows in window order.
pub fn write_data_csv<W: Write>(out: W, d: &DataMatrix) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["lambda", "j", "re", "im"])?;
    for (idx, row) in d.iter() {
        for (j, z) in row.iter().enumerate() {
            wtr.write_record([idx.label(), j.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nuds_core::dynamics::DataMatrix;
    use nuds_core::lambda::window;
    use nuds_core::numerics::unit;

    #[test]
    fn data_csv_layout() {
        let d = DataMatrix::constant(&window(1).unwrap(), &unit(2, 1)).unwrap();
        let mut buf = Vec::new();
        write_data_csv(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "lambda,j,re,im");
        assert_eq!(lines.len(), 1 + 4 * 2);
        assert_eq!(lines[1], "-2,0,0,0");
        assert_eq!(lines[2], "-2,1,1,0");
        assert_eq!(lines[7], "r/N,0,0,0");
    }

    #[test]
    fn refused_report_serialises_null_residual() {
        let r = ReportJson::refused(
            "finite",
            DiagnosticsJson {
                alpha: 0.0,
                beta: 1.0,
                rho: Some(0.5),
                tail_gap: None,
                case: None,
            },
            "no".into(),
        );
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["status"], "not_stably_recoverable");
        assert!(v["residual"].is_null());
        assert_eq!(v["diagnostics"]["alpha"], 0.0);
    }
}

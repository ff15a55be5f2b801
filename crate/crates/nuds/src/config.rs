//! JSON system configuration.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "params": {"N": 2, "r": 1},
//!   "dim": 8,
//!   "K": 2,
//!   "A": {"scaled_identity": [0.25, 0.0]},
//!   "g": "onb",
//!   "W": "full",
//!   "w": [[1.0, 0.0], ...],
//!   "x0": [...],
//!   "xm2": [...],
//!   "tolerances": {"bs": 1e-6}
//! }
//! ```
//!
//! `A` is one of `{"dense": rows}`, `{"diag": entries}` or `{"scaled_identity": c}`. `g` is
//! `"onb"` or `{"vectors": [...], "labels": [...]}`. `W` is `"full"` or `{"columns": [...]}`;
//! columns that are not orthonormal are replaced by an orthonormal basis of their span.

use std::collections::BTreeMap;
use std::path::Path;

use nuds_core::dynamics::SystemSpec;
use nuds_core::frames::VectorFamily;
use nuds_core::numerics::{orthonormal_basis, CMat, CVec};
use nuds_core::{c64, LambdaIndex, SpectralParams, Tolerances};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// A complex number as an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cx(pub f64, pub f64);

impl From<c64> for Cx {
    fn from(z: c64) -> Self {
        Cx(z.re, z.im)
    }
}

impl From<Cx> for c64 {
    fn from(z: Cx) -> Self {
        c64::new(z.0, z.1)
    }
}

pub fn to_pairs(v: &CVec) -> Vec<Cx> {
    v.iter().map(|z| Cx::from(*z)).collect()
}

pub fn from_pairs(v: &[Cx]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|z| c64::from(*z)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "N")]
    pub n: u32,
    pub r: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSpec {
    /// Row-major rows.
    Dense(Vec<Vec<Cx>>),
    Diag(Vec<Cx>),
    ScaledIdentity(Cx),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Onb {
    #[serde(rename = "onb")]
    Onb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Full {
    #[serde(rename = "full")]
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Named(Onb),
    Vectors {
        vectors: Vec<Vec<Cx>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubspaceSpec {
    Named(Full),
    Columns { columns: Vec<Vec<Cx>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: u32,
    pub params: Params,
    pub dim: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "A")]
    pub a: MatrixSpec,
    pub g: FamilySpec,
    #[serde(rename = "W")]
    pub w_space: SubspaceSpec,
    pub w: Vec<Cx>,
    pub x0: Vec<Cx>,
    pub xm2: Vec<Cx>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_len(what: &str, found: usize, dim: usize) -> Result<(), CliError> {
    if found != dim {
        return Err(config_err(format!("{what} has length {found}, expected dim = {dim}")));
    }
    Ok(())
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Config =
            serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))?;
        if cfg.schema != SCHEMA {
            return Err(config_err(format!(
                "unsupported config schema {}, expected {SCHEMA}",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Default tolerances with the config's overrides applied.
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut tol = Tolerances::default();
        for (key, value) in &self.tolerances {
            apply_tolerance(&mut tol, key, *value)?;
        }
        Ok(tol)
    }

    pub fn a_matrix(&self) -> Result<CMat, CliError> {
        let dim = self.dim;
        match &self.a {
            MatrixSpec::Dense(rows) => {
                check_len("A", rows.len(), dim)?;
                for row in rows {
                    check_len("row of A", row.len(), dim)?;
                }
                Ok(CMat::from_fn(dim, dim, |i, j| rows[i][j].into()))
            }
            MatrixSpec::Diag(entries) => {
                check_len("diagonal of A", entries.len(), dim)?;
                Ok(CMat::from_diagonal(&from_pairs(entries)))
            }
            MatrixSpec::ScaledIdentity(c) => Ok(CMat::identity(dim, dim) * c64::from(*c)),
        }
    }

    pub fn family(&self) -> Result<VectorFamily, CliError> {
        match &self.g {
            FamilySpec::Named(Onb::Onb) => Ok(VectorFamily::standard_basis(self.dim)),
            FamilySpec::Vectors { vectors, labels } => {
                for v in vectors {
                    check_len("sampling vector", v.len(), self.dim)?;
                }
                let fam = VectorFamily::new(vectors.iter().map(|v| from_pairs(v)).collect())
                    .map_err(|e| config_err(format!("g: {e}")))?;
                match labels {
                    None => Ok(fam),
                    Some(labels) => {
                        let parsed = labels
                            .iter()
                            .map(|l| {
                                LambdaIndex::parse_label(l)
                                    .ok_or_else(|| config_err(format!("g: bad label {l:?}")))
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        fam.with_labels(parsed).map_err(|e| config_err(format!("g: {e}")))
                    }
                }
            }
        }
    }

    pub fn w_basis(&self) -> Result<CMat, CliError> {
        match &self.w_space {
            SubspaceSpec::Named(Full::Full) => Ok(CMat::identity(self.dim, self.dim)),
            SubspaceSpec::Columns { columns } => {
                if columns.is_empty() {
                    return Err(config_err("W has no columns"));
                }
                for c in columns {
                    check_len("column of W", c.len(), self.dim)?;
                }
                let m = CMat::from_columns(&columns.iter().map(|c| from_pairs(c)).collect::<Vec<_>>());
                let p = m.ncols();
                if (m.adjoint() * &m - CMat::identity(p, p)).norm() <= 1e-12 {
                    return Ok(m);
                }
                orthonormal_basis(&m, 1e-12).map_err(|e| config_err(format!("W: {e}")))
            }
        }
    }

    /// Validate everything and build the system.
    pub fn to_spec(&self, tol: &Tolerances) -> Result<SystemSpec, CliError> {
        let params = SpectralParams::new(self.params.n, self.params.r)
            .map_err(|e| config_err(e.to_string()))?;
        if self.dim == 0 {
            return Err(config_err("dim must be positive"));
        }
        if self.k == 0 {
            return Err(config_err("K must be at least 1"));
        }
        check_len("w", self.w.len(), self.dim)?;
        check_len("x0", self.x0.len(), self.dim)?;
        check_len("xm2", self.xm2.len(), self.dim)?;
        SystemSpec::new(
            params,
            self.a_matrix()?,
            self.family()?,
            self.w_basis()?,
            from_pairs(&self.w),
            from_pairs(&self.x0),
            from_pairs(&self.xm2),
            self.k,
            tol,
        )
        .map_err(|e| config_err(e.to_string()))
    }

    /// The canonical config describing `spec`.
    pub fn from_spec(spec: &SystemSpec) -> Self {
        let dim = spec.dim();
        let a = &spec.a;
        let diag: Vec<c64> = (0..dim).map(|i| a[(i, i)]).collect();
        let off_diagonal_zero = (0..dim)
            .all(|i| (0..dim).all(|j| i == j || a[(i, j)] == c64::new(0.0, 0.0)));
        let a_spec = if off_diagonal_zero && diag.iter().all(|z| *z == diag[0]) {
            MatrixSpec::ScaledIdentity(diag[0].into())
        } else if off_diagonal_zero {
            MatrixSpec::Diag(diag.into_iter().map(Cx::from).collect())
        } else {
            MatrixSpec::Dense(
                (0..dim)
                    .map(|i| (0..dim).map(|j| a[(i, j)].into()).collect())
                    .collect(),
            )
        };
        let standard = VectorFamily::standard_basis(dim);
        let g = if spec.g.vectors() == standard.vectors() {
            FamilySpec::Named(Onb::Onb)
        } else {
            FamilySpec::Vectors {
                vectors: spec.g.iter().map(to_pairs).collect(),
                labels: spec
                    .g
                    .labels()
                    .map(|l| l.iter().map(|idx| idx.label()).collect()),
            }
        };
        let w_space = if spec.w_basis == CMat::identity(dim, dim) {
            SubspaceSpec::Named(Full::Full)
        } else {
            SubspaceSpec::Columns {
                columns: spec
                    .w_basis
                    .column_iter()
                    .map(|c| to_pairs(&c.into_owned()))
                    .collect(),
            }
        };
        Config {
            schema: SCHEMA,
            params: Params {
                n: spec.params.n(),
                r: spec.params.r(),
            },
            dim,
            k: spec.k,
            a: a_spec,
            g,
            w_space,
            w: to_pairs(&spec.w),
            x0: to_pairs(&spec.x0),
            xm2: to_pairs(&spec.xm2),
            tolerances: BTreeMap::new(),
        }
    }
}

pub fn apply_tolerance(tol: &mut Tolerances, key: &str, value: f64) -> Result<(), CliError> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(config_err(format!("tolerance {key} must be a nonnegative number")));
    }
    if !tol.set(key, value) {
        return Err(config_err(format!(
            "unknown tolerance {key:?}; expected one of {}",
            Tolerances::KEYS.join(", ")
        )));
    }
    Ok(())
}

/// Parse a `KEY=VAL` override.
pub fn parse_override(s: &str) -> Result<(String, f64), CliError> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| config_err(format!("tolerance override {s:?} is not KEY=VAL")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| config_err(format!("tolerance override {s:?} has a non-numeric value")))?;
    Ok((key.trim().to_string(), value))
}

/// A standalone family file: `{"schema": 1, "vectors": [...], "labels": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub schema: u32,
    pub vectors: Vec<Vec<Cx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl FamilyFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read family {}: {e}", path.display())))?;
        let fam: FamilyFile =
            serde_json::from_str(&text).map_err(|e| config_err(format!("invalid family: {e}")))?;
        if fam.schema != SCHEMA {
            return Err(config_err(format!("unsupported family schema {}", fam.schema)));
        }
        Ok(fam)
    }

    pub fn into_spec(self) -> FamilySpec {
        FamilySpec::Vectors {
            vectors: self.vectors,
            labels: self.labels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Config {
        Config {
            schema: 1,
            params: Params { n: 2, r: 1 },
            dim: 4,
            k: 1,
            a: MatrixSpec::ScaledIdentity(Cx(0.25, 0.0)),
            g: FamilySpec::Named(Onb::Onb),
            w_space: SubspaceSpec::Named(Full::Full),
            w: vec![Cx(1.0, 0.0), Cx(0.0, 1.0), Cx(0.0, 0.0), Cx(-1.0, 0.5)],
            x0: vec![Cx(0.0, 0.0); 4],
            xm2: vec![Cx(0.0, 0.0); 4],
            tolerances: BTreeMap::new(),
        }
    }

    #[test]
    fn json_shape() {
        let json = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["params"]["N"], 2);
        assert_eq!(v["K"], 1);
        assert_eq!(v["g"], "onb");
        assert_eq!(v["W"], "full");
        assert_eq!(v["A"]["scaled_identity"][0], 0.25);
        assert_eq!(v["w"][1][1], 1.0);
        assert!(v.get("tolerances").is_none());
    }

    #[test]
    fn explicit_forms_parse() {
        let text = r#"{
            "schema": 1, "params": {"N": 3, "r": 1}, "dim": 2, "K": 1,
            "A": {"dense": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]},
            "g": {"vectors": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]], "labels": ["0", "r/N"]},
            "W": {"columns": [[[2, 0], [0, 0]]]},
            "w": [[1, 0], [0, 0]], "x0": [[0, 0], [0, 0]], "xm2": [[0, 0], [0, 0]],
            "tolerances": {"bs": 1e-7}
        }"#;
        let cfg = Config::from_json(text).unwrap();
        let tol = cfg.tolerances().unwrap();
        assert_eq!(tol.bs, 1e-7);
        let spec = cfg.to_spec(&tol).unwrap();
        assert_eq!(spec.w_basis.ncols(), 1);
        assert!((spec.w_basis.column(0).norm() - 1.0).abs() < 1e-15);
        assert_eq!(spec.g.labels().unwrap()[1], LambdaIndex::shifted(0));
    }

    #[test]
    fn invariant_messages() {
        let mut cfg = sample();
        cfg.params.r = 2;
        let err = cfg.to_spec(&Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("r must be odd"), "{err}");

        let mut cfg = sample();
        cfg.w.pop();
        assert!(cfg.to_spec(&Tolerances::default()).unwrap_err().to_string().contains("length 3"));

        let mut cfg = sample();
        cfg.w_space = SubspaceSpec::Columns {
            columns: vec![vec![Cx(1.0, 0.0), Cx(0.0, 0.0), Cx(0.0, 0.0), Cx(0.0, 0.0)]],
        };
        let err = cfg.to_spec(&Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("does not lie in W"), "{err}");

        let mut cfg = sample();
        cfg.tolerances.insert("nonsense".into(), 1.0);
        assert!(cfg.tolerances().is_err());

        let mut text = sample().to_json();
        text = text.replace("\"schema\": 1", "\"schema\": 7");
        assert!(Config::from_json(&text).is_err());
    }

    #[test]
    fn overrides() {
        assert_eq!(parse_override("bs=1e-3").unwrap(), ("bs".to_string(), 1e-3));
        assert!(parse_override("bs").is_err());
        assert!(parse_override("bs=abc").is_err());
    }

    #[test]
    fn spec_round_trip() {
        let cfg = sample();
        let spec = cfg.to_spec(&Tolerances::default()).unwrap();
        assert_eq!(Config::from_spec(&spec), cfg);
    }
}

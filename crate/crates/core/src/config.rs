//! JSON system files.
//!
//! ```json
//! {
//!   "dimension": 3,
//!   "field": "real",
//!   "C": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
//!   "Cprime": "same",
//!   "subspaces": [
//!     { "basis": [[1, 0, 0], [0, 1, 0]], "weight": 0.7071067811865476 }
//!   ]
//! }
//! ```
//!
//! Matrices are arrays of rows, a basis is an array of columns. Complex
//! files write each entry as `[re, im]`; bare numbers are accepted in both
//! fields. `C` may be the keyword `"identity"`; `Cprime` may be `"same"`,
//! `"inverse-adjoint"` or `"identity"`. An optional `expected` block records
//! verdicts a fixture must reproduce.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::fusion_frames::{build_system, fusion_frame_bounds, Subspace, WeightedSubspace};
use crate::generate::Field;
use crate::numerics::Matrix;
use crate::vector_frames::Classification;
use crate::{ControlledFusionSystem, ControlledPair, Error};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    System(#[from] Error),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlSpec {
    Matrix(Matrix),
    Identity,
    /// `C′ = C`.
    Same,
    /// `C′ = (C*)⁻¹`.
    InverseAdjoint,
}

impl fmt::Display for ControlSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlSpec::Matrix(m) => write!(f, "{}x{} matrix", m.nrows(), m.ncols()),
            ControlSpec::Identity => f.write_str("identity"),
            ControlSpec::Same => f.write_str("same"),
            ControlSpec::InverseAdjoint => f.write_str("inverse-adjoint"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberConfig {
    /// Columns span the subspace.
    pub basis: Matrix,
    pub weight: f64,
}

/// Verdicts a fixture file promises.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positivity_ok: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<bool>,
    /// Exit code of `cff analyze` on this file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyze_exit: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Expected {
    /// Checks every promised verdict that the library can evaluate and
    /// returns a description of each mismatch.
    pub fn mismatches(&self, sys: &ControlledFusionSystem) -> crate::Result<Vec<String>> {
        let tol = self.tolerance.unwrap_or(1e-9);
        let mut out = Vec::new();
        let bounds = fusion_frame_bounds(sys, 1e-9)?;
        let mut near = |name: &str, want: Option<f64>, got: f64| {
            if let Some(w) = want {
                if (w - got).abs() > tol {
                    out.push(format!("{name}: expected {w}, got {got}"));
                }
            }
        };
        near("lower", self.lower, bounds.lower);
        near("upper", self.upper, bounds.upper);
        if let Some(c) = self.classification {
            if c != bounds.classification {
                out.push(format!(
                    "classification: expected {c:?}, got {:?}",
                    bounds.classification
                ));
            }
        }
        if let Some(p) = &self.positivity_ok {
            if *p != sys.positivity_ok() {
                out.push(format!(
                    "positivity_ok: expected {p:?}, got {:?}",
                    sys.positivity_ok()
                ));
            }
        }
        if self.e1.is_some() || self.optimal.is_some() {
            let r = crate::erasure::reconstruction_error(sys, 1e-9)?;
            if let Some(w) = self.e1 {
                if (w - r.e1_exact).abs() > tol {
                    out.push(format!("e1: expected {w}, got {}", r.e1_exact));
                }
            }
            if let Some(w) = self.optimal {
                if w != r.optimal {
                    out.push(format!("optimal: expected {w}, got {}", r.optimal));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub dimension: usize,
    pub field: Field,
    pub c: ControlSpec,
    pub c_prime: ControlSpec,
    pub subspaces: Vec<MemberConfig>,
    pub expected: Option<Expected>,
}

pub fn load_system(path: impl AsRef<Path>) -> Result<ControlledFusionSystem, ConfigError> {
    SystemConfig::load(path)?.build(1e-9, 1e-10)
}

impl SystemConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self, ConfigError> {
        let obj = value
            .as_object()
            .ok_or_else(|| invalid("$", "expected a JSON object"))?;
        for key in obj.keys() {
            if !matches!(
                key.as_str(),
                "dimension" | "field" | "C" | "Cprime" | "subspaces" | "expected"
            ) {
                return Err(invalid(key.clone(), "unknown field"));
            }
        }
        let dimension = obj
            .get("dimension")
            .ok_or_else(|| invalid("dimension", "missing"))?
            .as_u64()
            .filter(|&d| d >= 1)
            .ok_or_else(|| invalid("dimension", "must be a positive integer"))?
            as usize;
        let field = match obj.get("field") {
            None => Field::Real,
            Some(Value::String(s)) if s == "real" => Field::Real,
            Some(Value::String(s)) if s == "complex" => Field::Complex,
            Some(_) => return Err(invalid("field", "must be \"real\" or \"complex\"")),
        };
        let c = parse_control(obj.get("C"), "C", field, dimension, &["identity"])?;
        let c_prime = parse_control(
            obj.get("Cprime"),
            "Cprime",
            field,
            dimension,
            &["identity", "same", "inverse-adjoint"],
        )?;
        let list = obj
            .get("subspaces")
            .ok_or_else(|| invalid("subspaces", "missing"))?
            .as_array()
            .ok_or_else(|| invalid("subspaces", "must be an array"))?;
        if list.is_empty() {
            return Err(invalid("subspaces", "at least one subspace is required"));
        }
        let mut subspaces = Vec::with_capacity(list.len());
        for (i, item) in list.iter().enumerate() {
            let path = format!("subspaces[{i}]");
            let member = item
                .as_object()
                .ok_or_else(|| invalid(&path, "expected an object"))?;
            if let Some(k) = member
                .keys()
                .find(|k| !matches!(k.as_str(), "basis" | "weight"))
            {
                return Err(invalid(format!("{path}.{k}"), "unknown field"));
            }
            let weight = member
                .get("weight")
                .ok_or_else(|| invalid(format!("{path}.weight"), "missing"))?
                .as_f64()
                .ok_or_else(|| invalid(format!("{path}.weight"), "must be a number"))?;
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(invalid(format!("{path}.weight"), "weight must be positive"));
            }
            let basis = parse_columns(
                member
                    .get("basis")
                    .ok_or_else(|| invalid(format!("{path}.basis"), "missing"))?,
                &format!("{path}.basis"),
                field,
                dimension,
            )?;
            subspaces.push(MemberConfig { basis, weight });
        }
        let expected = match obj.get("expected") {
            None => None,
            Some(v) => Some(
                serde_json::from_value(v.clone())
                    .map_err(|e| invalid("expected", e.to_string()))?,
            ),
        };
        Ok(SystemConfig {
            dimension,
            field,
            c,
            c_prime,
            subspaces,
            expected,
        })
    }

    pub fn pair(&self) -> Result<ControlledPair, ConfigError> {
        let n = self.dimension;
        let c = match &self.c {
            ControlSpec::Matrix(m) => m.clone(),
            ControlSpec::Identity => Matrix::identity(n, n),
            other => {
                return Err(invalid(
                    "C",
                    format!("keyword \"{other}\" is only valid for Cprime"),
                ))
            }
        };
        let as_field = |e: Error, field: &str| match e {
            Error::NotInvertible { .. } => invalid(field, e.to_string()),
            e => ConfigError::System(e),
        };
        match &self.c_prime {
            ControlSpec::Matrix(m) => ControlledPair::new(c, m.clone()).map_err(|e| {
                let which = match e {
                    Error::NotInvertible { which: "C", .. } => "C",
                    _ => "Cprime",
                };
                as_field(e, which)
            }),
            ControlSpec::Identity => {
                ControlledPair::new(c, Matrix::identity(n, n)).map_err(|e| as_field(e, "C"))
            }
            ControlSpec::Same => ControlledPair::same(c).map_err(|e| as_field(e, "C")),
            ControlSpec::InverseAdjoint => {
                ControlledPair::inverse_adjoint(c).map_err(|e| as_field(e, "C"))
            }
        }
    }

    /// Validated system; bases are orthonormalized with rank tolerance `rank_tol`.
    pub fn build(&self, tol: f64, rank_tol: f64) -> Result<ControlledFusionSystem, ConfigError> {
        let pair = self.pair()?;
        let mut members = Vec::with_capacity(self.subspaces.len());
        for (i, m) in self.subspaces.iter().enumerate() {
            let subspace = Subspace::new(m.basis.clone(), rank_tol).map_err(|e| match e {
                Error::ZeroSubspace => {
                    invalid(format!("subspaces[{i}].basis"), "spans the zero subspace")
                }
                e => ConfigError::System(e),
            })?;
            members.push(WeightedSubspace::new(subspace, m.weight));
        }
        Ok(build_system(pair, members, tol)?)
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("dimension".into(), Value::from(self.dimension));
        obj.insert(
            "field".into(),
            Value::from(match self.field {
                Field::Real => "real",
                Field::Complex => "complex",
            }),
        );
        obj.insert("C".into(), control_value(&self.c, self.field));
        obj.insert("Cprime".into(), control_value(&self.c_prime, self.field));
        let subspaces = self
            .subspaces
            .iter()
            .map(|m| {
                let cols = m
                    .basis
                    .column_iter()
                    .map(|c| Value::Array(c.iter().map(|&z| entry_value(z, self.field)).collect()))
                    .collect();
                let mut o = Map::new();
                o.insert("basis".into(), Value::Array(cols));
                o.insert("weight".into(), Value::from(m.weight));
                Value::Object(o)
            })
            .collect();
        obj.insert("subspaces".into(), Value::Array(subspaces));
        if let Some(e) = &self.expected {
            obj.insert(
                "expected".into(),
                serde_json::to_value(e).expect("plain data"),
            );
        }
        Value::Object(obj)
    }

    pub fn to_json_string(&self, pretty: bool) -> String {
        let v = self.to_value();
        if pretty {
            serde_json::to_string_pretty(&v).expect("plain data")
        } else {
            serde_json::to_string(&v).expect("plain data")
        }
    }
}

fn entry_value(z: Complex64, field: Field) -> Value {
    match field {
        Field::Real => Value::from(z.re),
        Field::Complex => Value::Array(vec![Value::from(z.re), Value::from(z.im)]),
    }
}

fn control_value(c: &ControlSpec, field: Field) -> Value {
    match c {
        ControlSpec::Matrix(m) => Value::Array(
            m.row_iter()
                .map(|r| Value::Array(r.iter().map(|&z| entry_value(z, field)).collect()))
                .collect(),
        ),
        other => Value::from(other.to_string()),
    }
}

fn parse_entry(v: &Value, path: &str, field: Field) -> Result<Complex64, ConfigError> {
    let z = match v {
        Value::Number(n) => Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0),
        Value::Array(pair) if pair.len() == 2 => {
            if field == Field::Real {
                return Err(invalid(path, "complex entry in a real-field file"));
            }
            match (pair[0].as_f64(), pair[1].as_f64()) {
                (Some(re), Some(im)) => Complex64::new(re, im),
                _ => return Err(invalid(path, "complex entry must be [re, im] numbers")),
            }
        }
        _ => return Err(invalid(path, "expected a number or [re, im]")),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(invalid(path, "entry must be finite"));
    }
    Ok(z)
}

fn parse_vector(
    v: &Value,
    path: &str,
    field: Field,
    len: usize,
) -> Result<Vec<Complex64>, ConfigError> {
    let arr = v
        .as_array()
        .ok_or_else(|| invalid(path, "expected an array"))?;
    if arr.len() != len {
        return Err(invalid(
            path,
            format!("expected {len} entries, found {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(j, x)| parse_entry(x, &format!("{path}[{j}]"), field))
        .collect()
}

fn parse_control(
    v: Option<&Value>,
    path: &str,
    field: Field,
    n: usize,
    keywords: &[&str],
) -> Result<ControlSpec, ConfigError> {
    let v = v.ok_or_else(|| invalid(path, "missing"))?;
    if let Value::String(s) = v {
        if !keywords.contains(&s.as_str()) {
            return Err(invalid(
                path,
                format!("unknown keyword \"{s}\" (allowed: {})", keywords.join(", ")),
            ));
        }
        return Ok(match s.as_str() {
            "identity" => ControlSpec::Identity,
            "same" => ControlSpec::Same,
            _ => ControlSpec::InverseAdjoint,
        });
    }
    let rows = v
        .as_array()
        .ok_or_else(|| invalid(path, "expected a matrix (array of rows) or keyword"))?;
    if rows.len() != n {
        return Err(invalid(
            path,
            format!("expected {n}x{n}, found {} rows", rows.len()),
        ));
    }
    let mut m = Matrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let entries = parse_vector(row, &format!("{path}[{i}]"), field, n)?;
        for (j, z) in entries.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    Ok(ControlSpec::Matrix(m))
}

fn parse_columns(v: &Value, path: &str, field: Field, n: usize) -> Result<Matrix, ConfigError> {
    let cols = v
        .as_array()
        .ok_or_else(|| invalid(path, "expected an array of columns"))?;
    if cols.is_empty() {
        return Err(invalid(path, "at least one column is required"));
    }
    let mut m = Matrix::zeros(n, cols.len());
    for (j, col) in cols.iter().enumerate() {
        let entries = parse_vector(col, &format!("{path}[{j}]"), field, n)?;
        for (i, z) in entries.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const R3: &str = r#"{
        "dimension": 3,
        "field": "real",
        "C": "identity",
        "Cprime": "same",
        "subspaces": [
            {"basis": [[1,0,0],[0,1,0]], "weight": 0.7071067811865476},
            {"basis": [[0,1,0],[0,0,1]], "weight": 0.7071067811865476},
            {"basis": [[0,0,1]], "weight": 0.7071067811865476}
        ]
    }"#;

    fn validation_field(text: &str) -> String {
        match SystemConfig::from_json_str(text).and_then(|c| c.build(1e-9, 1e-10)) {
            Err(ConfigError::Validation { field, .. }) => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn parses_r3_system() {
        let sys = SystemConfig::from_json_str(R3)
            .unwrap()
            .build(1e-9, 1e-10)
            .unwrap();
        let b = fusion_frame_bounds(&sys, 1e-9).unwrap();
        assert!((b.lower - 0.5).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_is_rejected() {
        let text = R3.replacen("0.7071067811865476", "0", 1);
        match SystemConfig::from_json_str(&text) {
            Err(ConfigError::Validation { field, message }) => {
                assert_eq!(field, "subspaces[0].weight");
                assert_eq!(message, "weight must be positive");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_control_shape_is_rejected() {
        let text = R3.replace("\"C\": \"identity\"", "\"C\": [[1,0],[0,1]]");
        assert_eq!(validation_field(&text), "C");
    }

    #[test]
    fn short_basis_column_is_rejected() {
        let text = R3.replace("[[0,0,1]]", "[[0,1]]");
        assert_eq!(validation_field(&text), "subspaces[2].basis[0]");
    }

    #[test]
    fn singular_control_is_rejected() {
        let text = R3.replace("\"C\": \"identity\"", "\"C\": [[1,0,0],[0,1,0],[0,0,0]]");
        assert_eq!(validation_field(&text), "C");
    }

    #[test]
    fn complex_entry_in_real_file() {
        let text = R3.replace("[[0,0,1]]", "[[0,0,[1,0]]]");
        assert_eq!(validation_field(&text), "subspaces[2].basis[0][2]");
    }

    #[test]
    fn parse_errors_carry_location() {
        match SystemConfig::from_json_str("{\n  \"dimension\": 3,\n  oops\n}") {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complex_round_trip_is_exact() {
        let text = r#"{"dimension": 2, "field": "complex",
            "C": [[[1.5, -0.25], 0.1], [0, [0.3, 2.0]]], "Cprime": "inverse-adjoint",
            "subspaces": [{"basis": [[[0.6, 0.0], [0.0, 0.8]]], "weight": 1.25}]}"#;
        let cfg = SystemConfig::from_json_str(text).unwrap();
        let back = SystemConfig::from_json_str(&cfg.to_json_string(false)).unwrap();
        assert_eq!(cfg, back);
        cfg.build(1e-9, 1e-10).unwrap();
    }

    #[test]
    fn expected_block_is_checked() {
        let text = R3.replace(
            "\"subspaces\"",
            "\"expected\": {\"lower\": 0.5, \"upper\": 1.0, \"classification\": \"frame\"}, \"subspaces\"",
        );
        let cfg = SystemConfig::from_json_str(&text).unwrap();
        let sys = cfg.build(1e-9, 1e-10).unwrap();
        assert!(cfg
            .expected
            .as_ref()
            .unwrap()
            .mismatches(&sys)
            .unwrap()
            .is_empty());
        let wrong = Expected {
            lower: Some(1.0),
            ..Default::default()
        };
        assert_eq!(wrong.mismatches(&sys).unwrap().len(), 1);
    }
}

//! Verification reports: per-check records with 17-significant-digit JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A float that serializes with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_nan() {
            s.serialize_str("NaN")
        } else if x.is_infinite() {
            s.serialize_str(if x > 0.0 { "Infinity" } else { "-Infinity" })
        } else {
            let raw = RawValue::from_string(format!("{x:.16e}")).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or one of NaN, Infinity, -Infinity")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "NaN" => Ok(Num(f64::NAN)),
                    "Infinity" => Ok(Num(f64::INFINITY)),
                    "-Infinity" => Ok(Num(f64::NEG_INFINITY)),
                    _ => Err(E::custom(format!("unexpected string {v}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub values: Vec<Num>,
    pub expected: Option<Num>,
    pub residual: Num,
    pub tolerance: Num,
    pub pass: bool,
}

/// Non-gating quantity recorded for reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub name: String,
    pub values: Vec<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub algebra: Option<String>,
    pub params: BTreeMap<String, Num>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub pipeline: String,
    pub input: InputEcho,
    pub checks: Vec<CheckRecord>,
    pub observations: Vec<Observation>,
    pub pass: bool,
    pub wall_time_s: Num,
}

impl VerificationReport {
    pub fn new(pipeline: &str, input: InputEcho) -> Self {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            pipeline: pipeline.to_string(),
            input,
            checks: Vec::new(),
            observations: Vec::new(),
            pass: true,
            wall_time_s: Num(0.0),
        }
    }

    /// Gating check: passes when `residual <= tolerance`.
    pub fn check(&mut self, name: &str, values: &[f64], expected: Option<f64>, residual: f64, tolerance: f64) -> bool {
        let pass = residual <= tolerance;
        self.checks.push(CheckRecord {
            name: name.to_string(),
            values: values.iter().map(|&v| Num(v)).collect(),
            expected: expected.map(Num),
            residual: Num(residual),
            tolerance: Num(tolerance),
            pass,
        });
        self.pass &= pass;
        pass
    }

    /// Gating check of `value` against `expected` with a relative tolerance.
    pub fn check_rel(&mut self, name: &str, value: f64, expected: f64, rel: f64, abs: f64) -> bool {
        let residual = (value - expected).abs();
        let tol = abs + rel * value.abs().max(expected.abs());
        self.check(name, &[value], Some(expected), residual, tol)
    }

    /// Gating check of an integer quantity.
    pub fn check_eq(&mut self, name: &str, value: usize, expected: usize) -> bool {
        let residual = (value as f64 - expected as f64).abs();
        self.check(name, &[value as f64], Some(expected as f64), residual, 0.0)
    }

    pub fn observe(&mut self, name: &str, values: &[f64], note: Option<&str>) {
        self.observations.push(Observation {
            name: name.to_string(),
            values: values.iter().map(|&v| Num(v)).collect(),
            note: note.map(str::to_string),
        });
    }

    pub fn check_named(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn observation(&self, name: &str) -> Option<&Observation> {
        self.observations.iter().find(|c| c.name == name)
    }

    /// Recomputes the overall flag from the records.
    pub fn recompute_pass(&mut self) {
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pipeline {} (schema {}, version {})", self.pipeline, self.schema_version, self.tool_version);
        if let Some(a) = &self.input.algebra {
            let _ = writeln!(out, "algebra {a}");
        }
        for (k, v) in &self.input.params {
            let _ = writeln!(out, "param {k} = {:.16e}", v.0);
        }
        for c in &self.checks {
            let values: Vec<String> = c.values.iter().map(|v| format!("{:.16e}", v.0)).collect();
            let expected = c.expected.map(|e| format!("{:.16e}", e.0)).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{} {} values=[{}] expected={} residual={:.16e} tolerance={:.16e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                values.join(", "),
                expected,
                c.residual.0,
                c.tolerance.0
            );
        }
        for o in &self.observations {
            let values: Vec<String> = o.values.iter().map(|v| format!("{:.16e}", v.0)).collect();
            let _ = write!(out, "NOTE {} values=[{}]", o.name, values.join(", "));
            if let Some(n) = &o.note {
                let _ = write!(out, " ({n})");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "overall {}", if self.pass { "PASS" } else { "FAIL" });
        let _ = writeln!(out, "wall_time_s {:.16e}", self.wall_time_s.0);
        out
    }
}

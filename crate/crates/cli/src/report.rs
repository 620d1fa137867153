use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// One experiment's JSON record.
///
/// `ratio` is present exactly when both `empirical` and a nonzero
/// `predicted_mid` are. `runtime_seconds` is left out under `--stable`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_mid: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub result: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    pub seed: u64,
    pub version: String,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, params: BTreeMap<String, Value>, result: Value, seed: u64) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            params,
            empirical: None,
            predicted_mid: None,
            predicted_rad: None,
            ratio: None,
            result,
            runtime_seconds: None,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Attach an empirical value and a prediction; non-finite inputs are
    /// dropped since JSON cannot carry them.
    pub fn with_comparison(mut self, empirical: f64, mid: f64, rad: f64) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        self.empirical = finite(empirical);
        self.predicted_mid = finite(mid);
        self.predicted_rad = finite(rad);
        self.ratio = match (self.empirical, self.predicted_mid) {
            (Some(e), Some(m)) if m != 0.0 => finite(e / m),
            _ => None,
        };
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// `key,value` lines for the scalar fields, for `--format csv` when a
    /// command has no series of its own.
    pub fn to_flat_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push(',');
            out.push_str(&csv_field(&v));
            out.push('\n');
        };
        push("experiment", self.experiment.clone());
        for (k, v) in &self.params {
            push(&format!("params.{k}"), value_text(v));
        }
        for (k, v) in [
            ("empirical", self.empirical),
            ("predicted_mid", self.predicted_mid),
            ("predicted_rad", self.predicted_rad),
            ("ratio", self.ratio),
            ("runtime_seconds", self.runtime_seconds),
        ] {
            if let Some(v) = v {
                push(k, format!("{v:e}"));
            }
        }
        flatten("result", &self.result, &mut push);
        push("seed", self.seed.to_string());
        push("version", self.version.clone());
        out
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, push: &mut impl FnMut(&str, String)) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&format!("{prefix}.{k}"), v, push);
            }
        }
        other => push(prefix, value_text(other)),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

use serde_json::{json, Map, Value};

use crate::{CliError, RunConfig, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, value: f64, tolerance: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            tolerance: tolerance.into(),
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass,
            "value": finite(self.value),
            "tolerance": self.tolerance,
        })
    }
}

/// Output of one run: the CSV bytes, free-form results and checks.
#[derive(Clone, Debug)]
pub struct Report {
    pub csv: Vec<u8>,
    pub results: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Pretty JSON; `serde_json`'s map keeps keys sorted.
    pub fn summary_json(&self, config: &RunConfig) -> String {
        let params: Map<String, Value> = config
            .params
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let doc = json!({
            "schemaVersion": SCHEMA_VERSION,
            "subcommand": config.subcommand,
            "params": params,
            "results": self.results,
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "allChecksPass": self.all_pass(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialise");
        s.push('\n');
        s
    }
}

/// JSON has no NaN or infinity; those become null.
pub fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Plain decimal in the readable range, scientific outside it. Always '.'
/// as the separator and never grouping.
pub fn fmt_f(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a == 0.0 || (1e-6..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Runtime(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_f(1.5), "1.5");
        assert_eq!(fmt_f(0.0), "0");
        assert_eq!(fmt_f(1e-9), "1e-9");
        assert_eq!(fmt_f(-2.5e20), "-2.5e20");
        assert_eq!(fmt_f(f64::NAN), "NaN");
    }
}

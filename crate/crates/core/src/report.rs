//! Experiment artifacts: a JSON report of named checks plus CSV tables for
//! plotting. Reports are reproducible bit-for-bit from (config, seed); the
//! wall time is kept out of the serialized form for that reason.

use crate::error::Result;
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub label: String,
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub passed: bool,
}

impl CheckItem {
    pub fn exact(label: impl Into<String>, estimate: f64, bound: f64, passed: bool) -> Self {
        Self {
            label: label.into(),
            estimate,
            std_error: None,
            bound: Some(bound),
            passed,
        }
    }

    pub fn mc(
        label: impl Into<String>,
        estimate: f64,
        std_error: f64,
        bound: f64,
        passed: bool,
    ) -> Self {
        Self {
            label: label.into(),
            estimate,
            std_error: Some(std_error),
            bound: Some(bound),
            passed,
        }
    }

    pub fn info(label: impl Into<String>, estimate: f64) -> Self {
        Self {
            label: label.into(),
            estimate,
            std_error: None,
            bound: None,
            passed: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub version: u32,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            version: 1,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {} v{}", self.name, self.version)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub replicates: u64,
    pub items: Vec<CheckItem>,
    pub passed: bool,
    pub tables: Vec<Table>,
    /// Not serialized: varies run to run while the report must not.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn new(name: &str, config: serde_json::Value, seed: u64, replicates: u64) -> Self {
        Self {
            name: name.to_string(),
            config,
            seed,
            replicates,
            items: Vec::new(),
            passed: true,
            tables: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn push(&mut self, item: CheckItem) {
        self.passed &= item.passed;
        self.items.push(item);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializing report")
    }

    /// One line per check, suitable for terminal output.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            let state = if item.passed { "pass" } else { "FAIL" };
            out.push_str(&format!("[{state}] {}: {:.6e}", item.label, item.estimate));
            if let Some(se) = item.std_error {
                out.push_str(&format!(" (se {se:.2e})"));
            }
            if let Some(b) = item.bound {
                out.push_str(&format!(" vs {b:.6e}"));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {}\n",
            self.name,
            if self.passed { "pass" } else { "FAIL" }
        ));
        out
    }
}

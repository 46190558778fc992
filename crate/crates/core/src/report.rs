//! Machine-readable run reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lab::{CheckRecord, Verdict};
use crate::means::BarycenterResult;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warnings {
    pub drift_reprojections: u64,
    pub not_found_in_box: u64,
    pub no_convergence: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario_id: String,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub warnings: Warnings,
    pub defaults_applied: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barycenter: Option<BarycenterResult>,
    pub runtime_ms: f64,
}

impl RunReport {
    pub fn new(scenario_id: &str, command: &str, seed: u64, defaults_applied: Vec<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario_id: scenario_id.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            checks: Vec::new(),
            warnings: Warnings::default(),
            defaults_applied,
            barycenter: None,
            runtime_ms: 0.0,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.any_failed() {
            EXIT_FAIL
        } else {
            EXIT_PASS
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report as JSON with the runtime field removed.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("runtime_ms");
        }
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }
}

/// Barycenter tail as CSV with columns `N, z0, …, gap`.
pub fn barycenter_csv(result: &BarycenterResult) -> String {
    let dim = result.point.len();
    let mut out = String::from("N");
    for i in 0..dim {
        let _ = write!(out, ",z{i}");
    }
    out.push_str(",gap\n");
    for entry in &result.schedule_tail {
        let _ = write!(out, "{}", entry.side);
        for v in &entry.point {
            let _ = write!(out, ",{v:e}");
        }
        match entry.gap {
            Some(g) => {
                let _ = writeln!(out, ",{g:e}");
            }
            None => out.push_str(",\n"),
        }
    }
    out
}

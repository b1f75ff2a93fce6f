//! JSON report and the fixed-width human summary.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// Declined for budget reasons; not a failure.
    Refused,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Refused => "refused",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub reason: Option<String>,
    pub summary: String,
    pub data: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: Tool,
    pub scenario: Scenario,
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

impl Report {
    pub fn new(scenario: Scenario) -> Self {
        Report {
            tool: Tool { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
            scenario,
            checks: Vec::new(),
            notes: Vec::new(),
            timings_ms: None,
        }
    }

    pub fn status_of(&self, name: &str) -> Option<Status> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.status)
    }

    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn summary_table(&self) -> String {
        let mut out = format!("{:<12} {:<8} {}\n", "check", "status", "detail");
        out.push_str(&format!("{:-<12} {:-<8} {:-<40}\n", "", "", ""));
        for c in &self.checks {
            let detail = match &c.reason {
                Some(r) if c.summary.is_empty() => r.clone(),
                Some(r) => format!("{} ({r})", c.summary),
                None => c.summary.clone(),
            };
            out.push_str(&format!("{:<12} {:<8} {}\n", c.name, c.status.as_str(), detail));
        }
        out
    }
}

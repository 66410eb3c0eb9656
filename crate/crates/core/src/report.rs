//! Machine-readable check reports.

use serde::Serialize;

pub const TOOL: &str = "infodist";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One inequality `lhs ≤ rhs` accepted up to `tolerance`; `margin = rhs − lhs`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            status: if margin >= -tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            lhs,
            rhs,
            margin,
            tolerance,
        }
    }

    /// `error ≤ 0` within `tolerance`.
    pub fn small(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self::le(name, error, 0.0, tolerance)
    }

    /// `|lhs − rhs| ≤ tolerance`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let mut c = Self::le(name, (lhs - rhs).abs(), 0.0, tolerance);
        c.lhs = lhs;
        c.rhs = rhs;
        c
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub inputs: serde_json::Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, seed: u64, inputs: serde_json::Value) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            seed,
            inputs,
            checks: Vec::new(),
            details: serde_json::Value::Null,
            pass: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.passed();
        self.checks.push(check);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }
}

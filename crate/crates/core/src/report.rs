//! Structured verification records shared by every checker.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    /// Signed slack of the inequality; nonnegative means it holds.
    pub margin: f64,
    pub pass: bool,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

impl VerificationReport {
    pub fn new(inequality: &str, lhs: f64, rhs: f64, constant: f64, margin: f64, pass: bool) -> Self {
        Self { inequality: inequality.to_string(), lhs, rhs, constant, margin, pass, meta: BTreeMap::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }
}

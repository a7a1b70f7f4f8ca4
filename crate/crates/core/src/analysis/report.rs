//! JSON-structured experiment reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// One tolerance comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `"<"`, `"<="`, `"in"` (with `upper`), or `">"`.
    pub relation: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            relation: "<",
            upper: None,
            passed: value < bound,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            relation: "<=",
            upper: None,
            passed: value <= bound,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: lower,
            relation: "in",
            upper: Some(upper),
            passed: (lower..=upper).contains(&value),
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            relation: ">=",
            upper: None,
            passed: ok,
        }
    }
}

/// Experiment name, parameters, seed, per-trial rows, fitted constants and
/// tolerance checks.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub rows: Vec<Value>,
    pub fitted: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            parameters: BTreeMap::new(),
            seed: None,
            rows: Vec::new(),
            fitted: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn row(&mut self, row: impl Serialize) {
        self.rows.push(serde_json::to_value(row).expect("serializable"));
    }

    pub fn fit(&mut self, key: &str, value: f64) {
        self.fitted.insert(key.to_string(), value);
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_checks_fail_the_report() {
        let mut report = Report::new("demo").seed(7).param("q", 2.0);
        report.check(Check::below("small", 1e-9, 1e-8));
        assert!(report.passed);
        report.check(Check::within("slope", 1.3, 0.9, 1.1));
        assert!(!report.passed);
        assert_eq!(report.failures().count(), 1);
        let json = report.to_json();
        assert!(json.contains("\"experiment\": \"demo\""));
        assert!(json.contains("\"seed\": 7"));
    }
}

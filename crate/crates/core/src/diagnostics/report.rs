//! Machine-readable pass/fail reports.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Detail {
    pub label: String,
    pub measured: f64,
    pub allowed: f64,
    pub pass: bool,
}

/// `{check, params, pass, max_slack, details[]}` where slack is
/// `measured - allowed` and a check passes iff every slack is nonpositive.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    pub pass: bool,
    pub max_slack: f64,
    /// Advisory checks are reported but never fail a suite.
    pub advisory: bool,
    pub details: Vec<Detail>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, params: Value) -> Self {
        Self { check: check.into(), params, pass: true, max_slack: f64::NEG_INFINITY, advisory: false, details: vec![] }
    }

    pub fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }

    /// Records `measured <= allowed`. NaN measurements fail.
    pub fn item(&mut self, label: impl Into<String>, measured: f64, allowed: f64) -> bool {
        let pass = measured <= allowed;
        let slack = if measured.is_nan() { f64::INFINITY } else { measured - allowed };
        self.max_slack = self.max_slack.max(slack);
        self.pass &= pass;
        self.details.push(Detail { label: label.into(), measured, allowed, pass });
        pass
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.pass &= other.pass;
        self.max_slack = self.max_slack.max(other.max_slack);
        self.details.extend(other.details.into_iter().map(|mut d| {
            d.label = format!("{}/{}", other.check, d.label);
            d
        }));
    }

    /// Fails a suite only when this is a hard check.
    pub fn hard_fail(&self) -> bool {
        !self.pass && !self.advisory
    }

    pub fn summary_line(&self) -> String {
        let verdict = match (self.pass, self.advisory) {
            (true, _) => "PASS",
            (false, true) => "ADVISORY",
            (false, false) => "FAIL",
        };
        format!("{verdict} {} (max slack {:.3e}, {} items)", self.check, self.max_slack, self.details.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn slack_and_pass() {
        let mut r = CheckReport::new("demo", json!({"n": 3}));
        assert!(r.item("a", 1.0, 2.0));
        assert_eq!(r.max_slack, -1.0);
        assert!(!r.item("b", 3.0, 2.0));
        assert!(!r.pass && r.max_slack == 1.0);
        assert!(!r.item("nan", f64::NAN, 1.0));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["check"], "demo");
        assert_eq!(v["details"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn advisory_never_hard_fails() {
        let mut r = CheckReport::new("soft", json!({})).advisory();
        r.item("x", 2.0, 1.0);
        assert!(!r.pass && !r.hard_fail());
        assert!(r.summary_line().starts_with("ADVISORY"));
    }
}

//! Versioned JSON verification reports.

use crate::config::RunConfig;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// One measured quantity checked against its bound: passes iff `measured ≤ bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub claim_id: String,
    /// Quotation of the statement under test.
    pub anchor: &'static str,
    /// `NaN` (serialized as `null`) when the computation itself failed.
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(claim_id: impl Into<String>, anchor: &'static str, measured: f64, bound: f64, detail: impl Into<String>) -> Self {
        Self { claim_id: claim_id.into(), anchor, measured, bound, pass: measured <= bound, detail: detail.into() }
    }

    pub fn failed(claim_id: impl Into<String>, anchor: &'static str, detail: impl Into<String>) -> Self {
        Self { claim_id: claim_id.into(), anchor, measured: f64::NAN, bound: f64::NAN, pass: false, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    fn of<'a>(records: impl Iterator<Item = &'a CheckRecord>) -> Self {
        let mut s = Self::default();
        for r in records {
            s.total += 1;
            if r.pass {
                s.passed += 1;
            } else {
                s.failed += 1;
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

impl SuiteReport {
    pub fn new(suite: &str, mut records: Vec<CheckRecord>, wall_clock_s: Option<f64>) -> Self {
        records.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
        let summary = Summary::of(records.iter());
        Self { suite: suite.to_string(), records, summary, wall_clock_s }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub suites: Vec<SuiteReport>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn new(config: RunConfig, mut suites: Vec<SuiteReport>) -> Self {
        suites.sort_by(|a, b| a.suite.cmp(&b.suite));
        let summary = Summary::of(suites.iter().flat_map(|s| s.records.iter()));
        Self { schema_version: SCHEMA_VERSION, tool: "rieffel", version: env!("CARGO_PKG_VERSION"), config, suites, summary }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_the_bound() {
        assert!(CheckRecord::new("a", "q", 1.0, 1.0, "").pass);
        assert!(!CheckRecord::new("a", "q", 1.5, 1.0, "").pass);
        assert!(!CheckRecord::new("a", "q", f64::NAN, 1.0, "").pass);
        assert!(!CheckRecord::failed("a", "q", "boom").pass);
    }

    #[test]
    fn records_and_suites_are_sorted() {
        let s1 = SuiteReport::new("b", vec![CheckRecord::new("b.z", "q", 0.0, 1.0, ""), CheckRecord::new("b.a", "q", 2.0, 1.0, "")], None);
        let s2 = SuiteReport::new("a", vec![CheckRecord::new("a.x", "q", 0.0, 1.0, "")], Some(0.5));
        assert_eq!(s1.records[0].claim_id, "b.a");
        let r = VerifyReport::new(RunConfig::default(), vec![s1, s2]);
        assert_eq!(r.suites[0].suite, "a");
        assert_eq!(r.summary, Summary { total: 3, passed: 2, failed: 1 });
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert!(v["suites"][1].get("wall_clock_s").is_none());
        assert_eq!(v["suites"][0]["wall_clock_s"], 0.5);
    }

    #[test]
    fn failed_measurements_serialize_as_null() {
        let v = serde_json::to_value(CheckRecord::failed("a", "q", "x")).unwrap();
        assert!(v["measured"].is_null());
    }
}

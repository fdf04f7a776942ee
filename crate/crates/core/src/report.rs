//! Outcome of a check, with enough data to replay a failure.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// A violated law together with the inputs that violate it, written in the
/// element syntax of the models involved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub law: String,
    pub values: Vec<(String, String)>,
}

impl Counterexample {
    pub fn new(law: impl Into<String>) -> Self {
        Counterexample { law: law.into(), values: vec![] }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.values.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.law)?;
        for (k, v) in &self.values {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub subject: String,
    pub status: Status,
    pub counterexample: Option<Counterexample>,
    pub detail: String,
    pub depth: u64,
    pub bounds: Vec<(String, u64)>,
    /// True when the verdict covers every case, not just a bounded sample.
    pub exact: bool,
    pub instances: u64,
    pub witnesses: Vec<String>,
    pub elapsed_ms: u64,
}

/// Witnesses kept per report.
const MAX_WITNESSES: usize = 8;

impl CheckReport {
    pub fn new(check: impl Into<String>, subject: impl Into<String>, depth: u64) -> Self {
        CheckReport {
            check: check.into(),
            subject: subject.into(),
            status: Status::Pass,
            counterexample: None,
            detail: String::new(),
            depth,
            bounds: vec![],
            exact: false,
            instances: 0,
            witnesses: vec![],
            elapsed_ms: 0,
        }
    }

    pub fn bound(mut self, name: &str, value: u64) -> Self {
        self.bounds.push((name.to_string(), value));
        self
    }

    pub fn exact(mut self, exact: bool) -> Self {
        self.exact = exact;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn fail(&mut self, cx: Counterexample, detail: impl Into<String>) {
        if self.status != Status::Fail {
            self.status = Status::Fail;
            self.counterexample = Some(cx);
            self.detail = detail.into();
        }
    }

    pub fn inconclusive(&mut self, detail: impl Into<String>) {
        if self.status == Status::Pass {
            self.status = Status::Inconclusive;
            self.detail = detail.into();
        }
    }

    pub fn witness(&mut self, w: impl fmt::Display) {
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w.to_string());
        }
    }

    /// Folds a sub-report into this one; the first failure wins.
    pub fn absorb(&mut self, other: &CheckReport) {
        self.instances += other.instances;
        self.exact &= other.exact;
        match other.status {
            Status::Fail => {
                if let Some(cx) = &other.counterexample {
                    self.fail(cx.clone(), format!("{}: {}", other.check, other.detail));
                }
            }
            Status::Inconclusive => self.inconclusive(format!("{}: {}", other.check, other.detail)),
            Status::Pass => {}
        }
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.elapsed_ms = start.elapsed().as_millis() as u64;
        self
    }

    /// The report with timing removed, for comparisons across runs.
    pub fn without_timing(&self) -> Self {
        CheckReport { elapsed_ms: 0, ..self.clone() }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} [{}]: {}\n", self.check, self.subject, self.status);
        s += &format!("  depth: {}", self.depth);
        for (k, v) in &self.bounds {
            s += &format!(", {k}: {v}");
        }
        s += &format!("\n  exact: {}\n  instances: {}\n", self.exact, self.instances);
        if let Some(cx) = &self.counterexample {
            s += &format!("  counterexample: {cx}\n");
        }
        if !self.detail.is_empty() {
            s += &format!("  detail: {}\n", self.detail);
        }
        for w in &self.witnesses {
            s += &format!("  witness: {w}\n");
        }
        s += &format!("  elapsed_ms: {}\n", self.elapsed_ms);
        s
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failure_is_kept() {
        let mut r = CheckReport::new("c", "s", 3);
        r.fail(Counterexample::new("a").with("x", 1), "first");
        r.fail(Counterexample::new("b"), "second");
        assert_eq!(r.counterexample.as_ref().unwrap().law, "a");
        assert_eq!(r.counterexample.as_ref().unwrap().get("x"), Some("1"));
        r.inconclusive("ignored");
        assert!(r.failed());
    }

    #[test]
    fn json_round_trip() {
        let mut r = CheckReport::new("c", "s", 3).bound("k_max", 2);
        r.fail(Counterexample::new("law").with("x", "soft:1/2"), "d");
        let j = serde_json::to_string(&r).unwrap();
        assert!(j.contains("\"status\":\"fail\""));
        let back: CheckReport = serde_json::from_str(&j).unwrap();
        assert_eq!(back, r);
    }
}

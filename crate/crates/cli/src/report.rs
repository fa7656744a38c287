use csym_core::{Check, CheckMode};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub key: String,
    pub passed: bool,
    pub residual: f64,
    /// "assert" or "report"; failed "report" entries do not fail the run.
    pub mode: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl CheckEntry {
    pub fn ok(&self) -> bool {
        self.passed || self.mode == "report"
    }
}

impl From<&Check> for CheckEntry {
    fn from(c: &Check) -> Self {
        CheckEntry {
            key: c.key.clone(),
            passed: c.passed,
            residual: c.residual,
            mode: match c.mode {
                CheckMode::Assert => "assert".into(),
                CheckMode::Report => "report".into(),
            },
            note: c.note.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub inputs_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub regime: String,
    pub seed: u64,
    pub tol: f64,
    pub passed: bool,
    pub results: Value,
    pub check_list: Vec<CheckEntry>,
    pub warnings: Vec<String>,
    pub timestamp: String,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// The report without its timestamp.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(m) = &mut v {
            m.remove("timestamp");
        }
        v
    }

    pub fn to_pretty(&self) -> String {
        crate::spec::pretty_json(&serde_json::to_value(self).expect("report serializes"))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.check_list.iter().filter(|c| !c.ok())
    }
}

/// Collects checks, merging repeated keys into the worst residual.
#[derive(Debug, Default, Clone)]
pub struct CheckList {
    entries: Vec<CheckEntry>,
}

impl CheckList {
    pub fn push(&mut self, c: CheckEntry) {
        match self.entries.iter_mut().find(|e| e.key == c.key) {
            Some(e) => {
                if c.residual > e.residual || c.residual.is_nan() {
                    e.residual = c.residual;
                }
                if !c.passed && e.passed {
                    e.note = c.note.clone();
                }
                e.passed &= c.passed;
                if c.mode == "assert" {
                    e.mode = "assert".into();
                }
            }
            None => self.entries.push(c),
        }
    }

    pub fn extend<'a>(&mut self, checks: impl IntoIterator<Item = &'a Check>) {
        for c in checks {
            self.push(c.into());
        }
    }

    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(CheckEntry::ok)
    }

    pub fn into_vec(self) -> Vec<CheckEntry> {
        self.entries
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_keeps_worst_residual() {
        let mut l = CheckList::default();
        l.extend(&[
            Check::residual("a", 1e-14, 1e-10),
            Check::residual("b", 0.0, 1e-10),
            Check::residual("a", 1e-3, 1e-10),
            Check::residual("a", 1e-12, 1e-10),
        ]);
        let v = l.into_vec();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].residual, 1e-3);
        assert!(!v[0].passed);
    }

    #[test]
    fn report_only_failures_pass() {
        let mut l = CheckList::default();
        l.extend(&[Check::flag("x", false).report_only()]);
        assert!(l.all_ok());
    }
}

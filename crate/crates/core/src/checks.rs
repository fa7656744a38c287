//! Named residual checks collected by the verification routines.

use std::fmt;

/// Whether a failed check is a hard failure or only recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Assert,
    Report,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub key: String,
    pub passed: bool,
    pub residual: f64,
    pub mode: CheckMode,
    pub note: String,
}

impl Check {
    pub fn residual(key: impl Into<String>, residual: f64, bound: f64) -> Self {
        Check {
            key: key.into(),
            passed: residual.is_finite() && residual <= bound,
            residual,
            mode: CheckMode::Assert,
            note: String::new(),
        }
    }

    pub fn flag(key: impl Into<String>, passed: bool) -> Self {
        Check {
            key: key.into(),
            passed,
            residual: if passed { 0.0 } else { 1.0 },
            mode: CheckMode::Assert,
            note: String::new(),
        }
    }

    pub fn report_only(mut self) -> Self {
        self.mode = CheckMode::Report;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// True unless this is a failed assertion.
    pub fn ok(&self) -> bool {
        self.passed || self.mode == CheckMode::Report
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.passed, self.mode) {
            (true, _) => "ok",
            (false, CheckMode::Assert) => "FAIL",
            (false, CheckMode::Report) => "noted",
        };
        write!(f, "{:<44} {:>6} {:.3e}", self.key, status, self.residual)?;
        if !self.note.is_empty() {
            write!(f, "  ({})", self.note)?;
        }
        Ok(())
    }
}

pub fn all_ok(checks: &[Check]) -> bool {
    checks.iter().all(Check::ok)
}

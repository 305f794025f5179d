//! Pass/fail records for inequality checks that only apply under degree
//! hypotheses. A check whose hypothesis fails is reported as not applicable
//! instead of failing.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    NotApplicable(String),
    Pass,
    Fail(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    /// Number of individual inequalities evaluated.
    pub evaluated: usize,
    /// Largest observed |value| / ceiling (0 when nothing was evaluated).
    pub worst_ratio: f64,
}

impl Check {
    pub fn not_applicable(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: CheckStatus::NotApplicable(reason.into()),
            evaluated: 0,
            worst_ratio: 0.0,
        }
    }

    /// Starts an applicable check that passes until a violation is recorded.
    pub fn start(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: CheckStatus::Pass,
            evaluated: 0,
            worst_ratio: 0.0,
        }
    }

    /// Records `|value| <= ceiling`; `witness` is only built on the first failure.
    pub fn record(&mut self, value: f64, ceiling: f64, witness: impl FnOnce() -> String) {
        self.evaluated += 1;
        let ratio = if ceiling > 0.0 {
            value.abs() / ceiling
        } else if value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > self.worst_ratio {
            self.worst_ratio = ratio;
        }
        // Relative slack absorbs f64 rounding of exact values sitting on the ceiling.
        if ratio > 1.0 + 1e-9 && self.status == CheckStatus::Pass {
            self.status = CheckStatus::Fail(witness());
        }
    }

    /// Records a boolean condition evaluated exactly elsewhere.
    pub fn record_bool(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.evaluated += 1;
        if !ok && self.status == CheckStatus::Pass {
            self.status = CheckStatus::Fail(witness());
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        matches!(self.status, CheckStatus::Fail(_))
    }

    pub fn applicable(&self) -> bool {
        !matches!(self.status, CheckStatus::NotApplicable(_))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            CheckStatus::NotApplicable(reason) => write!(f, "{} not-applicable ({reason})", self.name),
            CheckStatus::Pass => write!(
                f,
                "{} pass checked={} worst_ratio={:.6}",
                self.name, self.evaluated, self.worst_ratio
            ),
            CheckStatus::Fail(w) => write!(
                f,
                "{} FAIL checked={} worst_ratio={:.6} witness={w}",
                self.name, self.evaluated, self.worst_ratio
            ),
        }
    }
}

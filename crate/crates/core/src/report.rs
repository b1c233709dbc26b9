use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

/// How bad a finding is. Warnings never make a report non-empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Violation,
    Warning,
}

/// One finding of a checker: which rule failed, on which entity, and why.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub rule: String,
    pub entity: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Violation {
    pub fn new(rule: &str, entity: impl fmt::Display, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Violation,
            rule: rule.to_owned(),
            entity: entity.to_string(),
            message: message.into(),
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Violation => "violation",
            Severity::Warning => "warning",
        };
        write!(f, "{tag} [{}] {}: {}", self.rule, self.entity, self.message)?;
        if let Some(w) = &self.witness {
            write!(f, " (witness: {w})")?;
        }
        Ok(())
    }
}

/// Result of a checker. Violations are data: an empty report means "valid".
///
/// Serializes to a JSON array holding the violations followed by the warnings,
/// so an empty report is `[]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn warn(&mut self, mut v: Violation) {
        v.severity = Severity::Warning;
        self.warnings.push(v);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.warnings.extend(other.warnings);
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl Serialize for ValidationReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.violations.len() + self.warnings.len()))?;
        for v in self.violations.iter().chain(&self.warnings) {
            seq.serialize_element(v)?;
        }
        seq.end()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() && self.warnings.is_empty() {
            return writeln!(f, "ok");
        }
        for v in self.violations.iter().chain(&self.warnings) {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

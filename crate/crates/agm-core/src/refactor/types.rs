//! The refactoring catalog, context-condition reports, and co-transformation
//! bookkeeping.

use crate::loc::SourceLocation;
use serde::Serialize;
use std::fmt;

/// Literal default supplied for classes that gain a pulled-up attribute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DefaultValue {
    Int(i64),
    Bool(bool),
    Str(String),
}

impl fmt::Display for DefaultValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DefaultValue::Int(v) => write!(f, "{v}"),
            DefaultValue::Bool(v) => write!(f, "{v}"),
            DefaultValue::Str(s) => {
                write!(f, "\"")?;
                for ch in s.chars() {
                    match ch {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        '\n' => write!(f, "\\n")?,
                        '\t' => write!(f, "\\t")?,
                        other => write!(f, "{other}")?,
                    }
                }
                write!(f, "\"")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PullUpVariant {
    /// Move the one existing body to the superclass; same-named methods in
    /// sibling subclasses stay behind as overrides.
    Override,
    /// Add only an abstract signature to the superclass; every subclass
    /// keeps its own body.
    AbstractSignature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Refactoring {
    PullUpAttribute {
        subclass: String,
        attribute: String,
        superclass: String,
        default: DefaultValue,
        loc: SourceLocation,
    },
    PullUpMethod {
        subclass: String,
        method: String,
        superclass: String,
        variant: PullUpVariant,
        loc: SourceLocation,
    },
    RenameAttribute { class: String, old: String, new: String, loc: SourceLocation },
    RenameMethod { class: String, old: String, new: String, loc: SourceLocation },
    RenameClass { old: String, new: String, loc: SourceLocation },
}

impl Refactoring {
    pub fn loc(&self) -> &SourceLocation {
        match self {
            Refactoring::PullUpAttribute { loc, .. }
            | Refactoring::PullUpMethod { loc, .. }
            | Refactoring::RenameAttribute { loc, .. }
            | Refactoring::RenameMethod { loc, .. }
            | Refactoring::RenameClass { loc, .. } => loc,
        }
    }

    pub fn strip_locations(&mut self) {
        match self {
            Refactoring::PullUpAttribute { loc, .. }
            | Refactoring::PullUpMethod { loc, .. }
            | Refactoring::RenameAttribute { loc, .. }
            | Refactoring::RenameMethod { loc, .. }
            | Refactoring::RenameClass { loc, .. } => *loc = SourceLocation::dummy(),
        }
    }

    /// One-line description used in reports.
    pub fn describe(&self) -> String {
        match self {
            Refactoring::PullUpAttribute { subclass, attribute, superclass, default, .. } => {
                format!("pull_up_attr {subclass}.{attribute} -> {superclass} default {default}")
            }
            Refactoring::PullUpMethod { subclass, method, superclass, variant, .. } => {
                let v = match variant {
                    PullUpVariant::Override => "override",
                    PullUpVariant::AbstractSignature => "abstract",
                };
                format!("pull_up_method {subclass}.{method} -> {superclass} variant {v}")
            }
            Refactoring::RenameAttribute { class, old, new, .. } => {
                format!("rename_attr {class}.{old} -> {new}")
            }
            Refactoring::RenameMethod { class, old, new, .. } => {
                format!("rename_method {class}.{old} -> {new}")
            }
            Refactoring::RenameClass { old, new, .. } => format!("rename_class {old} -> {new}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionViolation {
    pub condition: &'static str,
    pub location: SourceLocation,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Applicability {
    Applicable,
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub refactoring: String,
    pub verdict: Applicability,
    pub violations: Vec<ConditionViolation>,
}

impl ConditionReport {
    pub fn new(refactoring: &Refactoring, violations: Vec<ConditionViolation>) -> Self {
        let verdict = if violations.is_empty() { Applicability::Applicable } else { Applicability::Blocked };
        ConditionReport { refactoring: refactoring.describe(), verdict, violations }
    }

    pub fn is_applicable(&self) -> bool {
        self.verdict == Applicability::Applicable
    }

    pub fn violated_ids(&self) -> Vec<&'static str> {
        self.violations.iter().map(|v| v.condition).collect()
    }
}

/// How a single test case fared under co-transformation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Disposition {
    Unchanged,
    Adapted { edits: Vec<String> },
    NeedsAttention { reason: String },
}

impl Disposition {
    pub fn keyword(&self) -> &'static str {
        match self {
            Disposition::Unchanged => "unchanged",
            Disposition::Adapted { .. } => "adapted",
            Disposition::NeedsAttention { .. } => "needs-attention",
        }
    }
}

/// Per-test co-transformation outcome; every suite test appears exactly once.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CoTransformReport {
    pub tests: Vec<(String, Disposition)>,
}

impl CoTransformReport {
    pub fn disposition(&self, test: &str) -> Option<&Disposition> {
        self.tests.iter().find(|(name, _)| name == test).map(|(_, d)| d)
    }

    /// Merge a later step's report into an accumulated one. Needs-attention
    /// dominates adapted, which dominates unchanged; edits accumulate.
    pub fn merge(&mut self, later: &CoTransformReport) {
        for (name, new_disp) in &later.tests {
            match self.tests.iter_mut().find(|(n, _)| n == name) {
                None => self.tests.push((name.clone(), new_disp.clone())),
                Some((_, existing)) => match (&existing.clone(), new_disp) {
                    (_, Disposition::Unchanged) => {}
                    (Disposition::NeedsAttention { .. }, _) => {}
                    (_, Disposition::NeedsAttention { .. }) => *existing = new_disp.clone(),
                    (Disposition::Adapted { edits }, Disposition::Adapted { edits: more }) => {
                        let mut all = edits.clone();
                        all.extend(more.iter().cloned());
                        *existing = Disposition::Adapted { edits: all };
                    }
                    (Disposition::Unchanged, d) => *existing = (*d).clone(),
                },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize)]
pub enum RefactorError {
    #[error("unknown element: {0}")]
    UnknownElement(String),
    #[error("refactoring blocked: {}", .0.violations.iter().map(|v| v.condition).collect::<Vec<_>>().join(", "))]
    Blocked(ConditionReport),
    #[error("script blocked at step {step}: {}", .report.violations.iter().map(|v| v.condition).collect::<Vec<_>>().join(", "))]
    BlockedAtStep { step: usize, report: ConditionReport, prior_reports: Vec<StepReport> },
}

/// Outcome of one applied step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub refactoring: String,
    pub conditions: ConditionReport,
    pub co_transform: CoTransformReport,
}

//! Source locations and parse diagnostics shared by all file kinds.

use serde::Serialize;
use std::fmt;

/// A position in a source file. Line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceLocation {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourceLocation {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceLocation { file: file.into(), line, column }
    }

    /// Placeholder location used for synthesized nodes and for structural
    /// comparison after `strip_locations`.
    pub fn dummy() -> Self {
        SourceLocation { file: String::new(), line: 1, column: 1 }
    }

    pub fn is_dummy(&self) -> bool {
        self.file.is_empty() && self.line == 1 && self.column == 1
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// A parse or resolution problem tied to a location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub location: SourceLocation,
    pub message: String,
    /// Short summary of what the parser expected at this point, when known.
    pub expected: Option<String>,
}

impl Diagnostic {
    pub fn new(location: SourceLocation, message: impl Into<String>) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        Diagnostic { location, message, expected: None }
    }

    pub fn expecting(location: SourceLocation, message: impl Into<String>, expected: impl Into<String>) -> Self {
        Diagnostic { expected: Some(expected.into()), ..Diagnostic::new(location, message) }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)?;
        if let Some(exp) = &self.expected {
            write!(f, " (expected {exp})")?;
        }
        Ok(())
    }
}

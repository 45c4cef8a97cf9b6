//! Yaml4SaaS documents.
//!
//! The grammar implemented here is this crate's own normative reading of the
//! Yaml4SaaS format (see `README.md` for the schema). [`parse`] reports every
//! problem it can find with a line, column and document path; [`serialize`]
//! writes the canonical form.

mod de;
mod node;
mod ser;

use std::fmt;

use serde::Serialize;

pub use de::parse;
pub use ser::serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseErrorKind {
    Syntax,
    UnknownKey,
    TypeMismatch,
    MissingRequired,
    BadEnum,
    DanglingReference,
    DuplicateKey,
}

impl ParseErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "SYNTAX",
            ParseErrorKind::UnknownKey => "UNKNOWN_KEY",
            ParseErrorKind::TypeMismatch => "TYPE_MISMATCH",
            ParseErrorKind::MissingRequired => "MISSING_REQUIRED",
            ParseErrorKind::BadEnum => "BAD_ENUM",
            ParseErrorKind::DanglingReference => "DANGLING_REFERENCE",
            ParseErrorKind::DuplicateKey => "DUPLICATE_KEY",
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    /// 1-based.
    pub line: usize,
    /// 1-based.
    pub column: usize,
    /// Dotted document path, e.g. `plans.PRO.usageLimits.maxAssistantsPerMeeting`.
    /// Empty for the document root.
    pub path: String,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "<root>" } else { &self.path };
        write!(
            f,
            "{}:{}: {}: {}: {}",
            self.line, self.column, path, self.kind, self.message
        )
    }
}

impl std::error::Error for ParseError {}

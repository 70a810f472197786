//! The `.sumprob` scenario language.
//!
//! ```text
//! scenario "ex21" {
//!   limit = "2";
//!   index_set = floor_power(2, 1);
//!   on_tail = 1;
//!   off_tail = pow(1 - eps / 2, k) offtail_monotone;
//! }
//! ```

mod format;
mod lexer;
mod parser;

use std::fmt;

pub use format::format_scenario;
pub use parser::{parse_scenario, KEYWORDS};

/// Position of a token: 1-based line and column (in characters), 0-based
/// byte offset and byte length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub len: usize,
}

impl SourceSpan {
    /// Whether the byte range `[start, end)` lies inside this span.
    pub fn covers(&self, start: usize, end: usize) -> bool {
        self.offset <= start && end <= self.offset + self.len
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {span}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl ParseError {
    pub(crate) fn new(message: impl Into<String>, span: SourceSpan, expected: Vec<String>) -> Self {
        ParseError {
            message: message.into(),
            span,
            expected,
        }
    }
}

/// Well-formed text whose content is rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid scenario at {span}: {message}")]
pub struct ValidationError {
    pub message: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

//! Source spans and diagnostics shared by the parser, checker, and CLI.

use std::fmt;

/// Half-open byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    /// Smallest span covering both.
    pub fn merge(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// Stable diagnostic codes. The numeric groups are: E0xx syntax, E1xx
/// name/arity/well-formedness, E2xx typing and effect checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// Parse error.
    E001,
    /// Unknown type.
    E101,
    /// Duplicate declaration or member name.
    E102,
    /// Type-argument arity mismatch.
    E103,
    /// Unknown method in an effect.
    E104,
    /// Type argument violates its declared bound.
    E105,
    /// Implements target is not an interface.
    E106,
    /// `new` applied to an interface.
    E107,
    /// Unbound variable.
    E110,
    /// Field access on a non-class type or unknown field.
    E111,
    /// Subtype check failed (argument, receiver, or return position).
    E201,
    /// Method body effects exceed the declared annotation.
    E202,
    /// Interface refinement failure.
    E203,
    /// Restrict bound violated.
    E204,
    /// Interface signature has no implementation.
    E205,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::E001 => "E001",
            Code::E101 => "E101",
            Code::E102 => "E102",
            Code::E103 => "E103",
            Code::E104 => "E104",
            Code::E105 => "E105",
            Code::E106 => "E106",
            Code::E107 => "E107",
            Code::E110 => "E110",
            Code::E111 => "E111",
            Code::E201 => "E201",
            Code::E202 => "E202",
            Code::E203 => "E203",
            Code::E204 => "E204",
            Code::E205 => "E205",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single error produced while parsing or checking a program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span,
        }
    }

    /// Renders in the fixed one-line format:
    /// `error[CODE]: MESSAGE --> FILE:LINE:COL`.
    pub fn render(&self, file: &str, source: &str) -> String {
        let (line, col) = line_col(source, self.span.start);
        format!(
            "error[{}]: {} --> {}:{}:{}",
            self.code, self.message, file, line, col
        )
    }
}

/// 1-based line and column for a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let mut line = 1;
    let mut line_start = 0;
    for (i, b) in source.bytes().enumerate() {
        if i >= offset {
            break;
        }
        if b == b'\n' {
            line += 1;
            line_start = i + 1;
        }
    }
    (line, offset - line_start + 1)
}

/// Orders diagnostics by source position, then code. Used everywhere a
/// diagnostic list leaves the library, so output is reproducible.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (a.span.start, a.code, &a.message).cmp(&(b.span.start, b.code, &b.message))
    });
}

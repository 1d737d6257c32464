//! Source positions and structured diagnostics.

use std::fmt;

/// A source position: 1-based line and column plus the byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
    pub offset: usize,
}

impl Pos {
    /// Placeholder for diagnostics that have no source location (line/col 0).
    pub const NONE: Pos = Pos { line: 0, col: 0, offset: 0 };

    pub fn new(line: u32, col: u32, offset: usize) -> Pos {
        Pos { line, col, offset }
    }

    pub fn is_none(&self) -> bool {
        self.line == 0
    }
}

/// Stable error codes, rendered as `error[CODE]` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    ParseError,
    DuplicateTyCon,
    DuplicateParam,
    DuplicateCtor,
    DuplicateSig,
    AnnotationInH98Mode,
    UnboundTyCon,
    UnboundVar,
    OccursCheck,
    KindMismatch,
    EscapeError,
    QuantificationCheck,
    ScopeViolation,
    OccursViolation,
    UndeclaredUVar,
    DepthTooLarge,
    CorpusFormatError,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::ParseError => "PARSE_ERROR",
            ErrorCode::DuplicateTyCon => "DUPLICATE_TYCON",
            ErrorCode::DuplicateParam => "DUPLICATE_PARAM",
            ErrorCode::DuplicateCtor => "DUPLICATE_CTOR",
            ErrorCode::DuplicateSig => "DUPLICATE_SIG",
            ErrorCode::AnnotationInH98Mode => "ANNOTATION_IN_H98_MODE",
            ErrorCode::UnboundTyCon => "UNBOUND_TYCON",
            ErrorCode::UnboundVar => "UNBOUND_VAR",
            ErrorCode::OccursCheck => "OCCURS_CHECK",
            ErrorCode::KindMismatch => "KIND_MISMATCH",
            ErrorCode::EscapeError => "ESCAPE_ERROR",
            ErrorCode::QuantificationCheck => "QUANTIFICATION_CHECK",
            ErrorCode::ScopeViolation => "SCOPE_VIOLATION",
            ErrorCode::OccursViolation => "OCCURS_VIOLATION",
            ErrorCode::UndeclaredUVar => "UNDECLARED_UVAR",
            ErrorCode::DepthTooLarge => "DEPTH_TOO_LARGE",
            ErrorCode::CorpusFormatError => "CORPUS_FORMAT_ERROR",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A structured error: code, location, and human-readable message.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: ErrorCode,
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: ErrorCode, pos: Pos, message: impl Into<String>) -> Diagnostic {
        Diagnostic { code, pos, message: message.into() }
    }

    /// A diagnostic with no source location, used by context-level operations.
    pub fn bare(code: ErrorCode, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(code, Pos::NONE, message)
    }

    /// Attach a position if the diagnostic does not already carry one.
    pub fn or_at(mut self, pos: Pos) -> Diagnostic {
        if self.pos.is_none() {
            self.pos = pos;
        }
        self
    }

    /// Render as `error[CODE] file:line:col: message`.
    pub fn render(&self, file: &str) -> String {
        format!(
            "error[{}] {}:{}:{}: {}",
            self.code, file, self.pos.line, self.pos.col, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "error[{}] {}:{}: {}",
            self.code, self.pos.line, self.pos.col, self.message
        )
    }
}

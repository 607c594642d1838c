use std::fmt;

use crate::model::SourcePos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagCode {
    IoError,
    LexError,
    SyntaxError,
    UnresolvedName,
    SortMismatch,
    IllegalSort,
    ReservedName,
    DuplicateName,
    DuplicateLabel,
    FrameViolation,
    DuplicateAssignment,
    PrimedOutsideFrame,
    PrimedNotAllowed,
    MissingVariant,
    MissingWitness,
    InvalidWitness,
    InvalidInitialisation,
    InvalidRefinement,
    ReintroducedVariable,
    CyclicDependency,
    UnrefinedEvent,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::IoError => "IO_ERROR",
            DiagCode::LexError => "LEX_ERROR",
            DiagCode::SyntaxError => "SYNTAX_ERROR",
            DiagCode::UnresolvedName => "UNRESOLVED_NAME",
            DiagCode::SortMismatch => "SORT_MISMATCH",
            DiagCode::IllegalSort => "ILLEGAL_SORT",
            DiagCode::ReservedName => "RESERVED_NAME",
            DiagCode::DuplicateName => "DUPLICATE_NAME",
            DiagCode::DuplicateLabel => "DUPLICATE_LABEL",
            DiagCode::FrameViolation => "FRAME_VIOLATION",
            DiagCode::DuplicateAssignment => "DUPLICATE_ASSIGNMENT",
            DiagCode::PrimedOutsideFrame => "PRIMED_OUTSIDE_FRAME",
            DiagCode::PrimedNotAllowed => "PRIMED_NOT_ALLOWED",
            DiagCode::MissingVariant => "MISSING_VARIANT",
            DiagCode::MissingWitness => "MISSING_WITNESS",
            DiagCode::InvalidWitness => "INVALID_WITNESS",
            DiagCode::InvalidInitialisation => "INVALID_INITIALISATION",
            DiagCode::InvalidRefinement => "INVALID_REFINEMENT",
            DiagCode::ReintroducedVariable => "REINTRODUCED_VARIABLE",
            DiagCode::CyclicDependency => "CYCLIC_DEPENDENCY",
            DiagCode::UnrefinedEvent => "UNREFINED_EVENT",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub pos: SourcePos,
    pub code: DiagCode,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagCode, pos: SourcePos, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, pos, code, message: message.into() }
    }

    pub fn warning(code: DiagCode, pos: SourcePos, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, pos, code, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}[{}]: {}", self.pos, self.code, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

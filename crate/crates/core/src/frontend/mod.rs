//! Textual model language: lexing, parsing, resolution and type checking.

pub mod ast;
mod diag;
mod lexer;
mod parser;
mod printer;
mod resolve;

use std::path::{Path, PathBuf};

pub use diag::{has_errors, DiagCode, Diagnostic, Severity};
pub use parser::{parse_expr_text, parse_text};
pub use printer::{print_declarations, print_expr};

use crate::model::{SourcePos, TypedModel};
use ast::Declaration;

/// One source file of a project.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        SourceUnit { path: path.into(), text: text.into() }
    }

    pub fn read(path: &Path) -> Result<Self, Diagnostic> {
        let shown = path.display().to_string();
        std::fs::read_to_string(path).map(|text| SourceUnit::new(shown.clone(), text)).map_err(|e| {
            Diagnostic::error(
                DiagCode::IoError,
                SourcePos { file: shown.clone(), line: 0, col: 0 },
                format!("cannot read `{shown}`: {e}"),
            )
        })
    }
}

pub fn parse(unit: &SourceUnit) -> (Vec<Declaration>, Vec<Diagnostic>) {
    parse_text(&unit.path, &unit.text)
}

pub fn resolve_and_typecheck(decls: &[Declaration]) -> (TypedModel, Vec<Diagnostic>) {
    resolve::resolve(decls)
}

/// Parses and resolves a whole project. Resolution is skipped when any unit
/// fails to parse.
pub fn load_units(units: &[SourceUnit]) -> (TypedModel, Vec<Diagnostic>) {
    let mut decls = Vec::new();
    let mut diags = Vec::new();
    for u in units {
        let (d, mut e) = parse(u);
        decls.extend(d);
        diags.append(&mut e);
    }
    if has_errors(&diags) {
        return (TypedModel::default(), diags);
    }
    let (model, mut e) = resolve_and_typecheck(&decls);
    diags.append(&mut e);
    (model, diags)
}

/// Reads and loads the given files.
pub fn load_files(paths: &[PathBuf]) -> (TypedModel, Vec<Diagnostic>) {
    let mut units = Vec::new();
    let mut diags = Vec::new();
    for p in paths {
        match SourceUnit::read(p) {
            Ok(u) => units.push(u),
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        return (TypedModel::default(), diags);
    }
    load_units(&units)
}

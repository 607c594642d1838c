//! Typed representation of Event-B contexts, machines and events.
//!
//! Values in this module are produced by the frontend after resolution and
//! are never mutated afterwards, so they can be shared freely between
//! discharge workers.

mod expr;
mod subst;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use expr::{BinOp, Expr, Quantifier, Sort, SortError, SymKey, SymKind, Symbol, UnOp};
pub use subst::{free_symbol_kinds, free_symbols, prime_frame, substitute, SubstError, Substitution};
pub use validate::check_model;

/// Name of the distinguished initialisation event.
pub const INITIALISATION: &str = "initialisation";

/// A position in a source file, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct SourcePos {
    pub file: String,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Status {
    #[default]
    Ordinary,
    Convergent,
    Anticipated,
}

impl Status {
    pub fn needs_variant(self) -> bool {
        !matches!(self, Status::Ordinary)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ordinary => "ordinary",
            Status::Convergent => "convergent",
            Status::Anticipated => "anticipated",
        })
    }
}

/// A named, typed declaration (constant, variable or parameter).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decl {
    pub name: String,
    pub sort: Sort,
}

impl Decl {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Decl { name: name.into(), sort }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPredicate {
    pub label: String,
    pub body: Expr,
    pub pos: SourcePos,
}

impl LabeledPredicate {
    pub fn new(label: impl Into<String>, body: Expr) -> Self {
        LabeledPredicate { label: label.into(), body, pos: SourcePos::default() }
    }
}

/// Before-after assignment: the assigned variables and the predicate relating
/// their current and next values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BAssignment {
    pub frame: BTreeSet<String>,
    pub predicate: Expr,
}

impl BAssignment {
    pub fn new(frame: impl IntoIterator<Item = impl Into<String>>, predicate: Expr) -> Self {
        BAssignment { frame: frame.into_iter().map(Into::into).collect(), predicate }
    }

    /// Assigns every listed variable its own current value.
    pub fn skip(vars: &[Decl]) -> Self {
        let predicate = Expr::conj(
            vars.iter().map(|d| Expr::eq(Expr::primed(&d.name, d.sort), Expr::var(&d.name, d.sort))),
        );
        BAssignment { frame: vars.iter().map(|d| d.name.clone()).collect(), predicate }
    }

    /// Names of primed variables referenced by the predicate.
    pub fn primed_names(&self) -> BTreeSet<String> {
        free_symbols(&self.predicate)
            .into_iter()
            .filter(|s| s.kind == SymKind::Primed)
            .map(|s| s.name)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Disappearing abstract parameter name, or abstract variable name when
    /// `primed` is set.
    pub target: String,
    pub primed: bool,
    pub sort: Sort,
    pub predicate: Expr,
    pub pos: SourcePos,
}

impl Witness {
    pub fn display_target(&self) -> String {
        if self.primed {
            format!("{}'", self.target)
        } else {
            self.target.clone()
        }
    }

    pub fn target_symbol(&self) -> Symbol {
        let kind = if self.primed { SymKind::Primed } else { SymKind::Param };
        Symbol::new(self.target.clone(), kind, self.sort)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub name: String,
    pub status: Status,
    pub params: Vec<Decl>,
    pub guards: Vec<LabeledPredicate>,
    pub action: BAssignment,
    pub refines: Option<String>,
    pub witnesses: Vec<Witness>,
    pub pos: SourcePos,
}

impl Event {
    pub fn is_initialisation(&self) -> bool {
        self.name == INITIALISATION
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub name: String,
    pub extends: Option<String>,
    pub constants: Vec<Decl>,
    pub axioms: Vec<LabeledPredicate>,
    pub theorems: Vec<LabeledPredicate>,
    pub pos: SourcePos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub name: String,
    pub sees: String,
    pub refines: Option<String>,
    pub variables: Vec<Decl>,
    pub invariants: Vec<LabeledPredicate>,
    pub variant: Option<Expr>,
    pub events: Vec<Event>,
    pub pos: SourcePos,
}

impl Machine {
    pub fn event(&self, name: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&Decl> {
        self.variables.iter().find(|d| d.name == name)
    }

    pub fn initialisation(&self) -> Option<&Event> {
        self.event(INITIALISATION)
    }
}

/// A resolved project. Contexts and machines are stored in dependency order
/// (a context after the one it extends, a machine after the one it refines),
/// ties broken by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypedModel {
    pub contexts: Vec<Context>,
    pub machines: Vec<Machine>,
}

impl TypedModel {
    pub fn context(&self, name: &str) -> Option<&Context> {
        self.contexts.iter().find(|c| c.name == name)
    }

    pub fn machine(&self, name: &str) -> Option<&Machine> {
        self.machines.iter().find(|m| m.name == name)
    }

    /// The context and everything it extends, most general first.
    pub fn context_chain(&self, name: &str) -> Vec<&Context> {
        let mut chain = Vec::new();
        let mut next = self.context(name);
        while let Some(ctx) = next {
            if chain.iter().any(|c: &&Context| c.name == ctx.name) {
                break;
            }
            chain.push(ctx);
            next = ctx.extends.as_deref().and_then(|p| self.context(p));
        }
        chain.reverse();
        chain
    }

    /// Machines refined by `m`, most abstract first (excluding `m`).
    pub fn ancestors(&self, m: &Machine) -> Vec<&Machine> {
        let mut chain: Vec<&Machine> = Vec::new();
        let mut next = m.refines.as_deref().and_then(|n| self.machine(n));
        while let Some(am) = next {
            if am.name == m.name || chain.iter().any(|c| c.name == am.name) {
                break;
            }
            chain.push(am);
            next = am.refines.as_deref().and_then(|n| self.machine(n));
        }
        chain.reverse();
        chain
    }

    /// Constants visible from a machine that sees `ctx`.
    pub fn visible_constants(&self, ctx: &str) -> Vec<&Decl> {
        self.context_chain(ctx).into_iter().flat_map(|c| c.constants.iter()).collect()
    }
}

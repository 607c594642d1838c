//! Untyped parse tree of the model language.

use crate::model::{SourcePos, Sort, Status};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub pos: SourcePos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedIdent {
    pub ident: Ident,
    pub sort: Sort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PBinOp {
    Iff,
    Implies,
    Or,
    And,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl PBinOp {
    pub fn precedence(self) -> u8 {
        match self {
            PBinOp::Iff => 1,
            PBinOp::Implies => 2,
            PBinOp::Or => 3,
            PBinOp::And => 4,
            PBinOp::Eq | PBinOp::Neq | PBinOp::Lt | PBinOp::Le | PBinOp::Gt | PBinOp::Ge => 6,
            PBinOp::Add | PBinOp::Sub => 7,
            PBinOp::Mul | PBinOp::Div | PBinOp::Mod => 8,
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            PBinOp::Iff => "<=>",
            PBinOp::Implies => "=>",
            PBinOp::Or => "or",
            PBinOp::And => "and",
            PBinOp::Eq => "=",
            PBinOp::Neq => "/=",
            PBinOp::Lt => "<",
            PBinOp::Le => "<=",
            PBinOp::Gt => ">",
            PBinOp::Ge => ">=",
            PBinOp::Add => "+",
            PBinOp::Sub => "-",
            PBinOp::Mul => "*",
            PBinOp::Div => "/",
            PBinOp::Mod => "mod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PQuant {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PExprKind {
    Int(i64),
    Bool(bool),
    Name(String),
    Primed(String),
    Apply(Ident, Box<PExpr>),
    Neg(Box<PExpr>),
    Not(Box<PExpr>),
    Binary(PBinOp, Box<PExpr>, Box<PExpr>),
    /// `e in lo..hi`
    InRange { elem: Box<PExpr>, lo: Box<PExpr>, hi: Box<PExpr> },
    Quant { q: PQuant, bound: Vec<TypedIdent>, body: Box<PExpr> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PExpr {
    pub kind: PExprKind,
    pub pos: SourcePos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabPred {
    pub label: Ident,
    pub expr: PExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessDecl {
    pub target: Ident,
    pub primed: bool,
    pub expr: PExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionKind {
    /// `x := e`
    Assign(Ident, PExpr),
    /// `x1, ..., xk :| P`
    SuchThat(Vec<Ident>, PExpr),
    /// `x :∈ lo..hi`
    InRange(Ident, PExpr, PExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDecl {
    pub label: Ident,
    pub kind: ActionKind,
}

impl ActionDecl {
    pub fn assigned(&self) -> Vec<&Ident> {
        match &self.kind {
            ActionKind::Assign(x, _) | ActionKind::InRange(x, _, _) => vec![x],
            ActionKind::SuchThat(xs, _) => xs.iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDecl {
    pub name: Ident,
    pub refines: Option<Ident>,
    pub status: Option<Status>,
    pub params: Vec<TypedIdent>,
    pub guards: Vec<LabPred>,
    pub witnesses: Vec<WitnessDecl>,
    pub actions: Vec<ActionDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextDecl {
    pub name: Ident,
    pub extends: Option<Ident>,
    pub constants: Vec<TypedIdent>,
    /// `None` when the clause is absent, `Some(vec![])` for an empty clause.
    pub axioms: Option<Vec<LabPred>>,
    pub theorems: Option<Vec<LabPred>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineDecl {
    pub name: Ident,
    pub refines: Option<Ident>,
    pub sees: Ident,
    pub variables: Vec<TypedIdent>,
    pub invariants: Vec<LabPred>,
    pub variant: Option<PExpr>,
    pub events: Vec<EventDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Declaration {
    Context(ContextDecl),
    Machine(MachineDecl),
}

impl Declaration {
    pub fn name(&self) -> &Ident {
        match self {
            Declaration::Context(c) => &c.name,
            Declaration::Machine(m) => &m.name,
        }
    }
}

/// Resets every position in the tree, so that trees parsed from differently
/// formatted sources can be compared structurally.
pub fn erase_positions(decls: &mut [Declaration]) {
    fn id(i: &mut Ident) {
        i.pos = SourcePos::default();
    }
    fn ti(t: &mut TypedIdent) {
        id(&mut t.ident);
    }
    fn ex(e: &mut PExpr) {
        e.pos = SourcePos::default();
        match &mut e.kind {
            PExprKind::Int(_) | PExprKind::Bool(_) | PExprKind::Name(_) | PExprKind::Primed(_) => {}
            PExprKind::Apply(f, a) => {
                id(f);
                ex(a);
            }
            PExprKind::Neg(a) | PExprKind::Not(a) => ex(a),
            PExprKind::Binary(_, l, r) => {
                ex(l);
                ex(r);
            }
            PExprKind::InRange { elem, lo, hi } => {
                ex(elem);
                ex(lo);
                ex(hi);
            }
            PExprKind::Quant { bound, body, .. } => {
                bound.iter_mut().for_each(ti);
                ex(body);
            }
        }
    }
    fn lp(p: &mut LabPred) {
        id(&mut p.label);
        ex(&mut p.expr);
    }
    for d in decls {
        match d {
            Declaration::Context(c) => {
                id(&mut c.name);
                c.extends.iter_mut().for_each(id);
                c.constants.iter_mut().for_each(ti);
                c.axioms.iter_mut().flatten().for_each(lp);
                c.theorems.iter_mut().flatten().for_each(lp);
            }
            Declaration::Machine(m) => {
                id(&mut m.name);
                m.refines.iter_mut().for_each(id);
                id(&mut m.sees);
                m.variables.iter_mut().for_each(ti);
                m.invariants.iter_mut().for_each(lp);
                m.variant.iter_mut().for_each(ex);
                for e in &mut m.events {
                    id(&mut e.name);
                    e.refines.iter_mut().for_each(id);
                    e.params.iter_mut().for_each(ti);
                    e.guards.iter_mut().for_each(lp);
                    for w in &mut e.witnesses {
                        id(&mut w.target);
                        ex(&mut w.expr);
                    }
                    for a in &mut e.actions {
                        id(&mut a.label);
                        match &mut a.kind {
                            ActionKind::Assign(x, v) => {
                                id(x);
                                ex(v);
                            }
                            ActionKind::SuchThat(xs, p) => {
                                xs.iter_mut().for_each(id);
                                ex(p);
                            }
                            ActionKind::InRange(x, lo, hi) => {
                                id(x);
                                ex(lo);
                                ex(hi);
                            }
                        }
                    }
                }
            }
        }
    }
}

//! Sorted expression trees over constants, variables, parameters and their
//! next-state (primed) counterparts.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Solver sort of a symbol or expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Bool,
    /// Total function `Int -> Int`. Only context constants may carry it.
    FunIntInt,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "int",
            Sort::Bool => "bool",
            Sort::FunIntInt => "fun",
        })
    }
}

/// What a symbol reference denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymKind {
    Const,
    Var,
    /// Next-state value of the machine variable of the same name.
    Primed,
    Param,
    /// Variable bound by an enclosing quantifier.
    Bound,
}

impl fmt::Display for SymKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymKind::Const => "const",
            SymKind::Var => "var",
            SymKind::Primed => "primed",
            SymKind::Param => "param",
            SymKind::Bound => "bound",
        })
    }
}

/// A resolved symbol occurrence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub name: String,
    pub kind: SymKind,
    pub sort: Sort,
}

impl Symbol {
    pub fn new(name: impl Into<String>, kind: SymKind, sort: Sort) -> Self {
        Symbol { name: name.into(), kind, sort }
    }

    /// Name as users see it: primed symbols carry a trailing `'`.
    pub fn display_name(&self) -> String {
        match self.kind {
            SymKind::Primed => format!("{}'", self.name),
            _ => self.name.clone(),
        }
    }

    pub fn key(&self) -> SymKey {
        SymKey { kind: self.kind, name: self.name.clone() }
    }
}

/// Identifies a free symbol independently of its sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymKey {
    pub kind: SymKind,
    pub name: String,
}

impl SymKey {
    pub fn var(name: impl Into<String>) -> Self {
        SymKey { kind: SymKind::Var, name: name.into() }
    }
    pub fn primed(name: impl Into<String>) -> Self {
        SymKey { kind: SymKind::Primed, name: name.into() }
    }
    pub fn param(name: impl Into<String>) -> Self {
        SymKey { kind: SymKind::Param, name: name.into() }
    }
    pub fn constant(name: impl Into<String>) -> Self {
        SymKey { kind: SymKind::Const, name: name.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Euclidean integer division.
    Div,
    /// Euclidean remainder, always non-negative.
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Neq,
    Implies,
    Iff,
}

impl BinOp {
    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod)
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::Neq => "/=",
            BinOp::Implies => "=>",
            BinOp::Iff => "<=>",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// A typed expression. The sort of every node is determined by its operator
/// and, for references, by the sort stored in the [`Symbol`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Sym(Symbol),
    /// Application of a `FunIntInt` constant.
    Apply { fun: String, arg: Box<Expr> },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Quant { q: Quantifier, bound: Vec<(String, Sort)>, body: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("ill-sorted expression `{expr}`: {reason}")]
pub struct SortError {
    pub expr: String,
    pub reason: String,
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Int(v)
    }

    pub fn sym(name: impl Into<String>, kind: SymKind, sort: Sort) -> Expr {
        Expr::Sym(Symbol::new(name, kind, sort))
    }

    pub fn var(name: impl Into<String>, sort: Sort) -> Expr {
        Expr::sym(name, SymKind::Var, sort)
    }

    pub fn primed(name: impl Into<String>, sort: Sort) -> Expr {
        Expr::sym(name, SymKind::Primed, sort)
    }

    pub fn constant(name: impl Into<String>, sort: Sort) -> Expr {
        Expr::sym(name, SymKind::Const, sort)
    }

    pub fn param(name: impl Into<String>, sort: Sort) -> Expr {
        Expr::sym(name, SymKind::Param, sort)
    }

    pub fn apply(fun: impl Into<String>, arg: Expr) -> Expr {
        Expr::Apply { fun: fun.into(), arg: Box::new(arg) }
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Unary(UnOp::Neg, Box::new(e))
    }

    pub fn eq(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Eq, lhs, rhs)
    }

    pub fn implies(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Implies, lhs, rhs)
    }

    /// Conjunction that splices nested conjunctions and drops `true`.
    /// A single remaining conjunct is returned as is.
    pub fn conj(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        for item in items {
            match item {
                Expr::And(inner) => out.extend(inner),
                Expr::Bool(true) => {}
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::And(out)
        }
    }

    pub fn quant(q: Quantifier, bound: Vec<(String, Sort)>, body: Expr) -> Expr {
        Expr::Quant { q, bound, body: Box::new(body) }
    }

    /// Top-level conjuncts (a non-conjunction is its own single conjunct).
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::And(items) => items.iter().flat_map(|e| e.conjuncts()).collect(),
            other => vec![other],
        }
    }

    /// Result sort, assuming the expression is well sorted.
    pub fn sort(&self) -> Sort {
        match self {
            Expr::Int(_) | Expr::Apply { .. } => Sort::Int,
            Expr::Bool(_) | Expr::And(_) | Expr::Or(_) | Expr::Quant { .. } => Sort::Bool,
            Expr::Sym(s) => s.sort,
            Expr::Unary(UnOp::Neg, _) => Sort::Int,
            Expr::Unary(UnOp::Not, _) => Sort::Bool,
            Expr::Binary(op, _, _) if op.is_arith() => Sort::Int,
            Expr::Binary(..) => Sort::Bool,
        }
    }

    /// Checks every node's operand sorts and returns the root sort.
    pub fn check(&self) -> Result<Sort, SortError> {
        let fail = |reason: &str| SortError { expr: self.to_string(), reason: reason.to_string() };
        let expect = |e: &Expr, want: Sort| -> Result<(), SortError> {
            let got = e.check()?;
            if got == want {
                Ok(())
            } else {
                Err(SortError {
                    expr: self.to_string(),
                    reason: format!("operand `{e}` has sort {got}, expected {want}"),
                })
            }
        };
        match self {
            Expr::Int(_) => Ok(Sort::Int),
            Expr::Bool(_) => Ok(Sort::Bool),
            Expr::Sym(s) => Ok(s.sort),
            Expr::Apply { arg, .. } => {
                expect(arg, Sort::Int)?;
                Ok(Sort::Int)
            }
            Expr::Unary(UnOp::Neg, e) => expect(e, Sort::Int).map(|_| Sort::Int),
            Expr::Unary(UnOp::Not, e) => expect(e, Sort::Bool).map(|_| Sort::Bool),
            Expr::Binary(op, l, r) => {
                if op.is_arith() || op.is_comparison() {
                    expect(l, Sort::Int)?;
                    expect(r, Sort::Int)?;
                } else if matches!(op, BinOp::Implies | BinOp::Iff) {
                    expect(l, Sort::Bool)?;
                    expect(r, Sort::Bool)?;
                } else {
                    let ls = l.check()?;
                    if ls == Sort::FunIntInt {
                        return Err(fail("functions cannot be compared"));
                    }
                    expect(r, ls)?;
                }
                Ok(self.sort())
            }
            Expr::And(items) | Expr::Or(items) => {
                for item in items {
                    expect(item, Sort::Bool)?;
                }
                Ok(Sort::Bool)
            }
            Expr::Quant { bound, body, .. } => {
                if bound.iter().any(|(_, s)| *s == Sort::FunIntInt) {
                    return Err(fail("cannot quantify over functions"));
                }
                expect(body, Sort::Bool).map(|_| Sort::Bool)
            }
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Sym(_) => {}
            Expr::Apply { arg, .. } => arg.walk(f),
            Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Expr::And(items) | Expr::Or(items) => items.iter().for_each(|e| e.walk(f)),
            Expr::Quant { body, .. } => body.walk(f),
        }
    }

    /// True if any primed reference occurs anywhere in the tree.
    pub fn mentions_primed(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Expr::Sym(s) = e {
                found |= s.kind == SymKind::Primed;
            }
        });
        found
    }

    /// True if the tree contains a quantifier.
    pub fn has_quantifier(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Quant { .. }));
        found
    }

    /// True if the tree applies a function constant.
    pub fn has_application(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Apply { .. }));
        found
    }
}

// Printing follows the DSL's concrete syntax so that diagnostics, reports and
// round-trip tests share one rendering.

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Quant { .. } => 0,
        Expr::Binary(BinOp::Iff, ..) => 1,
        Expr::Binary(BinOp::Implies, ..) => 2,
        Expr::Or(items) if items.len() > 1 => 3,
        Expr::And(items) if items.len() > 1 => 4,
        Expr::Unary(UnOp::Not, _) => 5,
        Expr::Binary(op, ..) if op.is_comparison() || matches!(op, BinOp::Eq | BinOp::Neq) => 6,
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 7,
        Expr::Binary(BinOp::Mul | BinOp::Div | BinOp::Mod, ..) => 8,
        Expr::Unary(UnOp::Neg, _) => 9,
        _ => 10,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min: u8) -> fmt::Result {
    // Quantifiers extend as far right as possible, so they are always
    // parenthesised when nested under an operator.
    if precedence(child) < min || matches!(child, Expr::Quant { .. }) {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) if *v < 0 => write!(f, "-{}", v.unsigned_abs()),
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Sym(s) => f.write_str(&s.display_name()),
            Expr::Apply { fun, arg } => write!(f, "{fun}({arg})"),
            Expr::Unary(UnOp::Neg, e) => {
                f.write_str("-")?;
                write_child(f, e, 9)
            }
            Expr::Unary(UnOp::Not, e) => {
                f.write_str("not ")?;
                write_child(f, e, 5)
            }
            Expr::Binary(op, l, r) => {
                let p = precedence(self);
                let (lmin, rmin) = match op {
                    BinOp::Implies => (p + 1, p),
                    BinOp::Iff => (p + 1, p + 1),
                    _ if p == 6 => (p + 1, p + 1),
                    _ => (p, p + 1),
                };
                write_child(f, l, lmin)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, r, rmin)
            }
            Expr::And(items) | Expr::Or(items) => {
                if items.is_empty() {
                    return f.write_str(if matches!(self, Expr::And(_)) { "true" } else { "false" });
                }
                if items.len() == 1 {
                    return write!(f, "{}", items[0]);
                }
                let (sep, p) = if matches!(self, Expr::And(_)) { (" and ", 4) } else { (" or ", 3) };
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write_child(f, item, p + 1)?;
                }
                Ok(())
            }
            Expr::Quant { q, bound, body } => {
                f.write_str(match q {
                    Quantifier::Forall => "forall (",
                    Quantifier::Exists => "exists (",
                })?;
                for (i, (name, sort)) in bound.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}:{sort}")?;
                }
                write!(f, "). {body}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r() -> Expr {
        Expr::var("r", Sort::Int)
    }

    #[test]
    fn display_respects_precedence() {
        let e = Expr::bin(BinOp::Mul, Expr::bin(BinOp::Add, r(), Expr::int(1)), Expr::bin(BinOp::Add, r(), Expr::int(1)));
        assert_eq!(e.to_string(), "(r + 1) * (r + 1)");
        let e = Expr::bin(BinOp::Sub, r(), Expr::bin(BinOp::Sub, r(), Expr::int(1)));
        assert_eq!(e.to_string(), "r - (r - 1)");
        let e = Expr::primed("p", Sort::Int);
        assert_eq!(Expr::eq(e, Expr::bin(BinOp::Add, r(), Expr::int(1))).to_string(), "p' = r + 1");
    }

    #[test]
    fn conj_flattens_and_drops_true() {
        let a = Expr::eq(r(), Expr::int(0));
        let e = Expr::conj([Expr::Bool(true), Expr::And(vec![a.clone(), a.clone()]), a.clone()]);
        assert_eq!(e, Expr::And(vec![a.clone(), a.clone(), a.clone()]));
        assert_eq!(Expr::conj([a.clone()]), a);
        assert_eq!(Expr::conj([]), Expr::And(vec![]));
    }

    #[test]
    fn check_rejects_ill_sorted() {
        let bad = Expr::bin(BinOp::Add, r(), Expr::Bool(true));
        assert!(bad.check().is_err());
        let f_eq = Expr::eq(Expr::constant("f", Sort::FunIntInt), Expr::constant("f", Sort::FunIntInt));
        assert!(f_eq.check().is_err());
        let ok = Expr::bin(BinOp::Lt, Expr::apply("f", r()), Expr::constant("v", Sort::Int));
        assert_eq!(ok.check(), Ok(Sort::Bool));
    }
}

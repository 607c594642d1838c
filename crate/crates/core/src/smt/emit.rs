//! SMT-LIB 2 rendering of proof obligations.

use std::fmt::Write;

use crate::model::{BinOp, Expr, Quantifier, Sort, SymKind, Symbol, UnOp};
use crate::pogen::{Goal, ProofObligation};

/// A self-contained solver script for one obligation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtScript {
    pub po_id: String,
    pub text: String,
    /// Model symbol (as displayed) and the name emitted for it.
    pub symbols: Vec<(String, String)>,
}

fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Bool => "Bool",
        Sort::FunIntInt => "Int",
    }
}

/// Emitted name of a symbol. Primed variables become quoted symbols `|x'|`.
pub fn mangle(s: &Symbol) -> String {
    match s.kind {
        SymKind::Primed => format!("|{}'|", s.name),
        _ => s.name.clone(),
    }
}

pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    render(e, &mut out);
    out
}

fn render_list(head: &str, items: &[&Expr], out: &mut String) {
    out.push('(');
    out.push_str(head);
    for item in items {
        out.push(' ');
        render(item, out);
    }
    out.push(')');
}

fn render(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(v) if *v < 0 => {
            let _ = write!(out, "(- {})", v.unsigned_abs());
        }
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Expr::Sym(s) => out.push_str(&mangle(s)),
        Expr::Apply { fun, arg } => render_list(fun, &[arg], out),
        Expr::Unary(UnOp::Neg, a) => render_list("-", &[a], out),
        Expr::Unary(UnOp::Not, a) => render_list("not", &[a], out),
        Expr::Binary(op, l, r) => {
            let head = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "div",
                BinOp::Mod => "mod",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
                BinOp::Eq | BinOp::Iff => "=",
                BinOp::Neq => "distinct",
                BinOp::Implies => "=>",
            };
            render_list(head, &[l, r], out);
        }
        Expr::And(items) | Expr::Or(items) => {
            let and = matches!(e, Expr::And(_));
            match items.as_slice() {
                [] => out.push_str(if and { "true" } else { "false" }),
                [one] => render(one, out),
                many => render_list(if and { "and" } else { "or" }, &many.iter().collect::<Vec<_>>(), out),
            }
        }
        Expr::Quant { q, bound, body } => {
            out.push_str(match q {
                Quantifier::Forall => "(forall (",
                Quantifier::Exists => "(exists (",
            });
            let vars: Vec<String> = bound.iter().map(|(n, s)| format!("({n} {})", sort_name(*s))).collect();
            out.push_str(&vars.join(" "));
            out.push_str(") ");
            render(body, out);
            out.push(')');
        }
    }
}

/// Renders `po` as a refutation script: hypotheses and the negated goal are
/// asserted, so `unsat` means the obligation holds.
pub fn emit(po: &ProofObligation) -> SmtScript {
    let mut t = String::new();
    let _ = writeln!(t, "; {}", po.id);
    let _ = writeln!(t, "; kind {}", po.kind);
    t.push_str("(set-option :produce-models true)\n(set-logic ALL)\n");
    let mut symbols = Vec::new();
    for s in &po.symbols {
        let name = mangle(s);
        match s.sort {
            Sort::FunIntInt => {
                let _ = writeln!(t, "(declare-fun {name} (Int) Int)");
            }
            other => {
                let _ = writeln!(t, "(declare-fun {name} () {})", sort_name(other));
            }
        }
        symbols.push((s.display_name(), name));
    }
    for h in &po.hypotheses {
        let _ = writeln!(t, "; {}", h.tag);
        let _ = writeln!(t, "(assert {})", render_expr(&h.expr));
    }
    t.push_str("; goal\n");
    match &po.goal {
        Goal::Plain(g) => {
            let _ = writeln!(t, "(assert (not {}))", render_expr(g));
        }
        Goal::Existential { bound, body } => {
            let vars: Vec<String> = bound.iter().map(|s| format!("({} {})", mangle(s), sort_name(s.sort))).collect();
            let _ = writeln!(t, "(assert (forall ({}) (not {})))", vars.join(" "), render_expr(body));
        }
    }
    t.push_str("(check-sat)\n(get-model)\n");
    SmtScript { po_id: po.id.clone(), text: t, symbols }
}

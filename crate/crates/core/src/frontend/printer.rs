//! Canonical pretty-printer for parse trees. Output reparses to the same tree.

use std::fmt::Write;

use super::ast::*;
use crate::model::Status;

const INDENT: &str = "  ";

pub fn print_declarations(decls: &[Declaration]) -> String {
    let mut out = String::new();
    for (i, d) in decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match d {
            Declaration::Context(c) => print_context(&mut out, c),
            Declaration::Machine(m) => print_machine(&mut out, m),
        }
    }
    out
}

fn typed(list: &[TypedIdent]) -> String {
    list.iter().map(|t| format!("{} : {}", t.ident.name, t.sort)).collect::<Vec<_>>().join(" ")
}

fn labpreds(out: &mut String, preds: &[LabPred], depth: usize) {
    for p in preds {
        let _ = writeln!(out, "{}@{} {}", INDENT.repeat(depth), p.label.name, print_expr(&p.expr));
    }
}

fn print_context(out: &mut String, c: &ContextDecl) {
    let _ = write!(out, "context {}", c.name.name);
    if let Some(parent) = &c.extends {
        let _ = write!(out, " extends {}", parent.name);
    }
    out.push('\n');
    let _ = writeln!(out, "constants {}", typed(&c.constants));
    if let Some(axioms) = &c.axioms {
        out.push_str("axioms\n");
        labpreds(out, axioms, 1);
    }
    if let Some(theorems) = &c.theorems {
        out.push_str("theorems\n");
        labpreds(out, theorems, 1);
    }
    out.push_str("end\n");
}

fn print_machine(out: &mut String, m: &MachineDecl) {
    let _ = write!(out, "machine {}", m.name.name);
    if let Some(a) = &m.refines {
        let _ = write!(out, " refines {}", a.name);
    }
    let _ = writeln!(out, " sees {}", m.sees.name);
    let _ = writeln!(out, "variables {}", typed(&m.variables));
    out.push_str("invariants\n");
    labpreds(out, &m.invariants, 1);
    if let Some(v) = &m.variant {
        let _ = writeln!(out, "variant {}", print_expr(v));
    }
    out.push_str("events\n");
    for e in &m.events {
        print_event(out, e);
    }
    out.push_str("end\n");
}

fn print_event(out: &mut String, e: &EventDecl) {
    let _ = write!(out, "{INDENT}event {}", e.name.name);
    if let Some(a) = &e.refines {
        let _ = write!(out, " refines {}", a.name);
    }
    if let Some(s) = e.status {
        let _ = write!(out, " status {}", status_word(s));
    }
    out.push('\n');
    if !e.params.is_empty() {
        let _ = writeln!(out, "{INDENT}{INDENT}any {}", typed(&e.params));
    }
    if !e.guards.is_empty() {
        let _ = writeln!(out, "{INDENT}{INDENT}where");
        labpreds(out, &e.guards, 3);
    }
    if !e.witnesses.is_empty() {
        let _ = writeln!(out, "{INDENT}{INDENT}with");
        for w in &e.witnesses {
            let prime = if w.primed { "'" } else { "" };
            let _ = writeln!(out, "{}@{}{prime} : {}", INDENT.repeat(3), w.target.name, print_expr(&w.expr));
        }
    }
    if !e.actions.is_empty() {
        let _ = writeln!(out, "{INDENT}{INDENT}then");
        for a in &e.actions {
            let body = match &a.kind {
                ActionKind::Assign(x, v) => format!("{} := {}", x.name, print_expr(v)),
                ActionKind::SuchThat(xs, p) => format!(
                    "{} :| {}",
                    xs.iter().map(|x| x.name.as_str()).collect::<Vec<_>>().join(", "),
                    print_expr(p)
                ),
                ActionKind::InRange(x, lo, hi) => {
                    format!("{} :∈ {}..{}", x.name, print_operand(lo, 7), print_operand(hi, 7))
                }
            };
            let _ = writeln!(out, "{}@{} {body}", INDENT.repeat(3), a.label.name);
        }
    }
    let _ = writeln!(out, "{INDENT}end");
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Ordinary => "ordinary",
        Status::Convergent => "convergent",
        Status::Anticipated => "anticipated",
    }
}

fn precedence(e: &PExpr) -> u8 {
    match &e.kind {
        PExprKind::Quant { .. } => 0,
        PExprKind::Binary(op, _, _) => op.precedence(),
        PExprKind::Not(_) => 5,
        PExprKind::InRange { .. } => 6,
        PExprKind::Neg(_) => 9,
        _ => 10,
    }
}

/// Prints `e` so that it parses back at a position requiring at least `min`
/// binding strength.
fn print_operand(e: &PExpr, min: u8) -> String {
    if precedence(e) < min || matches!(e.kind, PExprKind::Quant { .. }) {
        format!("({})", print_expr(e))
    } else {
        print_expr(e)
    }
}

pub fn print_expr(e: &PExpr) -> String {
    match &e.kind {
        PExprKind::Int(v) => v.to_string(),
        PExprKind::Bool(b) => b.to_string(),
        PExprKind::Name(n) => n.clone(),
        PExprKind::Primed(n) => format!("{n}'"),
        PExprKind::Apply(f, a) => format!("{}({})", f.name, print_expr(a)),
        PExprKind::Neg(a) => format!("-{}", print_operand(a, 9)),
        PExprKind::Not(a) => format!("not {}", print_operand(a, 5)),
        PExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let (lmin, rmin) = match op {
                PBinOp::Implies => (p + 1, p),
                PBinOp::Iff => (p + 1, p + 1),
                _ if p == 6 => (7, 7),
                _ => (p, p + 1),
            };
            format!("{} {} {}", print_operand(l, lmin), op.text(), print_operand(r, rmin))
        }
        PExprKind::InRange { elem, lo, hi } => {
            format!("{} in {}..{}", print_operand(elem, 7), print_operand(lo, 7), print_operand(hi, 7))
        }
        PExprKind::Quant { q, bound, body } => {
            let word = match q {
                PQuant::Forall => "forall",
                PQuant::Exists => "exists",
            };
            let vars = bound.iter().map(|t| format!("{}:{}", t.ident.name, t.sort)).collect::<Vec<_>>().join(", ");
            format!("{word} ({vars}). {}", print_expr(body))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_expr_text, parse_text};
    use super::*;

    fn roundtrip_expr(src: &str) -> String {
        let e = parse_expr_text("t", src).unwrap();
        let printed = print_expr(&e);
        let mut again = parse_expr_text("t", &printed).unwrap();
        let mut orig = e;
        // Compare shapes through a throwaway machine wrapper.
        let wrap = |e: &mut PExpr| {
            let mut d = vec![Declaration::Machine(MachineDecl {
                name: Ident { name: "m".into(), pos: Default::default() },
                refines: None,
                sees: Ident { name: "c".into(), pos: Default::default() },
                variables: vec![],
                invariants: vec![],
                variant: Some(e.clone()),
                events: vec![],
            })];
            erase_positions(&mut d);
            d
        };
        assert_eq!(wrap(&mut orig), wrap(&mut again), "{src} -> {printed}");
        printed
    }

    #[test]
    fn expressions_roundtrip() {
        assert_eq!(roundtrip_expr("(a - b) - c"), "a - b - c");
        assert_eq!(roundtrip_expr("a - (b - c)"), "a - (b - c)");
        assert_eq!(roundtrip_expr("(a => b) => c"), "(a => b) => c");
        assert_eq!(roundtrip_expr("x in p..q + 1"), "x in p..q + 1");
        assert_eq!(roundtrip_expr("(forall (x:int). f(x) >= 0) and n > 0"), "(forall (x:int). f(x) >= 0) and n > 0");
        assert_eq!(roundtrip_expr("- - x"), "--x");
        assert_eq!(roundtrip_expr("not (a and b)"), "not (a and b)");
        assert_eq!(roundtrip_expr("(a = b) = c"), "(a = b) = c");
    }

    #[test]
    fn declarations_roundtrip() {
        let src = "context c constants n : int f : fun axioms @a n >= 1 end \
                   machine m sees c variables r : int invariants @i r >= 0 variant n - r events \
                   event initialisation then @a r := 0 end \
                   event go status convergent any k : int where @g k > r with @x' : x' = k then @a r :∈ r+1..n end end";
        let (decls, diags) = parse_text("t", src);
        assert!(diags.is_empty(), "{diags:?}");
        let printed = print_declarations(&decls);
        let (mut again, diags) = parse_text("t", &printed);
        assert!(diags.is_empty(), "{printed}\n{diags:?}");
        let mut orig = decls;
        erase_positions(&mut orig);
        erase_positions(&mut again);
        assert_eq!(orig, again);
    }
}

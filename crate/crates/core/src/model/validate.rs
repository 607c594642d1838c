use std::collections::BTreeSet;

use super::{Expr, LabeledPredicate, Machine, Sort, Status, SymKind, TypedModel, INITIALISATION};

/// Checks the structural invariants every resolved model must satisfy and
/// returns a description of each violation. An empty result means the model
/// is well formed.
pub fn check_model(model: &TypedModel) -> Vec<String> {
    let mut out = Vec::new();
    for ctx in &model.contexts {
        let owner = format!("context {}", ctx.name);
        let mut labels = BTreeSet::new();
        for lp in ctx.axioms.iter().chain(&ctx.theorems) {
            check_pred(&owner, lp, &mut labels, &mut out);
        }
    }
    for m in &model.machines {
        check_machine(model, m, &mut out);
    }
    out
}

fn check_pred(owner: &str, lp: &LabeledPredicate, labels: &mut BTreeSet<String>, out: &mut Vec<String>) {
    if !labels.insert(lp.label.clone()) {
        out.push(format!("{owner}: duplicate label {}", lp.label));
    }
    match lp.body.check() {
        Ok(Sort::Bool) => {}
        Ok(s) => out.push(format!("{owner}: {} has sort {s}", lp.label)),
        Err(e) => out.push(format!("{owner}: {}: {e}", lp.label)),
    }
    if lp.body.mentions_primed() {
        out.push(format!("{owner}: {} mentions a primed variable", lp.label));
    }
}

fn check_machine(model: &TypedModel, m: &Machine, out: &mut Vec<String>) {
    let owner = format!("machine {}", m.name);
    let vars: BTreeSet<&str> = m.variables.iter().map(|d| d.name.as_str()).collect();
    if m.variables.iter().any(|d| d.sort == Sort::FunIntInt) {
        out.push(format!("{owner}: function-sorted variable"));
    }
    let mut labels = BTreeSet::new();
    for inv in &m.invariants {
        check_pred(&owner, inv, &mut labels, out);
    }
    if let Some(v) = &m.variant {
        if v.check() != Ok(Sort::Int) {
            out.push(format!("{owner}: variant is not an integer expression"));
        }
        if v.mentions_primed() {
            out.push(format!("{owner}: variant mentions a primed variable"));
        }
    }
    let abstract_machine = m.refines.as_deref().and_then(|n| model.machine(n));
    if m.refines.is_some() && abstract_machine.is_none() {
        out.push(format!("{owner}: refined machine is missing"));
    }
    if m.initialisation().is_none() {
        out.push(format!("{owner}: no initialisation event"));
    }
    let mut names = BTreeSet::new();
    for ev in &m.events {
        let owner = format!("{owner}, event {}", ev.name);
        if !names.insert(ev.name.as_str()) {
            out.push(format!("{owner}: duplicate event"));
        }
        if ev.params.iter().any(|p| p.sort == Sort::FunIntInt) {
            out.push(format!("{owner}: function-sorted parameter"));
        }
        let mut labels = BTreeSet::new();
        for g in &ev.guards {
            check_pred(&owner, g, &mut labels, out);
        }
        if ev.action.predicate.check() != Ok(Sort::Bool) {
            out.push(format!("{owner}: action predicate is ill sorted"));
        }
        for f in &ev.action.frame {
            if !vars.contains(f.as_str()) {
                out.push(format!("{owner}: assigns non-variable {f}"));
            }
        }
        for p in ev.action.primed_names() {
            if !ev.action.frame.contains(&p) {
                out.push(format!("{owner}: {p}' outside frame"));
            }
        }
        if ev.status == Status::Convergent && m.variant.is_none() {
            out.push(format!("{owner}: convergent without variant"));
        }
        if ev.is_initialisation() {
            if !ev.guards.is_empty() {
                out.push(format!("{owner}: initialisation has guards"));
            }
            if ev.status != Status::Ordinary {
                out.push(format!("{owner}: initialisation is not ordinary"));
            }
            if mentions_kind(&ev.action.predicate, SymKind::Var) {
                out.push(format!("{owner}: initialisation reads machine state"));
            }
        }
        match (abstract_machine, &ev.refines) {
            (None, Some(_)) => out.push(format!("{owner}: refines in an abstract machine")),
            (Some(am), Some(target)) => {
                if am.event(target).is_none() {
                    out.push(format!("{owner}: refines unknown event {target}"));
                }
                if ev.is_initialisation() != (target == INITIALISATION) {
                    out.push(format!("{owner}: initialisation must refine initialisation"));
                }
            }
            _ => {}
        }
        if !ev.witnesses.is_empty() && ev.refines.is_none() {
            out.push(format!("{owner}: witnesses on an event that refines nothing"));
        }
    }
}

fn mentions_kind(e: &Expr, kind: SymKind) -> bool {
    let mut found = false;
    e.walk(&mut |n| {
        if let Expr::Sym(s) = n {
            found |= s.kind == kind;
        }
    });
    found
}

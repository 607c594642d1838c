//! Name resolution and sort checking: turns parse trees into model values.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::diag::{DiagCode, Diagnostic};
use super::lexer::is_keyword;
use crate::model::{
    BAssignment, BinOp, Context, Decl, Event, Expr, LabeledPredicate, Machine, Quantifier, SourcePos, Sort,
    Status, SymKind, TypedModel, UnOp, Witness, INITIALISATION,
};

/// Names that would collide with SMT-LIB syntax or theory symbols.
const RESERVED: &[&str] = &[
    "abs", "as", "distinct", "div", "ite", "let", "match", "par", "xor", "select", "store", "to_int", "to_real",
    "is_int", "Int", "Bool", "Real", "Array", "assert", "check", "model",
];

type SortMap = BTreeMap<String, Sort>;

enum Primes<'a> {
    Forbidden(&'static str),
    Allowed(&'a SortMap),
}

struct Env<'a> {
    consts: &'a SortMap,
    vars: &'a SortMap,
    params: &'a SortMap,
    primes: Primes<'a>,
    /// Machine variables, used to tell "outside the frame" from "unknown".
    machine_vars: &'a SortMap,
}

#[derive(Default)]
struct Resolver {
    diags: Vec<Diagnostic>,
}

/// Resolves all declarations of a project. The returned model holds every
/// context and machine that resolved cleanly; callers must check the
/// diagnostics for errors before using it.
pub fn resolve(decls: &[Declaration]) -> (TypedModel, Vec<Diagnostic>) {
    let mut r = Resolver::default();
    let model = r.project(decls);
    (model, r.diags)
}

fn visit_order<'a, T>(
    items: &BTreeMap<&'a str, &'a T>,
    parent: impl Fn(&T) -> Option<&Ident>,
    pos: impl Fn(&T) -> SourcePos,
    r: &mut Resolver,
) -> (Vec<&'a str>, BTreeSet<&'a str>) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
    let mut order = Vec::new();
    let mut cyclic = BTreeSet::new();
    for &start in items.keys() {
        let mut path: Vec<&str> = Vec::new();
        let mut cur = Some(start);
        // Walk up the parent chain, then emit in reverse.
        while let Some(name) = cur {
            match marks.get(name) {
                Some(Mark::Done) => break,
                Some(Mark::Active) => {
                    if path.contains(&name) {
                        let item = items[name];
                        r.err(DiagCode::CyclicDependency, pos(item), format!("`{name}` depends on itself"));
                        cyclic.extend(path.iter().copied());
                    }
                    break;
                }
                None => {}
            }
            marks.insert(name, Mark::Active);
            path.push(name);
            cur = parent(items[name]).and_then(|p| items.get_key_value(p.name.as_str()).map(|(k, _)| *k));
        }
        for name in path.into_iter().rev() {
            marks.insert(name, Mark::Done);
            if !cyclic.contains(name) {
                order.push(name);
            }
        }
    }
    (order, cyclic)
}

impl Resolver {
    fn err(&mut self, code: DiagCode, pos: SourcePos, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, pos, msg));
    }

    fn check_name(&mut self, id: &Ident) {
        if RESERVED.contains(&id.name.as_str()) || is_keyword(&id.name) {
            self.err(DiagCode::ReservedName, id.pos.clone(), format!("`{}` is a reserved name", id.name));
        }
    }

    fn project(&mut self, decls: &[Declaration]) -> TypedModel {
        let mut contexts: BTreeMap<&str, &ContextDecl> = BTreeMap::new();
        let mut machines: BTreeMap<&str, &MachineDecl> = BTreeMap::new();
        let mut seen: BTreeMap<&str, &SourcePos> = BTreeMap::new();
        for d in decls {
            let name = d.name();
            if let Some(first) = seen.get(name.name.as_str()) {
                self.err(
                    DiagCode::DuplicateName,
                    name.pos.clone(),
                    format!("`{}` is already declared at {first}", name.name),
                );
                continue;
            }
            seen.insert(&name.name, &name.pos);
            self.check_name(name);
            match d {
                Declaration::Context(c) => {
                    contexts.insert(&c.name.name, c);
                }
                Declaration::Machine(m) => {
                    machines.insert(&m.name.name, m);
                }
            }
        }

        let mut model = TypedModel::default();
        let (ctx_order, _) = visit_order(&contexts, |c| c.extends.as_ref(), |c| c.name.pos.clone(), self);
        let mut ctx_consts: BTreeMap<String, SortMap> = BTreeMap::new();
        for name in ctx_order {
            let decl = contexts[name];
            if let Some(parent) = &decl.extends {
                if !contexts.contains_key(parent.name.as_str()) {
                    self.err(DiagCode::UnresolvedName, parent.pos.clone(), format!("no context named `{}`", parent.name));
                    continue;
                }
                if !ctx_consts.contains_key(&parent.name) {
                    continue;
                }
            }
            let inherited = decl.extends.as_ref().map(|p| ctx_consts[&p.name].clone()).unwrap_or_default();
            if let Some((ctx, consts)) = self.context(decl, inherited) {
                ctx_consts.insert(ctx.name.clone(), consts);
                model.contexts.push(ctx);
            }
        }

        let (m_order, _) = visit_order(&machines, |m| m.refines.as_ref(), |m| m.name.pos.clone(), self);
        for name in m_order {
            let decl = machines[name];
            if !ctx_consts.contains_key(&decl.sees.name) {
                if !contexts.contains_key(decl.sees.name.as_str()) {
                    self.err(
                        DiagCode::UnresolvedName,
                        decl.sees.pos.clone(),
                        format!("no context named `{}`", decl.sees.name),
                    );
                }
                continue;
            }
            if let Some(a) = &decl.refines {
                if model.machine(&a.name).is_none() {
                    if !machines.contains_key(a.name.as_str()) {
                        self.err(DiagCode::UnresolvedName, a.pos.clone(), format!("no machine named `{}`", a.name));
                    }
                    continue;
                }
            }
            if let Some(m) = self.machine(decl, &model, &ctx_consts[&decl.sees.name]) {
                model.machines.push(m);
            }
        }
        model
    }

    fn context(&mut self, c: &ContextDecl, mut consts: SortMap) -> Option<(Context, SortMap)> {
        let errors = self.diags.len();
        let mut constants = Vec::new();
        for t in &c.constants {
            self.check_name(&t.ident);
            if consts.contains_key(&t.ident.name) {
                self.err(
                    DiagCode::DuplicateName,
                    t.ident.pos.clone(),
                    format!("constant `{}` is declared twice", t.ident.name),
                );
                continue;
            }
            consts.insert(t.ident.name.clone(), t.sort);
            constants.push(Decl::new(&t.ident.name, t.sort));
        }
        let empty = SortMap::new();
        let env = Env { consts: &consts, vars: &empty, params: &empty, primes: Primes::Forbidden("axioms"), machine_vars: &empty };
        let mut labels = BTreeSet::new();
        let axioms = self.labpreds(c.axioms.as_deref().unwrap_or_default(), &env, &mut labels);
        let env = Env { primes: Primes::Forbidden("theorems"), ..env };
        let theorems = self.labpreds(c.theorems.as_deref().unwrap_or_default(), &env, &mut labels);
        if self.diags.len() > errors {
            return None;
        }
        let ctx = Context {
            name: c.name.name.clone(),
            extends: c.extends.as_ref().map(|p| p.name.clone()),
            constants,
            axioms,
            theorems,
            pos: c.name.pos.clone(),
        };
        Some((ctx, consts))
    }

    fn labpreds(&mut self, preds: &[LabPred], env: &Env, labels: &mut BTreeSet<String>) -> Vec<LabeledPredicate> {
        let mut out = Vec::new();
        for p in preds {
            if !labels.insert(p.label.name.clone()) {
                self.err(DiagCode::DuplicateLabel, p.label.pos.clone(), format!("label `@{}` is used twice", p.label.name));
            }
            if let Some(body) = self.expect_sort(&p.expr, env, &mut Vec::new(), Sort::Bool) {
                out.push(LabeledPredicate { label: p.label.name.clone(), body, pos: p.label.pos.clone() });
            }
        }
        out
    }

    fn machine(&mut self, m: &MachineDecl, model: &TypedModel, consts: &SortMap) -> Option<Machine> {
        let errors = self.diags.len();
        let parent = m.refines.as_ref().and_then(|a| model.machine(&a.name));
        if let Some(parent) = parent {
            let chain: Vec<&str> = model.context_chain(&m.sees.name).iter().map(|c| c.name.as_str()).collect();
            if !chain.contains(&parent.sees.as_str()) {
                self.err(
                    DiagCode::InvalidRefinement,
                    m.sees.pos.clone(),
                    format!("`{}` must see `{}` (seen by `{}`) or a context extending it", m.name.name, parent.sees, parent.name),
                );
            }
        }
        let ancestors: Vec<&Machine> = match parent {
            Some(p) => {
                let mut a = model.ancestors(p);
                a.push(p);
                a
            }
            None => Vec::new(),
        };
        let mut ancestor_vars = SortMap::new();
        for a in &ancestors {
            for v in &a.variables {
                ancestor_vars.insert(v.name.clone(), v.sort);
            }
        }

        let mut vars = SortMap::new();
        let mut variables = Vec::new();
        for t in &m.variables {
            let id = &t.ident;
            self.check_name(id);
            if t.sort == Sort::FunIntInt {
                self.err(DiagCode::IllegalSort, id.pos.clone(), format!("variable `{}` cannot have a function sort", id.name));
                continue;
            }
            if vars.contains_key(&id.name) || consts.contains_key(&id.name) {
                self.err(DiagCode::DuplicateName, id.pos.clone(), format!("`{}` is already declared", id.name));
                continue;
            }
            if let Some(&abs_sort) = ancestor_vars.get(&id.name) {
                if abs_sort != t.sort {
                    self.err(
                        DiagCode::SortMismatch,
                        id.pos.clone(),
                        format!("`{}` has sort {abs_sort} in the abstract machine", id.name),
                    );
                }
                if parent.is_some_and(|p| p.variable(&id.name).is_none()) {
                    self.err(
                        DiagCode::ReintroducedVariable,
                        id.pos.clone(),
                        format!("`{}` disappeared in an earlier refinement and cannot be reintroduced", id.name),
                    );
                }
            }
            vars.insert(id.name.clone(), t.sort);
            variables.push(Decl::new(&id.name, t.sort));
        }
        let mut glued = ancestor_vars.clone();
        glued.extend(vars.iter().map(|(k, v)| (k.clone(), *v)));

        let empty = SortMap::new();
        let env = Env { consts, vars: &glued, params: &empty, primes: Primes::Forbidden("invariants"), machine_vars: &vars };
        let invariants = self.labpreds(&m.invariants, &env, &mut BTreeSet::new());
        let env = Env { consts, vars: &vars, params: &empty, primes: Primes::Forbidden("variants"), machine_vars: &vars };
        let variant = m.variant.as_ref().and_then(|v| self.expect_sort(v, &env, &mut Vec::new(), Sort::Int));

        let mut events = Vec::new();
        let mut names = BTreeSet::new();
        for e in &m.events {
            if !names.insert(e.name.name.as_str()) {
                self.err(DiagCode::DuplicateName, e.name.pos.clone(), format!("event `{}` is declared twice", e.name.name));
                continue;
            }
            let ctx = EventCtx { consts, vars: &vars, glued: &glued, parent, has_variant: m.variant.is_some() };
            if let Some(ev) = self.event(e, &ctx) {
                events.push(ev);
            }
        }
        if !names.contains(INITIALISATION) {
            self.err(DiagCode::InvalidInitialisation, m.name.pos.clone(), format!("machine `{}` has no initialisation event", m.name.name));
        }
        if let Some(p) = parent {
            for ae in &p.events {
                let refined = m.events.iter().any(|e| {
                    e.refines.as_ref().map(|r| r.name == ae.name).unwrap_or(e.name.name == INITIALISATION && ae.is_initialisation())
                });
                if !refined {
                    self.diags.push(Diagnostic::warning(
                        DiagCode::UnrefinedEvent,
                        m.name.pos.clone(),
                        format!("abstract event `{}` is not refined by `{}`", ae.name, m.name.name),
                    ));
                }
            }
        }

        if self.diags[errors..].iter().any(Diagnostic::is_error) {
            return None;
        }
        Some(Machine {
            name: m.name.name.clone(),
            sees: m.sees.name.clone(),
            refines: m.refines.as_ref().map(|a| a.name.clone()),
            variables,
            invariants,
            variant,
            events,
            pos: m.name.pos.clone(),
        })
    }

    fn event(&mut self, e: &EventDecl, cx: &EventCtx) -> Option<Event> {
        let errors = self.diags.len();
        let is_init = e.name.name == INITIALISATION;
        self.check_name(&e.name);
        let status = e.status.unwrap_or_default();

        let mut params = SortMap::new();
        let mut param_decls = Vec::new();
        for t in &e.params {
            let id = &t.ident;
            self.check_name(id);
            if t.sort == Sort::FunIntInt {
                self.err(DiagCode::IllegalSort, id.pos.clone(), format!("parameter `{}` cannot have a function sort", id.name));
                continue;
            }
            if params.contains_key(&id.name) || cx.consts.contains_key(&id.name) || cx.glued.contains_key(&id.name) {
                self.err(DiagCode::DuplicateName, id.pos.clone(), format!("`{}` is already declared", id.name));
                continue;
            }
            params.insert(id.name.clone(), t.sort);
            param_decls.push(Decl::new(&id.name, t.sort));
        }

        let env = Env { consts: cx.consts, vars: cx.vars, params: &params, primes: Primes::Forbidden("guards"), machine_vars: cx.vars };
        let mut labels = BTreeSet::new();
        let guards = self.labpreds(&e.guards, &env, &mut labels);

        // Actions.
        let mut frame: BTreeSet<String> = BTreeSet::new();
        let mut conjuncts = Vec::new();
        for a in &e.actions {
            if !labels.insert(a.label.name.clone()) {
                self.err(DiagCode::DuplicateLabel, a.label.pos.clone(), format!("label `@{}` is used twice", a.label.name));
            }
            let mut local = SortMap::new();
            for x in a.assigned() {
                match cx.vars.get(&x.name) {
                    Some(&s) => {
                        if !frame.insert(x.name.clone()) || local.contains_key(&x.name) {
                            self.err(
                                DiagCode::DuplicateAssignment,
                                x.pos.clone(),
                                format!("`{}` is assigned by more than one action", x.name),
                            );
                        }
                        local.insert(x.name.clone(), s);
                    }
                    None => {
                        let what = if cx.consts.contains_key(&x.name) {
                            "a constant"
                        } else if params.contains_key(&x.name) {
                            "a parameter"
                        } else if cx.glued.contains_key(&x.name) {
                            "an abstract variable of this refinement"
                        } else {
                            "not a variable of this machine"
                        };
                        self.err(DiagCode::FrameViolation, x.pos.clone(), format!("cannot assign `{}`: it is {what}", x.name));
                    }
                }
            }
            let rhs_env = Env { primes: Primes::Forbidden("assignment expressions"), ..env_clone(&env) };
            match &a.kind {
                ActionKind::Assign(x, value) => {
                    if let Some(&s) = local.get(&x.name) {
                        if let Some(v) = self.expect_sort(value, &rhs_env, &mut Vec::new(), s) {
                            conjuncts.push(Expr::eq(Expr::primed(&x.name, s), v));
                        }
                    } else {
                        self.expr(value, &rhs_env, &mut Vec::new());
                    }
                }
                ActionKind::InRange(x, lo, hi) => {
                    let lo = self.expect_sort(lo, &rhs_env, &mut Vec::new(), Sort::Int);
                    let hi = self.expect_sort(hi, &rhs_env, &mut Vec::new(), Sort::Int);
                    match local.get(&x.name) {
                        Some(Sort::Int) => {
                            if let (Some(lo), Some(hi)) = (lo, hi) {
                                let xp = Expr::primed(&x.name, Sort::Int);
                                conjuncts.push(Expr::bin(BinOp::Ge, xp.clone(), lo));
                                conjuncts.push(Expr::bin(BinOp::Le, xp, hi));
                            }
                        }
                        Some(other) => self.err(
                            DiagCode::SortMismatch,
                            x.pos.clone(),
                            format!("`{}` has sort {other}; `:∈` needs an int variable", x.name),
                        ),
                        None => {}
                    }
                }
                ActionKind::SuchThat(_, pred) => {
                    let penv = Env { primes: Primes::Allowed(&local), ..env_clone(&env) };
                    if let Some(p) = self.expect_sort(pred, &penv, &mut Vec::new(), Sort::Bool) {
                        conjuncts.push(p);
                    }
                }
            }
        }
        let action = BAssignment { frame: frame.clone(), predicate: Expr::conj(conjuncts) };

        if is_init {
            if !e.guards.is_empty() {
                self.err(DiagCode::InvalidInitialisation, e.name.pos.clone(), "the initialisation event cannot have guards");
            }
            if status != Status::Ordinary {
                self.err(DiagCode::InvalidInitialisation, e.name.pos.clone(), "the initialisation event must be ordinary");
            }
            let mut reads = BTreeSet::new();
            action.predicate.walk(&mut |n| {
                if let Expr::Sym(s) = n {
                    if s.kind == SymKind::Var {
                        reads.insert(s.name.clone());
                    }
                }
            });
            if !reads.is_empty() {
                self.err(
                    DiagCode::InvalidInitialisation,
                    e.name.pos.clone(),
                    format!("the initialisation event reads machine variables: {}", join(&reads)),
                );
            }
            let missing: BTreeSet<String> = cx.vars.keys().filter(|v| !frame.contains(*v)).cloned().collect();
            if !missing.is_empty() {
                self.err(
                    DiagCode::InvalidInitialisation,
                    e.name.pos.clone(),
                    format!("the initialisation event must assign every variable; missing: {}", join(&missing)),
                );
            }
        }
        if status == Status::Convergent && !cx.has_variant {
            self.err(
                DiagCode::MissingVariant,
                e.name.pos.clone(),
                format!("convergent event `{}` requires a machine variant", e.name.name),
            );
        }

        // Refinement link and witnesses.
        let refines = match (cx.parent, &e.refines) {
            (None, Some(r)) => {
                self.err(DiagCode::InvalidRefinement, r.pos.clone(), "only events of a refinement machine can refine an event");
                None
            }
            (None, None) => None,
            (Some(_), None) if is_init => Some(INITIALISATION.to_string()),
            (Some(_), None) => None,
            (Some(p), Some(r)) => {
                if is_init != (r.name == INITIALISATION) {
                    self.err(DiagCode::InvalidRefinement, r.pos.clone(), "initialisation refines exactly the abstract initialisation");
                    None
                } else if p.event(&r.name).is_none() {
                    self.err(DiagCode::UnresolvedName, r.pos.clone(), format!("`{}` has no event named `{}`", p.name, r.name));
                    None
                } else {
                    Some(r.name.clone())
                }
            }
        };
        let abstract_event = refines.as_deref().and_then(|r| cx.parent.and_then(|p| p.event(r)));
        let witnesses = self.witnesses(e, cx, &params, abstract_event);

        if self.diags[errors..].iter().any(Diagnostic::is_error) {
            return None;
        }
        Some(Event {
            name: e.name.name.clone(),
            status,
            params: param_decls,
            guards,
            action,
            refines,
            witnesses,
            pos: e.name.pos.clone(),
        })
    }

    fn witnesses(&mut self, e: &EventDecl, cx: &EventCtx, params: &SortMap, abs: Option<&Event>) -> Vec<Witness> {
        let Some(abs) = abs else {
            for w in &e.witnesses {
                self.err(DiagCode::InvalidWitness, w.target.pos.clone(), "witnesses are only allowed on refining events");
            }
            return Vec::new();
        };
        let parent = cx.parent.expect("abstract event implies abstract machine");
        let mut disappearing_params = SortMap::new();
        for p in &abs.params {
            match params.get(&p.name) {
                Some(&s) if s != p.sort => self.err(
                    DiagCode::SortMismatch,
                    e.name.pos.clone(),
                    format!("parameter `{}` has sort {} in the abstract event", p.name, p.sort),
                ),
                Some(_) => {}
                None => {
                    disappearing_params.insert(p.name.clone(), p.sort);
                }
            }
        }
        let disappearing_vars: SortMap = abs
            .action
            .frame
            .iter()
            .filter(|v| !cx.vars.contains_key(*v))
            .filter_map(|v| parent.variable(v).map(|d| (v.clone(), d.sort)))
            .collect();

        let mut out = Vec::new();
        let mut covered = BTreeSet::new();
        for w in &e.witnesses {
            let name = &w.target.name;
            let shown = if w.primed { format!("{name}'") } else { name.clone() };
            let sort = if w.primed { disappearing_vars.get(name) } else { disappearing_params.get(name) };
            let Some(&sort) = sort else {
                self.err(
                    DiagCode::InvalidWitness,
                    w.target.pos.clone(),
                    format!("`{shown}` is not a disappearing parameter or primed variable of `{}`", abs.name),
                );
                continue;
            };
            if !covered.insert(shown.clone()) {
                self.err(DiagCode::InvalidWitness, w.target.pos.clone(), format!("`{shown}` has more than one witness"));
                continue;
            }
            let mut wparams = params.clone();
            let mut primes = cx.vars.clone();
            if w.primed {
                primes.insert(name.clone(), sort);
            } else {
                wparams.insert(name.clone(), sort);
            }
            let env = Env {
                consts: cx.consts,
                vars: cx.glued,
                params: &wparams,
                primes: Primes::Allowed(&primes),
                machine_vars: cx.glued,
            };
            if let Some(predicate) = self.expect_sort(&w.expr, &env, &mut Vec::new(), Sort::Bool) {
                out.push(Witness { target: name.clone(), primed: w.primed, sort, predicate, pos: w.target.pos.clone() });
            }
        }
        let required = disappearing_params
            .keys()
            .cloned()
            .chain(disappearing_vars.keys().map(|v| format!("{v}'")));
        for r in required {
            if !covered.contains(&r) {
                self.err(
                    DiagCode::MissingWitness,
                    e.name.pos.clone(),
                    format!("event `{}` needs a witness for `{r}` of abstract event `{}`", e.name.name, abs.name),
                );
            }
        }
        out
    }

    fn expect_sort(&mut self, e: &PExpr, env: &Env, bound: &mut Vec<(String, Sort)>, want: Sort) -> Option<Expr> {
        let got = self.expr(e, env, bound)?;
        let s = got.sort();
        if s != want {
            self.err(DiagCode::SortMismatch, e.pos.clone(), format!("expected {want}, found {s} expression"));
            return None;
        }
        Some(got)
    }

    fn expr(&mut self, e: &PExpr, env: &Env, bound: &mut Vec<(String, Sort)>) -> Option<Expr> {
        match &e.kind {
            PExprKind::Int(v) => Some(Expr::Int(*v)),
            PExprKind::Bool(b) => Some(Expr::Bool(*b)),
            PExprKind::Name(n) => {
                if let Some((_, s)) = bound.iter().rev().find(|(b, _)| b == n) {
                    return Some(Expr::sym(n, SymKind::Bound, *s));
                }
                let (kind, sort) = if let Some(&s) = env.params.get(n) {
                    (SymKind::Param, s)
                } else if let Some(&s) = env.vars.get(n) {
                    (SymKind::Var, s)
                } else if let Some(&s) = env.consts.get(n) {
                    (SymKind::Const, s)
                } else {
                    self.err(DiagCode::UnresolvedName, e.pos.clone(), format!("unknown name `{n}`"));
                    return None;
                };
                if sort == Sort::FunIntInt {
                    self.err(DiagCode::SortMismatch, e.pos.clone(), format!("function `{n}` must be applied to an argument"));
                    return None;
                }
                Some(Expr::sym(n, kind, sort))
            }
            PExprKind::Primed(n) => match &env.primes {
                Primes::Forbidden(place) => {
                    self.err(DiagCode::PrimedNotAllowed, e.pos.clone(), format!("`{n}'` cannot appear in {place}"));
                    None
                }
                Primes::Allowed(allowed) => {
                    if let Some(&s) = allowed.get(n) {
                        Some(Expr::primed(n, s))
                    } else if env.machine_vars.contains_key(n) {
                        self.err(DiagCode::PrimedOutsideFrame, e.pos.clone(), format!("`{n}'` is not assigned by this action"));
                        None
                    } else {
                        self.err(DiagCode::UnresolvedName, e.pos.clone(), format!("`{n}'` does not name a machine variable"));
                        None
                    }
                }
            },
            PExprKind::Apply(f, arg) => {
                let arg = self.expect_sort(arg, env, bound, Sort::Int);
                let shadowed = bound.iter().any(|(b, _)| *b == f.name) || env.params.contains_key(&f.name) || env.vars.contains_key(&f.name);
                match env.consts.get(&f.name) {
                    Some(Sort::FunIntInt) if !shadowed => Some(Expr::apply(&f.name, arg?)),
                    None if !shadowed => {
                        self.err(DiagCode::UnresolvedName, f.pos.clone(), format!("unknown function `{}`", f.name));
                        None
                    }
                    _ => {
                        self.err(DiagCode::SortMismatch, f.pos.clone(), format!("`{}` is not a function", f.name));
                        None
                    }
                }
            }
            PExprKind::Neg(a) => Some(Expr::neg(self.expect_sort(a, env, bound, Sort::Int)?)),
            PExprKind::Not(a) => Some(Expr::Unary(UnOp::Not, Box::new(self.expect_sort(a, env, bound, Sort::Bool)?))),
            PExprKind::Binary(op, l, r) => self.binary(e, *op, l, r, env, bound),
            PExprKind::InRange { elem, lo, hi } => {
                let x = self.expect_sort(elem, env, bound, Sort::Int);
                let lo = self.expect_sort(lo, env, bound, Sort::Int);
                let hi = self.expect_sort(hi, env, bound, Sort::Int);
                let x = x?;
                Some(Expr::And(vec![Expr::bin(BinOp::Le, lo?, x.clone()), Expr::bin(BinOp::Le, x, hi?)]))
            }
            PExprKind::Quant { q, bound: vars, body } => {
                let depth = bound.len();
                let mut names = BTreeSet::new();
                let mut decls = Vec::new();
                for t in vars {
                    self.check_name(&t.ident);
                    if t.sort == Sort::FunIntInt {
                        self.err(DiagCode::IllegalSort, t.ident.pos.clone(), "cannot quantify over functions");
                    }
                    if !names.insert(t.ident.name.clone()) {
                        self.err(DiagCode::DuplicateName, t.ident.pos.clone(), format!("`{}` is bound twice", t.ident.name));
                    }
                    decls.push((t.ident.name.clone(), t.sort));
                }
                bound.extend(decls.iter().cloned());
                let body = self.expect_sort(body, env, bound, Sort::Bool);
                bound.truncate(depth);
                let q = match q {
                    PQuant::Forall => Quantifier::Forall,
                    PQuant::Exists => Quantifier::Exists,
                };
                Some(Expr::quant(q, decls, body?))
            }
        }
    }

    fn binary(&mut self, e: &PExpr, op: PBinOp, l: &PExpr, r: &PExpr, env: &Env, bound: &mut Vec<(String, Sort)>) -> Option<Expr> {
        let arith = |op| match op {
            PBinOp::Add => Some(BinOp::Add),
            PBinOp::Sub => Some(BinOp::Sub),
            PBinOp::Mul => Some(BinOp::Mul),
            PBinOp::Div => Some(BinOp::Div),
            PBinOp::Mod => Some(BinOp::Mod),
            PBinOp::Lt => Some(BinOp::Lt),
            PBinOp::Le => Some(BinOp::Le),
            PBinOp::Gt => Some(BinOp::Gt),
            PBinOp::Ge => Some(BinOp::Ge),
            _ => None,
        };
        if let Some(bop) = arith(op) {
            let a = self.expect_sort(l, env, bound, Sort::Int);
            let b = self.expect_sort(r, env, bound, Sort::Int);
            return Some(Expr::bin(bop, a?, b?));
        }
        match op {
            PBinOp::And | PBinOp::Or => {
                // Flatten chains of the same connective.
                let mut operands = Vec::new();
                let mut stack = vec![r, l];
                while let Some(x) = stack.pop() {
                    match &x.kind {
                        PExprKind::Binary(o, xl, xr) if *o == op => {
                            stack.push(xr);
                            stack.push(xl);
                        }
                        _ => operands.push(x),
                    }
                }
                let items: Vec<Option<Expr>> =
                    operands.into_iter().map(|x| self.expect_sort(x, env, bound, Sort::Bool)).collect();
                let items: Vec<Expr> = items.into_iter().collect::<Option<_>>()?;
                Some(if op == PBinOp::And { Expr::And(items) } else { Expr::Or(items) })
            }
            PBinOp::Implies | PBinOp::Iff => {
                let a = self.expect_sort(l, env, bound, Sort::Bool);
                let b = self.expect_sort(r, env, bound, Sort::Bool);
                let bop = if op == PBinOp::Implies { BinOp::Implies } else { BinOp::Iff };
                Some(Expr::bin(bop, a?, b?))
            }
            PBinOp::Eq | PBinOp::Neq => {
                let a = self.expr(l, env, bound)?;
                let b = self.expect_sort(r, env, bound, a.sort())?;
                let bop = if op == PBinOp::Eq { BinOp::Eq } else { BinOp::Neq };
                Some(Expr::bin(bop, a, b))
            }
            _ => {
                self.err(DiagCode::SyntaxError, e.pos.clone(), "unsupported operator");
                None
            }
        }
    }
}

struct EventCtx<'a> {
    consts: &'a SortMap,
    vars: &'a SortMap,
    /// Own variables plus every variable of the refined machines.
    glued: &'a SortMap,
    parent: Option<&'a Machine>,
    has_variant: bool,
}

fn env_clone<'a>(env: &Env<'a>) -> Env<'a> {
    Env {
        consts: env.consts,
        vars: env.vars,
        params: env.params,
        primes: match env.primes {
            Primes::Forbidden(p) => Primes::Forbidden(p),
            Primes::Allowed(a) => Primes::Allowed(a),
        },
        machine_vars: env.machine_vars,
    }
}

fn join(names: &BTreeSet<String>) -> String {
    names.iter().map(|n| format!("`{n}`")).collect::<Vec<_>>().join(", ")
}

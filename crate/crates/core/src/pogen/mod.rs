//! Proof-obligation generation.
//!
//! Sequent shapes, with `A` the axioms and theorems of the seen context chain,
//! `I` the invariants, `G` the guards and `BA` a before-after predicate
//! completed over the machine variables:
//!
//! | kind | hypotheses                       | goal                         |
//! |------|----------------------------------|------------------------------|
//! | THM  | axioms, earlier theorems         | theorem                      |
//! | INIT | A, BA(init)                      | I_j'                         |
//! | INV  | A, I, G, BA                      | I_j'                         |
//! | FIS  | A, I, G                          | exists frame'. raw BA        |
//! | VAR  | A, I, G, BA                      | V' < V (V' <= V anticipated) |
//! | NAT  | A, I, G                          | V >= 0                       |
//! | GRD  | A, I_abs, J, G_c, W              | abstract guard               |
//! | SIM  | A, I_abs, J, G_c, W, BA_c        | abstract BA                  |
//! | WFIS | A, I_abs, J, G_c, other W        | exists t. W_t                |
//!
//! In a refinement, INV and INIT also take the abstract before-after
//! predicate as a hypothesis and prove the concrete (gluing) invariants.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    free_symbols, prime_frame, substitute, BAssignment, BinOp, Context, Decl, Event, Expr, LabeledPredicate,
    Machine, SourcePos, Status, SymKind, Symbol, TypedModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PoKind {
    Thm,
    Inv,
    Init,
    Fis,
    Grd,
    Sim,
    Var,
    Nat,
    Wfis,
}

impl PoKind {
    pub const ALL: [PoKind; 9] =
        [PoKind::Thm, PoKind::Inv, PoKind::Init, PoKind::Fis, PoKind::Grd, PoKind::Sim, PoKind::Var, PoKind::Nat, PoKind::Wfis];

    pub fn as_str(self) -> &'static str {
        match self {
            PoKind::Thm => "THM",
            PoKind::Inv => "INV",
            PoKind::Init => "INIT",
            PoKind::Fis => "FIS",
            PoKind::Grd => "GRD",
            PoKind::Sim => "SIM",
            PoKind::Var => "VAR",
            PoKind::Nat => "NAT",
            PoKind::Wfis => "WFIS",
        }
    }
}

impl fmt::Display for PoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    Plain(Expr),
    /// `exists bound. body`; the bound symbols occur free in `body`.
    Existential { bound: Vec<Symbol>, body: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub tag: String,
    pub expr: Expr,
}

impl Hypothesis {
    pub fn new(tag: impl Into<String>, expr: Expr) -> Self {
        Hypothesis { tag: tag.into(), expr }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofObligation {
    pub id: String,
    pub kind: PoKind,
    pub hypotheses: Vec<Hypothesis>,
    pub goal: Goal,
    /// Free symbols of the sequent, sorted.
    pub symbols: Vec<Symbol>,
    pub provenance: Vec<SourcePos>,
}

impl ProofObligation {
    /// Builds an obligation and computes its symbol table.
    pub fn new(
        id: impl Into<String>,
        kind: PoKind,
        hypotheses: Vec<Hypothesis>,
        goal: Goal,
        provenance: Vec<SourcePos>,
    ) -> Self {
        let mut symbols: BTreeSet<Symbol> = hypotheses.iter().flat_map(|h| free_symbols(&h.expr)).collect();
        match &goal {
            Goal::Plain(g) => symbols.extend(free_symbols(g)),
            Goal::Existential { bound, body } => {
                symbols.extend(free_symbols(body).into_iter().filter(|s| !bound.contains(s)));
            }
        }
        ProofObligation { id: id.into(), kind, hypotheses, goal, symbols: symbols.into_iter().collect(), provenance }
    }

    /// True if the sequent holds for purely syntactic reasons: every goal
    /// conjunct is a hypothesis conjunct, `true`, or `e = e`.
    pub fn is_syntactic_tautology(&self) -> bool {
        let Goal::Plain(goal) = &self.goal else {
            return false;
        };
        let hyps: HashSet<&Expr> = self.hypotheses.iter().flat_map(|h| h.expr.conjuncts()).collect();
        goal.conjuncts().into_iter().all(|c| match c {
            Expr::Bool(true) => true,
            Expr::Binary(BinOp::Eq, l, r) if l == r => true,
            other => hyps.contains(other),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoOptions {
    /// Emit NAT obligations (variant bounded below).
    pub nat: bool,
}

impl Default for PoOptions {
    fn default() -> Self {
        PoOptions { nat: true }
    }
}

/// Conjoins `a.predicate` with `x' = x` for every variable of `vars` outside
/// the frame, in declaration order. Equalities already present are not
/// repeated, so completing twice gives the same expression.
pub fn complete_frame(a: &BAssignment, vars: &[Decl]) -> Expr {
    let mut items: Vec<Expr> = a.predicate.conjuncts().into_iter().cloned().collect();
    for d in vars.iter().filter(|d| !a.frame.contains(&d.name)) {
        let eq = Expr::eq(Expr::primed(&d.name, d.sort), Expr::var(&d.name, d.sort));
        if !items.contains(&eq) {
            items.push(eq);
        }
    }
    Expr::conj(items)
}

fn prime(e: &Expr, vars: &[Decl]) -> Expr {
    let map = prime_frame(vars.iter().map(|d| (d.name.as_str(), d.sort)));
    substitute(e, &map).expect("priming preserves sorts")
}

fn tagged(prefix: &str, owner: &str, preds: &[LabeledPredicate]) -> Vec<Hypothesis> {
    preds.iter().map(|p| Hypothesis::new(format!("{prefix}:{owner}/{}", p.label), p.body.clone())).collect()
}

/// Axioms and theorems of a context chain, most general context first.
fn context_hyps(chain: &[&Context]) -> Vec<Hypothesis> {
    let mut out = Vec::new();
    for c in chain {
        out.extend(tagged("axm", &c.name, &c.axioms));
        out.extend(tagged("thm", &c.name, &c.theorems));
    }
    out
}

fn primed_frame_symbols(a: &BAssignment, vars: &[Decl]) -> Vec<Symbol> {
    vars.iter().filter(|d| a.frame.contains(&d.name)).map(|d| Symbol::new(&d.name, SymKind::Primed, d.sort)).collect()
}

/// One THM obligation per theorem, in declaration order.
pub fn gen_context_pos(ctx: &Context) -> Vec<ProofObligation> {
    gen_context_pos_with(ctx, Vec::new())
}

/// As [`gen_context_pos`], with `inherited` (the axioms and theorems of
/// extended contexts) placed before the context's own axioms.
pub fn gen_context_pos_with(ctx: &Context, inherited: Vec<Hypothesis>) -> Vec<ProofObligation> {
    let mut hyps = inherited;
    hyps.extend(tagged("axm", &ctx.name, &ctx.axioms));
    let mut out = Vec::new();
    for t in &ctx.theorems {
        out.push(ProofObligation::new(
            format!("{}/{}/THM", ctx.name, t.label),
            PoKind::Thm,
            hyps.clone(),
            Goal::Plain(t.body.clone()),
            vec![t.pos.clone()],
        ));
        hyps.push(Hypothesis::new(format!("thm:{}/{}", ctx.name, t.label), t.body.clone()));
    }
    out
}

/// Events with initialisation first, otherwise in declaration order.
fn ordered_events(m: &Machine) -> Vec<&Event> {
    let mut evs: Vec<&Event> = m.events.iter().filter(|e| e.is_initialisation()).collect();
    evs.extend(m.events.iter().filter(|e| !e.is_initialisation()));
    evs
}

struct Scope<'a> {
    m: &'a Machine,
    axioms: Vec<Hypothesis>,
    /// Invariants of every refined machine, most abstract first.
    abs_invs: Vec<Hypothesis>,
    invs: Vec<Hypothesis>,
    /// Variables of refined machines that this machine no longer declares.
    vanished: Vec<Decl>,
    opts: PoOptions,
}

impl Scope<'_> {
    fn id(&self, parts: &[&str]) -> String {
        let mut s = self.m.name.clone();
        for p in parts {
            s.push('/');
            s.push_str(p);
        }
        s
    }

    fn state_hyps(&self, e: &Event) -> Vec<Hypothesis> {
        let mut h = self.axioms.clone();
        if !e.is_initialisation() {
            h.extend(self.abs_invs.iter().cloned());
            h.extend(self.invs.iter().cloned());
            h.extend(tagged("grd", &e.name, &e.guards));
        }
        h
    }

    fn ba_hyp(&self, e: &Event) -> Hypothesis {
        Hypothesis::new(format!("ba:{}", e.name), complete_frame(&e.action, &self.m.variables))
    }

    /// INV or INIT obligations, one per own invariant.
    fn preservation(&self, e: &Event, hyps: &[Hypothesis], out: &mut Vec<ProofObligation>) {
        let kind = if e.is_initialisation() { PoKind::Init } else { PoKind::Inv };
        let vars = self.primed_scope();
        for inv in &self.m.invariants {
            out.push(ProofObligation::new(
                self.id(&[&e.name, &inv.label, kind.as_str()]),
                kind,
                hyps.to_vec(),
                Goal::Plain(prime(&inv.body, &vars)),
                vec![e.pos.clone(), inv.pos.clone()],
            ));
        }
    }

    /// Variables whose primes the machine's invariants can mention: its own
    /// and, for gluing invariants, those of the refined machines.
    fn primed_scope(&self) -> Vec<Decl> {
        let mut vars = self.m.variables.clone();
        vars.extend(self.vanished.iter().cloned());
        vars
    }

    fn feasibility_and_variant(&self, e: &Event, out: &mut Vec<ProofObligation>) {
        let state = self.state_hyps(e);
        if !e.action.frame.is_empty() {
            out.push(ProofObligation::new(
                self.id(&[&e.name, "FIS"]),
                PoKind::Fis,
                state.clone(),
                Goal::Existential {
                    bound: primed_frame_symbols(&e.action, &self.m.variables),
                    body: e.action.predicate.clone(),
                },
                vec![e.pos.clone()],
            ));
        }
        let Some(variant) = &self.m.variant else { return };
        if e.is_initialisation() || e.status == Status::Ordinary {
            return;
        }
        let op = if e.status == Status::Convergent { BinOp::Lt } else { BinOp::Le };
        let mut hyps = state.clone();
        hyps.push(self.ba_hyp(e));
        out.push(ProofObligation::new(
            self.id(&[&e.name, "VAR"]),
            PoKind::Var,
            hyps,
            Goal::Plain(Expr::bin(op, prime(variant, &self.m.variables), variant.clone())),
            vec![e.pos.clone()],
        ));
        if self.opts.nat {
            out.push(ProofObligation::new(
                self.id(&[&e.name, "NAT"]),
                PoKind::Nat,
                state,
                Goal::Plain(Expr::bin(BinOp::Ge, variant.clone(), Expr::int(0))),
                vec![e.pos.clone()],
            ));
        }
    }
}

fn scope<'a>(model: &TypedModel, m: &'a Machine, opts: PoOptions) -> Scope<'a> {
    let chain = model.context_chain(&m.sees);
    let ancestors = model.ancestors(m);
    let abs_invs = ancestors.iter().flat_map(|a| tagged("inv", &a.name, &a.invariants)).collect();
    let mut vanished: Vec<Decl> = Vec::new();
    for d in ancestors.iter().flat_map(|a| a.variables.iter()) {
        if m.variable(&d.name).is_none() && !vanished.contains(d) {
            vanished.push(d.clone());
        }
    }
    Scope { m, axioms: context_hyps(&chain), abs_invs, invs: tagged("inv", &m.name, &m.invariants), vanished, opts }
}

/// Obligations of a machine that refines nothing: INIT, INV, FIS, VAR, NAT.
pub fn gen_abstract_machine_pos(model: &TypedModel, m: &Machine, opts: PoOptions) -> Vec<ProofObligation> {
    let sc = scope(model, m, opts);
    let mut out = Vec::new();
    for e in ordered_events(m) {
        let mut hyps = sc.state_hyps(e);
        hyps.push(sc.ba_hyp(e));
        sc.preservation(e, &hyps, &mut out);
        sc.feasibility_and_variant(e, &mut out);
    }
    out
}

/// Obligations of a refinement machine: GRD, SIM, WFIS, gluing INV/INIT,
/// and FIS, VAR, NAT against the concrete variant.
pub fn gen_refinement_pos(model: &TypedModel, n: &Machine, opts: PoOptions) -> Vec<ProofObligation> {
    let Some(abs_m) = n.refines.as_deref().and_then(|a| model.machine(a)) else {
        return gen_abstract_machine_pos(model, n, opts);
    };
    let sc = scope(model, n, opts);
    let retained: Vec<Decl> = abs_m.variables.iter().filter(|d| n.variable(&d.name).is_some()).cloned().collect();
    let mut out = Vec::new();
    for e in ordered_events(n) {
        let skip = Event {
            name: e.name.clone(),
            status: Status::Ordinary,
            params: Vec::new(),
            guards: Vec::new(),
            action: BAssignment::new(Vec::<String>::new(), Expr::conj([])),
            refines: None,
            witnesses: Vec::new(),
            pos: e.pos.clone(),
        };
        let abs_e = e.refines.as_deref().and_then(|r| abs_m.event(r)).unwrap_or(&skip);
        let abs_name = if e.refines.is_some() { abs_e.name.as_str() } else { "skip" };

        let mut common = sc.state_hyps(e);
        let wit: Vec<Hypothesis> =
            e.witnesses.iter().map(|w| Hypothesis::new(format!("wit:{}", w.display_target()), w.predicate.clone())).collect();
        common.extend(wit.iter().cloned());

        for g in &abs_e.guards {
            out.push(ProofObligation::new(
                sc.id(&[&e.name, &g.label, "GRD"]),
                PoKind::Grd,
                common.clone(),
                Goal::Plain(g.body.clone()),
                vec![e.pos.clone(), g.pos.clone()],
            ));
        }

        let ba_c = sc.ba_hyp(e);
        if e.refines.is_some() {
            let mut hyps = common.clone();
            hyps.push(ba_c.clone());
            // Retained variables the abstract event leaves alone must stay put.
            let goal = complete_frame(&abs_e.action, &retained);
            out.push(ProofObligation::new(
                sc.id(&[&e.name, "SIM"]),
                PoKind::Sim,
                hyps,
                Goal::Plain(goal),
                vec![e.pos.clone(), abs_e.pos.clone()],
            ));
            for (i, w) in e.witnesses.iter().enumerate() {
                let mut hyps: Vec<Hypothesis> = common.iter().filter(|h| !wit.contains(h)).cloned().collect();
                hyps.extend(wit.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, h)| h.clone()));
                out.push(ProofObligation::new(
                    sc.id(&[&e.name, &w.display_target(), "WFIS"]),
                    PoKind::Wfis,
                    hyps,
                    Goal::Existential { bound: vec![w.target_symbol()], body: w.predicate.clone() },
                    vec![w.pos.clone()],
                ));
            }
        }

        let mut hyps = common.clone();
        hyps.push(ba_c);
        let ba_a = complete_frame(&abs_e.action, &sc.vanished);
        if ba_a != Expr::conj([]) {
            hyps.push(Hypothesis::new(format!("ba:{}/{abs_name}", abs_m.name), ba_a));
        }
        sc.preservation(e, &hyps, &mut out);
        sc.feasibility_and_variant(e, &mut out);
    }
    out
}

/// Obligations of a whole project: contexts first, then machines, each in
/// dependency order.
pub fn gen_project_pos(model: &TypedModel, opts: PoOptions) -> Vec<ProofObligation> {
    let mut out = Vec::new();
    for c in &model.contexts {
        let chain = model.context_chain(&c.name);
        let inherited = context_hyps(&chain[..chain.len() - 1]);
        out.extend(gen_context_pos_with(c, inherited));
    }
    for m in &model.machines {
        if m.refines.is_some() {
            out.extend(gen_refinement_pos(model, m, opts));
        } else {
            out.extend(gen_abstract_machine_pos(model, m, opts));
        }
    }
    out
}

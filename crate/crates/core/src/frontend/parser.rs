//! Recursive-descent parser for `.eb` files.

use super::ast::*;
use super::diag::{DiagCode, Diagnostic};
use super::lexer::{lex, Kw, Tok, Token};
use crate::model::{SourcePos, Sort, Status};

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

/// Parses a whole file. After a syntax error the parser skips to the next
/// top-level `context` or `machine` and carries on, so one file can report
/// several independent errors.
pub fn parse_text(file: &str, text: &str) -> (Vec<Declaration>, Vec<Diagnostic>) {
    let toks = match lex(file, text) {
        Ok(t) => t,
        Err(d) => return (Vec::new(), vec![d]),
    };
    let mut p = Parser { toks, at: 0 };
    let mut decls = Vec::new();
    let mut diags = Vec::new();
    while !p.check(&Tok::Eof) {
        match p.declaration() {
            Ok(d) => decls.push(d),
            Err(d) => {
                diags.push(d);
                p.at += 1;
                while !matches!(p.peek(), Tok::Eof | Tok::Kw(Kw::Context) | Tok::Kw(Kw::Machine)) {
                    p.at += 1;
                }
            }
        }
    }
    (decls, diags)
}

/// Parses a single expression, mainly for tests and tooling.
pub fn parse_expr_text(file: &str, text: &str) -> PResult<PExpr> {
    let mut p = Parser { toks: lex(file, text)?, at: 0 };
    let e = p.expr()?;
    if !p.check(&Tok::Eof) {
        return Err(p.unexpected(&["end of expression"]));
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> SourcePos {
        self.toks[self.at].pos.clone()
    }

    fn check(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn check_kw(&self, k: Kw) -> bool {
        self.check(&Tok::Kw(k))
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.check(t) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Kw) -> bool {
        self.eat(&Tok::Kw(k))
    }

    fn unexpected(&self, expected: &[&str]) -> Diagnostic {
        let found = self.peek().to_string();
        let msg = match expected {
            [one] => format!("expected {one}, found {found}"),
            many => format!("expected one of {}, found {found}", many.join(", ")),
        };
        Diagnostic::error(DiagCode::SyntaxError, self.pos(), msg)
    }

    fn expect(&mut self, t: Tok) -> PResult<Token> {
        if self.check(&t) {
            Ok(self.advance())
        } else {
            let want = match &t {
                Tok::Kw(k) => format!("`{}`", k.as_str()),
                other => other.to_string(),
            };
            Err(self.unexpected(&[want.as_str()]))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.advance().pos;
                Ok(Ident { name, pos })
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn sort(&mut self) -> PResult<Sort> {
        let s = match self.peek() {
            Tok::Kw(Kw::Int) => Sort::Int,
            Tok::Kw(Kw::Bool) => Sort::Bool,
            Tok::Kw(Kw::Fun) => Sort::FunIntInt,
            _ => return Err(self.unexpected(&["`int`", "`bool`", "`fun`"])),
        };
        self.advance();
        Ok(s)
    }

    fn typed_ident(&mut self) -> PResult<TypedIdent> {
        let ident = self.ident()?;
        self.expect(Tok::Colon)?;
        let sort = self.sort()?;
        Ok(TypedIdent { ident, sort })
    }

    fn typed_idents(&mut self) -> PResult<Vec<TypedIdent>> {
        let mut out = Vec::new();
        while matches!(self.peek(), Tok::Ident(_)) {
            out.push(self.typed_ident()?);
        }
        Ok(out)
    }

    fn label(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Label { name, primed: false } => {
                let pos = self.advance().pos;
                Ok(Ident { name, pos })
            }
            _ => Err(self.unexpected(&["label (`@name`)"])),
        }
    }

    fn labpreds(&mut self) -> PResult<Vec<LabPred>> {
        let mut out = Vec::new();
        while matches!(self.peek(), Tok::Label { .. }) {
            let label = self.label()?;
            let expr = self.expr()?;
            out.push(LabPred { label, expr });
        }
        Ok(out)
    }

    fn labpreds1(&mut self) -> PResult<Vec<LabPred>> {
        if !matches!(self.peek(), Tok::Label { .. }) {
            return Err(self.unexpected(&["label (`@name`)"]));
        }
        self.labpreds()
    }

    fn declaration(&mut self) -> PResult<Declaration> {
        match self.peek() {
            Tok::Kw(Kw::Context) => self.context().map(Declaration::Context),
            Tok::Kw(Kw::Machine) => self.machine().map(Declaration::Machine),
            _ => Err(self.unexpected(&["`context`", "`machine`"])),
        }
    }

    fn context(&mut self) -> PResult<ContextDecl> {
        self.expect(Tok::Kw(Kw::Context))?;
        let name = self.ident()?;
        let extends = if self.eat_kw(Kw::Extends) { Some(self.ident()?) } else { None };
        self.expect(Tok::Kw(Kw::Constants))?;
        let constants = self.typed_idents()?;
        let axioms = if self.eat_kw(Kw::Axioms) { Some(self.labpreds()?) } else { None };
        let theorems = if self.eat_kw(Kw::Theorems) { Some(self.labpreds()?) } else { None };
        if !self.check_kw(Kw::End) {
            let mut expected = Vec::new();
            if axioms.is_none() && theorems.is_none() {
                expected.push("`axioms`");
            }
            if theorems.is_none() {
                expected.push("`theorems`");
            }
            expected.push("`end`");
            return Err(self.unexpected(&expected));
        }
        self.advance();
        Ok(ContextDecl { name, extends, constants, axioms, theorems })
    }

    fn machine(&mut self) -> PResult<MachineDecl> {
        self.expect(Tok::Kw(Kw::Machine))?;
        let name = self.ident()?;
        let refines = if self.eat_kw(Kw::Refines) { Some(self.ident()?) } else { None };
        self.expect(Tok::Kw(Kw::Sees))?;
        let sees = self.ident()?;
        self.expect(Tok::Kw(Kw::Variables))?;
        let variables = self.typed_idents()?;
        self.expect(Tok::Kw(Kw::Invariants))?;
        let invariants = self.labpreds()?;
        let variant = if self.eat_kw(Kw::Variant) { Some(self.expr()?) } else { None };
        if !self.check_kw(Kw::Events) {
            let expected: &[&str] =
                if variant.is_none() { &["label (`@name`)", "`variant`", "`events`"] } else { &["`events`"] };
            return Err(self.unexpected(expected));
        }
        self.advance();
        let mut events = Vec::new();
        while self.check_kw(Kw::Event) {
            events.push(self.event()?);
        }
        if !self.check_kw(Kw::End) {
            return Err(self.unexpected(&["`event`", "`end`"]));
        }
        self.advance();
        Ok(MachineDecl { name, refines, sees, variables, invariants, variant, events })
    }

    fn event(&mut self) -> PResult<EventDecl> {
        self.expect(Tok::Kw(Kw::Event))?;
        let name = self.ident()?;
        let refines = if self.eat_kw(Kw::Refines) { Some(self.ident()?) } else { None };
        let status = if self.eat_kw(Kw::Status) {
            let st = match self.peek() {
                Tok::Ident(s) if s == "ordinary" => Status::Ordinary,
                Tok::Ident(s) if s == "convergent" => Status::Convergent,
                Tok::Ident(s) if s == "anticipated" => Status::Anticipated,
                _ => return Err(self.unexpected(&["`ordinary`", "`convergent`", "`anticipated`"])),
            };
            self.advance();
            Some(st)
        } else {
            None
        };
        let params = if self.eat_kw(Kw::Any) {
            if !matches!(self.peek(), Tok::Ident(_)) {
                return Err(self.unexpected(&["parameter declaration"]));
            }
            self.typed_idents()?
        } else {
            Vec::new()
        };
        let guards = if self.eat_kw(Kw::Where) { self.labpreds1()? } else { Vec::new() };
        let mut witnesses = Vec::new();
        if self.eat_kw(Kw::With) {
            loop {
                let (name, primed, pos) = match self.peek().clone() {
                    Tok::Label { name, primed } => (name, primed, self.advance().pos),
                    _ if witnesses.is_empty() => return Err(self.unexpected(&["witness (`@name :`)"])),
                    _ => break,
                };
                self.expect(Tok::Colon)?;
                let expr = self.expr()?;
                witnesses.push(WitnessDecl { target: Ident { name, pos }, primed, expr });
            }
        }
        let mut actions = Vec::new();
        if self.eat_kw(Kw::Then) {
            loop {
                if !matches!(self.peek(), Tok::Label { .. }) {
                    if actions.is_empty() {
                        return Err(self.unexpected(&["action label (`@name`)"]));
                    }
                    break;
                }
                actions.push(self.action()?);
            }
        }
        if !self.check_kw(Kw::End) {
            return Err(self.unexpected(&["`end`"]));
        }
        self.advance();
        Ok(EventDecl { name, refines, status, params, guards, witnesses, actions })
    }

    fn action(&mut self) -> PResult<ActionDecl> {
        let label = self.label()?;
        let mut targets = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            targets.push(self.ident()?);
        }
        let kind = match self.peek() {
            Tok::BecomesSuchThat => {
                self.advance();
                ActionKind::SuchThat(targets, self.expr()?)
            }
            Tok::Assign | Tok::BecomesIn if targets.len() > 1 => {
                return Err(self.unexpected(&["`:|` after a variable list"]));
            }
            Tok::Assign => {
                self.advance();
                ActionKind::Assign(targets.pop().unwrap(), self.expr()?)
            }
            Tok::BecomesIn => {
                self.advance();
                let lo = self.additive()?;
                self.expect(Tok::DotDot)?;
                let hi = self.additive()?;
                ActionKind::InRange(targets.pop().unwrap(), lo, hi)
            }
            _ => return Err(self.unexpected(&["`:=`", "`:|`", "`:∈`", "`,`"])),
        };
        Ok(ActionDecl { label, kind })
    }

    // expr := quant | iff
    fn expr(&mut self) -> PResult<PExpr> {
        if matches!(self.peek(), Tok::Forall | Tok::Exists) {
            return self.quantified();
        }
        let lhs = self.implication()?;
        if self.check(&Tok::Iff) {
            let pos = self.advance().pos;
            let rhs = self.implication()?;
            return Ok(bin(PBinOp::Iff, lhs, rhs, pos));
        }
        Ok(lhs)
    }

    fn quantified(&mut self) -> PResult<PExpr> {
        let t = self.advance();
        let q = if t.tok == Tok::Forall { PQuant::Forall } else { PQuant::Exists };
        self.expect(Tok::LParen)?;
        let mut bound = vec![self.typed_ident()?];
        while self.eat(&Tok::Comma) {
            bound.push(self.typed_ident()?);
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Dot)?;
        let body = self.expr()?;
        Ok(PExpr { kind: PExprKind::Quant { q, bound, body: Box::new(body) }, pos: t.pos })
    }

    fn implication(&mut self) -> PResult<PExpr> {
        let lhs = self.disjunction()?;
        if self.check(&Tok::Implies) {
            let pos = self.advance().pos;
            let rhs = self.implication()?;
            return Ok(bin(PBinOp::Implies, lhs, rhs, pos));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<PExpr> {
        let mut lhs = self.conjunction()?;
        while self.check(&Tok::Or) {
            let pos = self.advance().pos;
            let rhs = self.conjunction()?;
            lhs = bin(PBinOp::Or, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<PExpr> {
        let mut lhs = self.negation()?;
        while self.check(&Tok::And) {
            let pos = self.advance().pos;
            let rhs = self.negation()?;
            lhs = bin(PBinOp::And, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> PResult<PExpr> {
        if self.check(&Tok::Not) {
            let pos = self.advance().pos;
            let inner = self.negation()?;
            return Ok(PExpr { kind: PExprKind::Not(Box::new(inner)), pos });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<PExpr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => PBinOp::Eq,
            Tok::Neq => PBinOp::Neq,
            Tok::Lt => PBinOp::Lt,
            Tok::Le => PBinOp::Le,
            Tok::Gt => PBinOp::Gt,
            Tok::Ge => PBinOp::Ge,
            Tok::In => {
                let pos = self.advance().pos;
                let lo = self.additive()?;
                self.expect(Tok::DotDot)?;
                let hi = self.additive()?;
                return Ok(PExpr {
                    kind: PExprKind::InRange { elem: Box::new(lhs), lo: Box::new(lo), hi: Box::new(hi) },
                    pos,
                });
            }
            _ => return Ok(lhs),
        };
        let pos = self.advance().pos;
        let rhs = self.additive()?;
        Ok(bin(op, lhs, rhs, pos))
    }

    fn additive(&mut self) -> PResult<PExpr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => PBinOp::Add,
                Tok::Minus => PBinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.advance().pos;
            let rhs = self.multiplicative()?;
            lhs = bin(op, lhs, rhs, pos);
        }
    }

    fn multiplicative(&mut self) -> PResult<PExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => PBinOp::Mul,
                Tok::Slash => PBinOp::Div,
                Tok::Kw(Kw::Mod) => PBinOp::Mod,
                _ => return Ok(lhs),
            };
            let pos = self.advance().pos;
            let rhs = self.unary()?;
            lhs = bin(op, lhs, rhs, pos);
        }
    }

    fn unary(&mut self) -> PResult<PExpr> {
        if self.check(&Tok::Minus) {
            let pos = self.advance().pos;
            let inner = self.unary()?;
            return Ok(PExpr { kind: PExprKind::Neg(Box::new(inner)), pos });
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<PExpr> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                PExprKind::Int(v)
            }
            Tok::Kw(Kw::True) => {
                self.advance();
                PExprKind::Bool(true)
            }
            Tok::Kw(Kw::False) => {
                self.advance();
                PExprKind::Bool(false)
            }
            Tok::Primed(name) => {
                self.advance();
                PExprKind::Primed(name)
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat(&Tok::LParen) {
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    PExprKind::Apply(Ident { name, pos: pos.clone() }, Box::new(arg))
                } else {
                    PExprKind::Name(name)
                }
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(inner);
            }
            Tok::Forall | Tok::Exists => return self.quantified(),
            _ => return Err(self.unexpected(&["expression"])),
        };
        Ok(PExpr { kind, pos })
    }
}

fn bin(op: PBinOp, lhs: PExpr, rhs: PExpr, pos: SourcePos) -> PExpr {
    PExpr { kind: PExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_event(src: &str) -> EventDecl {
        let text = format!("machine m sees c variables invariants events {src} end");
        let (decls, diags) = parse_text("t.eb", &text);
        assert!(diags.is_empty(), "{diags:?}");
        match decls.into_iter().next().unwrap() {
            Declaration::Machine(mut m) => m.events.remove(0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn refinement_event_with_guard_and_action() {
        let e = one_event("event inc refines progress status convergent where @grd1 f(r) < v then @act1 p := r + 1 end");
        assert_eq!(e.name.name, "inc");
        assert_eq!(e.refines.as_ref().unwrap().name, "progress");
        assert_eq!(e.status, Some(Status::Convergent));
        assert_eq!(e.guards.len(), 1);
        assert_eq!(e.actions.len(), 1);
        assert!(matches!(e.guards[0].expr.kind, PExprKind::Binary(PBinOp::Lt, _, _)));
        assert!(matches!(&e.actions[0].kind, ActionKind::Assign(x, _) if x.name == "p"));
    }

    #[test]
    fn minimal_machine() {
        let (decls, diags) =
            parse_text("t.eb", "machine m0 sees ctx variables r : int invariants @inv1 r >= 0 events end");
        assert!(diags.is_empty());
        let Declaration::Machine(m) = &decls[0] else { panic!() };
        assert_eq!(m.invariants.len(), 1);
        assert_eq!(m.variables[0].sort, Sort::Int);
    }

    #[test]
    fn empty_guard_list_is_rejected_at_then() {
        let text = "machine m sees c variables invariants events event bad where then end end";
        let (_, diags) = parse_text("t.eb", text);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagCode::SyntaxError);
        // `then` starts at column 59.
        assert_eq!(diags[0].pos.col as usize, text.find("then").unwrap() + 1);
        assert!(diags[0].message.contains("label"), "{}", diags[0].message);
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr_text("t", "a => b => c").unwrap();
        let PExprKind::Binary(PBinOp::Implies, l, _) = e.kind else { panic!() };
        assert_eq!(l.kind, PExprKind::Name("a".into()));
        let e = parse_expr_text("t", "1 - 2 - 3").unwrap();
        let PExprKind::Binary(PBinOp::Sub, l, _) = e.kind else { panic!() };
        assert!(matches!(l.kind, PExprKind::Binary(PBinOp::Sub, _, _)));
        let e = parse_expr_text("t", "not a = b and c").unwrap();
        let PExprKind::Binary(PBinOp::And, l, _) = e.kind else { panic!() };
        assert!(matches!(l.kind, PExprKind::Not(_)));
    }

    #[test]
    fn action_forms() {
        let e = one_event("event e then @a1 x, y :| x' > y @a2 r :∈ r+1..q @a3 z :: 0..1 end");
        assert!(matches!(&e.actions[0].kind, ActionKind::SuchThat(xs, _) if xs.len() == 2));
        assert!(matches!(&e.actions[1].kind, ActionKind::InRange(..)));
        assert!(matches!(&e.actions[2].kind, ActionKind::InRange(..)));
    }

    #[test]
    fn recovers_at_next_declaration() {
        let (decls, diags) = parse_text("t.eb", "context c constants x end machine end context d constants end");
        assert_eq!(diags.len(), 2);
        assert_eq!(decls.len(), 1);
    }
}

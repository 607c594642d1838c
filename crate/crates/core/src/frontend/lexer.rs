use std::fmt;

use super::diag::{DiagCode, Diagnostic};
use crate::model::SourcePos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `x'` written without intervening whitespace.
    Primed(String),
    /// `@name` or `@name'`.
    Label { name: String, primed: bool },
    Int(i64),
    Kw(Kw),
    Colon,
    Assign,
    BecomesSuchThat,
    BecomesIn,
    DotDot,
    Dot,
    Comma,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Implies,
    Iff,
    And,
    Or,
    Not,
    Forall,
    Exists,
    In,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    Context,
    Extends,
    Constants,
    Axioms,
    Theorems,
    End,
    Machine,
    Refines,
    Sees,
    Variables,
    Invariants,
    Variant,
    Events,
    Event,
    Status,
    Any,
    Where,
    With,
    Then,
    Int,
    Bool,
    Fun,
    True,
    False,
    Mod,
}

const KEYWORDS: &[(&str, Kw)] = &[
    ("context", Kw::Context),
    ("extends", Kw::Extends),
    ("constants", Kw::Constants),
    ("axioms", Kw::Axioms),
    ("theorems", Kw::Theorems),
    ("end", Kw::End),
    ("machine", Kw::Machine),
    ("refines", Kw::Refines),
    ("sees", Kw::Sees),
    ("variables", Kw::Variables),
    ("invariants", Kw::Invariants),
    ("variant", Kw::Variant),
    ("events", Kw::Events),
    ("event", Kw::Event),
    ("status", Kw::Status),
    ("any", Kw::Any),
    ("where", Kw::Where),
    ("with", Kw::With),
    ("then", Kw::Then),
    ("int", Kw::Int),
    ("bool", Kw::Bool),
    ("fun", Kw::Fun),
    ("true", Kw::True),
    ("false", Kw::False),
    ("mod", Kw::Mod),
];

/// Words that lex as operators rather than identifiers.
const WORD_OPS: &[(&str, Tok)] = &[
    ("and", Tok::And),
    ("or", Tok::Or),
    ("not", Tok::Not),
    ("forall", Tok::Forall),
    ("exists", Tok::Exists),
    ("in", Tok::In),
];

impl Kw {
    pub fn as_str(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).map(|(s, _)| *s).unwrap()
    }
}

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|(s, _)| *s == word) || WORD_OPS.iter().any(|(s, _)| *s == word)
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Primed(s) => write!(f, "`{s}'`"),
            Tok::Label { name, primed } => write!(f, "`@{name}{}`", if *primed { "'" } else { "" }),
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Kw(k) => write!(f, "`{}`", k.as_str()),
            Tok::Eof => f.write_str("end of file"),
            other => write!(f, "`{}`", punct_text(other)),
        }
    }
}

pub fn punct_text(t: &Tok) -> &'static str {
    match t {
        Tok::Colon => ":",
        Tok::Assign => ":=",
        Tok::BecomesSuchThat => ":|",
        Tok::BecomesIn => ":∈",
        Tok::DotDot => "..",
        Tok::Dot => ".",
        Tok::Comma => ",",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Eq => "=",
        Tok::Neq => "/=",
        Tok::Lt => "<",
        Tok::Le => "<=",
        Tok::Gt => ">",
        Tok::Ge => ">=",
        Tok::Implies => "=>",
        Tok::Iff => "<=>",
        Tok::And => "and",
        Tok::Or => "or",
        Tok::Not => "not",
        Tok::Forall => "forall",
        Tok::Exists => "exists",
        Tok::In => "in",
        _ => "?",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: SourcePos,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source text into tokens. Stops at the first lexical error.
pub fn lex(file: &str, text: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let pos = |line: u32, col: u32| SourcePos { file: file.to_string(), line, col };

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && next == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && next == Some('*') {
            let start = pos(line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(Diagnostic::error(DiagCode::LexError, start, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let start = pos(line, col);
        if is_ident_start(c) || c == '@' {
            let label = c == '@';
            if label {
                bump!();
                if i >= chars.len() || !is_ident_start(chars[i]) {
                    return Err(Diagnostic::error(DiagCode::LexError, start, "expected a label name after `@`"));
                }
            }
            let begin = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                bump!();
            }
            let word: String = chars[begin..i].iter().collect();
            let primed = i < chars.len() && chars[i] == '\'';
            if primed {
                bump!();
            }
            let tok = if label {
                Tok::Label { name: word, primed }
            } else if primed {
                Tok::Primed(word)
            } else if let Some((_, kw)) = KEYWORDS.iter().find(|(s, _)| *s == word) {
                Tok::Kw(*kw)
            } else if let Some((_, op)) = WORD_OPS.iter().find(|(s, _)| *s == word) {
                op.clone()
            } else {
                Tok::Ident(word)
            };
            out.push(Token { tok, pos: start });
            continue;
        }
        if c.is_ascii_digit() {
            let begin = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let digits: String = chars[begin..i].iter().collect();
            let v = digits.parse::<i64>().map_err(|_| {
                Diagnostic::error(DiagCode::LexError, start.clone(), format!("integer literal {digits} is too large"))
            })?;
            out.push(Token { tok: Tok::Int(v), pos: start });
            continue;
        }
        let (tok, len) = match (c, next) {
            (':', Some('=')) => (Tok::Assign, 2),
            (':', Some('|')) => (Tok::BecomesSuchThat, 2),
            (':', Some('∈')) | (':', Some(':')) => (Tok::BecomesIn, 2),
            (':', _) => (Tok::Colon, 1),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('.', _) => (Tok::Dot, 1),
            (',', _) => (Tok::Comma, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) | ('×', _) => (Tok::Star, 1),
            ('/', Some('=')) | ('!', Some('=')) => (Tok::Neq, 2),
            ('/', _) | ('÷', _) => (Tok::Slash, 1),
            ('≠', _) => (Tok::Neq, 1),
            ('<', Some('=')) if chars.get(i + 2) == Some(&'>') => (Tok::Iff, 3),
            ('<', Some('=')) | ('≤', _) => (Tok::Le, if c == '≤' { 1 } else { 2 }),
            ('<', _) => (Tok::Lt, 1),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('≥', _) => (Tok::Ge, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', Some('>')) => (Tok::Implies, 2),
            ('=', _) => (Tok::Eq, 1),
            ('⇒', _) => (Tok::Implies, 1),
            ('⇔', _) => (Tok::Iff, 1),
            ('∧', _) => (Tok::And, 1),
            ('∨', _) => (Tok::Or, 1),
            ('¬', _) => (Tok::Not, 1),
            ('∀', _) => (Tok::Forall, 1),
            ('∃', _) => (Tok::Exists, 1),
            ('∈', _) => (Tok::In, 1),
            _ => {
                return Err(Diagnostic::error(DiagCode::LexError, start, format!("unexpected character `{c}`")));
            }
        };
        for _ in 0..len {
            bump!();
        }
        out.push(Token { tok, pos: start });
    }
    out.push(Token { tok: Tok::Eof, pos: pos(line, col) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex("t.eb", s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn labels_primes_and_ranges() {
        assert_eq!(
            toks("@act2 r :∈ r+1..q"),
            vec![
                Tok::Label { name: "act2".into(), primed: false },
                Tok::Ident("r".into()),
                Tok::BecomesIn,
                Tok::Ident("r".into()),
                Tok::Plus,
                Tok::Int(1),
                Tok::DotDot,
                Tok::Ident("q".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks("@x' : x' = 1")[..3], [
            Tok::Label { name: "x".into(), primed: true },
            Tok::Colon,
            Tok::Primed("x".into())
        ]);
    }

    #[test]
    fn operators_and_comments() {
        assert_eq!(
            toks("a <=> b => c /= d // tail\n/* block */ ≤ ≥ :: :|"),
            vec![
                Tok::Ident("a".into()),
                Tok::Iff,
                Tok::Ident("b".into()),
                Tok::Implies,
                Tok::Ident("c".into()),
                Tok::Neq,
                Tok::Ident("d".into()),
                Tok::Le,
                Tok::Ge,
                Tok::BecomesIn,
                Tok::BecomesSuchThat,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = lex("f.eb", "context\n  c").unwrap();
        assert_eq!((t[1].pos.line, t[1].pos.col), (2, 3));
    }

    #[test]
    fn lexical_errors() {
        assert_eq!(lex("f", "a $ b").unwrap_err().code, DiagCode::LexError);
        assert_eq!(lex("f", "99999999999999999999").unwrap_err().code, DiagCode::LexError);
        assert_eq!(lex("f", "/* open").unwrap_err().code, DiagCode::LexError);
    }
}

//! Minimal s-expression reader for solver output.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads every top-level s-expression in `text`. Quoted symbols `|...|` are
/// returned without their bars; string literals keep their quotes.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack.last_mut().ok_or("unbalanced `)`")?.push(Sexp::List(done));
                i += 1;
            }
            '|' => {
                let start = i + 1;
                let end = chars[start..].iter().position(|&c| c == '|').ok_or("unterminated `|` symbol")? + start;
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..end].iter().collect()));
                i = end + 1;
            }
            '"' => {
                let start = i;
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') if chars.get(i + 1) == Some(&'"') => i += 2,
                        Some('"') => break,
                        Some(_) => i += 1,
                    }
                }
                i += 1;
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"()|;\"".contains(chars[i]) {
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
            }
        }
        if stack.is_empty() {
            return Err("unbalanced `)`".into());
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_z3_models() {
        let out = parse_all("(\n  (define-fun |r'| () Int\n    (- 1))\n  ; note\n  (define-fun b () Bool true)\n)").unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_string(), "((define-fun r' () Int (- 1)) (define-fun b () Bool true))");
    }

    #[test]
    fn rejects_unbalanced_input() {
        assert!(parse_all("(a (b)").is_err());
        assert!(parse_all("a)").is_err());
        assert!(parse_all("|open").is_err());
    }
}

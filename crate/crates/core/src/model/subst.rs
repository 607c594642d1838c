//! Capture-avoiding substitution, priming and free-symbol collection.

use std::collections::{BTreeMap, BTreeSet};

use super::expr::{Expr, Sort, SymKey, SymKind, Symbol};

/// Mapping from free symbols to replacement expressions.
pub type Substitution = BTreeMap<SymKey, Expr>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("cannot replace `{symbol}` of sort {expected} with `{replacement}` of sort {found}")]
    SortMismatch { symbol: String, expected: Sort, found: Sort, replacement: String },
    #[error("bound variables cannot be substituted (`{0}`)")]
    BoundKey(String),
}

/// Replaces every free occurrence of a symbol named in `map`.
///
/// Bound occurrences are left alone. When a replacement mentions a name bound
/// by an enclosing quantifier, the quantifier's variable is renamed first.
pub fn substitute(e: &Expr, map: &Substitution) -> Result<Expr, SubstError> {
    if let Some(key) = map.keys().find(|k| k.kind == SymKind::Bound) {
        return Err(SubstError::BoundKey(key.name.clone()));
    }
    if map.is_empty() {
        return Ok(e.clone());
    }
    subst_rec(e, map)
}

fn subst_rec(e: &Expr, map: &Substitution) -> Result<Expr, SubstError> {
    Ok(match e {
        Expr::Int(_) | Expr::Bool(_) => e.clone(),
        Expr::Sym(s) => match map.get(&s.key()) {
            Some(rep) => {
                let found = rep.sort();
                if found != s.sort {
                    return Err(SubstError::SortMismatch {
                        symbol: s.display_name(),
                        expected: s.sort,
                        found,
                        replacement: rep.to_string(),
                    });
                }
                rep.clone()
            }
            None => e.clone(),
        },
        Expr::Apply { fun, arg } => {
            if let Some(rep) = map.get(&SymKey::constant(fun.clone())) {
                match rep {
                    Expr::Sym(s) if s.sort == Sort::FunIntInt => {
                        Expr::apply(s.name.clone(), subst_rec(arg, map)?)
                    }
                    other => {
                        return Err(SubstError::SortMismatch {
                            symbol: fun.clone(),
                            expected: Sort::FunIntInt,
                            found: other.sort(),
                            replacement: other.to_string(),
                        })
                    }
                }
            } else {
                Expr::apply(fun.clone(), subst_rec(arg, map)?)
            }
        }
        Expr::Unary(op, inner) => Expr::Unary(*op, Box::new(subst_rec(inner, map)?)),
        Expr::Binary(op, l, r) => Expr::bin(*op, subst_rec(l, map)?, subst_rec(r, map)?),
        Expr::And(items) => Expr::And(items.iter().map(|i| subst_rec(i, map)).collect::<Result<_, _>>()?),
        Expr::Or(items) => Expr::Or(items.iter().map(|i| subst_rec(i, map)).collect::<Result<_, _>>()?),
        Expr::Quant { q, bound, body } => {
            let shadowed: Substitution;
            let map = if map.keys().any(|k| k.kind == SymKind::Bound && bound.iter().any(|(n, _)| *n == k.name)) {
                shadowed = map
                    .iter()
                    .filter(|(k, _)| !(k.kind == SymKind::Bound && bound.iter().any(|(n, _)| *n == k.name)))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                &shadowed
            } else {
                map
            };
            // Free names of the replacements that could be captured.
            let mut replacement_names = BTreeSet::new();
            for rep in map.values() {
                for s in free_symbols(rep) {
                    replacement_names.insert(s.name);
                }
            }
            let mut new_bound = Vec::with_capacity(bound.len());
            let mut renames = Substitution::new();
            for (name, sort) in bound {
                if replacement_names.contains(name) {
                    let fresh = fresh_name(name, body, &replacement_names);
                    renames.insert(
                        SymKey { kind: SymKind::Bound, name: name.clone() },
                        Expr::sym(fresh.clone(), SymKind::Bound, *sort),
                    );
                    new_bound.push((fresh, *sort));
                } else {
                    new_bound.push((name.clone(), *sort));
                }
            }
            let body = if renames.is_empty() { (**body).clone() } else { subst_rec(body, &renames)? };
            Expr::quant(*q, new_bound, subst_rec(&body, map)?)
        }
    })
}

fn fresh_name(base: &str, body: &Expr, avoid: &BTreeSet<String>) -> String {
    let mut used = avoid.clone();
    body.walk(&mut |e| {
        if let Expr::Sym(s) = e {
            used.insert(s.name.clone());
        }
        if let Expr::Quant { bound, .. } = e {
            used.extend(bound.iter().map(|(n, _)| n.clone()));
        }
    });
    (0..).map(|i| format!("{base}_{i}")).find(|n| !used.contains(n)).unwrap()
}

/// Maps each listed variable to its primed counterpart.
pub fn prime_frame<'a>(vars: impl IntoIterator<Item = (&'a str, Sort)>) -> Substitution {
    vars.into_iter().map(|(name, sort)| (SymKey::var(name), Expr::primed(name, sort))).collect()
}

/// The free (unbound) symbols of `e`, including applied function constants.
pub fn free_symbols(e: &Expr) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    collect_free(e, &mut Vec::new(), &mut out);
    out
}

fn collect_free(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<Symbol>) {
    match e {
        Expr::Int(_) | Expr::Bool(_) => {}
        Expr::Sym(s) => {
            if s.kind != SymKind::Bound || !bound.contains(&s.name) {
                out.insert(s.clone());
            }
        }
        Expr::Apply { fun, arg } => {
            out.insert(Symbol::new(fun.clone(), SymKind::Const, Sort::FunIntInt));
            collect_free(arg, bound, out);
        }
        Expr::Unary(_, inner) => collect_free(inner, bound, out),
        Expr::Binary(_, l, r) => {
            collect_free(l, bound, out);
            collect_free(r, bound, out);
        }
        Expr::And(items) | Expr::Or(items) => items.iter().for_each(|i| collect_free(i, bound, out)),
        Expr::Quant { bound: vars, body, .. } => {
            let depth = bound.len();
            bound.extend(vars.iter().map(|(n, _)| n.clone()));
            collect_free(body, bound, out);
            bound.truncate(depth);
        }
    }
}

/// Renders `free_symbols` as `(name, kind)` pairs, handy in tests and reports.
pub fn free_symbol_kinds(e: &Expr) -> BTreeSet<(String, SymKind)> {
    free_symbols(e).into_iter().map(|s| (s.name, s.kind)).collect()
}

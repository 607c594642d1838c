use ebv_core::model::{substitute, BinOp, Expr, Quantifier, Sort, SymKey, SymKind, Substitution, UnOp};
use ebv_core::smt::{eval, Valuation, Value};
use proptest::prelude::*;

fn int_term() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-5i64..6).prop_map(Expr::int),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(|n| Expr::var(n, Sort::Int)),
        Just(Expr::primed("x", Sort::Int)),
        Just(Expr::constant("n", Sort::Int)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul]), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::bin(op, l, r)),
            (prop::sample::select(vec![BinOp::Div, BinOp::Mod]), inner.clone(), 1i64..4)
                .prop_map(|(op, l, d)| Expr::bin(op, l, Expr::int(d))),
            inner.prop_map(Expr::neg),
        ]
    })
}

/// Quantifier-free predicates over the integer terms above.
fn pred() -> impl Strategy<Value = Expr> {
    let atom = (
        prop::sample::select(vec![BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Neq, BinOp::Gt, BinOp::Ge]),
        int_term(),
        int_term(),
    )
        .prop_map(|(op, l, r)| Expr::bin(op, l, r));
    atom.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(Expr::And),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Expr::Or),
            inner.clone().prop_map(|e| Expr::Unary(UnOp::Not, Box::new(e))),
            (inner.clone(), inner).prop_map(|(l, r)| Expr::bin(BinOp::Implies, l, r)),
        ]
    })
}

fn env() -> impl Strategy<Value = Valuation> {
    prop::collection::vec(-6i128..7, 5).prop_map(|v| {
        ["x", "y", "z", "x'", "n"].iter().zip(v).map(|(k, v)| (k.to_string(), Value::Int(v))).collect()
    })
}

fn key(name: &str) -> SymKey {
    SymKey::var(name)
}

proptest! {
    #[test]
    fn empty_and_identity_substitutions_are_no_ops(e in pred()) {
        prop_assert_eq!(substitute(&e, &Substitution::new()).unwrap(), e.clone());
        let id: Substitution = ["x", "y", "z"].iter().map(|n| (key(n), Expr::var(*n, Sort::Int))).collect();
        prop_assert_eq!(substitute(&e, &id).unwrap(), e);
    }

    /// Substituting a term for x and then evaluating equals evaluating with x
    /// bound to the term's value.
    #[test]
    fn substitution_lemma(e in pred(), t in int_term(), rho in env()) {
        let map = Substitution::from([(key("x"), t.clone())]);
        let lhs = eval(&substitute(&e, &map).unwrap(), &rho);
        let mut rho2 = rho.clone();
        if let Ok(v) = eval(&t, &rho) {
            rho2.insert("x".into(), v);
            prop_assert_eq!(lhs, eval(&e, &rho2));
        }
    }

    /// Sequential substitution [x := a][y := b] equals the simultaneous
    /// substitution {x := a[y := b], y := b}.
    #[test]
    fn composition(e in pred(), a in int_term(), b in int_term()) {
        let first = Substitution::from([(key("x"), a.clone())]);
        let second = Substitution::from([(key("y"), b.clone())]);
        let seq = substitute(&substitute(&e, &first).unwrap(), &second).unwrap();
        let simultaneous = Substitution::from([
            (key("x"), substitute(&a, &second).unwrap()),
            (key("y"), b),
        ]);
        prop_assert_eq!(seq, substitute(&e, &simultaneous).unwrap());
    }

    /// Replacing a constant by a literal changes nothing when the literal is
    /// the constant's value.
    #[test]
    fn constant_replacement(e in pred(), rho in env()) {
        let Value::Int(n) = rho["n"] else { unreachable!() };
        let map = Substitution::from([(SymKey::constant("n"), Expr::int(n as i64))]);
        let replaced = substitute(&e, &map).unwrap();
        prop_assert_eq!(eval(&replaced, &rho), eval(&e, &rho));
        let mut without = rho.clone();
        without.remove("n");
        if let Ok(v) = eval(&replaced, &rho) {
            prop_assert_eq!(eval(&replaced, &without), Ok(v));
        }
    }

    #[test]
    fn primed_and_unprimed_are_distinct(e in pred(), t in int_term()) {
        // Replacing x' never touches x, and vice versa.
        let primed = Substitution::from([(SymKey::primed("x"), t.clone())]);
        let out = substitute(&e, &primed).unwrap();
        let count = |e: &Expr, kind: SymKind| {
            let mut c = 0;
            e.walk(&mut |s| if let Expr::Sym(s) = s { if s.name == "x" && s.kind == kind { c += 1 } });
            c
        };
        prop_assert!(count(&out, SymKind::Var) >= count(&e, SymKind::Var));
        if count(&t, SymKind::Primed) == 0 {
            prop_assert_eq!(count(&out, SymKind::Primed), 0);
        }
    }
}

#[test]
fn quantifier_capture_is_avoided_semantically() {
    // forall (y:int). y > x => y > x, with x := y
    let by = || Expr::sym("y", SymKind::Bound, Sort::Int);
    let body = Expr::bin(BinOp::Gt, by(), Expr::var("x", Sort::Int));
    let e = Expr::quant(Quantifier::Forall, vec![("y".into(), Sort::Int)], Expr::bin(BinOp::Implies, body.clone(), body));
    let out = substitute(&e, &Substitution::from([(key("x"), Expr::var("y", Sort::Int))])).unwrap();
    let Expr::Quant { bound, body, .. } = &out else { panic!("{out}") };
    assert_ne!(bound[0].0, "y");
    let mut free_y = false;
    body.walk(&mut |s| {
        if let Expr::Sym(s) = s {
            free_y |= s.name == "y" && s.kind == SymKind::Var;
        }
    });
    assert!(free_y, "{out}");
}

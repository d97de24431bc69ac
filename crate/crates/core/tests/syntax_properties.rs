use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use submodel_core::{
    classify, parse_formula, parse_model, parse_signature, render_formula, render_model, render_signature, FiniteModel,
    Formula, Signature, Term,
};

fn sig() -> Signature {
    parse_signature("pred P/1\npred Q/1\npred R/2\nequality on").unwrap()
}

fn var() -> impl Strategy<Value = Term> {
    prop_oneof![Just("x"), Just("y"), Just("z")].prop_map(Term::var)
}

fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        var().prop_map(|t| Formula::pred("P", vec![t])),
        var().prop_map(|t| Formula::pred("Q", vec![t])),
        (var(), var()).prop_map(|(a, b)| Formula::pred("R", vec![a, b])),
        (var(), var()).prop_map(|(a, b)| Formula::eq(a, b)),
    ]
}

fn block() -> impl Strategy<Value = Vec<String>> {
    prop::sample::subsequence(vec!["x", "y", "z"], 1..=2).prop_map(|v| v.into_iter().map(String::from).collect())
}

fn formula() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Formula::Or),
            (block(), inner.clone()).prop_map(|(vs, f)| Formula::Exists(vs, Box::new(f))),
            (block(), inner).prop_map(|(vs, f)| Formula::Forall(vs, Box::new(f))),
        ]
    })
}

fn model() -> impl Strategy<Value = FiniteModel> {
    (1usize..=3).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(any::<bool>(), n * n),
            prop::collection::vec(0..n, n),
            0..n,
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(n, r, f, c, p)| {
                let s = Arc::new(parse_signature("pred P/1\npred R/2\nfun f/1\nconst c\nequality on").unwrap());
                let mut m = FiniteModel::new(s, n).unwrap();
                for x in 0..n {
                    m.set_relation("P", &[x], p[x]).unwrap();
                    m.set_function("f", &[x], f[x]).unwrap();
                    for y in 0..n {
                        m.set_relation("R", &[x, y], r[x * n + y]).unwrap();
                    }
                }
                m.set_constant("c", c).unwrap();
                m
            })
    })
}

fn signature() -> impl Strategy<Value = Signature> {
    (
        prop::collection::btree_map("[A-Z][a-z]?", 1usize..=3, 0..3),
        prop::collection::btree_map("[a-h][a-z]?", 1usize..=2, 0..3),
        prop::collection::btree_set("k[0-9]", 0..3),
        any::<bool>(),
    )
        .prop_filter_map("symbol clash", |(preds, funs, consts, eq)| {
            let mut s = Signature::new();
            for (p, a) in preds {
                s.add_predicate(&p, a).ok()?;
            }
            for (f, a) in funs {
                s.add_function(&f, a).ok()?;
            }
            for c in consts {
                s.add_constant(&c).ok()?;
            }
            s.set_equality(eq);
            Some(s)
        })
}

// Free variables renamed to fresh names and back.
fn rename_free(f: &Formula, forward: bool) -> Formula {
    let map: BTreeMap<String, Term> = ["x", "y", "z"]
        .iter()
        .map(|v| {
            let fresh = format!("fresh_{v}");
            if forward {
                (v.to_string(), Term::var(&fresh))
            } else {
                (fresh, Term::var(v))
            }
        })
        .collect();
    f.substitute(&map)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn renaming_round_trip(f in formula()) {
        let back = rename_free(&rename_free(&f, true), false);
        prop_assert!(back.alpha_eq(&f), "{} vs {}", back, f);
    }

    #[test]
    fn classify_stable_under_alpha_renaming(f in formula()) {
        let g = f.rename_bound_apart(&f.all_vars());
        prop_assert!(g.alpha_eq(&f));
        prop_assert_eq!(classify(&g), classify(&f));
    }

    #[test]
    fn monadic_like_atoms_have_one_variable(f in formula()) {
        if classify(&f).is_monadic_like {
            for a in f.atoms() {
                prop_assert!(a.free_vars().len() <= 1, "{}", a);
            }
        }
    }

    #[test]
    fn formula_round_trip(f in formula()) {
        let text = render_formula(&f);
        prop_assert_eq!(parse_formula(&text, &sig()).unwrap(), f);
    }

    #[test]
    fn model_round_trip(m in model()) {
        let text = render_model(&m);
        let back = parse_model(&text, m.signature()).unwrap();
        prop_assert_eq!(render_model(&back), text);
        prop_assert_eq!(back, m);
    }

    #[test]
    fn signature_round_trip(s in signature()) {
        let text = render_signature(&s);
        let back = parse_signature(&text).unwrap();
        prop_assert_eq!(render_signature(&back), text);
        prop_assert_eq!(back, s);
    }
}

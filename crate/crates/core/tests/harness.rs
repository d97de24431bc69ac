use std::collections::HashMap;
use std::sync::Arc;

use submodel_core::search::collect_models_upto;
use submodel_core::transforms::build_theta_monadic;
use submodel_core::verify::{
    check_equiv, corpus, oracle, run_demo, theta_star_membership, universal_consequence_sieve, witness_bound_scan,
    Verdict,
};
use submodel_core::{
    enumerate_subuniverses, evaluate_sentence, parse_formula, parse_model, parse_signature, theta_star_sem, Compiled,
    FiniteModel, Formula, Signature,
};

fn sig(text: &str) -> Arc<Signature> {
    Arc::new(parse_signature(text).unwrap())
}

#[test]
fn equiv_examples() {
    let s = sig("pred P/1");
    let all = parse_formula("(forall (x) (P x))", &s).unwrap();
    let some = parse_formula("(exists (x) (P x))", &s).unwrap();
    assert_eq!(check_equiv(&s, &all, &all, 3).unwrap().verdict, Verdict::Verified);
    let r = check_equiv(&s, &some, &all, 2).unwrap();
    assert_eq!(r.verdict, Verdict::Refuted);
    assert_eq!(r.counterexample.unwrap().model, "universe 2\npred P = {(0)}\n");
    let chi = build_theta_monadic(&s, &all).unwrap();
    assert_eq!(check_equiv(&s, &chi, &some, 4).unwrap().verdict, Verdict::Verified);
}

#[test]
fn witness_scan_examples() {
    // ∃x∃y∀z over a monadic signature to size 5, over a binary relation to 4
    let m = corpus::monadic_signature();
    let f = parse_formula(
        "(exists (x y) (forall (z) (or (and (P x) (not (Q y))) (and (P z) (Q y)))))",
        &m,
    )
    .unwrap();
    let scan = witness_bound_scan(&m, &f, 5).unwrap();
    assert!(scan.bound <= 2 && scan.bound >= 1, "{}", scan.report.to_text());
    assert_eq!(scan.report.verdict, Verdict::Verified);

    let b = corpus::binary_signature();
    let f = parse_formula("(exists (x y) (forall (z) (or (R x z) (R z y))))", &b).unwrap();
    let scan = witness_bound_scan(&b, &f, 4).unwrap();
    assert!(scan.bound <= 2);

    // every finite model of "linear ⇒ no first or no last" is a non-linear
    // order; the scanned bound matches a direct search over induced models
    let o = corpus::order_signature();
    let phi = corpus::no_first_or_last();
    let linear = Compiled::new(&o, &corpus::linear_order()).unwrap();
    let models = collect_models_upto(&o, 4, Some(&phi)).unwrap();
    assert!(models.iter().all(|m| !linear.holds(m)));
    let least = |m: &FiniteModel| {
        (1..=m.size())
            .find(|&k| {
                enumerate_subuniverses(m)
                    .unwrap()
                    .filter(|s| s.len() == k)
                    .any(|s| evaluate_sentence(&m.induced(&s).0, &phi).unwrap())
            })
            .unwrap()
    };
    let expected = models.iter().map(least).max().unwrap();
    let scan = witness_bound_scan(&o, &phi, 4).unwrap();
    assert_eq!(scan.bound, expected);
    assert_eq!(scan.report.verdict, Verdict::Verified, "{}", scan.report.to_text());

    let never = parse_formula("(exists (x) (and (R x x) (not (R x x))))", &b).unwrap();
    let scan = witness_bound_scan(&b, &never, 3).unwrap();
    assert_eq!((scan.bound, scan.report.verdict), (0, Verdict::Verified));
}

#[test]
fn witness_scan_can_run_out() {
    // "at least three elements" has no proper witness at its least size
    let s = sig("pred P/1\nequality on");
    let f = parse_formula("(exists (x y z) (and (not (= x y)) (not (= x z)) (not (= y z))))", &s).unwrap();
    let scan = witness_bound_scan(&s, &f, 3).unwrap();
    assert_eq!(scan.report.verdict, Verdict::ExhaustedWithoutDecision);
    assert!(scan.report.counterexample.is_some());
}

#[test]
fn sieve_examples() {
    let g = corpus::group_signature();
    let r = universal_consequence_sieve(&g, &corpus::group_axioms(), 3, 5).unwrap();
    assert_eq!(r.report.verdict, Verdict::Verified);
    for law in [
        corpus::LEFT_CANCELLATION,
        corpus::RIGHT_CANCELLATION,
        corpus::COMMUTATIVITY,
    ] {
        assert!(r.retains(&parse_formula(law, &g).unwrap()), "{law}");
    }
    // every retained sentence holds in every group table found
    let groups = collect_models_upto(&g, 4, Some(&corpus::group_axioms())).unwrap();
    for f in &r.theory {
        let c = Compiled::new(&g, f).unwrap();
        assert!(groups.iter().all(|m| c.holds(m)), "{f}");
    }

    // over ⊤ the survivors are valid on every model checked
    let s = sig("pred P/1\npred R/2\nequality on");
    let r = universal_consequence_sieve(&s, &Formula::top(), 2, 3).unwrap();
    let all = collect_models_upto(&s, 3, None).unwrap();
    for f in &r.theory {
        let c = Compiled::new(&s, f).unwrap();
        assert!(all.iter().all(|m| c.holds(m)), "{f}");
    }
}

#[test]
fn membership_examples() {
    let g = corpus::group_signature();
    let c2 = parse_model("universe 2\nfun mul: (0,0)=0 (0,1)=1 (1,0)=1 (1,1)=0\nconst e = 0", &g).unwrap();
    assert!(theta_star_sem(&c2, &corpus::group_axioms(), 2).unwrap());
    let r = theta_star_membership(&c2, &corpus::group_axioms(), 2, 3, 4).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);

    let bad = parse_model("universe 2\nfun mul: (0,0)=0 (0,1)=1 (1,0)=1 (1,1)=1\nconst e = 0", &g).unwrap();
    for k in 2..=4 {
        assert!(!theta_star_sem(&bad, &corpus::group_axioms(), k).unwrap());
        let r = theta_star_membership(&bad, &corpus::group_axioms(), k, 3, 4).unwrap();
        assert_eq!(r.verdict, Verdict::Verified, "{}", r.to_text());
        assert!(r.details.iter().any(|d| d.contains("separated")));
    }
}

#[test]
fn demo_examples() {
    assert_eq!(run_demo("quasigroup", Some(2)).unwrap().verdict, Verdict::Verified);
    assert_eq!(run_demo("wellfounded", None).unwrap().verdict, Verdict::Verified);
    let r = run_demo("maltsev", Some(2)).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    let cex = r.counterexample.expect("separation exhibit");
    assert!(cex.model.starts_with("universe 2"));
    assert!(run_demo("theorem1", None).unwrap().is_verified());
    assert!(run_demo("density", Some(3)).unwrap().is_verified());
    assert!(run_demo("no-such-demo", None).is_err());
}

#[test]
fn reports_are_deterministic() {
    let runs: Vec<String> = (0..2)
        .map(|_| {
            let mut out = run_demo("abelian", Some(2)).unwrap().to_json();
            let s = corpus::binary_signature();
            let f = parse_formula("(forall (x) (exists (y) (R x y)))", &s).unwrap();
            out += &witness_bound_scan(&s, &f, 3).unwrap().report.to_json();
            out
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(!runs[0].contains("runtime_ms"));
}

// θ* at bound k passes from a model to its submodels, for the corpus over
// the binary relation and the monadic predicates.
#[test]
fn theta_star_passes_to_submodels() {
    let k = 4;
    let entries: Vec<_> = corpus::relational_corpus()
        .into_iter()
        .chain(corpus::monadic_corpus())
        .collect();
    for e in entries {
        // θ* does not distinguish isomorphic models
        let mut known: HashMap<FiniteModel, bool> = HashMap::new();
        let mut star = |m: &FiniteModel| {
            *known
                .entry(m.canonical_form())
                .or_insert_with(|| theta_star_sem(m, &e.formula, k).unwrap())
        };
        for b in collect_models_upto(&e.sig, 4, None).unwrap() {
            if !theta_star_sem(&b, &e.formula, k).unwrap() {
                continue;
            }
            for sub in enumerate_subuniverses(&b).unwrap().filter(|s| s.len() < b.size()) {
                let (a, _) = b.induced(&sub);
                assert!(star(&a), "{}", e.name);
            }
        }
    }
}

#[test]
fn group_tables_match_oracle() {
    let g = corpus::group_signature();
    for n in 1..=4 {
        let found = submodel_core::search::collect_models_par(g.clone(), n, Some(&corpus::group_axioms())).unwrap();
        let expected: usize = oracle::latin_squares(n)
            .iter()
            .filter(|t| oracle::is_group(t, n))
            .count()
            * n;
        assert_eq!(found.len(), expected, "order {n}");
    }
}

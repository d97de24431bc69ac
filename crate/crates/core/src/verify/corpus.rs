//! Built-in signatures and sentences used by the checks and demos.

use std::sync::Arc;

use crate::parse::{parse_formula, parse_signature};
use crate::syntax::{Formula, Signature};

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub sig: Arc<Signature>,
    pub formula: Formula,
}

fn sig(text: &str) -> Arc<Signature> {
    Arc::new(parse_signature(text).expect("built-in signature"))
}

fn entries(sig: &Arc<Signature>, prefix: &str, texts: &[&str]) -> Vec<Entry> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| Entry {
            name: format!("{prefix}{}", i + 1),
            sig: sig.clone(),
            formula: parse_formula(t, sig).unwrap_or_else(|e| panic!("built-in formula {t}: {e}")),
        })
        .collect()
}

pub fn monadic_signature() -> Arc<Signature> {
    sig("pred P/1\npred Q/1")
}

pub fn binary_signature() -> Arc<Signature> {
    sig("pred R/2\nequality on")
}

pub fn unary_function_signature() -> Arc<Signature> {
    sig("fun f/1\npred P/1\nequality on")
}

pub fn order_signature() -> Arc<Signature> {
    sig("pred </2\nequality on")
}

pub fn group_signature() -> Arc<Signature> {
    sig("fun mul/2\nconst e\nequality on")
}

pub fn groupoid_signature() -> Arc<Signature> {
    sig("fun mul/2\nequality on")
}

const BINARY: &[&str] = &[
    "(exists (x) (R x x))",
    "(forall (x) (R x x))",
    "(forall (x) (exists (y) (R x y)))",
    "(exists (x) (forall (y) (R x y)))",
    "(forall (x y) (implies (R x y) (R y x)))",
    "(forall (x y z) (implies (and (R x y) (R y z)) (R x z)))",
    "(exists (x y) (and (R x y) (not (R y x))))",
    "(forall (x) (exists (y) (and (R x y) (not (R y x)))))",
    "(exists (x) (forall (y) (not (R y x))))",
    "(forall (x y) (or (R x y) (R y x)))",
    "(and (not (exists (x) (R x x))) (forall (x) (exists (y) (R x y))))",
    "(forall (x) (or (R x x) (exists (y) (and (R x y) (forall (z) (implies (R y z) (R z y)))))))",
    "(forall (x y) (implies (and (R x y) (R y x)) (= x y)))",
    "(exists (x y) (not (= x y)))",
    "(forall (x y) (= x y))",
    "(exists (x) (forall (y) (or (= x y) (R x y))))",
];

const MONADIC_EQ: &[&str] = &[
    "(exists (x) (P x))",
    "(forall (x) (P x))",
    "(exists (x) (and (P x) (not (Q x))))",
    "(forall (x) (implies (P x) (Q x)))",
    "(exists (x) (forall (y) (or (P x) (Q y))))",
    "(forall (x) (exists (y) (or (and (P x) (not (Q y))) (and (not (P x)) (Q y)))))",
    "(exists (x y) (and (P x) (Q y) (not (= x y))))",
    "(forall (x y) (implies (and (P x) (P y)) (= x y)))",
    "(and (exists (x) (P x)) (forall (y) (Q y)))",
];

/// Sentences over relational signatures with at most two predicates.
pub fn relational_corpus() -> Vec<Entry> {
    let mut out = entries(&binary_signature(), "bin", BINARY);
    out.extend(entries(&sig("pred P/1\npred Q/1\nequality on"), "mon", MONADIC_EQ));
    out
}

const MONADIC: &[&str] = &[
    "(exists (x) (P x))",
    "(forall (x) (P x))",
    "(exists (x) (and (P x) (not (Q x))))",
    "(forall (x) (implies (P x) (Q x)))",
    "(exists (x) (forall (y) (or (P x) (Q y))))",
    "(forall (x) (exists (y) (or (P x) (not (Q y)))))",
    "(and (exists (x) (P x)) (forall (y) (Q y)))",
    "(forall (x) (or (P x) (not (P x))))",
    "(exists (x y) (and (P x) (Q y)))",
    "(forall (x) (exists (y) (or (and (P x) (Q y)) (and (not (P x)) (not (Q y))))))",
    "(and (not (exists (x) (and (P x) (Q x)))) (exists (x) (P x)) (exists (y) (Q y)))",
    "(forall (x) (or (P x) (exists (y) (and (Q y) (not (P y))))))",
    "(exists (x) (and (P x) (forall (y) (implies (Q y) (P y)))))",
    "(forall (x y) (or (P x) (Q y)))",
    "(not (forall (x) (exists (y) (and (P x) (not (Q y))))))",
    "(exists (x) (forall (y) (exists (z) (and (or (P x) (Q y)) (not (P z))))))",
];

/// Sentences over the purely monadic signature `{P/1, Q/1}` without equality.
pub fn monadic_corpus() -> Vec<Entry> {
    entries(&monadic_signature(), "monadic", MONADIC)
}

const UNARY_FUNCTION: &[&str] = &[
    "(forall (x) (implies (P x) (P (f x))))",
    "(forall (x) (not (= (f x) x)))",
    "(exists (x) (and (P x) (= (f x) x)))",
    "(exists (x) (forall (y) (or (P (f x)) (not (P y)))))",
    "(exists (x y) (and (= (f x) y) (not (P y)) (P x)))",
    "(forall (x y) (implies (= (f x) (f y)) (= x y)))",
    "(exists (x) (forall (y) (not (= (f y) x))))",
];

/// Prenex existential-universal sentences and combinations of them, over
/// relational and unary-function signatures.
pub fn ea_corpus() -> Vec<Entry> {
    let mut out: Vec<Entry> = relational_corpus()
        .into_iter()
        .chain(entries(&unary_function_signature(), "fun", UNARY_FUNCTION))
        .filter(|e| crate::syntax::classify(&crate::transforms::nnf(&e.formula)).is_ea_combination)
        .collect();
    out.extend(entries(
        &binary_signature(),
        "combo",
        &[
            "(or (exists (x) (forall (y) (R x y))) (and (exists (u) (R u u)) (exists (v w) (and (R v w) (not (R w v))))))",
            "(and (exists (x) (forall (y) (R x y))) (exists (u) (forall (v) (R v u))))",
        ],
    ));
    out
}

/// Universal and existential sentences for the preservation checks.
pub fn preservation_corpus() -> Vec<Entry> {
    relational_corpus()
        .into_iter()
        .chain(entries(&unary_function_signature(), "fun", UNARY_FUNCTION))
        .filter(|e| {
            let c = crate::syntax::classify(&e.formula);
            c.is_universal || c.is_existential
        })
        .collect()
}

fn one(sig: &Signature, text: &str) -> Formula {
    parse_formula(text, sig).unwrap_or_else(|e| panic!("built-in formula {text}: {e}"))
}

pub const ASSOCIATIVITY: &str = "(forall (x y z) (= (mul (mul x y) z) (mul x (mul y z))))";
pub const COMMUTATIVITY: &str = "(forall (x y) (= (mul x y) (mul y x)))";
pub const LEFT_CANCELLATION: &str = "(forall (x y z) (implies (= (mul x y) (mul x z)) (= y z)))";
pub const RIGHT_CANCELLATION: &str = "(forall (x y z) (implies (= (mul y x) (mul z x)) (= y z)))";

/// Associativity, both cancellation laws, and `∀x∃y x·y = e`, `∀x∃y y·x = e`.
/// The constant is not required to be the identity; on finite tables the
/// conjunction holds exactly when the operation is a group, whatever `e` is.
pub fn group_axioms() -> Formula {
    let s = group_signature();
    Formula::And(vec![
        one(&s, ASSOCIATIVITY),
        one(&s, LEFT_CANCELLATION),
        one(&s, RIGHT_CANCELLATION),
        one(&s, "(forall (x) (exists (y) (= (mul x y) e)))"),
        one(&s, "(forall (x) (exists (y) (= (mul y x) e)))"),
    ])
}

/// Associativity, commutativity, cancellation and `∀x∃y x·y = e`.
pub fn abelian_axioms() -> Formula {
    let s = group_signature();
    Formula::And(vec![
        one(&s, ASSOCIATIVITY),
        one(&s, COMMUTATIVITY),
        one(&s, LEFT_CANCELLATION),
        one(&s, RIGHT_CANCELLATION),
        one(&s, "(forall (x) (exists (y) (= (mul x y) e)))"),
    ])
}

/// Associativity, commutativity and cancellation over `{mul, e}`.
pub fn abelian_universal_part() -> Formula {
    let s = group_signature();
    Formula::And(vec![
        one(&s, ASSOCIATIVITY),
        one(&s, COMMUTATIVITY),
        one(&s, LEFT_CANCELLATION),
        one(&s, RIGHT_CANCELLATION),
    ])
}

pub fn cancellation(sig: &Signature) -> Formula {
    Formula::And(vec![one(sig, LEFT_CANCELLATION), one(sig, RIGHT_CANCELLATION)])
}

/// Cancellation plus solvability of `x·z = y` and `z·x = y`, over `{mul}`.
pub fn quasigroup_axioms() -> Formula {
    let s = groupoid_signature();
    Formula::And(vec![
        one(&s, LEFT_CANCELLATION),
        one(&s, RIGHT_CANCELLATION),
        one(&s, "(forall (x y) (exists (z) (= (mul x z) y)))"),
        one(&s, "(forall (x y) (exists (z) (= (mul z x) y)))"),
    ])
}

/// Quasi-identities true in every group, over `{mul, e}`.
pub fn maltsev_quasi_identities() -> Vec<(String, Formula)> {
    let s = group_signature();
    [
        ("left-cancellation", LEFT_CANCELLATION),
        ("right-cancellation", RIGHT_CANCELLATION),
        (
            "maltsev-4",
            "(forall (a b c d x y u v) (implies (and (= (mul a x) (mul b y)) (= (mul c x) (mul d y)) (= (mul a u) (mul b v))) (= (mul c u) (mul d v))))",
        ),
        ("associativity", ASSOCIATIVITY),
    ]
    .into_iter()
    .map(|(n, t)| (n.to_string(), one(&s, t)))
    .collect()
}

pub fn strict_partial_order() -> Formula {
    one(
        &order_signature(),
        "(and (forall (x) (not (< x x))) (forall (x y z) (implies (and (< x y) (< y z)) (< x z))))",
    )
}

pub fn linear_order() -> Formula {
    let s = order_signature();
    Formula::And(vec![
        strict_partial_order(),
        one(&s, "(forall (x y) (or (< x y) (< y x) (= x y)))"),
    ])
}

pub fn no_minimal_element() -> Formula {
    one(&order_signature(), "(forall (x) (exists (y) (< y x)))")
}

/// Density together with the existence of a strictly comparable pair; a
/// one-point order is vacuously dense but not a dense order in any useful
/// sense.
pub fn density() -> Formula {
    one(
        &order_signature(),
        "(and (exists (x y) (< x y)) (forall (x y) (implies (< x y) (exists (z) (and (< x z) (< z y))))))",
    )
}

/// "If `<` is a linear order, it has no first or no last element."
pub fn no_first_or_last() -> Formula {
    let s = order_signature();
    Formula::implies(
        linear_order(),
        Formula::Or(vec![
            one(&s, "(forall (x) (exists (y) (< y x)))"),
            one(&s, "(forall (x) (exists (y) (< x y)))"),
        ]),
    )
}

#[derive(Debug, Clone)]
pub struct ReductionPair {
    pub name: String,
    pub sig: Arc<Signature>,
    pub phi: Formula,
    /// Σ⁰₂, equivalent to `phi` under the fragment `¬θ_{≤n}(phi)`.
    pub psi: Formula,
    pub n: usize,
    pub max_size: usize,
}

pub fn theorem1_pairs() -> Vec<ReductionPair> {
    let m = monadic_signature();
    let b = binary_signature();
    let pair = |name: &str, sig: &Arc<Signature>, phi: &str, psi: &str, n: usize, max_size: usize| ReductionPair {
        name: name.to_string(),
        sig: sig.clone(),
        phi: one(sig, phi),
        psi: one(sig, psi),
        n,
        max_size,
    };
    vec![
        pair(
            "swap",
            &m,
            "(forall (x) (exists (y) (or (P x) (Q y))))",
            "(exists (y) (forall (x) (or (P x) (Q y))))",
            1,
            4,
        ),
        pair(
            "sigma2",
            &b,
            "(exists (x) (forall (y) (R x y)))",
            "(exists (x) (forall (y) (R x y)))",
            1,
            4,
        ),
        // up to size n the fragment forces ¬φ, and a loop would be a
        // one-element model of φ
        pair(
            "serial",
            &b,
            "(forall (x) (exists (y) (R x y)))",
            "(exists (x) (R x x))",
            3,
            3,
        ),
    ]
}

//! Normal forms and rewriting: negation normal form, the ∃∀ witness bound,
//! the monadic normal form, one-parameter relativization and equality
//! elimination, and the closed-form θ sentence over monadic signatures.
//!
//! Every rule here is structural: it recurses on strict subformulas, and the
//! only growth (DNF, instance expansion) is bounded by the finite index sets
//! involved.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::modal::{builder_vars, relativize};
use crate::syntax::{classify, Formula, Signature, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("formula is not a conjunction/disjunction of prenex existential-universal sentences")]
    NotEaCombination,
    #[error("formula is not monadic-like: an atom mentions two or more variables")]
    NotMonadicLike,
    #[error("expected a single quantified variable over an open one-variable formula")]
    NotOneParameter,
    #[error("equality atom `{0}` does not match a relativization pattern")]
    UnexpectedEquality(String),
    #[error("distinctness clause found; the exact-cardinality builder has no monadic elimination")]
    DistinctnessClause,
    #[error("signature must be purely monadic and without equality")]
    NotPurelyMonadic,
    #[error("formula is not a sentence")]
    NotASentence,
}

/// Negation normal form: negations only on atoms. `(not (and))` becomes
/// `(or)` and vice versa.
pub fn nnf(f: &Formula) -> Formula {
    push(f, false)
}

fn push(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::Pred(..) | Formula::Eq(..) => {
            if neg {
                Formula::not(f.clone())
            } else {
                f.clone()
            }
        }
        Formula::Not(g) => push(g, !neg),
        Formula::And(gs) | Formula::Or(gs) => {
            let kids = gs.iter().map(|g| push(g, neg)).collect();
            if matches!(f, Formula::And(_)) != neg {
                Formula::And(kids)
            } else {
                Formula::Or(kids)
            }
        }
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let body = Box::new(push(g, neg));
            if matches!(f, Formula::Exists(..)) != neg {
                Formula::Exists(vs.clone(), body)
            } else {
                Formula::Forall(vs.clone(), body)
            }
        }
    }
}

/// Witness bound for a conjunction/disjunction of prenex ∃∀ sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EaBound {
    /// Largest existential width over all disjunct selections.
    pub raw: usize,
    /// `max(raw, 1)`: universes are nonempty, so a purely universal sentence
    /// still needs a one-element witness.
    pub bound: usize,
    /// Summed width of each disjunct selection, in selection order.
    pub selections: Vec<usize>,
}

/// Prenex components combine by summing under `and` and taking the maximum
/// under `or`; a component contributes its leading existential width.
pub fn ea_witness_bound(f: &Formula) -> Result<EaBound, TransformError> {
    let n = nnf(f);
    if !classify(&n).is_ea_combination {
        return Err(TransformError::NotEaCombination);
    }
    let selections = selections(&n);
    let raw = selections.iter().copied().max().unwrap_or(0);
    Ok(EaBound {
        raw,
        bound: raw.max(1),
        selections,
    })
}

fn selections(f: &Formula) -> Vec<usize> {
    match f {
        Formula::Exists(vs, g) => selections(g).into_iter().map(|w| w + vs.len()).collect(),
        Formula::Or(gs) => gs.iter().flat_map(selections).collect(),
        Formula::And(gs) => gs.iter().fold(vec![0], |acc, g| {
            let s = selections(g);
            acc.iter().flat_map(|a| s.iter().map(move |b| a + b)).collect()
        }),
        _ => vec![0],
    }
}

/// Rewrites a monadic-like formula into a Boolean combination of open
/// formulas and one-variable existential sentences `∃y δ(y)`. Universal
/// blocks become `¬∃¬`; each existential block is distributed over the DNF
/// of its body and split per variable.
pub fn normalize_monadic(f: &Formula) -> Result<Formula, TransformError> {
    if !classify(f).is_monadic_like {
        return Err(TransformError::NotMonadicLike);
    }
    Ok(norm(&f.flattened()))
}

fn norm(f: &Formula) -> Formula {
    match f {
        Formula::Pred(..) | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(norm(g)),
        Formula::And(gs) => Formula::And(gs.iter().map(norm).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(norm).collect()),
        Formula::Forall(vs, g) => Formula::not(norm(&Formula::Exists(
            vs.clone(),
            Box::new(Formula::not((**g).clone())),
        ))),
        Formula::Exists(vs, g) => {
            let body = norm(g);
            let disjuncts = prune_dnf(dnf(&bool_nnf(&body, false)));
            Formula::disjunction(disjuncts.into_iter().map(|lits| split_block(vs, lits)).collect())
        }
    }
}

// Pushes negation through the Boolean layer only; quantified subformulas are
// treated as atoms.
fn bool_nnf(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::Not(g) => bool_nnf(g, !neg),
        Formula::And(gs) | Formula::Or(gs) => {
            let kids = gs.iter().map(|g| bool_nnf(g, neg)).collect();
            if matches!(f, Formula::And(_)) != neg {
                Formula::And(kids)
            } else {
                Formula::Or(kids)
            }
        }
        _ if neg => Formula::not(f.clone()),
        _ => f.clone(),
    }
}

fn dnf(f: &Formula) -> Vec<Vec<Formula>> {
    match f {
        Formula::Or(gs) => gs.iter().flat_map(dnf).collect(),
        Formula::And(gs) => gs.iter().fold(vec![Vec::new()], |acc, g| {
            let d = dnf(g);
            acc.iter()
                .flat_map(|a| {
                    d.iter().map(move |b| {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        c
                    })
                })
                .collect()
        }),
        other => vec![vec![other.clone()]],
    }
}

// Drops repeated literals and repeated disjuncts, and contradictory
// disjuncts as long as one disjunct is left.
fn prune_dnf(disjuncts: Vec<Vec<Formula>>) -> Vec<Vec<Formula>> {
    let mut out: Vec<Vec<Formula>> = Vec::new();
    let mut contradictory = None;
    for lits in disjuncts {
        let mut kept: Vec<Formula> = Vec::new();
        for l in lits {
            if !kept.contains(&l) {
                kept.push(l);
            }
        }
        let clash = kept.iter().any(|l| match l {
            Formula::Not(a) => kept.contains(a),
            _ => false,
        });
        if clash {
            contradictory.get_or_insert(kept);
        } else if !out.contains(&kept) {
            out.push(kept);
        }
    }
    if out.is_empty() {
        out.extend(contradictory);
    }
    out
}

// One DNF disjunct under the block `vs`: literals without a block variable go
// first, then one `∃v` per block variable over its literals.
fn split_block(vs: &[Var], lits: Vec<Formula>) -> Formula {
    let mut outside = Vec::new();
    let mut groups: BTreeMap<usize, Vec<Formula>> = BTreeMap::new();
    for lit in lits {
        let free = lit.free_vars();
        match vs.iter().position(|v| free.contains(v)) {
            Some(i) => groups.entry(i).or_default().push(lit),
            None => outside.push(lit),
        }
    }
    for (i, group) in groups {
        outside.push(Formula::exists(&[&vs[i]], Formula::conjunction(group)));
    }
    Formula::conjunction(outside)
}

/// True when no quantifier occurs under another and every block binds a
/// single variable.
pub fn is_monadic_normal(f: &Formula) -> bool {
    fn go(f: &Formula, under: bool) -> bool {
        match f {
            Formula::Pred(..) | Formula::Eq(..) => true,
            Formula::Not(g) => go(g, under),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(|g| go(g, under)),
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => !under && vs.len() == 1 && go(g, true),
        }
    }
    go(f, false)
}

/// `(∃y δ)^X` as `⋁ δ(x_α)` and `(∀y δ)^X` as `⋀ δ(x_α)`.
pub fn relativize_one_param(f: &Formula, xs: &[Var]) -> Result<Formula, TransformError> {
    let (Formula::Exists(vs, body) | Formula::Forall(vs, body)) = f else {
        return Err(TransformError::NotOneParameter);
    };
    let [y] = vs.as_slice() else {
        return Err(TransformError::NotOneParameter);
    };
    if !body.is_open() || body.free_vars().iter().any(|v| v != y) {
        return Err(TransformError::NotOneParameter);
    }
    let instances = xs
        .iter()
        .map(|x| body.substitute(&BTreeMap::from([(y.clone(), Term::Var(x.clone()))])))
        .collect();
    Ok(if matches!(f, Formula::Exists(..)) {
        Formula::disjunction(instances)
    } else {
        Formula::conjunction(instances)
    })
}

/// Relativization to `xs` with every bounded block replaced by the finite
/// disjunction/conjunction of its instances over `xs`. Equivalent to
/// `relativize(f, xs)` and free of the membership equalities.
pub fn relativize_expanded(f: &Formula, xs: &[Var]) -> Formula {
    let avoid: BTreeSet<Var> = xs.iter().cloned().collect();
    expand(&f.rename_bound_apart(&avoid), xs)
}

fn expand(f: &Formula, xs: &[Var]) -> Formula {
    match f {
        Formula::Pred(..) | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(expand(g, xs)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| expand(g, xs)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| expand(g, xs)).collect()),
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let body = expand(g, xs);
            let instances = instances(vs, &body, xs);
            if matches!(f, Formula::Exists(..)) {
                Formula::disjunction(instances)
            } else {
                Formula::conjunction(instances)
            }
        }
    }
}

// `body[vs := t]` for every tuple `t` over `xs`, lexicographic in `t`.
fn instances(vs: &[Var], body: &Formula, xs: &[Var]) -> Vec<Formula> {
    let mut out = Vec::new();
    let total = xs.len().pow(vs.len() as u32);
    for code in 0..total {
        let tuple = crate::model::decode(code, xs.len(), vs.len());
        let map: BTreeMap<Var, Term> = vs
            .iter()
            .zip(tuple)
            .map(|(v, i)| (v.clone(), Term::Var(xs[i].clone())))
            .collect();
        out.push(body.substitute(&map));
    }
    out
}

/// Removes the equalities introduced by relativization over a monadic
/// signature: a block `∃ȳ (δ ∧ ȳ ∈ X)` becomes the disjunction of the
/// instances of `δ` over `X`, and `∀ȳ (ȳ ∉ X ∨ δ)` the conjunction. Empty
/// conjuncts are dropped. Any other equality is rejected.
pub fn eliminate_equality_monadic(f: &Formula) -> Result<Formula, TransformError> {
    if !f.uses_equality() {
        return Ok(f.clone());
    }
    elim(f)
}

fn elim(f: &Formula) -> Result<Formula, TransformError> {
    Ok(match f {
        Formula::Pred(..) => f.clone(),
        Formula::Eq(..) => return Err(TransformError::UnexpectedEquality(f.to_string())),
        Formula::Not(g) => {
            if is_distinctness(g) {
                return Err(TransformError::DistinctnessClause);
            }
            Formula::not(elim(g)?)
        }
        Formula::And(gs) => {
            let kids = gs
                .iter()
                .filter(|g| **g != Formula::top())
                .map(elim)
                .collect::<Result<Vec<_>, _>>()?;
            Formula::conjunction(kids)
        }
        Formula::Or(gs) => Formula::Or(gs.iter().map(elim).collect::<Result<_, _>>()?),
        Formula::Exists(vs, g) => match g.as_ref() {
            Formula::And(parts) if parts.len() == 2 => match membership_targets(vs, &parts[1]) {
                Some(xs) => block_instances(true, vs, &elim(&parts[0])?, &xs)?,
                None => Formula::Exists(vs.clone(), Box::new(elim(g)?)),
            },
            _ => Formula::Exists(vs.clone(), Box::new(elim(g)?)),
        },
        Formula::Forall(vs, g) => match g.as_ref() {
            Formula::Or(parts) if parts.len() == 2 => match &parts[0] {
                Formula::Not(m) => match membership_targets(vs, m) {
                    Some(xs) => block_instances(false, vs, &elim(&parts[1])?, &xs)?,
                    None => Formula::Forall(vs.clone(), Box::new(elim(g)?)),
                },
                _ => Formula::Forall(vs.clone(), Box::new(elim(g)?)),
            },
            _ => Formula::Forall(vs.clone(), Box::new(elim(g)?)),
        },
    })
}

fn block_instances(existential: bool, vs: &[Var], body: &Formula, xs: &[Var]) -> Result<Formula, TransformError> {
    if let [_] = vs {
        if body.is_open() && body.free_vars().len() <= 1 {
            let q = if existential {
                Formula::Exists(vs.to_vec(), Box::new(body.clone()))
            } else {
                Formula::Forall(vs.to_vec(), Box::new(body.clone()))
            };
            return relativize_one_param(&q, xs);
        }
    }
    let inst = instances(vs, body, xs);
    Ok(if existential {
        Formula::disjunction(inst)
    } else {
        Formula::conjunction(inst)
    })
}

// For the membership clause of block `vs` (one `y = x0 ∨ ... ∨ y = x_{n-1}`
// per block variable, as emitted by `relativize`), the target variables.
fn membership_targets(vs: &[Var], m: &Formula) -> Option<Vec<Var>> {
    let clauses: Vec<&Formula> = match (vs.len(), m) {
        (1, _) => vec![m],
        (_, Formula::And(cs)) if cs.len() == vs.len() => cs.iter().collect(),
        _ => return None,
    };
    let mut targets: Option<Vec<Var>> = None;
    for (y, c) in vs.iter().zip(clauses) {
        let eqs: Vec<&Formula> = match c {
            Formula::Or(es) => es.iter().collect(),
            e @ Formula::Eq(..) => vec![e],
            _ => return None,
        };
        let mut xs = Vec::new();
        for e in eqs {
            match e {
                Formula::Eq(Term::Var(a), Term::Var(b)) if a == y && !vs.contains(b) => xs.push(b.clone()),
                _ => return None,
            }
        }
        if xs.is_empty() || targets.as_ref().is_some_and(|t| *t != xs) {
            return None;
        }
        targets = Some(xs);
    }
    targets
}

fn is_distinctness(f: &Formula) -> bool {
    let eqs: Vec<&Formula> = match f {
        Formula::Or(es) if !es.is_empty() => es.iter().collect(),
        e @ Formula::Eq(..) => vec![e],
        _ => return false,
    };
    eqs.iter().all(|e| matches!(e, Formula::Eq(Term::Var(_), Term::Var(_))))
}

/// An equality-free sentence equivalent to θ(φ) on every model of a purely
/// monadic signature: normalize, take ν from the ∃∀ bound, relativize to
/// `x0..x_{ν-1}`, expand the relativized blocks, quantify `X`, normalize.
pub fn build_theta_monadic(sig: &Signature, f: &Formula) -> Result<Formula, TransformError> {
    if !sig.is_purely_monadic() || sig.equality_allowed() {
        return Err(TransformError::NotPurelyMonadic);
    }
    if !f.is_sentence() {
        return Err(TransformError::NotASentence);
    }
    let normal = nnf(&normalize_monadic(&nnf(f))?);
    let nu = ea_witness_bound(&normal)?.bound;
    let xs = builder_vars(nu);
    let rel = relativize(&normal, &xs).map_err(|_| TransformError::NotASentence)?;
    let body = eliminate_equality_monadic(&rel)?;
    normalize_monadic(&Formula::Exists(xs, Box::new(body)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::evaluate_sentence;
    use crate::parse::{parse_formula, parse_signature};
    use crate::search::collect_models_upto;
    use std::sync::Arc;

    fn monadic() -> Signature {
        parse_signature("pred P/1\npred Q/1").unwrap()
    }

    fn f(text: &str) -> Formula {
        parse_formula(text, &monadic()).unwrap()
    }

    fn equivalent(a: &Formula, b: &Formula, max: usize) -> bool {
        let sig = Arc::new(monadic());
        collect_models_upto(&sig, max, None)
            .unwrap()
            .iter()
            .all(|m| evaluate_sentence(m, a).unwrap() == evaluate_sentence(m, b).unwrap())
    }

    #[test]
    fn nnf_examples() {
        assert_eq!(nnf(&f("(not (exists (x) (P x)))")), f("(forall (x) (not (P x)))"));
        assert_eq!(nnf(&f("(not (and (P x) (Q x)))")), f("(or (not (P x)) (not (Q x)))"));
        assert_eq!(nnf(&f("(not (not (P x)))")), f("(P x)"));
        assert_eq!(nnf(&f("(not (and))")), Formula::bottom());
    }

    #[test]
    fn ea_bound_examples() {
        let r = parse_signature("pred R/2\npred P/1\npred Q/1").unwrap();
        let g = |t: &str| parse_formula(t, &r).unwrap();
        assert_eq!(
            ea_witness_bound(&g("(exists (x y) (forall (z) (R x y)))"))
                .unwrap()
                .bound,
            2
        );
        let combo = g("(or (exists (x) (forall (y) (R x y))) (and (exists (u) (P u)) (exists (v w) (R v w))))");
        let b = ea_witness_bound(&combo).unwrap();
        assert_eq!(b.bound, 3);
        assert_eq!(b.selections, vec![1, 3]);
        let univ = ea_witness_bound(&g("(forall (x) (P x))")).unwrap();
        assert_eq!((univ.raw, univ.bound), (0, 1));
        assert_eq!(
            ea_witness_bound(&g("(forall (x) (exists (y) (R x y)))")),
            Err(TransformError::NotEaCombination)
        );
        // negation is pushed before classifying
        assert_eq!(
            ea_witness_bound(&g("(not (forall (x) (exists (y) (R x y))))"))
                .unwrap()
                .bound,
            1
        );
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_monadic(&f("(exists (x y) (and (P x) (Q y)))")).unwrap(),
            f("(and (exists (x) (P x)) (exists (y) (Q y)))")
        );
        assert_eq!(
            normalize_monadic(&f("(exists (x) (P x))")).unwrap(),
            f("(exists (x) (P x))")
        );
        let taut = f("(forall (x) (or (P x) (not (P x))))");
        let n = normalize_monadic(&taut).unwrap();
        assert_eq!(n, f("(not (exists (x) (and (not (P x)) (P x))))"));
        assert!(equivalent(&taut, &n, 4));

        let r = parse_signature("pred R/2").unwrap();
        assert_eq!(
            normalize_monadic(&parse_formula("(exists (x y) (R x y))", &r).unwrap()),
            Err(TransformError::NotMonadicLike)
        );
    }

    #[test]
    fn normalize_pulls_out_and_splits() {
        let g = f("(forall (x) (exists (y) (or (and (P x) (Q y)) (not (Q x)))))");
        let n = normalize_monadic(&g).unwrap();
        assert!(is_monadic_normal(&n), "{n}");
        assert!(equivalent(&g, &n, 4));
    }

    #[test]
    fn one_param_examples() {
        let xs = vec!["x0".to_string(), "x1".to_string()];
        assert_eq!(
            relativize_one_param(&f("(exists (y) (P y))"), &xs).unwrap(),
            f("(or (P x0) (P x1))")
        );
        assert_eq!(
            relativize_one_param(&f("(forall (y) (P y))"), &xs[..1]).unwrap(),
            f("(P x0)")
        );
        assert!(!relativize_one_param(&f("(exists (y) (P y))"), &xs)
            .unwrap()
            .uses_equality());
        assert_eq!(
            relativize_one_param(&f("(exists (y z) (P y))"), &xs),
            Err(TransformError::NotOneParameter)
        );
        assert_eq!(
            relativize_one_param(&f("(exists (y) (exists (z) (P z)))"), &xs),
            Err(TransformError::NotOneParameter)
        );
    }

    #[test]
    fn eliminate_examples() {
        let eq = monadic().with_equality(true);
        let g = parse_formula("(exists (y) (and (P y) (or (= y x0) (= y x1))))", &eq).unwrap();
        assert_eq!(eliminate_equality_monadic(&g).unwrap(), f("(or (P x0) (P x1))"));
        let plain = f("(exists (y) (P y))");
        assert_eq!(eliminate_equality_monadic(&plain).unwrap(), plain);
        let dist = parse_formula("(exists (x0 x1) (and (P x0) (not (= x0 x1))))", &eq).unwrap();
        assert_eq!(
            eliminate_equality_monadic(&dist),
            Err(TransformError::DistinctnessClause)
        );
        let stray = parse_formula("(exists (y) (= y y))", &eq).unwrap();
        assert!(matches!(
            eliminate_equality_monadic(&stray),
            Err(TransformError::UnexpectedEquality(_))
        ));
    }

    #[test]
    fn theta_monadic_examples() {
        let sig = monadic();
        let ex = f("(exists (x) (P x))");
        let chi = build_theta_monadic(&sig, &ex).unwrap();
        assert!(equivalent(&chi, &ex, 4));
        let chi = build_theta_monadic(&sig, &f("(forall (x) (P x))")).unwrap();
        assert!(equivalent(&chi, &ex, 4));
        assert!(!chi.uses_equality());
        let phi = f("(and (exists (x) (P x)) (forall (y) (Q y)))");
        let chi = build_theta_monadic(&sig, &phi).unwrap();
        assert!(is_monadic_normal(&chi));
        // a submodel needs one element with P while all of its elements have Q
        assert!(equivalent(&chi, &f("(exists (x) (and (P x) (Q x)))"), 4));
        assert!(!equivalent(&chi, &f("(and (exists (x) (P x)) (exists (y) (Q y)))"), 2));
        let models = collect_models_upto(&Arc::new(sig.clone()), 4, None).unwrap();
        for m in &models {
            assert_eq!(
                evaluate_sentence(m, &chi).unwrap(),
                crate::modal::theta_sem(m, &phi).unwrap()
            );
        }

        let eq = monadic().with_equality(true);
        assert_eq!(build_theta_monadic(&eq, &ex), Err(TransformError::NotPurelyMonadic));
    }

    #[test]
    fn expansion_matches_relativization() {
        let r = parse_signature("pred R/2\nequality on").unwrap();
        let g = parse_formula("(forall (x) (exists (y) (R x y)))", &r).unwrap();
        let xs = vec!["x0".to_string(), "x1".to_string()];
        let rel = relativize(&g, &xs).unwrap();
        let exp = relativize_expanded(&g, &xs);
        assert!(!exp.uses_equality());
        let sig = Arc::new(r);
        for m in collect_models_upto(&sig, 3, None).unwrap() {
            for a in 0..m.size() {
                for b in 0..m.size() {
                    let env = BTreeMap::from([("x0".to_string(), a), ("x1".to_string(), b)]);
                    assert_eq!(
                        crate::eval::evaluate(&m, &rel, &env).unwrap(),
                        crate::eval::evaluate(&m, &exp, &env).unwrap()
                    );
                }
            }
        }
    }
}

//! Exhaustive claim checks over all models up to a size bound.
//!
//! Models are visited in enumeration order (size, then tables), so the first
//! failure found is the least counterexample; `check_equiv` instead picks
//! the least disagreement under `FiniteModel::listing_key`. Work is spread over the rayon
//! pool but the reported failure never depends on the schedule.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::corpus::Entry;
use super::report::{Counterexample, Parameters, Report, Verdict};
use super::VerifyError;
use crate::eval::Compiled;
use crate::modal::{build_theta_le, theta_witness_compiled, Bound};
use crate::model::{enumerate_subuniverses, FiniteModel};
use crate::search::{collect_models_upto, ModelSearch};
use crate::syntax::{classify, Formula, Signature};
use crate::transforms::{build_theta_monadic, ea_witness_bound, is_monadic_normal, nnf, normalize_monadic};

fn list(v: &[usize]) -> String {
    format!("{{{}}}", v.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
}

/// φ and χ agree on every model of `sig` with at most `max_size` elements.
pub fn check_equiv(sig: &Arc<Signature>, phi: &Formula, chi: &Formula, max_size: usize) -> Result<Report, VerifyError> {
    let a = Compiled::new(sig, phi)?;
    let b = Compiled::new(sig, chi)?;
    if !a.is_sentence() || !b.is_sentence() {
        return Err(VerifyError::NotASentence);
    }
    let mut report = Report::new("equiv", Parameters::sizes(max_size));
    let mut checked = 0;
    for n in 1..=max_size {
        let models = crate::search::collect_models_par(sig.clone(), n, None)?;
        checked += models.len();
        if let Some((m, va)) = models
            .par_iter()
            .filter_map(|m| {
                let (va, vb) = (a.holds(m), b.holds(m));
                (va != vb).then_some((m, va))
            })
            .min_by_key(|(m, _)| m.listing_key())
        {
            report.refute(Counterexample::new(
                m,
                phi,
                Some(format!("first formula {va}, second {}", !va)),
            ));
            report.detail(format!("disagreement at size {n} after {checked} models"));
            return Ok(report);
        }
    }
    report.detail(format!("agree on all {checked} models"));
    Ok(report)
}

/// Smallest submodel of `model` satisfying `c`, if any: the first
/// subuniverse of least cardinality.
fn least_witness(model: &FiniteModel, c: &Compiled) -> Result<Option<Vec<usize>>, VerifyError> {
    let mut best: Option<Vec<usize>> = None;
    for sub in enumerate_subuniverses(model)? {
        if best.as_ref().is_some_and(|b| b.len() <= sub.len()) {
            continue;
        }
        if c.holds_in(model, &sub) {
            best = Some(sub);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct WitnessScan {
    /// Least `k` such that every model of φ up to the size bound has a
    /// submodel with at most `k` elements satisfying φ; 0 if φ has no models.
    pub bound: usize,
    pub report: Report,
}

pub fn witness_bound_scan(sig: &Arc<Signature>, phi: &Formula, max_size: usize) -> Result<WitnessScan, VerifyError> {
    let c = Compiled::new(sig, phi)?;
    if !c.is_sentence() {
        return Err(VerifyError::NotASentence);
    }
    let mut report = Report::new("witness-scan", Parameters::sizes(max_size));
    let mut bound = 0;
    let mut hardest: Option<(FiniteModel, Vec<usize>)> = None;
    let mut stuck_at_top = None;
    for n in 1..=max_size {
        let models = crate::search::collect_models_par(sig.clone(), n, Some(phi))?;
        let witnesses: Vec<Vec<usize>> = models
            .par_iter()
            .map(|m| least_witness(m, &c).map(|w| w.expect("the model itself satisfies φ")))
            .collect::<Result<_, _>>()?;
        let size_max = witnesses.iter().map(Vec::len).max().unwrap_or(0);
        report.detail(format!(
            "size {n}: {} models, largest least witness {size_max}",
            models.len()
        ));
        for (m, w) in models.iter().zip(&witnesses) {
            if w.len() > bound {
                bound = w.len();
                hardest = Some((m.clone(), w.clone()));
            }
            if n == max_size && w.len() == n && stuck_at_top.is_none() {
                stuck_at_top = Some(m.clone());
            }
        }
    }
    report.detail(format!("empirical bound {bound}"));
    if bound == 0 {
        report.detail("no models: bound vacuous");
    }
    match stuck_at_top {
        Some(m) if bound == max_size => {
            report.verdict = Verdict::ExhaustedWithoutDecision;
            report.counterexample = Some(Counterexample::new(
                &m,
                phi,
                Some(format!(
                    "no proper submodel satisfies the formula; a bound may exceed {max_size}"
                )),
            ));
        }
        _ => {
            if let Some((m, w)) = hardest {
                report.counterexample = None;
                report.detail(format!(
                    "bound attained by a model of size {} with witness {}",
                    m.size(),
                    list(&w)
                ));
            }
        }
    }
    Ok(WitnessScan { bound, report })
}

// Models of each signature in the corpus, enumerated once.
fn models_by_signature(corpus: &[Entry], max_size: usize) -> Result<BTreeMap<String, Vec<FiniteModel>>, VerifyError> {
    let mut out = BTreeMap::new();
    for e in corpus {
        let key = crate::parse::render_signature(&e.sig);
        if let std::collections::btree_map::Entry::Vacant(slot) = out.entry(key) {
            slot.insert(collect_models_upto(&e.sig, max_size, None)?);
        }
    }
    Ok(out)
}

/// `build_theta_le(φ, n)` evaluates like `θ_{≤n}(φ)` on every model.
pub fn builder_soundness(corpus: &[Entry], max_size: usize, ns: &[usize]) -> Result<Report, VerifyError> {
    let mut report = Report::new("builder-soundness", Parameters::sizes(max_size));
    let all = models_by_signature(corpus, max_size)?;
    let mut comparisons = 0usize;
    for e in corpus {
        let models = &all[&crate::parse::render_signature(&e.sig)];
        let phi = Compiled::new(&e.sig, &e.formula)?;
        for &n in ns {
            let built = build_theta_le(&e.sig, &e.formula, n)?;
            let bc = Compiled::new(&e.sig, &built)?;
            let bad = models
                .par_iter()
                .map(|m| -> Result<Option<(bool, bool)>, VerifyError> {
                    let syn = bc.holds(m);
                    let sem = theta_witness_compiled(m, &phi, Bound::AtMost(n))?.is_some();
                    Ok((syn != sem).then_some((syn, sem)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            comparisons += models.len();
            if let Some((i, (syn, sem))) = bad.iter().enumerate().find_map(|(i, b)| b.map(|b| (i, b))) {
                report.refute(Counterexample::new(
                    &models[i],
                    &e.formula,
                    Some(format!("{}: n={n}, builder {syn}, semantics {sem}", e.name)),
                ));
                return Ok(report);
            }
        }
    }
    report.detail(format!(
        "{} sentences, n in {:?}, {comparisons} comparisons",
        corpus.len(),
        ns
    ));
    Ok(report)
}

/// Every model of an ∃∀-combination has a generated submodel on at most
/// `ea_witness_bound` generators satisfying it; over relational signatures,
/// a submodel of at most that many elements.
pub fn ea_bound_check(corpus: &[Entry], max_size: usize) -> Result<Report, VerifyError> {
    let mut report = Report::new("ea-witness-bound", Parameters::sizes(max_size));
    let mut checked = 0usize;
    for e in corpus {
        let nu = ea_witness_bound(&nnf(&e.formula))?.bound;
        let phi = Compiled::new(&e.sig, &e.formula)?;
        let bound = if e.sig.is_relational() {
            Bound::AtMost(nu)
        } else {
            Bound::Generated(nu)
        };
        let mut count = 0;
        // one size at a time: the model lists get large
        for n in 1..=max_size {
            let models = crate::search::collect_models_par(e.sig.clone(), n, Some(&e.formula))?;
            count += models.len();
            let failure = models
                .par_iter()
                .map(|m| theta_witness_compiled(m, &phi, bound).map(|w| w.is_none()))
                .collect::<Result<Vec<bool>, _>>()?
                .iter()
                .position(|&f| f);
            if let Some(i) = failure {
                report.refute(Counterexample::new(
                    &models[i],
                    &e.formula,
                    Some(format!("{}: no witness within bound {nu}", e.name)),
                ));
                return Ok(report);
            }
        }
        checked += count;
        report.detail(format!("{}: bound {nu}, {count} models", e.name));
    }
    report.detail(format!("{checked} satisfying models checked"));
    Ok(report)
}

/// Universal sentences hold in every submodel of their models; existential
/// ones in every extension within the size bound.
pub fn preservation_check(corpus: &[Entry], max_size: usize) -> Result<Report, VerifyError> {
    let mut report = Report::new("preservation", Parameters::sizes(max_size));
    for e in corpus {
        let class = classify(&e.formula);
        let phi = Compiled::new(&e.sig, &e.formula)?;
        let models = collect_models_upto(&e.sig, max_size, Some(&e.formula))?;
        let negation = nnf(&Formula::not(e.formula.clone()));
        let failure = models
            .par_iter()
            .map(|m| -> Result<Option<String>, VerifyError> {
                if class.is_universal {
                    for sub in enumerate_subuniverses(m)? {
                        if !phi.holds_in(m, &sub) {
                            return Ok(Some(format!("submodel {} fails", list(&sub))));
                        }
                    }
                }
                if class.is_existential {
                    for size in m.size()..=max_size {
                        if let Some(b) = ModelSearch::extending(m, size, Some(&negation))?.next() {
                            return Ok(Some(format!("extension fails:\n{}", crate::parse::render_model(&b))));
                        }
                    }
                }
                Ok(None)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some((i, why)) = failure.into_iter().enumerate().find_map(|(i, f)| f.map(|f| (i, f))) {
            report.refute(Counterexample::new(
                &models[i],
                &e.formula,
                Some(format!("{}: {why}", e.name)),
            ));
            return Ok(report);
        }
        let kind = match (class.is_universal, class.is_existential) {
            (true, true) => "open",
            (true, false) => "universal",
            _ => "existential",
        };
        report.detail(format!("{} ({kind}): {} models", e.name, models.len()));
    }
    Ok(report)
}

/// The monadic θ sentence is equality-free, of quantifier depth at most 1,
/// and agrees with θ on every model.
pub fn monadic_closure_check(corpus: &[Entry], max_size: usize) -> Result<Report, VerifyError> {
    let mut report = Report::new("monadic-closure", Parameters::sizes(max_size));
    let all = models_by_signature(corpus, max_size)?;
    for e in corpus {
        let chi = build_theta_monadic(&e.sig, &e.formula)?;
        let shape_ok = !chi.uses_equality() && chi.quantifier_depth() <= 1 && is_monadic_normal(&chi);
        let models = &all[&crate::parse::render_signature(&e.sig)];
        if !shape_ok {
            report.refute(Counterexample::new(
                &models[0],
                &chi,
                Some(format!("{}: shape", e.name)),
            ));
            return Ok(report);
        }
        let phi = Compiled::new(&e.sig, &e.formula)?;
        let cc = Compiled::new(&e.sig, &chi)?;
        let bad = models
            .par_iter()
            .map(|m| theta_witness_compiled(m, &phi, Bound::Any).map(|w| w.is_some() != cc.holds(m)))
            .collect::<Result<Vec<bool>, _>>()?;
        if let Some(i) = bad.iter().position(|&b| b) {
            report.refute(Counterexample::new(
                &models[i],
                &chi,
                Some(format!("{}: disagrees with θ", e.name)),
            ));
            return Ok(report);
        }
        report.detail(format!("{}: {chi}", e.name));
    }
    Ok(report)
}

/// The monadic normal form has the required shape and is equivalent to its
/// input.
pub fn normal_form_check(corpus: &[Entry], max_size: usize) -> Result<Report, VerifyError> {
    let mut report = Report::new("monadic-normal-form", Parameters::sizes(max_size));
    let all = models_by_signature(corpus, max_size)?;
    for e in corpus {
        let n = normalize_monadic(&e.formula)?;
        let models = &all[&crate::parse::render_signature(&e.sig)];
        if !is_monadic_normal(&n) {
            report.refute(Counterexample::new(&models[0], &n, Some(format!("{}: shape", e.name))));
            return Ok(report);
        }
        let a = Compiled::new(&e.sig, &e.formula)?;
        let b = Compiled::new(&e.sig, &n)?;
        if let Some(i) = models.par_iter().position_first(|m| a.holds(m) != b.holds(m)) {
            report.refute(Counterexample::new(
                &models[i],
                &n,
                Some(format!("{}: not equivalent", e.name)),
            ));
            return Ok(report);
        }
        report.detail(format!("{}: {n}", e.name));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_signature};

    #[test]
    fn equiv_examples() {
        let sig = Arc::new(parse_signature("pred P/1").unwrap());
        let ex = parse_formula("(exists (x) (P x))", &sig).unwrap();
        let all = parse_formula("(forall (x) (P x))", &sig).unwrap();
        assert!(check_equiv(&sig, &ex, &ex, 3).unwrap().is_verified());
        let r = check_equiv(&sig, &ex, &all, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        assert_eq!(r.counterexample.unwrap().model, "universe 2\npred P = {(0)}\n");
    }

    #[test]
    fn witness_scan_examples() {
        let sig = Arc::new(parse_signature("pred R/2").unwrap());
        let ea = parse_formula("(exists (x y) (forall (z) (or (R x z) (R z y))))", &sig).unwrap();
        let scan = witness_bound_scan(&sig, &ea, 3).unwrap();
        assert!(scan.bound <= 2);
        assert!(scan.report.is_verified());

        let never = parse_formula("(exists (x) (and (R x x) (not (R x x))))", &sig).unwrap();
        let scan = witness_bound_scan(&sig, &never, 3).unwrap();
        assert_eq!(scan.bound, 0);
        assert!(scan.report.is_verified());
    }
}

//! The submodel modality θ and its bounded variants, the bounded extension
//! modality θ*, and the syntactic side: relativization, the closure formula
//! ψ, the θ_{≤n}/θ_n sentences and the theory T_φ.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{Compiled, EvalError};
use crate::model::{enumerate_subuniverses, FiniteModel, ModelError};
use crate::search::ModelSearch;
use crate::syntax::{Formula, LogicError, Signature, Term, Var};
use crate::transforms::{nnf, relativize_expanded};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModalError {
    #[error("formula is not a sentence")]
    NotASentence,
    #[error("size bound must be at least 1")]
    ZeroBound,
    #[error("relativization needs a nonempty list of distinct variables")]
    BadVariables,
    #[error("variable `{0}` is free in the formula and also a relativization variable")]
    VariableClash(String),
    #[error("T_phi needs a relational signature; `{0}` is a function or constant")]
    NotRelational(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A finite list of sentences over one signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theory {
    pub sentences: Vec<Formula>,
}

impl Theory {
    pub fn new(sig: &Signature, sentences: Vec<Formula>) -> Result<Theory, ModalError> {
        for s in &sentences {
            s.check(sig)?;
            if !s.is_sentence() {
                return Err(ModalError::NotASentence);
            }
        }
        Ok(Theory { sentences })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Index of the first member false in `model`, if any.
    pub fn first_failure(&self, model: &FiniteModel) -> Result<Option<usize>, ModalError> {
        for (i, s) in self.sentences.iter().enumerate() {
            if !Compiled::new(model.signature(), s)?.holds(model) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub fn holds(&self, model: &FiniteModel) -> Result<bool, ModalError> {
        Ok(self.first_failure(model)?.is_none())
    }
}

/// Restriction on the witness submodel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    Any,
    AtMost(usize),
    Exactly(usize),
    Generated(usize),
}

fn compile_sentence(model: &FiniteModel, f: &Formula) -> Result<Compiled, ModalError> {
    if !f.is_sentence() {
        return Err(ModalError::NotASentence);
    }
    Ok(Compiled::new(model.signature(), f)?)
}

/// The first subuniverse (in enumeration order) satisfying the bound whose
/// induced submodel satisfies `f`.
pub fn theta_witness(model: &FiniteModel, f: &Formula, bound: Bound) -> Result<Option<Vec<usize>>, ModalError> {
    let c = compile_sentence(model, f)?;
    theta_witness_compiled(model, &c, bound)
}

/// As [`theta_witness`], for a sentence compiled against the model's signature.
pub fn theta_witness_compiled(
    model: &FiniteModel,
    c: &Compiled,
    bound: Bound,
) -> Result<Option<Vec<usize>>, ModalError> {
    if !c.is_sentence() {
        return Err(ModalError::NotASentence);
    }
    if let Bound::AtMost(0) | Bound::Exactly(0) | Bound::Generated(0) = bound {
        return Err(ModalError::ZeroBound);
    }
    let generated: Option<BTreeSet<Vec<usize>>> = match bound {
        Bound::Generated(n) => Some(generated_within(model, n)?),
        _ => None,
    };
    for sub in enumerate_subuniverses(model)? {
        let ok = match bound {
            Bound::Any => true,
            Bound::AtMost(n) => sub.len() <= n,
            Bound::Exactly(n) => sub.len() == n,
            Bound::Generated(_) => generated.as_ref().is_some_and(|g| g.contains(&sub)),
        };
        if ok && c.holds_in(model, &sub) {
            return Ok(Some(sub));
        }
    }
    Ok(None)
}

// Subuniverses generated by at most `n` elements.
fn generated_within(model: &FiniteModel, n: usize) -> Result<BTreeSet<Vec<usize>>, ModalError> {
    let size = model.size();
    let mut out = BTreeSet::new();
    let mut seeds = Vec::new();
    fn rec(
        model: &FiniteModel,
        start: usize,
        left: usize,
        seeds: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) -> Result<(), ModalError> {
        if !seeds.is_empty() {
            out.insert(model.closure(seeds)?);
        }
        if left == 0 {
            return Ok(());
        }
        for e in start..model.size() {
            seeds.push(e);
            rec(model, e + 1, left - 1, seeds, out)?;
            seeds.pop();
        }
        Ok(())
    }
    rec(model, 0, n.min(size), &mut seeds, &mut out)?;
    Ok(out)
}

/// θ(φ): some submodel (possibly the model itself) satisfies φ.
pub fn theta_sem(model: &FiniteModel, f: &Formula) -> Result<bool, ModalError> {
    Ok(theta_witness(model, f, Bound::Any)?.is_some())
}

pub fn theta_le_sem(model: &FiniteModel, f: &Formula, n: usize) -> Result<bool, ModalError> {
    Ok(theta_witness(model, f, Bound::AtMost(n))?.is_some())
}

pub fn theta_eq_sem(model: &FiniteModel, f: &Formula, n: usize) -> Result<bool, ModalError> {
    Ok(theta_witness(model, f, Bound::Exactly(n))?.is_some())
}

pub fn theta_gen_sem(model: &FiniteModel, f: &Formula, n: usize) -> Result<bool, ModalError> {
    Ok(theta_witness(model, f, Bound::Generated(n))?.is_some())
}

/// The first extension of `model` with at most `k` elements satisfying `f`,
/// smallest size first.
pub fn theta_star_witness(model: &FiniteModel, f: &Formula, k: usize) -> Result<Option<FiniteModel>, ModalError> {
    compile_sentence(model, f)?;
    if k < model.size() {
        return Err(ModelError::BoundTooSmall {
            bound: k,
            size: model.size(),
        }
        .into());
    }
    for m in model.size()..=k {
        if let Some(ext) = ModelSearch::extending(model, m, Some(f))?.next() {
            return Ok(Some(ext));
        }
    }
    Ok(None)
}

/// θ*(φ) at extension bound `k`.
pub fn theta_star_sem(model: &FiniteModel, f: &Formula, k: usize) -> Result<bool, ModalError> {
    Ok(theta_star_witness(model, f, k)?.is_some())
}

/// `x0, ..., x{n-1}`.
pub fn builder_vars(n: usize) -> Vec<Var> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Relativization to the tuple `xs`: atoms, `not` and `and` are unchanged
/// structurally; `∃ȳ ψ` becomes `∃ȳ (ψ^X ∧ ⋀_β ⋁_α y_β = x_α)`. `or` is
/// relativized componentwise and `∀ȳ ψ` becomes `∀ȳ (¬(ȳ ∈ X) ∨ ψ^X)`,
/// which are the duals through negation. Bound variables of `f` that occur
/// in `xs` are renamed first.
pub fn relativize(f: &Formula, xs: &[Var]) -> Result<Formula, ModalError> {
    let set: BTreeSet<Var> = xs.iter().cloned().collect();
    if xs.is_empty() || set.len() != xs.len() {
        return Err(ModalError::BadVariables);
    }
    if let Some(v) = f.free_vars().intersection(&set).next() {
        return Err(ModalError::VariableClash(v.clone()));
    }
    Ok(rel(&f.rename_bound_apart(&set), xs))
}

fn membership(vs: &[Var], xs: &[Var]) -> Formula {
    Formula::conjunction(
        vs.iter()
            .map(|y| {
                Formula::disjunction(
                    xs.iter()
                        .map(|x| Formula::eq(Term::Var(y.clone()), Term::Var(x.clone())))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn rel(f: &Formula, xs: &[Var]) -> Formula {
    match f {
        Formula::Pred(..) | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(rel(g, xs)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| rel(g, xs)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| rel(g, xs)).collect()),
        Formula::Exists(vs, g) => {
            Formula::Exists(vs.clone(), Box::new(Formula::And(vec![rel(g, xs), membership(vs, xs)])))
        }
        Formula::Forall(vs, g) => Formula::Forall(
            vs.clone(),
            Box::new(Formula::Or(vec![Formula::not(membership(vs, xs)), rel(g, xs)])),
        ),
    }
}

/// ψ(x0..x{n-1}): the values of every function and constant on arguments
/// from `X` lie in `X`.
pub fn submodel_formula(sig: &Signature, n: usize) -> Formula {
    let xs = builder_vars(n);
    let mut conj = Vec::new();
    for (f, arity) in sig.fnc() {
        for code in 0..n.pow(arity as u32) {
            let args = crate::model::decode(code, n, arity);
            let term = if arity == 0 {
                Term::Const(f.clone())
            } else {
                Term::App(f.clone(), args.iter().map(|&i| Term::Var(xs[i].clone())).collect())
            };
            conj.push(Formula::disjunction(
                xs.iter()
                    .map(|x| Formula::eq(term.clone(), Term::Var(x.clone())))
                    .collect(),
            ));
        }
    }
    Formula::conjunction(conj)
}

/// `∃x0..x{n-1} (ψ ∧ φ^X)`: some submodel with at most `n` elements
/// satisfies φ.
pub fn build_theta_le(sig: &Signature, f: &Formula, n: usize) -> Result<Formula, ModalError> {
    if n == 0 {
        return Err(ModalError::ZeroBound);
    }
    if !f.is_sentence() {
        return Err(ModalError::NotASentence);
    }
    let xs = builder_vars(n);
    Ok(Formula::Exists(
        xs.clone(),
        Box::new(Formula::And(vec![submodel_formula(sig, n), relativize(f, &xs)?])),
    ))
}

/// The exact-cardinality variant: the `x_α` are also pairwise distinct.
pub fn build_theta_eq(sig: &Signature, f: &Formula, n: usize) -> Result<Formula, ModalError> {
    let Formula::Exists(xs, body) = build_theta_le(sig, f, n)? else {
        unreachable!("build_theta_le returns a block");
    };
    let Formula::And(mut parts) = *body else {
        unreachable!("build_theta_le body is a conjunction");
    };
    let mut eqs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            eqs.push(Formula::eq(Term::Var(xs[a].clone()), Term::Var(xs[b].clone())));
        }
    }
    parts.push(Formula::not(Formula::disjunction(eqs)));
    Ok(Formula::Exists(xs, Box::new(Formula::And(parts))))
}

/// The fragment `{¬θ_{≤n}(φ) : 1 ≤ n ≤ max_n}` of T_φ. Each member is given
/// in universal form: relativized blocks are expanded into finite
/// Boolean combinations over `X` and the negation is pushed inward.
pub fn build_t_phi(sig: &Signature, f: &Formula, max_n: usize) -> Result<Theory, ModalError> {
    if let Some((name, _)) = sig.fnc().into_iter().next() {
        return Err(ModalError::NotRelational(name));
    }
    if max_n == 0 {
        return Err(ModalError::ZeroBound);
    }
    if !f.is_sentence() {
        return Err(ModalError::NotASentence);
    }
    let members = (1..=max_n)
        .map(|n| {
            let xs = builder_vars(n);
            nnf(&Formula::not(Formula::Exists(
                xs.clone(),
                Box::new(relativize_expanded(f, &xs)),
            )))
        })
        .collect();
    Theory::new(sig, members)
}

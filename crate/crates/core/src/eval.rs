//! Tarski semantics.
//!
//! Formulas are compiled once against a signature (symbols become table
//! indices, variables become slots) and can then be evaluated on many models.
//! The evaluator is three-valued so the same code drives both ordinary model
//! checking and pruning over partially filled tables: a read of an unfilled
//! table cell yields "unknown", and Kleene connectives propagate it.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::FiniteModel;
use crate::syntax::{Formula, Signature, SymbolKind, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound free variable `{0}`")]
    UnboundVariable(String),
    #[error("symbol `{0}` is not in the model's signature")]
    UnknownSymbol(String),
    #[error("element {element} is outside the universe of size {size}")]
    OutOfRange { element: usize, size: usize },
    #[error("formula is not a sentence")]
    NotASentence,
}

#[derive(Debug, Clone)]
pub(crate) enum CTerm {
    Var(usize),
    Const(usize),
    App(usize, Vec<CTerm>),
}

#[derive(Debug, Clone)]
pub(crate) enum CForm {
    Pred(usize, Vec<CTerm>),
    Eq(CTerm, CTerm),
    Not(Box<CForm>),
    And(Vec<CForm>),
    Or(Vec<CForm>),
    Exists(Vec<usize>, Box<CForm>),
    Forall(Vec<usize>, Box<CForm>),
}

/// A formula compiled against a signature. Free variables occupy the first
/// slots, in sorted order.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub(crate) root: CForm,
    pub(crate) slots: usize,
    free: Vec<Var>,
}

struct Compiler<'a> {
    sig: &'a Signature,
    pred_ix: BTreeMap<&'a str, usize>,
    func_ix: BTreeMap<&'a str, usize>,
    const_ix: BTreeMap<&'a str, usize>,
    slots: usize,
}

impl<'a> Compiler<'a> {
    fn new(sig: &'a Signature) -> Self {
        Compiler {
            sig,
            pred_ix: sig
                .predicates()
                .keys()
                .enumerate()
                .map(|(i, k)| (k.as_str(), i))
                .collect(),
            func_ix: sig
                .functions()
                .keys()
                .enumerate()
                .map(|(i, k)| (k.as_str(), i))
                .collect(),
            const_ix: sig
                .constants()
                .iter()
                .enumerate()
                .map(|(i, k)| (k.as_str(), i))
                .collect(),
            slots: 0,
        }
    }

    fn term(&mut self, t: &Term, env: &BTreeMap<Var, usize>) -> Result<CTerm, EvalError> {
        Ok(match t {
            Term::Var(v) => match env.get(v) {
                Some(&s) => CTerm::Var(s),
                None => return Err(EvalError::UnboundVariable(v.clone())),
            },
            Term::Const(c) => CTerm::Const(
                *self
                    .const_ix
                    .get(c.as_str())
                    .ok_or_else(|| EvalError::UnknownSymbol(c.clone()))?,
            ),
            Term::App(f, args) => {
                let ix = *self
                    .func_ix
                    .get(f.as_str())
                    .ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?;
                if self.sig.symbol(f) != Some(SymbolKind::Function(args.len())) {
                    return Err(EvalError::UnknownSymbol(f.clone()));
                }
                let args = args.iter().map(|a| self.term(a, env)).collect::<Result<_, _>>()?;
                CTerm::App(ix, args)
            }
        })
    }

    fn formula(&mut self, f: &Formula, env: &BTreeMap<Var, usize>) -> Result<CForm, EvalError> {
        Ok(match f {
            Formula::Pred(p, args) => {
                let ix = *self
                    .pred_ix
                    .get(p.as_str())
                    .ok_or_else(|| EvalError::UnknownSymbol(p.clone()))?;
                if self.sig.symbol(p) != Some(SymbolKind::Predicate(args.len())) {
                    return Err(EvalError::UnknownSymbol(p.clone()));
                }
                CForm::Pred(ix, args.iter().map(|a| self.term(a, env)).collect::<Result<_, _>>()?)
            }
            Formula::Eq(a, b) => CForm::Eq(self.term(a, env)?, self.term(b, env)?),
            Formula::Not(g) => CForm::Not(Box::new(self.formula(g, env)?)),
            Formula::And(gs) => CForm::And(gs.iter().map(|g| self.formula(g, env)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => CForm::Or(gs.iter().map(|g| self.formula(g, env)).collect::<Result<_, _>>()?),
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                let mut env = env.clone();
                let mut slots = Vec::with_capacity(vs.len());
                for v in vs {
                    env.insert(v.clone(), self.slots);
                    slots.push(self.slots);
                    self.slots += 1;
                }
                let body = Box::new(self.formula(g, &env)?);
                if matches!(f, Formula::Exists(..)) {
                    CForm::Exists(slots, body)
                } else {
                    CForm::Forall(slots, body)
                }
            }
        })
    }
}

impl Compiled {
    pub fn new(sig: &Signature, f: &Formula) -> Result<Compiled, EvalError> {
        Self::with_leading(sig, f, &[])
    }

    /// Compiles with `leading` variables bound to the first slots (in the
    /// given order); remaining free variables follow in sorted order.
    pub fn with_leading(sig: &Signature, f: &Formula, leading: &[Var]) -> Result<Compiled, EvalError> {
        let mut c = Compiler::new(sig);
        let mut free: Vec<Var> = leading.to_vec();
        free.extend(f.free_vars().into_iter().filter(|v| !leading.contains(v)));
        let env: BTreeMap<Var, usize> = free.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        c.slots = free.len();
        let root = c.formula(f, &env)?;
        Ok(Compiled {
            root,
            slots: c.slots,
            free,
        })
    }

    pub fn free_vars(&self) -> &[Var] {
        &self.free
    }

    pub fn is_sentence(&self) -> bool {
        self.free.is_empty()
    }

    /// Truth of a sentence in the whole model.
    pub fn holds(&self, model: &FiniteModel) -> bool {
        let dom: Vec<usize> = (0..model.size()).collect();
        self.holds_in(model, &dom)
    }

    /// Truth of a sentence in the submodel with universe `dom`, which must be
    /// closed under the model's functions and contain its constants.
    pub fn holds_in(&self, model: &FiniteModel, dom: &[usize]) -> bool {
        let mut env = vec![0; self.slots];
        self.holds_with(model, dom, &mut env)
    }

    /// Evaluation with the free-variable slots pre-filled in `env`.
    pub fn holds_with(&self, model: &FiniteModel, dom: &[usize], env: &mut [usize]) -> bool {
        let mut watch = usize::MAX;
        eval(&self.root, &Full(model), dom, env, &mut watch).unwrap_or(false)
    }

    pub fn env(&self) -> Vec<usize> {
        vec![0; self.slots]
    }
}

/// Read access to (possibly partial) interpretations. `None` means the cell
/// is not filled yet; implementations lower `watch` to the cell's position.
pub(crate) trait Interp {
    fn size(&self) -> usize;
    fn func(&self, f: usize, code: usize, watch: &mut usize) -> Option<usize>;
    fn pred(&self, p: usize, code: usize, watch: &mut usize) -> Option<bool>;
    fn cnst(&self, c: usize, watch: &mut usize) -> Option<usize>;
}

struct Full<'a>(&'a FiniteModel);

impl Interp for Full<'_> {
    #[inline]
    fn size(&self) -> usize {
        self.0.size()
    }
    #[inline]
    fn func(&self, f: usize, code: usize, _: &mut usize) -> Option<usize> {
        Some(self.0.func_table(f)[code])
    }
    #[inline]
    fn pred(&self, p: usize, code: usize, _: &mut usize) -> Option<bool> {
        Some(self.0.pred_table(p)[code])
    }
    #[inline]
    fn cnst(&self, c: usize, _: &mut usize) -> Option<usize> {
        Some(self.0.const_values()[c])
    }
}

#[inline]
fn term<I: Interp>(t: &CTerm, m: &I, env: &[usize], watch: &mut usize) -> Option<usize> {
    match t {
        CTerm::Var(s) => Some(env[*s]),
        CTerm::Const(c) => m.cnst(*c, watch),
        CTerm::App(f, args) => {
            let n = m.size();
            let mut code = 0;
            for a in args {
                code = code * n + term(a, m, env, watch)?;
            }
            m.func(*f, code, watch)
        }
    }
}

pub(crate) fn eval<I: Interp>(f: &CForm, m: &I, dom: &[usize], env: &mut [usize], watch: &mut usize) -> Option<bool> {
    match f {
        CForm::Pred(p, args) => {
            let n = m.size();
            let mut code = 0;
            for a in args {
                code = code * n + term(a, m, env, watch)?;
            }
            m.pred(*p, code, watch)
        }
        CForm::Eq(a, b) => {
            let a = term(a, m, env, watch);
            let b = term(b, m, env, watch);
            Some(a? == b?)
        }
        CForm::Not(g) => eval(g, m, dom, env, watch).map(|b| !b),
        CForm::And(gs) => {
            let mut unknown = false;
            for g in gs {
                match eval(g, m, dom, env, watch) {
                    Some(false) => return Some(false),
                    None => unknown = true,
                    Some(true) => {}
                }
            }
            if unknown {
                None
            } else {
                Some(true)
            }
        }
        CForm::Or(gs) => {
            let mut unknown = false;
            for g in gs {
                match eval(g, m, dom, env, watch) {
                    Some(true) => return Some(true),
                    None => unknown = true,
                    Some(false) => {}
                }
            }
            if unknown {
                None
            } else {
                Some(false)
            }
        }
        CForm::Exists(slots, g) => block(slots, 0, true, g, m, dom, env, watch),
        CForm::Forall(slots, g) => block(slots, 0, false, g, m, dom, env, watch),
    }
}

// Existential blocks are disjunctions over all tuples, universal ones conjunctions.
#[allow(clippy::too_many_arguments)]
fn block<I: Interp>(
    slots: &[usize],
    i: usize,
    existential: bool,
    body: &CForm,
    m: &I,
    dom: &[usize],
    env: &mut [usize],
    watch: &mut usize,
) -> Option<bool> {
    if i == slots.len() {
        return eval(body, m, dom, env, watch);
    }
    let mut unknown = false;
    for &d in dom {
        env[slots[i]] = d;
        match block(slots, i + 1, existential, body, m, dom, env, watch) {
            Some(b) if b == existential => return Some(existential),
            None => unknown = true,
            _ => {}
        }
    }
    if unknown {
        None
    } else {
        Some(!existential)
    }
}

/// Satisfaction of `f` in `model` under `assignment`.
pub fn evaluate(model: &FiniteModel, f: &Formula, assignment: &BTreeMap<Var, usize>) -> Result<bool, EvalError> {
    let compiled = Compiled::new(model.signature(), f)?;
    let mut env = compiled.env();
    for (i, v) in compiled.free.iter().enumerate() {
        let &e = assignment.get(v).ok_or_else(|| EvalError::UnboundVariable(v.clone()))?;
        if e >= model.size() {
            return Err(EvalError::OutOfRange {
                element: e,
                size: model.size(),
            });
        }
        env[i] = e;
    }
    let dom: Vec<usize> = (0..model.size()).collect();
    Ok(compiled.holds_with(model, &dom, &mut env))
}

/// Satisfaction of a sentence.
pub fn evaluate_sentence(model: &FiniteModel, f: &Formula) -> Result<bool, EvalError> {
    if !f.is_sentence() {
        return Err(EvalError::NotASentence);
    }
    evaluate(model, f, &BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_model, parse_signature};

    fn order3() -> (Signature, FiniteModel) {
        let sig = parse_signature("pred </2\nequality on").unwrap();
        let m = parse_model("universe 3\npred < = {(0,1), (0,2), (1,2)}", &sig).unwrap();
        (sig, m)
    }

    #[test]
    fn empty_connectives() {
        let (_, m) = order3();
        assert!(evaluate_sentence(&m, &Formula::top()).unwrap());
        assert!(!evaluate_sentence(&m, &Formula::bottom()).unwrap());
    }

    #[test]
    fn existential_example() {
        let sig = parse_signature("pred P/1").unwrap();
        let m = parse_model("universe 2\npred P = {(0)}", &sig).unwrap();
        let f = parse_formula("(exists (x) (P x))", &sig).unwrap();
        assert!(evaluate_sentence(&m, &f).unwrap());
    }

    #[test]
    fn density_fails_on_three_element_chain() {
        let (sig, m) = order3();
        let f = parse_formula(
            "(forall (x y) (or (not (< x y)) (exists (z) (and (< x z) (< z y)))))",
            &sig,
        )
        .unwrap();
        // oracle: look for an adjacent pair directly
        let lt = |a: usize, b: usize| a < b;
        let oracle = (0..3).all(|x| (0..3).all(|y| !lt(x, y) || (0..3).any(|z| lt(x, z) && lt(z, y))));
        assert!(!oracle);
        assert_eq!(evaluate_sentence(&m, &f).unwrap(), oracle);
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let (sig, m) = order3();
        let f = parse_formula("(< x y)", &sig).unwrap();
        let a: BTreeMap<Var, usize> = [("x".to_string(), 0)].into();
        assert_eq!(evaluate(&m, &f, &a), Err(EvalError::UnboundVariable("y".into())));
        let a: BTreeMap<Var, usize> = [("x".to_string(), 0), ("y".to_string(), 2)].into();
        assert_eq!(evaluate(&m, &f, &a), Ok(true));
    }
}

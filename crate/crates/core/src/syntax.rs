//! Signatures, terms, formulas and the basic syntactic algebra over them.
//!
//! Formulas are finite trees with n-ary conjunction/disjunction and quantifier
//! blocks that bind several variables at once. `(and)` is truth, `(or)` is
//! falsity. Equality is a logical symbol, but a signature may forbid it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Variable names.
pub type Var = String;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("equality is not allowed in this signature")]
    EqualityNotAllowed,
    #[error("empty quantifier block")]
    EmptyQuantifierBlock,
    #[error("variable `{0}` appears twice in one quantifier block")]
    RepeatedBlockVariable(String),
    #[error("`{0}` is a constant and cannot be used as a variable")]
    ConstantAsVariable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Predicate(usize),
    Function(usize),
    Constant,
}

/// A first-order signature: predicate, function and constant symbols plus a
/// flag saying whether `=` may be used.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct Signature {
    predicates: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
    constants: BTreeSet<String>,
    equality: bool,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure_fresh(&self, name: &str) -> Result<(), LogicError> {
        if self.symbol(name).is_some() {
            return Err(LogicError::DuplicateSymbol(name.to_string()));
        }
        Ok(())
    }

    pub fn add_predicate(&mut self, name: &str, arity: usize) -> Result<(), LogicError> {
        self.ensure_fresh(name)?;
        if arity == 0 {
            return Err(LogicError::ZeroArity(name.to_string()));
        }
        self.predicates.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<(), LogicError> {
        self.ensure_fresh(name)?;
        if arity == 0 {
            return Err(LogicError::ZeroArity(name.to_string()));
        }
        self.functions.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), LogicError> {
        self.ensure_fresh(name)?;
        self.constants.insert(name.to_string());
        Ok(())
    }

    pub fn set_equality(&mut self, allowed: bool) {
        self.equality = allowed;
    }

    /// Builder-style variants, convenient for fixed signatures in code and tests.
    pub fn predicate(mut self, name: &str, arity: usize) -> Result<Self, LogicError> {
        self.add_predicate(name, arity)?;
        Ok(self)
    }

    pub fn function(mut self, name: &str, arity: usize) -> Result<Self, LogicError> {
        self.add_function(name, arity)?;
        Ok(self)
    }

    pub fn constant(mut self, name: &str) -> Result<Self, LogicError> {
        self.add_constant(name)?;
        Ok(self)
    }

    pub fn with_equality(mut self, allowed: bool) -> Self {
        self.equality = allowed;
        self
    }

    pub fn predicates(&self) -> &BTreeMap<String, usize> {
        &self.predicates
    }

    pub fn functions(&self) -> &BTreeMap<String, usize> {
        &self.functions
    }

    pub fn constants(&self) -> &BTreeSet<String> {
        &self.constants
    }

    pub fn equality_allowed(&self) -> bool {
        self.equality
    }

    pub fn symbol(&self, name: &str) -> Option<SymbolKind> {
        if let Some(&a) = self.predicates.get(name) {
            Some(SymbolKind::Predicate(a))
        } else if let Some(&a) = self.functions.get(name) {
            Some(SymbolKind::Function(a))
        } else if self.constants.contains(name) {
            Some(SymbolKind::Constant)
        } else {
            None
        }
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constants.contains(name)
    }

    /// The function-and-constant part of the signature, sorted by name.
    /// Constants are reported with arity 0.
    pub fn fnc(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = self
            .functions
            .iter()
            .map(|(n, &a)| (n.clone(), a))
            .chain(self.constants.iter().map(|c| (c.clone(), 0)))
            .collect();
        out.sort();
        out
    }

    /// No function or constant symbols.
    pub fn is_relational(&self) -> bool {
        self.functions.is_empty() && self.constants.is_empty()
    }

    pub fn is_purely_monadic(&self) -> bool {
        self.is_relational() && self.predicates.values().all(|&a| a == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(Var),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn cst(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn substitute(&self, map: &BTreeMap<Var, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(map)).collect()),
        }
    }

    pub fn check(&self, sig: &Signature) -> Result<(), LogicError> {
        match self {
            Term::Var(v) => {
                if sig.is_constant(v) {
                    Err(LogicError::ConstantAsVariable(v.clone()))
                } else {
                    Ok(())
                }
            }
            Term::Const(c) => match sig.symbol(c) {
                Some(SymbolKind::Constant) => Ok(()),
                _ => Err(LogicError::UnknownSymbol(c.clone())),
            },
            Term::App(f, args) => match sig.symbol(f) {
                Some(SymbolKind::Function(a)) if a == args.len() => args.iter().try_for_each(|t| t.check(sig)),
                Some(SymbolKind::Function(a)) => Err(LogicError::ArityMismatch {
                    symbol: f.clone(),
                    expected: a,
                    found: args.len(),
                }),
                _ => Err(LogicError::UnknownSymbol(f.clone())),
            },
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Pred(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

impl Formula {
    pub fn top() -> Formula {
        Formula::And(Vec::new())
    }

    pub fn bottom() -> Formula {
        Formula::Or(Vec::new())
    }

    pub fn pred(p: &str, args: Vec<Term>) -> Formula {
        Formula::Pred(p.to_string(), args)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        Formula::Or(fs)
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![Formula::not(a), b])
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::And(vec![Formula::implies(a.clone(), b.clone()), Formula::implies(b, a)])
    }

    pub fn exists<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
        Formula::Exists(vars.iter().map(|v| v.as_ref().to_string()).collect(), Box::new(body))
    }

    pub fn forall<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
        Formula::Forall(vars.iter().map(|v| v.as_ref().to_string()).collect(), Box::new(body))
    }

    /// And, collapsing a single conjunct to itself.
    pub fn conjunction(mut fs: Vec<Formula>) -> Formula {
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Formula::And(fs)
        }
    }

    /// Or, collapsing a single disjunct to itself.
    pub fn disjunction(mut fs: Vec<Formula>) -> Formula {
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Formula::Or(fs)
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Pred(..) | Formula::Eq(..))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let add_term = |t: &Term, bound: &Vec<Var>, out: &mut BTreeSet<Var>| {
            for v in t.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::Pred(_, args) => args.iter().for_each(|t| add_term(t, bound, out)),
            Formula::Eq(a, b) => {
                add_term(a, bound, out);
                add_term(b, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let mark = bound.len();
                bound.extend(vs.iter().cloned());
                f.collect_free(bound, out);
                bound.truncate(mark);
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Pred(_, args) => args.iter().for_each(|t| t.collect_vars(&mut out)),
            Formula::Eq(a, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Formula::Exists(vs, _) | Formula::Forall(vs, _) => out.extend(vs.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<F: FnMut(&Formula)>(&self, f: &mut F) {
        f(self);
        match self {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit(f)),
            _ => {}
        }
    }

    pub fn atoms(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Pred(..) | Formula::Eq(..) => out.push(f),
                Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => go(g, out),
                Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, out)),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn uses_equality(&self) -> bool {
        self.atoms().iter().any(|a| matches!(a, Formula::Eq(..)))
    }

    pub fn is_open(&self) -> bool {
        match self {
            Formula::Pred(..) | Formula::Eq(..) => true,
            Formula::Not(g) => g.is_open(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(Formula::is_open),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// Maximum nesting depth of quantifier blocks.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Pred(..) | Formula::Eq(..) => 0,
            Formula::Not(g) => g.quantifier_depth(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().map(Formula::quantifier_depth).max().unwrap_or(0),
            Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + g.quantifier_depth(),
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Well-formedness over `sig`: declared symbols with matching arities,
    /// equality only when allowed, nonempty blocks of distinct variables.
    pub fn check(&self, sig: &Signature) -> Result<(), LogicError> {
        match self {
            Formula::Pred(p, args) => {
                match sig.symbol(p) {
                    Some(SymbolKind::Predicate(a)) if a == args.len() => {}
                    Some(SymbolKind::Predicate(a)) => {
                        return Err(LogicError::ArityMismatch {
                            symbol: p.clone(),
                            expected: a,
                            found: args.len(),
                        })
                    }
                    _ => return Err(LogicError::UnknownSymbol(p.clone())),
                }
                args.iter().try_for_each(|t| t.check(sig))
            }
            Formula::Eq(a, b) => {
                if !sig.equality_allowed() {
                    return Err(LogicError::EqualityNotAllowed);
                }
                a.check(sig)?;
                b.check(sig)
            }
            Formula::Not(g) => g.check(sig),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| g.check(sig)),
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                check_block(vs, sig)?;
                g.check(sig)
            }
        }
    }

    /// Capture-avoiding substitution of free variables. Bound variables that
    /// would capture a replacement term's variable are renamed with primes.
    pub fn substitute(&self, map: &BTreeMap<Var, Term>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|t| t.substitute(map)).collect()),
            Formula::Eq(a, b) => Formula::Eq(a.substitute(map), b.substitute(map)),
            Formula::Not(g) => Formula::not(g.substitute(map)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.substitute(map)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.substitute(map)).collect()),
            Formula::Exists(vs, g) => {
                let (vs, g) = substitute_block(vs, g, map);
                Formula::Exists(vs, Box::new(g))
            }
            Formula::Forall(vs, g) => {
                let (vs, g) = substitute_block(vs, g, map);
                Formula::Forall(vs, Box::new(g))
            }
        }
    }

    /// Renames every bound variable to a canonical name determined by binding
    /// order. Two formulas are alpha-equivalent iff their canonical forms are equal.
    pub fn alpha_canonical(&self) -> Formula {
        let mut counter = 0;
        self.alpha_go(&BTreeMap::new(), &mut counter)
    }

    fn alpha_go(&self, env: &BTreeMap<Var, Term>, counter: &mut usize) -> Formula {
        match self {
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|t| t.substitute(env)).collect()),
            Formula::Eq(a, b) => Formula::Eq(a.substitute(env), b.substitute(env)),
            Formula::Not(g) => Formula::not(g.alpha_go(env, counter)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.alpha_go(env, counter)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.alpha_go(env, counter)).collect()),
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                let mut env = env.clone();
                let mut names = Vec::with_capacity(vs.len());
                for v in vs {
                    let name = format!("%{}", *counter);
                    *counter += 1;
                    env.insert(v.clone(), Term::Var(name.clone()));
                    names.push(name);
                }
                let body = Box::new(g.alpha_go(&env, counter));
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(names, body)
                } else {
                    Formula::Forall(names, body)
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }

    /// Merges directly nested blocks of the same quantifier and nested
    /// conjunctions/disjunctions of the same kind. Semantics are unchanged.
    pub fn flattened(&self) -> Formula {
        match self {
            Formula::Pred(..) | Formula::Eq(..) => self.clone(),
            Formula::Not(g) => Formula::not(g.flattened()),
            Formula::And(gs) => {
                let mut out = Vec::new();
                for g in gs {
                    match g.flattened() {
                        Formula::And(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                Formula::And(out)
            }
            Formula::Or(gs) => {
                let mut out = Vec::new();
                for g in gs {
                    match g.flattened() {
                        Formula::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                Formula::Or(out)
            }
            Formula::Exists(vs, g) => match g.flattened() {
                Formula::Exists(ws, h) if ws.iter().all(|w| !vs.contains(w)) => {
                    Formula::Exists(vs.iter().chain(ws.iter()).cloned().collect(), h)
                }
                other => Formula::Exists(vs.clone(), Box::new(other)),
            },
            Formula::Forall(vs, g) => match g.flattened() {
                Formula::Forall(ws, h) if ws.iter().all(|w| !vs.contains(w)) => {
                    Formula::Forall(vs.iter().chain(ws.iter()).cloned().collect(), h)
                }
                other => Formula::Forall(vs.clone(), Box::new(other)),
            },
        }
    }

    /// Renames bound variables that appear in `avoid`, so the result shares no
    /// bound variable with `avoid`. Free variables are untouched.
    pub fn rename_bound_apart(&self, avoid: &BTreeSet<Var>) -> Formula {
        let mut used: BTreeSet<Var> = avoid.clone();
        used.extend(self.all_vars());
        self.rename_go(avoid, &mut used, &BTreeMap::new())
    }

    fn rename_go(&self, avoid: &BTreeSet<Var>, used: &mut BTreeSet<Var>, env: &BTreeMap<Var, Term>) -> Formula {
        match self {
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|t| t.substitute(env)).collect()),
            Formula::Eq(a, b) => Formula::Eq(a.substitute(env), b.substitute(env)),
            Formula::Not(g) => Formula::not(g.rename_go(avoid, used, env)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.rename_go(avoid, used, env)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.rename_go(avoid, used, env)).collect()),
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                let mut env = env.clone();
                let mut names = Vec::with_capacity(vs.len());
                for v in vs {
                    if avoid.contains(v) {
                        let fresh = fresh_var(v, used);
                        used.insert(fresh.clone());
                        env.insert(v.clone(), Term::Var(fresh.clone()));
                        names.push(fresh);
                    } else {
                        env.remove(v);
                        names.push(v.clone());
                    }
                }
                let body = Box::new(g.rename_go(avoid, used, &env));
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(names, body)
                } else {
                    Formula::Forall(names, body)
                }
            }
        }
    }
}

fn check_block(vs: &[Var], sig: &Signature) -> Result<(), LogicError> {
    if vs.is_empty() {
        return Err(LogicError::EmptyQuantifierBlock);
    }
    let mut seen = BTreeSet::new();
    for v in vs {
        if sig.is_constant(v) {
            return Err(LogicError::ConstantAsVariable(v.clone()));
        }
        if !seen.insert(v) {
            return Err(LogicError::RepeatedBlockVariable(v.clone()));
        }
    }
    Ok(())
}

fn substitute_block(vs: &[Var], body: &Formula, map: &BTreeMap<Var, Term>) -> (Vec<Var>, Formula) {
    let body_free = body.free_vars();
    let inner: BTreeMap<Var, Term> = map
        .iter()
        .filter(|(k, _)| !vs.contains(k) && body_free.contains(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if inner.is_empty() {
        return (vs.to_vec(), body.clone());
    }
    let incoming: BTreeSet<Var> = inner.values().flat_map(Term::vars).collect();
    let mut avoid: BTreeSet<Var> = body_free.union(&incoming).cloned().collect();
    avoid.extend(vs.iter().cloned());
    let mut inner = inner;
    let mut names = Vec::with_capacity(vs.len());
    for v in vs {
        if incoming.contains(v) {
            let fresh = fresh_var(v, &avoid);
            avoid.insert(fresh.clone());
            inner.insert(v.clone(), Term::Var(fresh.clone()));
            names.push(fresh);
        } else {
            names.push(v.clone());
        }
    }
    (names, body.substitute(&inner))
}

/// `base` with primes appended until it avoids `avoid`.
pub fn fresh_var(base: &str, avoid: &BTreeSet<Var>) -> Var {
    let mut name = base.to_string();
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}

/// Substitution with the replacement terms checked against `sig` first.
pub fn substitute_checked(
    sig: &Signature,
    formula: &Formula,
    map: &BTreeMap<Var, Term>,
) -> Result<Formula, LogicError> {
    map.values().try_for_each(|t| t.check(sig))?;
    Ok(formula.substitute(map))
}

/// Syntactic class of a formula, read off in one traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub is_open: bool,
    pub is_existential: bool,
    pub is_universal: bool,
    /// Prenex: a run of existential blocks, then universal blocks, then an open matrix.
    pub is_sigma2: bool,
    /// Built from prenex existential-universal formulas with `and`/`or` only.
    pub is_ea_combination: bool,
    /// Every atom mentions at most one distinct variable.
    pub is_monadic_like: bool,
    pub uses_equality: bool,
    /// Number of leading existentially bound variables, when `is_sigma2`.
    pub existential_width: Option<usize>,
}

#[derive(Clone, Copy)]
struct Facts {
    open: bool,
    // quantifiers acting existentially / universally once negations are pushed in
    eff_exists: bool,
    eff_forall: bool,
    monadic_like: bool,
    equality: bool,
    // Some((existential width, saw a universal block)) for ∃*∀*-open shapes
    prefix: Option<(usize, bool)>,
    ea: bool,
}

fn facts(f: &Formula, negated: bool) -> Facts {
    match f {
        Formula::Pred(_, args) => {
            let vars: BTreeSet<Var> = args.iter().flat_map(Term::vars).collect();
            Facts {
                open: true,
                eff_exists: false,
                eff_forall: false,
                monadic_like: vars.len() <= 1,
                equality: false,
                prefix: Some((0, false)),
                ea: true,
            }
        }
        Formula::Eq(a, b) => {
            let mut vars = a.vars();
            vars.extend(b.vars());
            Facts {
                open: true,
                eff_exists: false,
                eff_forall: false,
                monadic_like: vars.len() <= 1,
                equality: true,
                prefix: Some((0, false)),
                ea: true,
            }
        }
        Formula::Not(g) => {
            let inner = facts(g, !negated);
            Facts {
                prefix: if inner.open { Some((0, false)) } else { None },
                ea: inner.open,
                ..inner
            }
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let kids: Vec<Facts> = gs.iter().map(|g| facts(g, negated)).collect();
            let open = kids.iter().all(|k| k.open);
            Facts {
                open,
                eff_exists: kids.iter().any(|k| k.eff_exists),
                eff_forall: kids.iter().any(|k| k.eff_forall),
                monadic_like: kids.iter().all(|k| k.monadic_like),
                equality: kids.iter().any(|k| k.equality),
                prefix: if open { Some((0, false)) } else { None },
                ea: kids.iter().all(|k| k.ea),
            }
        }
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let is_exists = matches!(f, Formula::Exists(..));
            let inner = facts(g, negated);
            let prefix = match (is_exists, inner.prefix) {
                (true, Some((w, s))) => Some((w + vs.len(), s)),
                (false, Some((0, _))) => Some((0, true)),
                _ => None,
            };
            let acts_existentially = is_exists != negated;
            Facts {
                open: false,
                eff_exists: inner.eff_exists || acts_existentially,
                eff_forall: inner.eff_forall || !acts_existentially,
                monadic_like: inner.monadic_like,
                equality: inner.equality,
                prefix,
                ea: prefix.is_some(),
            }
        }
    }
}

pub fn classify(f: &Formula) -> Classification {
    let facts = facts(f, false);
    Classification {
        is_open: facts.open,
        is_existential: !facts.eff_forall,
        is_universal: !facts.eff_exists,
        is_sigma2: facts.prefix.is_some(),
        is_ea_combination: facts.ea,
        is_monadic_like: facts.monadic_like,
        uses_equality: facts.equality,
        existential_width: facts.prefix.map(|(w, _)| w),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::App(g, args) => {
                write!(f, "({g}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Pred(p, args) => {
                write!(f, "({p}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                let kw = if matches!(self, Formula::And(_)) { "and" } else { "or" };
                write!(f, "({kw}")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                let kw = if matches!(self, Formula::Exists(..)) {
                    "exists"
                } else {
                    "forall"
                };
                write!(f, "({kw} ({}) {g})", vs.join(" "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &str) -> Formula {
        Formula::pred("P", vec![Term::var(v)])
    }

    fn r(a: &str, b: &str) -> Formula {
        Formula::pred("R", vec![Term::var(a), Term::var(b)])
    }

    fn set(vs: &[&str]) -> BTreeSet<Var> {
        vs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(p("x").free_vars(), set(&["x"]));
        assert_eq!(Formula::exists(&["x"], p("x")).free_vars(), set(&[]));
        let q = Formula::pred("Q", vec![Term::var("y")]);
        assert_eq!(
            Formula::exists(&["x"], Formula::and(vec![p("x"), q])).free_vars(),
            set(&["y"])
        );
    }

    #[test]
    fn substitute_examples() {
        let map: BTreeMap<Var, Term> = [("x".to_string(), Term::cst("c"))].into();
        assert_eq!(p("x").substitute(&map), Formula::pred("P", vec![Term::cst("c")]));
        let bound = Formula::exists(&["x"], p("x"));
        assert_eq!(bound.substitute(&map), bound);

        let map: BTreeMap<Var, Term> = [("y".to_string(), Term::var("x"))].into();
        let f = Formula::exists(&["x"], r("x", "y"));
        assert_eq!(f.substitute(&map), Formula::exists(&["x'"], r("x'", "x")));
    }

    #[test]
    fn substitute_checked_rejects_bad_arity() {
        let sig = Signature::new().predicate("P", 1).unwrap().function("f", 1).unwrap();
        let map: BTreeMap<Var, Term> = [("x".to_string(), Term::app("f", vec![]))].into();
        assert!(matches!(
            substitute_checked(&sig, &p("x"), &map),
            Err(LogicError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let z = Formula::forall(&["z"], r("x", "y"));
        let c = classify(&Formula::exists(&["x"], Formula::exists(&["y"], z)));
        assert!(c.is_sigma2);
        assert_eq!(c.existential_width, Some(2));

        let c = classify(&Formula::forall(&["x"], Formula::exists(&["y"], r("x", "y"))));
        assert!(!c.is_sigma2);
        assert!(!c.is_ea_combination);

        let q = Formula::pred("Q", vec![Term::var("x")]);
        let c = classify(&Formula::exists(&["x"], Formula::and(vec![p("x"), Formula::not(q)])));
        assert!(c.is_monadic_like);
        assert!(c.is_existential);
        assert!(!c.is_universal);
    }

    #[test]
    fn classify_tracks_polarity() {
        let f = Formula::not(Formula::exists(&["x"], p("x")));
        let c = classify(&f);
        assert!(c.is_universal);
        assert!(!c.is_existential);
        assert!(!c.is_sigma2);
        let c = classify(&p("x"));
        assert!(c.is_open && c.is_existential && c.is_universal && c.is_sigma2);
    }

    #[test]
    fn check_rejects_equality_and_empty_blocks() {
        let sig = Signature::new().predicate("P", 1).unwrap();
        assert_eq!(
            Formula::eq(Term::var("x"), Term::var("y")).check(&sig),
            Err(LogicError::EqualityNotAllowed)
        );
        assert_eq!(
            Formula::Exists(vec![], Box::new(p("x"))).check(&sig),
            Err(LogicError::EmptyQuantifierBlock)
        );
        assert!(Formula::exists(&["x", "x"], p("x")).check(&sig).is_err());
    }

    #[test]
    fn signature_invariants() {
        let sig = Signature::new().predicate("P", 1).unwrap();
        assert_eq!(
            sig.clone().function("P", 2),
            Err(LogicError::DuplicateSymbol("P".into()))
        );
        assert!(sig.is_purely_monadic());
        let grp = Signature::new().function("mul", 2).unwrap().constant("e").unwrap();
        assert_eq!(grp.fnc(), vec![("e".to_string(), 0), ("mul".to_string(), 2)]);
        assert!(!grp.is_relational());
    }

    #[test]
    fn flatten_merges_blocks() {
        let f = Formula::exists(&["x"], Formula::exists(&["y"], r("x", "y")));
        assert_eq!(f.flattened(), Formula::exists(&["x", "y"], r("x", "y")));
    }
}

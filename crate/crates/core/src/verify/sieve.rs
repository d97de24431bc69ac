//! Bounded approximation of the universal consequences of a sentence.
//!
//! Candidates are universal clauses `∀x̄ (l1 ∨ l2)` with at most `budget`
//! variables and one or two literals. Atoms are predicates applied to
//! variables and constants, and equations between terms of depth at most
//! one. Clauses equal up to renaming of variables are generated once. A
//! candidate survives if it holds in every model of φ found up to the size
//! bound; truth is decided on bitsets over all assignments.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use super::report::{Counterexample, Parameters, Report, Verdict};
use super::VerifyError;
use crate::eval::Compiled;
use crate::modal::theta_star_witness;
use crate::model::FiniteModel;
use crate::parse::render_model;
use crate::search::collect_models_upto;
use crate::syntax::{Formula, Signature, Term};

pub const MAX_BUDGET: usize = 4;
const VAR_NAMES: [&str; MAX_BUDGET] = ["x", "y", "z", "u"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Atom {
    Pred(String, Vec<usize>),
    /// Term indices, smaller first.
    Eq(usize, usize),
}

// Literal `2 * atom + negated`.
type Clause = Vec<u32>;

#[derive(Debug, Clone)]
enum Shape {
    Var(usize),
    Const(String),
    App(String, Vec<usize>),
}

struct Grammar {
    terms: Vec<Term>,
    shapes: Vec<Shape>,
    atoms: Vec<Atom>,
    atom_index: HashMap<Formula, usize>,
    /// `perm_maps[p][a]`: the atom `a` under the p-th variable permutation.
    perm_maps: Vec<Vec<usize>>,
    vars: usize,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(p: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(p, k + 1, out);
            p.swap(k, i);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), 0, &mut out);
    out.sort();
    out
}

fn cartesian(pool: &[usize], arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                pool.iter().map(move |&p| {
                    let mut t = t.clone();
                    t.push(p);
                    t
                })
            })
            .collect();
    }
    out
}

impl Grammar {
    fn new(sig: &Signature, vars: usize) -> Grammar {
        let mut terms: Vec<Term> = VAR_NAMES[..vars].iter().map(|v| Term::var(v)).collect();
        let mut shapes: Vec<Shape> = (0..vars).map(Shape::Var).collect();
        for c in sig.constants() {
            terms.push(Term::cst(c));
            shapes.push(Shape::Const(c.clone()));
        }
        let shallow: Vec<usize> = (0..terms.len()).collect();
        for (f, &arity) in sig.functions() {
            for args in cartesian(&shallow, arity) {
                terms.push(Term::app(f, args.iter().map(|&i| terms[i].clone()).collect()));
                shapes.push(Shape::App(f.clone(), args));
            }
        }
        let mut atoms = Vec::new();
        for (p, &arity) in sig.predicates() {
            for args in cartesian(&shallow, arity) {
                atoms.push(Atom::Pred(p.clone(), args));
            }
        }
        if sig.equality_allowed() {
            for a in 0..terms.len() {
                for b in a + 1..terms.len() {
                    atoms.push(Atom::Eq(a, b));
                }
            }
        }
        let term_index: HashMap<Term, usize> = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut g = Grammar {
            terms,
            shapes,
            atoms,
            atom_index: HashMap::new(),
            perm_maps: Vec::new(),
            vars,
        };
        g.atom_index = g
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (g.atom_formula(a), i))
            .collect();
        for p in permutations(vars) {
            let map = VAR_NAMES[..vars]
                .iter()
                .zip(&p)
                .map(|(v, &q)| (v.to_string(), Term::var(VAR_NAMES[q])))
                .collect();
            let tmap: Vec<usize> = g.terms.iter().map(|t| term_index[&t.substitute(&map)]).collect();
            let amap = g
                .atoms
                .iter()
                .map(|a| {
                    let image = match a {
                        Atom::Pred(p, args) => Atom::Pred(p.clone(), args.iter().map(|&i| tmap[i]).collect()),
                        Atom::Eq(x, y) => {
                            let (x, y) = (tmap[*x], tmap[*y]);
                            Atom::Eq(x.min(y), x.max(y))
                        }
                    };
                    g.atom_index[&g.atom_formula(&image)]
                })
                .collect();
            g.perm_maps.push(amap);
        }
        g
    }

    fn atom_formula(&self, a: &Atom) -> Formula {
        match a {
            Atom::Pred(p, args) => Formula::pred(p, args.iter().map(|&i| self.terms[i].clone()).collect()),
            Atom::Eq(x, y) => Formula::eq(self.terms[*x].clone(), self.terms[*y].clone()),
        }
    }

    fn canonical(&self, clause: &[u32]) -> Clause {
        self.perm_maps
            .iter()
            .map(|m| {
                let mut c: Clause = clause
                    .iter()
                    .map(|&l| (m[(l / 2) as usize] as u32) * 2 + (l & 1))
                    .collect();
                c.sort_unstable();
                c
            })
            .min()
            .expect("at least the identity permutation")
    }

    fn candidates(&self) -> Vec<Clause> {
        let lits = 2 * self.atoms.len() as u32;
        let mut keys = BTreeSet::new();
        for a in 0..lits {
            keys.insert(self.canonical(&[a]));
            for b in a + 1..lits {
                if a / 2 != b / 2 {
                    keys.insert(self.canonical(&[a, b]));
                }
            }
        }
        keys.into_iter().collect()
    }

    fn sentence(&self, clause: &[u32]) -> Formula {
        let lits: Vec<Formula> = clause
            .iter()
            .map(|&l| {
                let f = self.atom_formula(&self.atoms[(l / 2) as usize]);
                if l & 1 == 1 {
                    Formula::not(f)
                } else {
                    f
                }
            })
            .collect();
        let body = Formula::disjunction(lits);
        let used = body.free_vars();
        let vars: Vec<&str> = VAR_NAMES[..self.vars]
            .iter()
            .copied()
            .filter(|v| used.contains(*v))
            .collect();
        if vars.is_empty() {
            body
        } else {
            Formula::forall(&vars, body)
        }
    }

    /// The clause of a sentence `∀x̄ (l1 ∨ ...)` in this grammar, if it is one.
    fn clause_of(&self, f: &Formula) -> Option<Clause> {
        let (vars, body): (&[String], &Formula) = match f {
            Formula::Forall(vs, b) => (vs, b),
            other => (&[], other),
        };
        if vars.len() > self.vars {
            return None;
        }
        let map = vars
            .iter()
            .zip(VAR_NAMES)
            .map(|(v, w)| (v.clone(), Term::var(w)))
            .collect();
        let body = body.substitute(&map);
        let lits: Vec<&Formula> = match &body {
            Formula::Or(ls) => ls.iter().collect(),
            single => vec![single],
        };
        let mut clause = Vec::new();
        for l in lits {
            let (atom, neg) = match l {
                Formula::Not(a) => (a.as_ref(), 1),
                a => (a, 0),
            };
            let atom = match atom {
                Formula::Eq(a, b) => {
                    let (i, j) = (
                        self.terms.iter().position(|t| t == a)?,
                        self.terms.iter().position(|t| t == b)?,
                    );
                    if i == j {
                        return None;
                    }
                    Formula::eq(self.terms[i.min(j)].clone(), self.terms[i.max(j)].clone())
                }
                other => other.clone(),
            };
            clause.push(*self.atom_index.get(&atom)? as u32 * 2 + neg);
        }
        if clause.is_empty() || clause.len() > 2 {
            return None;
        }
        Some(self.canonical(&clause))
    }

    /// Truth of each atom under every assignment of the variables, as bitsets
    /// indexed by the assignment's base-n code.
    fn atom_bits(&self, m: &FiniteModel) -> Result<Vec<Vec<u64>>, VerifyError> {
        let n = m.size();
        let total = n.pow(self.vars as u32);
        let words = total.div_ceil(64);
        let mut values = vec![vec![0usize; total]; self.terms.len()];
        let mut args = Vec::new();
        for code in 0..total {
            let env = crate::model::decode(code, n, self.vars);
            for (i, shape) in self.shapes.iter().enumerate() {
                values[i][code] = match shape {
                    Shape::Var(v) => env[*v],
                    Shape::Const(c) => m.constant(c)?,
                    Shape::App(f, ts) => {
                        args.clear();
                        args.extend(ts.iter().map(|&t| values[t][code]));
                        m.apply(f, &args)?
                    }
                };
            }
        }
        let mut bits = vec![vec![0u64; words]; self.atoms.len()];
        for (a, atom) in self.atoms.iter().enumerate() {
            for code in 0..total {
                let truth = match atom {
                    Atom::Pred(p, args) => {
                        let args: Vec<usize> = args.iter().map(|&i| values[i][code]).collect();
                        m.holds(p, &args)?
                    }
                    Atom::Eq(x, y) => values[*x][code] == values[*y][code],
                };
                if truth {
                    bits[a][code / 64] |= 1 << (code % 64);
                }
            }
        }
        Ok(bits)
    }
}

fn clause_holds(clause: &[u32], bits: &[Vec<u64>], total: usize) -> bool {
    let words = total.div_ceil(64);
    (0..words).all(|w| {
        let full = if w + 1 == words && !total.is_multiple_of(64) {
            (1u64 << (total % 64)) - 1
        } else {
            u64::MAX
        };
        let mut acc = 0u64;
        for &l in clause {
            let b = bits[(l / 2) as usize][w];
            acc |= if l & 1 == 1 { !b } else { b };
        }
        acc & full == full
    })
}

#[derive(Debug, Clone)]
pub struct SieveResult {
    /// Surviving candidates, in canonical order.
    pub theory: Vec<Formula>,
    pub report: Report,
    keys: BTreeSet<Clause>,
    grammar_vars: usize,
    sig: Arc<Signature>,
}

impl SieveResult {
    /// Whether `f`, read as a clause of the candidate grammar up to renaming
    /// of variables, survived.
    pub fn retains(&self, f: &Formula) -> bool {
        let g = Grammar::new(&self.sig, self.grammar_vars);
        g.clause_of(f).is_some_and(|c| self.keys.contains(&c))
    }
}

/// The candidates within `budget` variables true in every model of `phi` of
/// size at most `max_size`.
pub fn universal_consequence_sieve(
    sig: &Arc<Signature>,
    phi: &Formula,
    budget: usize,
    max_size: usize,
) -> Result<SieveResult, VerifyError> {
    if budget == 0 || budget > MAX_BUDGET {
        return Err(VerifyError::BudgetOutOfRange(budget));
    }
    let compiled = Compiled::new(sig, phi)?;
    if !compiled.is_sentence() {
        return Err(VerifyError::NotASentence);
    }
    let g = Grammar::new(sig, budget);
    let mut alive = g.candidates();
    let generated = alive.len();
    let models = collect_models_upto(sig, max_size, Some(phi))?;

    let mut report = Report::new(
        "sieve",
        Parameters {
            max_size: Some(max_size),
            extension_bound: None,
            budget: Some(budget),
        },
    );
    report.detail(format!("{} atoms, {generated} candidate clauses", g.atoms.len()));
    report.detail(format!("{} models of the formula up to size {max_size}", models.len()));
    for m in &models {
        let bits = g.atom_bits(m)?;
        let total = m.size().pow(budget as u32);
        alive = alive
            .into_par_iter()
            .filter(|c| clause_holds(c, &bits, total))
            .collect();
    }
    let theory: Vec<Formula> = alive.iter().map(|c| g.sentence(c)).collect();
    report.detail(format!("{} retained", theory.len()));
    for f in &theory {
        report.detail(format!("retained {f}"));
    }

    // Independent re-check with the evaluator, on one model per isomorphism
    // type (universal sentences do not distinguish isomorphic models).
    let mut reps: Vec<FiniteModel> = models.par_iter().map(FiniteModel::canonical_form).collect();
    reps.sort_by_key(FiniteModel::order_key);
    reps.dedup();
    let failure = theory
        .par_iter()
        .map(|f| -> Result<Option<usize>, VerifyError> {
            let c = Compiled::new(sig, f)?;
            Ok(reps.iter().position(|m| !c.holds(m)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((t, m)) = failure.iter().enumerate().find_map(|(t, f)| f.map(|m| (t, m))) {
        report.refute(Counterexample::new(
            &reps[m],
            &theory[t],
            Some("retained sentence fails under direct evaluation".into()),
        ));
    } else {
        report.detail(format!("re-checked on {} isomorphism types", reps.len()));
    }
    Ok(SieveResult {
        theory,
        report,
        keys: alive.into_iter().collect(),
        grammar_vars: budget,
        sig: sig.clone(),
    })
}

/// Cross-checks θ* at extension bound `k` against the sieve: a model with an
/// extension satisfying φ satisfies every retained sentence.
///
/// | θ*    | retained sentences | verdict                     |
/// |-------|--------------------|-----------------------------|
/// | true  | all hold           | verified                    |
/// | true  | one fails          | refuted                     |
/// | false | one fails          | verified (separated)        |
/// | false | all hold           | exhausted-without-decision  |
pub fn theta_star_membership(
    model: &FiniteModel,
    phi: &Formula,
    k: usize,
    budget: usize,
    max_size: usize,
) -> Result<Report, VerifyError> {
    let sig = model.shared_signature();
    let star = theta_star_witness(model, phi, k)?;
    let sieve = universal_consequence_sieve(&sig, phi, budget, max_size)?;
    let mut failing = None;
    for f in &sieve.theory {
        if !Compiled::new(&sig, f)?.holds(model) {
            failing = Some(f);
            break;
        }
    }
    let mut report = Report::new(
        "theta-star-membership",
        Parameters {
            max_size: Some(max_size),
            extension_bound: Some(k),
            budget: Some(budget),
        },
    );
    report.detail(format!("sieve retained {} sentences", sieve.theory.len()));
    match (&star, failing) {
        (Some(ext), None) => {
            report.detail("extension found; model satisfies every retained sentence");
            report.detail(format!("extension:\n{}", render_model(ext)));
        }
        (Some(ext), Some(f)) => {
            report.refute(Counterexample::new(
                model,
                f,
                Some(format!("extension satisfies the formula:\n{}", render_model(ext))),
            ));
        }
        (None, Some(f)) => {
            report.detail(format!("no extension within {k}; separated by {f}"));
        }
        (None, None) => {
            report.verdict = Verdict::ExhaustedWithoutDecision;
            report.detail(format!(
                "no extension within {k}, yet every retained sentence holds; larger bounds may decide"
            ));
        }
    }
    Ok(report)
}

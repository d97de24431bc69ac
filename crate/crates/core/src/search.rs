//! Backtracking model search.
//!
//! Table cells are filled one at a time in a fixed order (constants, then
//! function tables, then relations; each table in lexicographic tuple order),
//! so models come out in lexicographic order of their tables. When a pruning
//! sentence is given it is split into conjuncts, each universal conjunct into
//! one instance per assignment of its leading block. Every instance is
//! evaluated three-valued on the partial tables and watches the earliest
//! unfilled cell it read; it is re-evaluated only when that cell is filled.
//! An instance that becomes false rejects the current branch.

use std::sync::Arc;

use crate::eval::{eval, CForm, Compiled, Interp};
use crate::model::{FiniteModel, ModelError};
use crate::syntax::{Formula, Signature};
use crate::transforms::nnf;

const UNKNOWN: usize = usize::MAX;
const FIXED: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
enum CellRef {
    Const(usize),
    Func(usize, usize),
    Pred(usize, usize),
}

#[derive(Debug, Clone)]
struct Tables {
    n: usize,
    consts: Vec<usize>,
    funcs: Vec<Vec<usize>>,
    // 0 false, 1 true, 2 unknown
    preds: Vec<Vec<u8>>,
    pos_const: Vec<usize>,
    pos_func: Vec<Vec<usize>>,
    pos_pred: Vec<Vec<usize>>,
}

impl Interp for Tables {
    #[inline]
    fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn func(&self, f: usize, code: usize, watch: &mut usize) -> Option<usize> {
        let v = self.funcs[f][code];
        if v == UNKNOWN {
            *watch = (*watch).min(self.pos_func[f][code]);
            None
        } else {
            Some(v)
        }
    }

    #[inline]
    fn pred(&self, p: usize, code: usize, watch: &mut usize) -> Option<bool> {
        match self.preds[p][code] {
            0 => Some(false),
            1 => Some(true),
            _ => {
                *watch = (*watch).min(self.pos_pred[p][code]);
                None
            }
        }
    }

    #[inline]
    fn cnst(&self, c: usize, watch: &mut usize) -> Option<usize> {
        let v = self.consts[c];
        if v == UNKNOWN {
            *watch = (*watch).min(self.pos_const[c]);
            None
        } else {
            Some(v)
        }
    }
}

#[derive(Debug, Clone)]
struct Conjunct {
    block: usize,
    body: CForm,
    slots: usize,
}

#[derive(Debug, Clone, Copy)]
struct Instance {
    conjunct: u32,
    code: u32,
}

#[derive(Debug)]
struct Frame {
    pos: usize,
    next: usize,
    applied: bool,
    taken: Vec<Instance>,
    pushed: Vec<usize>,
}

/// Lazy stream of the models of a signature of fixed size, optionally with
/// some cells fixed in advance and optionally pruned by a sentence.
#[derive(Debug)]
pub struct ModelSearch {
    sig: Arc<Signature>,
    tables: Tables,
    cells: Vec<CellRef>,
    conjuncts: Vec<Conjunct>,
    watches: Vec<Vec<Instance>>,
    stack: Vec<Frame>,
    first_value: Option<usize>,
    started: bool,
    done: bool,
    env: Vec<usize>,
    dom: Vec<usize>,
}

/// Splits a sentence in negation normal form into conjuncts, distributing
/// universal blocks over conjunctions and dropping block variables a
/// conjunct does not use.
fn split_conjuncts(f: &Formula, out: &mut Vec<(Vec<String>, Formula)>) {
    match f {
        Formula::And(gs) => gs.iter().for_each(|g| split_conjuncts(g, out)),
        Formula::Forall(vs, body) => {
            let mut parts = Vec::new();
            split_conjuncts(body, &mut parts);
            for (ws, g) in parts {
                let free = g.free_vars();
                let mut block: Vec<String> = vs
                    .iter()
                    .filter(|v| free.contains(*v) && !ws.contains(v))
                    .cloned()
                    .collect();
                block.extend(ws);
                out.push((block, g));
            }
        }
        other => out.push((Vec::new(), other.clone())),
    }
}

impl ModelSearch {
    pub fn new(sig: Arc<Signature>, n: usize, prune: Option<&Formula>) -> Result<ModelSearch, ModelError> {
        Self::build(sig, n, None, prune)
    }

    /// Extensions of `base` to universe `{0..m-1}`: every cell whose tuple
    /// lies inside the old universe, and every constant, is fixed to its
    /// value in `base`.
    pub fn extending(base: &FiniteModel, m: usize, prune: Option<&Formula>) -> Result<ModelSearch, ModelError> {
        if m < base.size() {
            return Err(ModelError::BoundTooSmall {
                bound: m,
                size: base.size(),
            });
        }
        Self::build(base.shared_signature(), m, Some(base), prune)
    }

    /// Restricts the first free cell to one value. Searches restricted to
    /// each value of that cell partition the space.
    pub fn with_first_value(mut self, value: usize) -> ModelSearch {
        self.first_value = Some(value);
        self
    }

    /// Number of values the first free cell ranges over (0 if none).
    pub fn first_cell_domain(&self) -> usize {
        self.cells.first().map_or(0, |&c| self.domain(c))
    }

    fn build(
        sig: Arc<Signature>,
        n: usize,
        base: Option<&FiniteModel>,
        prune: Option<&Formula>,
    ) -> Result<ModelSearch, ModelError> {
        if n == 0 {
            return Err(ModelError::EmptyUniverse);
        }
        let old = base.map_or(0, FiniteModel::size);
        let inside = |code: usize, arity: usize| -> Option<usize> {
            // code over n -> code over old, when all arguments are old
            let mut c = code;
            let mut out = 0;
            let mut scale = 1;
            for _ in 0..arity {
                let a = c % n;
                if a >= old {
                    return None;
                }
                out += a * scale;
                scale *= old;
                c /= n;
            }
            Some(out)
        };
        let mut cells = Vec::new();
        let mut consts = Vec::new();
        let mut pos_const = Vec::new();
        for (i, _) in sig.constants().iter().enumerate() {
            match base {
                Some(b) => {
                    consts.push(b.const_values()[i]);
                    pos_const.push(FIXED);
                }
                None => {
                    consts.push(UNKNOWN);
                    pos_const.push(cells.len());
                    cells.push(CellRef::Const(i));
                }
            }
        }
        let mut funcs = Vec::new();
        let mut pos_func = Vec::new();
        for (i, &a) in sig.functions().values().enumerate() {
            let len = n.pow(a as u32);
            let mut table = vec![UNKNOWN; len];
            let mut pos = vec![FIXED; len];
            for code in 0..len {
                match base.and_then(|b| inside(code, a).map(|c| b.func_table(i)[c])) {
                    Some(v) => table[code] = v,
                    None => {
                        pos[code] = cells.len();
                        cells.push(CellRef::Func(i, code));
                    }
                }
            }
            funcs.push(table);
            pos_func.push(pos);
        }
        let mut preds = Vec::new();
        let mut pos_pred = Vec::new();
        for (i, &a) in sig.predicates().values().enumerate() {
            let len = n.pow(a as u32);
            let mut table = vec![2u8; len];
            let mut pos = vec![FIXED; len];
            for code in 0..len {
                match base.and_then(|b| inside(code, a).map(|c| b.pred_table(i)[c])) {
                    Some(v) => table[code] = v as u8,
                    None => {
                        pos[code] = cells.len();
                        cells.push(CellRef::Pred(i, code));
                    }
                }
            }
            preds.push(table);
            pos_pred.push(pos);
        }

        let mut conjuncts = Vec::new();
        if let Some(f) = prune {
            if !f.is_sentence() {
                return Err(crate::eval::EvalError::NotASentence.into());
            }
            let mut parts = Vec::new();
            split_conjuncts(&nnf(f), &mut parts);
            for (block, body) in parts {
                let c = Compiled::with_leading(&sig, &body, &block)?;
                conjuncts.push(Conjunct {
                    block: block.len(),
                    body: c.root,
                    slots: c.slots,
                });
            }
        }
        let env_len = conjuncts.iter().map(|c| c.slots).max().unwrap_or(0);
        let watches = vec![Vec::new(); cells.len() + 1];
        Ok(ModelSearch {
            sig,
            tables: Tables {
                n,
                consts,
                funcs,
                preds,
                pos_const,
                pos_func,
                pos_pred,
            },
            cells,
            conjuncts,
            watches,
            stack: Vec::new(),
            first_value: None,
            started: false,
            done: false,
            env: vec![0; env_len],
            dom: (0..n).collect(),
        })
    }

    fn domain(&self, cell: CellRef) -> usize {
        match cell {
            CellRef::Pred(..) => 2,
            _ => self.tables.n,
        }
    }

    fn set_cell(&mut self, cell: CellRef, value: usize) {
        match cell {
            CellRef::Const(i) => self.tables.consts[i] = value,
            CellRef::Func(i, code) => self.tables.funcs[i][code] = value,
            CellRef::Pred(i, code) => self.tables.preds[i][code] = if value == UNKNOWN { 2 } else { value as u8 },
        }
    }

    // Some(true)/Some(false) when decided, otherwise None with the watch position.
    fn evaluate(&mut self, inst: Instance) -> (Option<bool>, usize) {
        let conj = &self.conjuncts[inst.conjunct as usize];
        let n = self.tables.n;
        let mut code = inst.code as usize;
        for slot in (0..conj.block).rev() {
            self.env[slot] = code % n;
            code /= n;
        }
        let mut watch = usize::MAX;
        let r = eval(&conj.body, &self.tables, &self.dom, &mut self.env, &mut watch);
        (r, watch)
    }

    /// Evaluates every instance on the initial tables. False if some
    /// instance already fails.
    fn init(&mut self) -> bool {
        let n = self.tables.n as u64;
        for ci in 0..self.conjuncts.len() {
            let count = n.pow(self.conjuncts[ci].block as u32);
            assert!(count <= u32::MAX as u64, "quantifier block too large to search");
            for code in 0..count {
                let inst = Instance {
                    conjunct: ci as u32,
                    code: code as u32,
                };
                match self.evaluate(inst) {
                    (Some(false), _) => return false,
                    (Some(true), _) => {}
                    (None, w) => self.watches[w].push(inst),
                }
            }
        }
        true
    }

    // Fills cell `pos` with `value`, re-evaluating its watchers. On conflict the
    // state is restored and None is returned.
    fn apply(&mut self, pos: usize, value: usize) -> Option<(Vec<Instance>, Vec<usize>)> {
        self.set_cell(self.cells[pos], value);
        let taken = std::mem::take(&mut self.watches[pos]);
        let mut pushed: Vec<usize> = Vec::new();
        for &inst in &taken {
            match self.evaluate(inst) {
                (Some(false), _) => {
                    for &q in pushed.iter().rev() {
                        self.watches[q].pop();
                    }
                    self.watches[pos] = taken;
                    self.set_cell(self.cells[pos], UNKNOWN);
                    return None;
                }
                (Some(true), _) => {}
                (None, w) => {
                    debug_assert!(w > pos && w != usize::MAX);
                    self.watches[w].push(inst);
                    pushed.push(w);
                }
            }
        }
        Some((taken, pushed))
    }

    fn undo(&mut self, frame: &mut Frame) {
        for &q in frame.pushed.iter().rev() {
            self.watches[q].pop();
        }
        self.watches[frame.pos] = std::mem::take(&mut frame.taken);
        frame.pushed.clear();
        self.set_cell(self.cells[frame.pos], UNKNOWN);
        frame.applied = false;
    }

    fn snapshot(&self) -> FiniteModel {
        let relations = self
            .tables
            .preds
            .iter()
            .map(|t| t.iter().map(|&b| b == 1).collect())
            .collect();
        FiniteModel::from_tables(
            self.sig.clone(),
            self.tables.n,
            relations,
            self.tables.funcs.clone(),
            self.tables.consts.clone(),
        )
    }

    fn push_frame(&mut self, pos: usize) {
        let next = match (pos, self.first_value) {
            (0, Some(v)) => v,
            _ => 0,
        };
        self.stack.push(Frame {
            pos,
            next,
            applied: false,
            taken: Vec::new(),
            pushed: Vec::new(),
        });
    }

    fn limit(&self, pos: usize) -> usize {
        match (pos, self.first_value) {
            (0, Some(v)) => (v + 1).min(self.domain(self.cells[0])),
            _ => self.domain(self.cells[pos]),
        }
    }
}

impl Iterator for ModelSearch {
    type Item = FiniteModel;

    fn next(&mut self) -> Option<FiniteModel> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.init() {
                self.done = true;
                return None;
            }
            if self.cells.is_empty() {
                self.done = true;
                return Some(self.snapshot());
            }
            self.push_frame(0);
        }
        loop {
            let Some(mut frame) = self.stack.pop() else {
                self.done = true;
                return None;
            };
            if frame.applied {
                self.undo(&mut frame);
            }
            if frame.next >= self.limit(frame.pos) {
                continue;
            }
            let value = frame.next;
            frame.next += 1;
            let pos = frame.pos;
            if let Some((taken, pushed)) = self.apply(pos, value) {
                frame.applied = true;
                frame.taken = taken;
                frame.pushed = pushed;
                self.stack.push(frame);
                if pos + 1 == self.cells.len() {
                    return Some(self.snapshot());
                }
                self.push_frame(pos + 1);
            } else {
                self.stack.push(frame);
            }
        }
    }
}

/// All models of size `n` satisfying `prune`, searched in parallel over the
/// values of the first cell and merged in enumeration order.
pub fn collect_models_par(
    sig: Arc<Signature>,
    n: usize,
    prune: Option<&Formula>,
) -> Result<Vec<FiniteModel>, ModelError> {
    use rayon::prelude::*;
    let probe = ModelSearch::new(sig.clone(), n, prune)?;
    let width = probe.first_cell_domain();
    if width <= 1 {
        return Ok(probe.collect());
    }
    let parts: Vec<Vec<FiniteModel>> = (0..width)
        .into_par_iter()
        .map(|v| {
            ModelSearch::new(sig.clone(), n, prune)
                .expect("validated above")
                .with_first_value(v)
                .collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Models of every size from 1 to `max_size`, in enumeration order.
pub fn collect_models_upto(
    sig: &Arc<Signature>,
    max_size: usize,
    prune: Option<&Formula>,
) -> Result<Vec<FiniteModel>, ModelError> {
    let mut out = Vec::new();
    for n in 1..=max_size {
        out.extend(collect_models_par(sig.clone(), n, prune)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::evaluate_sentence;
    use crate::parse::{parse_formula, parse_signature};

    fn sig(text: &str) -> Arc<Signature> {
        Arc::new(parse_signature(text).unwrap())
    }

    #[test]
    fn raw_enumeration_counts_and_order() {
        let s = sig("pred P/1");
        let models: Vec<FiniteModel> = ModelSearch::new(s.clone(), 2, None).unwrap().collect();
        assert_eq!(models.len(), 4);
        let keys: Vec<_> = models.iter().map(FiniteModel::order_key).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        let s = sig("fun f/1\nconst c");
        assert_eq!(ModelSearch::new(s, 3, None).unwrap().count(), 3 * 27);
    }

    #[test]
    fn pruned_equals_filtered() {
        let s = sig("pred R/2\nequality on");
        let phi = parse_formula(
            "(and (forall (x) (not (R x x))) (forall (x y z) (or (not (R x y)) (not (R y z)) (R x z))) (exists (x y) (R x y)))",
            &s,
        )
        .unwrap();
        for n in 1..=3 {
            let raw: Vec<FiniteModel> = ModelSearch::new(s.clone(), n, None)
                .unwrap()
                .filter(|m| evaluate_sentence(m, &phi).unwrap())
                .collect();
            let pruned: Vec<FiniteModel> = ModelSearch::new(s.clone(), n, Some(&phi)).unwrap().collect();
            assert_eq!(raw, pruned);
        }
    }

    #[test]
    fn latin_squares_of_order_three() {
        let s = sig("fun mul/2\nequality on");
        let cancel = parse_formula(
            "(and (forall (x y z) (or (not (= (mul x y) (mul x z))) (= y z))) \
                  (forall (x y z) (or (not (= (mul y x) (mul z x))) (= y z))))",
            &s,
        )
        .unwrap();
        // oracle: raw 3^9 tables checked for distinct rows and columns
        let mut raw = 0;
        for code in 0..3usize.pow(9) {
            let t: Vec<usize> = (0..9).map(|i| (code / 3usize.pow(8 - i as u32)) % 3).collect();
            let rows = (0..3).all(|r| (0..3).all(|a| (0..3).all(|b| a == b || t[r * 3 + a] != t[r * 3 + b])));
            let cols = (0..3).all(|c| (0..3).all(|a| (0..3).all(|b| a == b || t[a * 3 + c] != t[b * 3 + c])));
            if rows && cols {
                raw += 1;
            }
        }
        assert_eq!(raw, 12);
        assert_eq!(ModelSearch::new(s, 3, Some(&cancel)).unwrap().count(), raw);
    }

    #[test]
    fn partitioned_search_matches_sequential() {
        let s = sig("fun mul/2\nequality on");
        let assoc = parse_formula("(forall (x y z) (= (mul (mul x y) z) (mul x (mul y z))))", &s).unwrap();
        let seq: Vec<FiniteModel> = ModelSearch::new(s.clone(), 3, Some(&assoc)).unwrap().collect();
        let par = collect_models_par(s.clone(), 3, Some(&assoc)).unwrap();
        let raw = ModelSearch::new(s.clone(), 3, None)
            .unwrap()
            .filter(|m| evaluate_sentence(m, &assoc).unwrap())
            .count();
        assert_eq!(seq.len(), raw);
        assert_eq!(seq, par);
    }

    #[test]
    fn extension_search_respects_fixed_cells() {
        let s = sig("fun mul/2\nequality on");
        let mut base = FiniteModel::new(s.clone(), 2).unwrap();
        base.set_function("mul", &[0, 1], 1).unwrap();
        base.set_function("mul", &[1, 0], 1).unwrap();
        let exts: Vec<FiniteModel> = ModelSearch::extending(&base, 3, None).unwrap().collect();
        assert_eq!(exts.len(), 3usize.pow(5));
        assert!(exts.iter().all(|m| m.restrict_prefix(2).as_ref() == Some(&base)));
    }
}

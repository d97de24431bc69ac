//! Finite structures with universe `{0..n-1}`, their submodels and extensions.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::eval::EvalError;
use crate::search::ModelSearch;
use crate::syntax::{Formula, Signature};

/// Size, constants, function tables, relation tables.
pub type OrderKey = (usize, Vec<usize>, Vec<Vec<usize>>, Vec<Vec<bool>>);
/// As [`OrderKey`], with relations listed by their true cells.
pub type ListingKey = (usize, Vec<usize>, Vec<Vec<usize>>, Vec<Vec<usize>>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("universe must be nonempty")]
    EmptyUniverse,
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("element {element} is outside the universe of size {size}")]
    OutOfRange { element: usize, size: usize },
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("extension bound {bound} is smaller than the model size {size}")]
    BoundTooSmall { bound: usize, size: usize },
    #[error("universe of size {0} is too large for subset enumeration")]
    TooLarge(usize),
    #[error(transparent)]
    Formula(#[from] EvalError),
}

/// Tuple code in base `n`, first argument most significant, so that code
/// order coincides with lexicographic tuple order.
pub fn encode(args: &[usize], n: usize) -> usize {
    args.iter().fold(0, |acc, &a| acc * n + a)
}

pub fn decode(mut code: usize, n: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = code % n;
        code /= n;
    }
    out
}

/// A finite model. Relations and function tables are stored densely in the
/// signature's (sorted) symbol order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteModel {
    sig: Arc<Signature>,
    size: usize,
    relations: Vec<Vec<bool>>,
    functions: Vec<Vec<usize>>,
    constants: Vec<usize>,
}

impl FiniteModel {
    /// The model of the given size with empty relations and every function
    /// and constant sent to 0.
    pub fn new(sig: Arc<Signature>, size: usize) -> Result<FiniteModel, ModelError> {
        if size == 0 {
            return Err(ModelError::EmptyUniverse);
        }
        let relations = sig
            .predicates()
            .values()
            .map(|&a| vec![false; size.pow(a as u32)])
            .collect();
        let functions = sig.functions().values().map(|&a| vec![0; size.pow(a as u32)]).collect();
        let constants = vec![0; sig.constants().len()];
        Ok(FiniteModel {
            sig,
            size,
            relations,
            functions,
            constants,
        })
    }

    pub(crate) fn from_tables(
        sig: Arc<Signature>,
        size: usize,
        relations: Vec<Vec<bool>>,
        functions: Vec<Vec<usize>>,
        constants: Vec<usize>,
    ) -> FiniteModel {
        FiniteModel {
            sig,
            size,
            relations,
            functions,
            constants,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn shared_signature(&self) -> Arc<Signature> {
        self.sig.clone()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub(crate) fn pred_table(&self, p: usize) -> &[bool] {
        &self.relations[p]
    }

    pub(crate) fn func_table(&self, f: usize) -> &[usize] {
        &self.functions[f]
    }

    pub(crate) fn const_values(&self) -> &[usize] {
        &self.constants
    }

    fn check_args(&self, symbol: &str, expected: usize, args: &[usize]) -> Result<(), ModelError> {
        if args.len() != expected {
            return Err(ModelError::ArityMismatch {
                symbol: symbol.to_string(),
                expected,
                found: args.len(),
            });
        }
        self.check_element(args.iter().copied())
    }

    fn check_element(&self, mut elems: impl Iterator<Item = usize>) -> Result<(), ModelError> {
        match elems.find(|&e| e >= self.size) {
            Some(e) => Err(ModelError::OutOfRange {
                element: e,
                size: self.size,
            }),
            None => Ok(()),
        }
    }

    fn pred_index(&self, name: &str) -> Result<(usize, usize), ModelError> {
        self.sig
            .predicates()
            .iter()
            .enumerate()
            .find(|(_, (k, _))| k.as_str() == name)
            .map(|(i, (_, &a))| (i, a))
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_string()))
    }

    fn func_index(&self, name: &str) -> Result<(usize, usize), ModelError> {
        self.sig
            .functions()
            .iter()
            .enumerate()
            .find(|(_, (k, _))| k.as_str() == name)
            .map(|(i, (_, &a))| (i, a))
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_string()))
    }

    fn const_index(&self, name: &str) -> Result<usize, ModelError> {
        self.sig
            .constants()
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_string()))
    }

    pub fn set_relation(&mut self, name: &str, args: &[usize], value: bool) -> Result<(), ModelError> {
        let (i, a) = self.pred_index(name)?;
        self.check_args(name, a, args)?;
        self.relations[i][encode(args, self.size)] = value;
        Ok(())
    }

    pub fn set_function(&mut self, name: &str, args: &[usize], value: usize) -> Result<(), ModelError> {
        let (i, a) = self.func_index(name)?;
        self.check_args(name, a, args)?;
        self.check_element(std::iter::once(value))?;
        self.functions[i][encode(args, self.size)] = value;
        Ok(())
    }

    pub fn set_constant(&mut self, name: &str, value: usize) -> Result<(), ModelError> {
        let i = self.const_index(name)?;
        self.check_element(std::iter::once(value))?;
        self.constants[i] = value;
        Ok(())
    }

    pub fn holds(&self, name: &str, args: &[usize]) -> Result<bool, ModelError> {
        let (i, a) = self.pred_index(name)?;
        self.check_args(name, a, args)?;
        Ok(self.relations[i][encode(args, self.size)])
    }

    pub fn apply(&self, name: &str, args: &[usize]) -> Result<usize, ModelError> {
        let (i, a) = self.func_index(name)?;
        self.check_args(name, a, args)?;
        Ok(self.functions[i][encode(args, self.size)])
    }

    pub fn constant(&self, name: &str) -> Result<usize, ModelError> {
        Ok(self.constants[self.const_index(name)?])
    }

    /// Tuples in the relation, in lexicographic order.
    pub fn relation(&self, name: &str) -> Result<Vec<Vec<usize>>, ModelError> {
        let (i, a) = self.pred_index(name)?;
        Ok(self.relations[i]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(code, _)| decode(code, self.size, a))
            .collect())
    }

    /// Least subset containing `seeds` and the constants, closed under every
    /// function table. Returned sorted.
    pub fn closure(&self, seeds: &[usize]) -> Result<Vec<usize>, ModelError> {
        self.check_element(seeds.iter().copied())?;
        let mut inside = vec![false; self.size];
        for &s in seeds.iter().chain(self.constants.iter()) {
            inside[s] = true;
        }
        let arities: Vec<usize> = self.sig.functions().values().copied().collect();
        loop {
            let members: Vec<usize> = (0..self.size).filter(|&e| inside[e]).collect();
            let mut grew = false;
            for (table, &arity) in self.functions.iter().zip(&arities) {
                for_each_tuple(&members, arity, |args| {
                    let v = table[encode(args, self.size)];
                    if !inside[v] {
                        inside[v] = true;
                        grew = true;
                    }
                });
            }
            if !grew {
                return Ok(members);
            }
        }
    }

    pub fn is_closed(&self, elems: &[usize]) -> bool {
        matches!(self.closure(elems), Ok(c) if c.len() == {
            let set: BTreeSet<usize> = elems.iter().copied().collect();
            set.len()
        })
    }

    /// The submodel on `elems` (which must be closed), relabeled onto
    /// `{0..k-1}` in increasing order. The second component maps new
    /// elements to old ones.
    pub fn induced(&self, elems: &[usize]) -> (FiniteModel, Vec<usize>) {
        let mut map: Vec<usize> = elems.to_vec();
        map.sort_unstable();
        map.dedup();
        let k = map.len();
        let mut back = vec![usize::MAX; self.size];
        for (i, &e) in map.iter().enumerate() {
            back[e] = i;
        }
        let relations = self
            .sig
            .predicates()
            .values()
            .zip(&self.relations)
            .map(|(&a, table)| {
                (0..k.pow(a as u32))
                    .map(|code| {
                        let args: Vec<usize> = decode(code, k, a).into_iter().map(|i| map[i]).collect();
                        table[encode(&args, self.size)]
                    })
                    .collect()
            })
            .collect();
        let functions = self
            .sig
            .functions()
            .values()
            .zip(&self.functions)
            .map(|(&a, table)| {
                (0..k.pow(a as u32))
                    .map(|code| {
                        let args: Vec<usize> = decode(code, k, a).into_iter().map(|i| map[i]).collect();
                        back[table[encode(&args, self.size)]]
                    })
                    .collect()
            })
            .collect();
        let constants = self.constants.iter().map(|&c| back[c]).collect();
        (
            FiniteModel::from_tables(self.sig.clone(), k, relations, functions, constants),
            map,
        )
    }

    /// The same structure transported along the permutation `perm`
    /// (old element `i` becomes `perm[i]`).
    pub fn relabel(&self, perm: &[usize]) -> FiniteModel {
        let n = self.size;
        let mut out = self.clone();
        for ((table, &a), src) in out
            .relations
            .iter_mut()
            .zip(self.sig.predicates().values())
            .zip(&self.relations)
        {
            for (code, &b) in src.iter().enumerate() {
                let args: Vec<usize> = decode(code, n, a).into_iter().map(|i| perm[i]).collect();
                table[encode(&args, n)] = b;
            }
        }
        for ((table, &a), src) in out
            .functions
            .iter_mut()
            .zip(self.sig.functions().values())
            .zip(&self.functions)
        {
            for (code, &v) in src.iter().enumerate() {
                let args: Vec<usize> = decode(code, n, a).into_iter().map(|i| perm[i]).collect();
                table[encode(&args, n)] = perm[v];
            }
        }
        for c in out.constants.iter_mut() {
            *c = perm[*c];
        }
        out
    }

    /// Lexicographically least relabeling; equal keys iff isomorphic.
    /// Brute force over all permutations, so only for small universes.
    pub fn canonical_form(&self) -> FiniteModel {
        let mut best: Option<FiniteModel> = None;
        let mut perm: Vec<usize> = (0..self.size).collect();
        permutations(&mut perm, 0, &mut |p| {
            let candidate = self.relabel(p);
            if best.as_ref().is_none_or(|b| candidate.table_key() < b.table_key()) {
                best = Some(candidate);
            }
        });
        best.unwrap_or_else(|| self.clone())
    }

    fn table_key(&self) -> (Vec<usize>, &Vec<Vec<usize>>, &Vec<Vec<bool>>) {
        (self.constants.clone(), &self.functions, &self.relations)
    }

    /// Ordering key: size first, then tables in enumeration order.
    pub fn order_key(&self) -> OrderKey {
        (
            self.size,
            self.constants.clone(),
            self.functions.clone(),
            self.relations.clone(),
        )
    }

    /// Ordering used to pick reported counterexamples: size, constants,
    /// function tables, then each relation as its sorted list of true cells.
    /// Under it `{0}` precedes `{1}`, as when reading the listed tuples.
    pub fn listing_key(&self) -> ListingKey {
        (
            self.size,
            self.constants.clone(),
            self.functions.clone(),
            self.relations
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, &b)| b).map(|(c, _)| c).collect())
                .collect(),
        )
    }

    /// Restriction to `{0..k-1}` when that set is closed.
    pub fn restrict_prefix(&self, k: usize) -> Option<FiniteModel> {
        let elems: Vec<usize> = (0..k).collect();
        if k == 0 || k > self.size || !self.is_closed(&elems) {
            return None;
        }
        Some(self.induced(&elems).0)
    }
}

fn permutations(perm: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == perm.len() {
        f(perm);
        return;
    }
    for j in i..perm.len() {
        perm.swap(i, j);
        permutations(perm, i + 1, f);
        perm.swap(i, j);
    }
}

/// Calls `f` on every tuple of the given arity over `elems`, in lexicographic order.
pub(crate) fn for_each_tuple(elems: &[usize], arity: usize, mut f: impl FnMut(&[usize])) {
    if elems.is_empty() && arity > 0 {
        return;
    }
    let mut idx = vec![0usize; arity];
    let mut tuple: Vec<usize> = vec![elems.first().copied().unwrap_or(0); arity];
    loop {
        f(&tuple);
        let mut pos = arity;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                tuple[pos] = elems[idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = elems[0];
        }
    }
}

/// The submodel generated by `seeds`, with its inclusion map.
pub fn generated_submodel(model: &FiniteModel, seeds: &[usize]) -> Result<(FiniteModel, Vec<usize>), ModelError> {
    if seeds.is_empty() {
        return Err(ModelError::EmptySeeds);
    }
    let elems = model.closure(seeds)?;
    Ok(model.induced(&elems))
}

/// Universes of all submodels: nonempty subsets that contain the constants
/// and are closed under the functions, ordered by their bitmask.
pub fn enumerate_subuniverses(model: &FiniteModel) -> Result<impl Iterator<Item = Vec<usize>> + '_, ModelError> {
    let n = model.size();
    if n > 30 {
        return Err(ModelError::TooLarge(n));
    }
    Ok((1u64..(1u64 << n)).filter_map(move |mask| {
        let elems: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        match model.closure(&elems) {
            Ok(c) if c.len() == elems.len() => Some(elems),
            _ => None,
        }
    }))
}

/// All models of the signature with universe `{0..n-1}`. With `prune`, only
/// the models of `prune` are produced, found by backtracking over the tables.
pub fn enumerate_models(sig: Arc<Signature>, n: usize, prune: Option<&Formula>) -> Result<ModelSearch, ModelError> {
    ModelSearch::new(sig, n, prune)
}

/// Every extension of `model` with at most `bound` elements, in order of
/// size. Old elements keep their labels; old tuples keep their values.
/// With `prune`, only extensions satisfying it are produced.
pub fn enumerate_extensions(
    model: &FiniteModel,
    bound: usize,
    prune: Option<&Formula>,
) -> Result<impl Iterator<Item = FiniteModel>, ModelError> {
    if bound < model.size() {
        return Err(ModelError::BoundTooSmall {
            bound,
            size: model.size(),
        });
    }
    let searches = (model.size()..=bound)
        .map(|m| ModelSearch::extending(model, m, prune))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(searches.into_iter().flatten())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_model, parse_signature};

    fn c4() -> FiniteModel {
        let sig = parse_signature("fun mul/2\nconst e\nequality on").unwrap();
        let mut table = String::from("universe 4\nfun mul:");
        for a in 0..4 {
            for b in 0..4 {
                table.push_str(&format!(" ({a},{b})={}", (a + b) % 4));
            }
        }
        table.push_str("\nconst e = 0");
        parse_model(&table, &sig).unwrap()
    }

    // Independent closure oracle: repeatedly add products until stable.
    fn oracle_closure(seeds: &[usize]) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = seeds.iter().copied().collect();
        s.insert(0);
        loop {
            let next: BTreeSet<usize> = s
                .iter()
                .flat_map(|&a| s.iter().map(move |&b| (a + b) % 4))
                .chain(s.iter().copied())
                .collect();
            if next == s {
                return s;
            }
            s = next;
        }
    }

    #[test]
    fn generated_submodels_of_c4() {
        let m = c4();
        let (_, map) = generated_submodel(&m, &[1]).unwrap();
        assert_eq!(map, oracle_closure(&[1]).into_iter().collect::<Vec<_>>());
        assert_eq!(map, vec![0, 1, 2, 3]);
        let (sub, map) = generated_submodel(&m, &[2]).unwrap();
        assert_eq!(map, oracle_closure(&[2]).into_iter().collect::<Vec<_>>());
        assert_eq!(map, vec![0, 2]);
        assert_eq!(sub.apply("mul", &[1, 1]).unwrap(), 0);
        assert_eq!(generated_submodel(&m, &[]), Err(ModelError::EmptySeeds));
    }

    #[test]
    fn relational_generated_submodel_is_seed() {
        let sig = Arc::new(parse_signature("pred P/1").unwrap());
        let m = FiniteModel::new(sig, 3).unwrap();
        assert_eq!(generated_submodel(&m, &[1]).unwrap().1, vec![1]);
    }

    #[test]
    fn subuniverses() {
        let sig = Arc::new(parse_signature("pred P/1").unwrap());
        let m = FiniteModel::new(sig, 3).unwrap();
        assert_eq!(enumerate_subuniverses(&m).unwrap().count(), 7);

        // oracle: subgroups of Z4 by brute force over subsets
        let brute: Vec<Vec<usize>> = (1u32..16)
            .map(|mask| (0..4).filter(|i| mask & (1 << i) != 0).collect::<Vec<usize>>())
            .filter(|s| s.contains(&0) && s.iter().all(|a| s.iter().all(|b| s.contains(&((a + b) % 4)))))
            .collect();
        let subs: Vec<Vec<usize>> = enumerate_subuniverses(&c4()).unwrap().collect();
        assert_eq!(subs, brute);
        assert_eq!(subs, vec![vec![0], vec![0, 2], vec![0, 1, 2, 3]]);

        let sig = Arc::new(parse_signature("const c").unwrap());
        let mut m = FiniteModel::new(sig, 2).unwrap();
        m.set_constant("c", 1).unwrap();
        let subs: Vec<Vec<usize>> = enumerate_subuniverses(&m).unwrap().collect();
        assert_eq!(subs, vec![vec![1], vec![0, 1]]);
    }

    #[test]
    fn subuniverses_are_closure_fixpoints() {
        let m = c4();
        for s in enumerate_subuniverses(&m).unwrap() {
            assert_eq!(m.closure(&s).unwrap(), s);
        }
    }

    #[test]
    fn extensions_of_one_point() {
        let sig = Arc::new(parse_signature("pred P/1").unwrap());
        let m = FiniteModel::new(sig, 1).unwrap();
        let exts: Vec<FiniteModel> = enumerate_extensions(&m, 2, None).unwrap().collect();
        assert_eq!(exts.len(), 3);
        assert_eq!(exts[0], m);
        let only: Vec<FiniteModel> = enumerate_extensions(&m, 1, None).unwrap().collect();
        assert_eq!(only, vec![m.clone()]);
        assert!(matches!(
            enumerate_extensions(&m, 0, None),
            Err(ModelError::BoundTooSmall { .. })
        ));
    }

    #[test]
    fn extensions_keep_old_tuples_inside() {
        let sig = Arc::new(parse_signature("fun f/1").unwrap());
        let mut m = FiniteModel::new(sig, 2).unwrap();
        m.set_function("f", &[0], 1).unwrap();
        let mut count = 0;
        for ext in enumerate_extensions(&m, 3, None).unwrap() {
            count += 1;
            assert_eq!(ext.apply("f", &[0]).unwrap(), 1);
            assert_eq!(ext.apply("f", &[1]).unwrap(), 0);
            assert_eq!(ext.restrict_prefix(2).unwrap(), m);
        }
        // the trivial extension plus three choices of f(2)
        assert_eq!(count, 4);
    }

    #[test]
    fn raw_model_counts() {
        let sig = Arc::new(parse_signature("pred P/1").unwrap());
        assert_eq!(enumerate_models(sig, 2, None).unwrap().count(), 4);
    }

    #[test]
    fn canonical_form_identifies_isomorphic_models() {
        let m = c4();
        let swapped = m.relabel(&[1, 0, 2, 3]);
        assert_ne!(m, swapped);
        assert_eq!(m.canonical_form(), swapped.canonical_form());
    }
}

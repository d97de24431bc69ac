//! Text formats for signatures (`.sig`), formulas (`.fml`) and finite models
//! (`.mdl`), with deterministic renderers.
//!
//! Signature files hold one declaration per line:
//!
//! ```text
//! pred P/1
//! fun mul/2
//! const e
//! equality on
//! ```
//!
//! Formulas are s-expressions:
//! `(forall (x y) (or (< x y) (< y x) (= x y)))`. A bare name in term
//! position is a constant when the signature declares it, else a variable.
//!
//! Model files give the universe size and then the tables:
//!
//! ```text
//! universe 2
//! pred P = {(0)}
//! fun mul: (0,0)=0 (0,1)=1 (1,0)=1 (1,1)=0
//! const e = 0
//! ```
//!
//! Relations that are not mentioned are empty; every function table and
//! constant must be given in full. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::model::{decode, FiniteModel, ModelError};
use crate::syntax::{Formula, LogicError, Signature, SymbolKind, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Logic {
        line: usize,
        #[source]
        source: LogicError,
    },
    #[error("line {line}: {source}")]
    Model {
        line: usize,
        #[source]
        source: ModelError,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_decl(line: usize, rest: &str) -> Result<(String, usize), ParseError> {
    let (name, arity) = rest
        .rsplit_once('/')
        .ok_or_else(|| syntax(line, format!("expected NAME/ARITY, found `{rest}`")))?;
    let arity: usize = arity
        .trim()
        .parse()
        .map_err(|_| syntax(line, format!("bad arity `{arity}`")))?;
    check_name(line, name.trim())?;
    Ok((name.trim().to_string(), arity))
}

const KEYWORDS: [&str; 7] = ["not", "and", "or", "exists", "forall", "implies", "="];

fn check_name(line: usize, name: &str) -> Result<(), ParseError> {
    if name.is_empty() || KEYWORDS.contains(&name) || name.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
        return Err(syntax(line, format!("invalid symbol name `{name}`")));
    }
    Ok(())
}

pub fn parse_signature(text: &str) -> Result<Signature, ParseError> {
    let mut sig = Signature::new();
    for (line, l) in content_lines(text) {
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        let logic = |source| ParseError::Logic { line, source };
        match kw {
            "pred" => {
                let (name, arity) = parse_decl(line, rest)?;
                sig.add_predicate(&name, arity).map_err(logic)?;
            }
            "fun" => {
                let (name, arity) = parse_decl(line, rest)?;
                sig.add_function(&name, arity).map_err(logic)?;
            }
            "const" => {
                check_name(line, rest)?;
                sig.add_constant(rest).map_err(logic)?;
            }
            "equality" => match rest {
                "on" => sig.set_equality(true),
                "off" => sig.set_equality(false),
                _ => return Err(syntax(line, format!("expected `on` or `off`, found `{rest}`"))),
            },
            _ => return Err(syntax(line, format!("unknown declaration `{kw}`"))),
        }
    }
    Ok(sig)
}

pub fn render_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for (p, a) in sig.predicates() {
        let _ = writeln!(out, "pred {p}/{a}");
    }
    for (f, a) in sig.functions() {
        let _ = writeln!(out, "fun {f}/{a}");
    }
    for c in sig.constants() {
        let _ = writeln!(out, "const {c}");
    }
    if sig.equality_allowed() {
        out.push_str("equality on\n");
    }
    out
}

#[derive(Debug, Clone)]
enum SExpr {
    Atom(String, usize),
    List(Vec<SExpr>, usize),
}

impl SExpr {
    fn line(&self) -> usize {
        match self {
            SExpr::Atom(_, l) | SExpr::List(_, l) => *l,
        }
    }
}

fn read_sexprs(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut stack: Vec<(Vec<SExpr>, usize)> = vec![(Vec::new(), 1)];
    let mut line = 1;
    let mut atom = String::new();
    let mut atom_line = 1;
    let flush = |atom: &mut String, stack: &mut Vec<(Vec<SExpr>, usize)>, l: usize| {
        if !atom.is_empty() {
            stack.last_mut().unwrap().0.push(SExpr::Atom(std::mem::take(atom), l));
        }
    };
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '#' => {
                flush(&mut atom, &mut stack, atom_line);
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '(' => {
                flush(&mut atom, &mut stack, atom_line);
                stack.push((Vec::new(), line));
            }
            ')' => {
                flush(&mut atom, &mut stack, atom_line);
                if stack.len() == 1 {
                    return Err(syntax(line, "unbalanced `)`"));
                }
                let (items, l) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(SExpr::List(items, l));
            }
            c if c.is_whitespace() => {
                flush(&mut atom, &mut stack, atom_line);
                if c == '\n' {
                    line += 1;
                }
            }
            c => {
                if atom.is_empty() {
                    atom_line = line;
                }
                atom.push(c);
            }
        }
    }
    flush(&mut atom, &mut stack, atom_line);
    if stack.len() != 1 {
        return Err(syntax(stack.last().unwrap().1, "unclosed `(`"));
    }
    Ok(stack.pop().unwrap().0)
}

struct FormulaReader<'a> {
    sig: &'a Signature,
}

impl FormulaReader<'_> {
    fn logic(line: usize, source: LogicError) -> ParseError {
        ParseError::Logic { line, source }
    }

    fn term(&self, e: &SExpr) -> Result<Term, ParseError> {
        match e {
            SExpr::Atom(name, line) => match self.sig.symbol(name) {
                Some(SymbolKind::Constant) => Ok(Term::Const(name.clone())),
                Some(SymbolKind::Function(a)) => Err(Self::logic(
                    *line,
                    LogicError::ArityMismatch {
                        symbol: name.clone(),
                        expected: a,
                        found: 0,
                    },
                )),
                Some(SymbolKind::Predicate(_)) => Err(syntax(*line, format!("predicate `{name}` used as a term"))),
                None if KEYWORDS.contains(&name.as_str()) => {
                    Err(syntax(*line, format!("keyword `{name}` used as a term")))
                }
                None => Ok(Term::Var(name.clone())),
            },
            SExpr::List(items, line) => {
                let Some(SExpr::Atom(f, _)) = items.first() else {
                    return Err(syntax(*line, "expected a function application"));
                };
                match self.sig.symbol(f) {
                    Some(SymbolKind::Function(a)) => {
                        if a != items.len() - 1 {
                            return Err(Self::logic(
                                *line,
                                LogicError::ArityMismatch {
                                    symbol: f.clone(),
                                    expected: a,
                                    found: items.len() - 1,
                                },
                            ));
                        }
                        let args = items[1..].iter().map(|i| self.term(i)).collect::<Result<_, _>>()?;
                        Ok(Term::App(f.clone(), args))
                    }
                    _ => Err(Self::logic(*line, LogicError::UnknownSymbol(f.clone()))),
                }
            }
        }
    }

    fn formula(&self, e: &SExpr) -> Result<Formula, ParseError> {
        let SExpr::List(items, line) = e else {
            return Err(syntax(e.line(), "expected a parenthesized formula"));
        };
        let line = *line;
        let Some(SExpr::Atom(head, _)) = items.first() else {
            return Err(syntax(line, "expected a keyword or predicate"));
        };
        let args = &items[1..];
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() != n {
                Err(syntax(
                    line,
                    format!("`{head}` takes {n} argument(s), found {}", args.len()),
                ))
            } else {
                Ok(())
            }
        };
        match head.as_str() {
            "not" => {
                arity(1)?;
                Ok(Formula::not(self.formula(&args[0])?))
            }
            "and" => Ok(Formula::And(
                args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?,
            )),
            "or" => Ok(Formula::Or(
                args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?,
            )),
            "implies" => {
                arity(2)?;
                Ok(Formula::implies(self.formula(&args[0])?, self.formula(&args[1])?))
            }
            "exists" | "forall" => {
                arity(2)?;
                let SExpr::List(vars, vline) = &args[0] else {
                    return Err(syntax(line, "expected a variable list"));
                };
                if vars.is_empty() {
                    return Err(Self::logic(*vline, LogicError::EmptyQuantifierBlock));
                }
                let mut names = Vec::with_capacity(vars.len());
                let mut seen = BTreeSet::new();
                for v in vars {
                    let SExpr::Atom(name, l) = v else {
                        return Err(syntax(v.line(), "expected a variable name"));
                    };
                    if self.sig.symbol(name).is_some() || KEYWORDS.contains(&name.as_str()) {
                        return Err(syntax(*l, format!("`{name}` cannot be bound as a variable")));
                    }
                    if !seen.insert(name.clone()) {
                        return Err(Self::logic(*l, LogicError::RepeatedBlockVariable(name.clone())));
                    }
                    names.push(name.clone());
                }
                let body = Box::new(self.formula(&args[1])?);
                Ok(if head == "exists" {
                    Formula::Exists(names, body)
                } else {
                    Formula::Forall(names, body)
                })
            }
            "=" => {
                arity(2)?;
                if !self.sig.equality_allowed() {
                    return Err(Self::logic(line, LogicError::EqualityNotAllowed));
                }
                Ok(Formula::Eq(self.term(&args[0])?, self.term(&args[1])?))
            }
            p => match self.sig.symbol(p) {
                Some(SymbolKind::Predicate(a)) => {
                    if a != args.len() {
                        return Err(Self::logic(
                            line,
                            LogicError::ArityMismatch {
                                symbol: p.to_string(),
                                expected: a,
                                found: args.len(),
                            },
                        ));
                    }
                    let terms = args.iter().map(|t| self.term(t)).collect::<Result<_, _>>()?;
                    Ok(Formula::Pred(p.to_string(), terms))
                }
                _ => Err(Self::logic(line, LogicError::UnknownSymbol(p.to_string()))),
            },
        }
    }
}

/// Parses exactly one formula.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let exprs = read_sexprs(text)?;
    match exprs.as_slice() {
        [e] => FormulaReader { sig }.formula(e),
        [] => Err(syntax(1, "empty input")),
        [_, second, ..] => Err(syntax(second.line(), "more than one formula")),
    }
}

pub fn render_formula(f: &Formula) -> String {
    f.to_string()
}

fn parse_usize(line: usize, s: &str) -> Result<usize, ParseError> {
    s.trim()
        .parse()
        .map_err(|_| syntax(line, format!("expected a number, found `{s}`")))
}

// "(0,1)" -> [0, 1]
fn parse_tuple(line: usize, s: &str) -> Result<Vec<usize>, ParseError> {
    let inner = s
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| syntax(line, format!("expected a tuple, found `{s}`")))?;
    inner.split(',').map(|x| parse_usize(line, x)).collect()
}

// Splits "(0,1)(1,2)" or "(0,1)=0 (1,1)=1" into items, one per closing paren
// group, keeping any `=value` suffix attached.
fn split_items(line: usize, s: &str) -> Result<Vec<String>, ParseError> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut items = Vec::new();
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        rest = rest.trim_start_matches(',');
        if rest.is_empty() {
            break;
        }
        if !rest.starts_with('(') {
            return Err(syntax(line, format!("expected `(`, found `{rest}`")));
        }
        let close = rest.find(')').ok_or_else(|| syntax(line, "unclosed tuple"))?;
        let mut end = close + 1;
        if rest[end..].starts_with('=') {
            end += rest[end + 1..]
                .find(|c: char| !c.is_ascii_digit())
                .map_or(rest.len() - end, |i| i + 1);
        }
        items.push(rest[..end].to_string());
        rest = &rest[end..];
    }
    Ok(items)
}

pub fn parse_model(text: &str, sig: &Signature) -> Result<FiniteModel, ParseError> {
    let mut lines = content_lines(text);
    let (line, first) = lines.next().ok_or_else(|| syntax(1, "missing `universe` line"))?;
    let size = match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["universe", n] => parse_usize(line, n)?,
        _ => return Err(syntax(line, "expected `universe N` first")),
    };
    let model_err = |line: usize| move |source: ModelError| ParseError::Model { line, source };
    let mut model = FiniteModel::new(Arc::new(sig.clone()), size).map_err(model_err(line))?;

    let mut seen_symbols = BTreeSet::new();
    let mut filled_consts = BTreeSet::new();
    let mut filled_funcs = BTreeSet::new();
    for (line, l) in lines {
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        match kw {
            "pred" => {
                let (name, body) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected `pred NAME = {...}`"))?;
                let name = name.trim();
                let Some(SymbolKind::Predicate(arity)) = sig.symbol(name) else {
                    return Err(ParseError::Logic {
                        line,
                        source: LogicError::UnknownSymbol(name.to_string()),
                    });
                };
                if !seen_symbols.insert(name.to_string()) {
                    return Err(syntax(line, format!("duplicate entry for `{name}`")));
                }
                let body = body.trim();
                let inner = body
                    .strip_prefix('{')
                    .and_then(|b| b.strip_suffix('}'))
                    .ok_or_else(|| syntax(line, "expected `{...}`"))?;
                let mut tuples = BTreeSet::new();
                for item in split_items(line, inner)? {
                    let t = parse_tuple(line, &item)?;
                    if t.len() != arity {
                        return Err(model_err(line)(ModelError::ArityMismatch {
                            symbol: name.to_string(),
                            expected: arity,
                            found: t.len(),
                        }));
                    }
                    if !tuples.insert(t.clone()) {
                        return Err(syntax(line, format!("duplicate tuple {item} in `{name}`")));
                    }
                    model.set_relation(name, &t, true).map_err(model_err(line))?;
                }
            }
            "fun" => {
                let (name, body) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(line, "expected `fun NAME: (args)=value ...`"))?;
                let name = name.trim();
                let Some(SymbolKind::Function(arity)) = sig.symbol(name) else {
                    return Err(ParseError::Logic {
                        line,
                        source: LogicError::UnknownSymbol(name.to_string()),
                    });
                };
                if !seen_symbols.insert(name.to_string()) {
                    return Err(syntax(line, format!("duplicate entry for `{name}`")));
                }
                let mut defined = BTreeSet::new();
                for item in split_items(line, body)? {
                    let (args, value) = item
                        .split_once(")=")
                        .ok_or_else(|| syntax(line, format!("expected `(args)=value`, found `{item}`")))?;
                    let args = parse_tuple(line, &format!("{args})"))?;
                    let value = parse_usize(line, value)?;
                    if args.len() != arity {
                        return Err(model_err(line)(ModelError::ArityMismatch {
                            symbol: name.to_string(),
                            expected: arity,
                            found: args.len(),
                        }));
                    }
                    if !defined.insert(args.clone()) {
                        return Err(syntax(line, format!("duplicate entry {item} in `{name}`")));
                    }
                    model.set_function(name, &args, value).map_err(model_err(line))?;
                }
                let total = size.pow(arity as u32);
                if defined.len() != total {
                    let missing = (0..total)
                        .map(|c| decode(c, size, arity))
                        .find(|t| !defined.contains(t))
                        .unwrap_or_default();
                    return Err(syntax(
                        line,
                        format!("table for `{name}` is not total: missing {missing:?}"),
                    ));
                }
                filled_funcs.insert(name.to_string());
            }
            "const" => {
                let (name, value) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected `const NAME = value`"))?;
                let name = name.trim();
                if sig.symbol(name) != Some(SymbolKind::Constant) {
                    return Err(ParseError::Logic {
                        line,
                        source: LogicError::UnknownSymbol(name.to_string()),
                    });
                }
                if !seen_symbols.insert(name.to_string()) {
                    return Err(syntax(line, format!("duplicate entry for `{name}`")));
                }
                let value = parse_usize(line, value)?;
                model.set_constant(name, value).map_err(model_err(line))?;
                filled_consts.insert(name.to_string());
            }
            "universe" => return Err(syntax(line, "duplicate `universe` line")),
            _ => return Err(syntax(line, format!("unknown declaration `{kw}`"))),
        }
    }
    let end = text.lines().count().max(1);
    if let Some(f) = sig.functions().keys().find(|f| !filled_funcs.contains(*f)) {
        return Err(syntax(end, format!("missing table for function `{f}`")));
    }
    if let Some(c) = sig.constants().iter().find(|c| !filled_consts.contains(*c)) {
        return Err(syntax(end, format!("missing value for constant `{c}`")));
    }
    Ok(model)
}

pub fn render_model(m: &FiniteModel) -> String {
    let sig = m.signature();
    let n = m.size();
    let tuple = |t: &[usize]| format!("({})", t.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    let mut out = format!("universe {n}\n");
    for p in sig.predicates().keys() {
        let tuples: Vec<String> = m.relation(p).expect("declared").iter().map(|t| tuple(t)).collect();
        let _ = writeln!(out, "pred {p} = {{{}}}", tuples.join(", "));
    }
    for (f, &a) in sig.functions() {
        let _ = write!(out, "fun {f}:");
        for code in 0..n.pow(a as u32) {
            let args = decode(code, n, a);
            let _ = write!(out, " {}={}", tuple(&args), m.apply(f, &args).expect("declared"));
        }
        out.push('\n');
    }
    for c in sig.constants() {
        let _ = writeln!(out, "const {c} = {}", m.constant(c).expect("declared"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Signature,
    Formula,
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Origin {
    File(PathBuf),
    Inline,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File(p) => write!(f, "{}", p.display()),
            Origin::Inline => f.write_str("<inline>"),
        }
    }
}

/// Input text together with what it is meant to be and where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    pub kind: SourceKind,
    pub text: String,
    pub origin: Origin,
}

impl SourceDocument {
    pub fn inline(kind: SourceKind, text: impl Into<String>) -> SourceDocument {
        SourceDocument {
            kind,
            text: text.into(),
            origin: Origin::Inline,
        }
    }

    pub fn read(kind: SourceKind, path: impl AsRef<Path>) -> io::Result<SourceDocument> {
        let path = path.as_ref();
        Ok(SourceDocument {
            kind,
            text: fs::read_to_string(path)?,
            origin: Origin::File(path.to_path_buf()),
        })
    }

    /// A command-line argument: inline text when it opens like the format
    /// (`(` for formulas, `universe` for models), otherwise a path.
    pub fn from_arg(kind: SourceKind, arg: &str) -> io::Result<SourceDocument> {
        let t = arg.trim_start();
        let inline = match kind {
            SourceKind::Formula => t.starts_with('('),
            SourceKind::Model => t.starts_with("universe"),
            SourceKind::Signature => false,
        };
        if inline {
            Ok(SourceDocument::inline(kind, arg))
        } else {
            SourceDocument::read(kind, arg)
        }
    }

    pub fn signature(&self) -> Result<Signature, ParseError> {
        parse_signature(&self.text)
    }

    pub fn formula(&self, sig: &Signature) -> Result<Formula, ParseError> {
        parse_formula(&self.text, sig)
    }

    pub fn model(&self, sig: &Signature) -> Result<FiniteModel, ParseError> {
        parse_model(&self.text, sig)
    }
}

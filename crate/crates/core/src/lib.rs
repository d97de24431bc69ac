//! Submodel and extension modalities over finite first-order structures.
//!
//! The crate covers formula syntax and text formats, Tarski semantics on
//! finite models, enumeration of submodels, extensions and model spaces, the
//! modalities θ and θ*, the syntactic constructions around them, and a
//! bounded verification harness.

pub mod eval;
pub mod modal;
pub mod model;
pub mod parse;
pub mod search;
pub mod syntax;
pub mod transforms;
pub mod verify;

pub use eval::{evaluate, evaluate_sentence, Compiled, EvalError};
pub use modal::{
    build_t_phi, build_theta_eq, build_theta_le, relativize, submodel_formula, theta_eq_sem, theta_gen_sem,
    theta_le_sem, theta_sem, theta_star_sem, Bound, ModalError, Theory,
};
pub use model::{
    enumerate_extensions, enumerate_models, enumerate_subuniverses, generated_submodel, FiniteModel, ModelError,
};
pub use parse::{
    parse_formula, parse_model, parse_signature, render_formula, render_model, render_signature, Origin, ParseError,
    SourceDocument, SourceKind,
};
pub use search::ModelSearch;
pub use syntax::{classify, Classification, Formula, LogicError, Signature, SymbolKind, Term, Var};

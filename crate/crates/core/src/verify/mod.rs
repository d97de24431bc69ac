//! Bounded verification harness: exhaustive claim checks, the universal
//! consequence sieve, demos, and the reports they produce.

pub mod check;
pub mod corpus;
pub mod demos;
pub mod oracle;
pub mod report;
pub mod sieve;

use thiserror::Error;

use crate::eval::EvalError;
use crate::modal::ModalError;
use crate::model::ModelError;
use crate::parse::ParseError;
use crate::syntax::LogicError;
use crate::transforms::TransformError;

pub use check::{
    builder_soundness, check_equiv, ea_bound_check, monadic_closure_check, normal_form_check, preservation_check,
    witness_bound_scan, WitnessScan,
};
pub use demos::{run_demo, DEMOS};
pub use report::{Counterexample, Parameters, Report, Verdict};
pub use sieve::{theta_star_membership, universal_consequence_sieve, SieveResult, MAX_BUDGET};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("formula is not a sentence")]
    NotASentence,
    #[error("unknown demo `{0}`")]
    UnknownDemo(String),
    #[error("budget {0} out of range 1..={max}", max = MAX_BUDGET)]
    BudgetOutOfRange(usize),
    #[error("{0}: second formula is not ∃∀")]
    NotSigma2(String),
    #[error(transparent)]
    Modal(#[from] ModalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

//! `submodel`: evaluate, transform and check sentences about finite models.

use std::io::Write as _;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use submodel_core::modal::{self, theta_star_witness, theta_witness, Bound};
use submodel_core::transforms::{normalize_monadic, relativize_expanded};
use submodel_core::verify::{self, Counterexample, Parameters, Report};
use submodel_core::{classify, Formula, SourceDocument, SourceKind};
use submodel_core::{FiniteModel, Signature};

const USAGE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "submodel",
    version,
    about = "Submodel and extension modalities on finite models"
)]
struct Cli {
    /// Signature file; needed by every command that reads formulas or models.
    #[arg(long, global = true, value_name = "FILE.sig")]
    sig: Option<String>,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads.
    #[arg(long, global = true, value_name = "J")]
    jobs: Option<usize>,
    /// Record wall-clock time in the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(multiple = false)]
struct ThetaBound {
    /// Submodels with at most N elements.
    #[arg(long, value_name = "N")]
    le: Option<usize>,
    /// Submodels with exactly N elements.
    #[arg(long, value_name = "N")]
    eq: Option<usize>,
    /// Submodels generated by at most N elements.
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Truth of a sentence in a model.
    Eval { model: String, formula: String },
    /// Whether some submodel satisfies the sentence.
    Theta {
        #[command(flatten)]
        bound: ThetaBound,
        model: String,
        formula: String,
    },
    /// Whether some extension with at most K elements satisfies the sentence.
    ThetaStar {
        #[arg(long, value_name = "K")]
        bound: usize,
        model: String,
        formula: String,
    },
    /// The first-order sentence expressing θ at cardinality N.
    BuildTheta {
        #[arg(long, value_name = "N")]
        n: usize,
        /// Exactly N elements instead of at most N.
        #[arg(long)]
        exact: bool,
        formula: String,
    },
    /// Relativization to a tuple of variables.
    Relativize {
        #[arg(long, value_delimiter = ',', value_name = "x0,x1")]
        vars: Vec<String>,
        /// Expand quantifiers into disjunctions and conjunctions over the tuple.
        #[arg(long)]
        expanded: bool,
        formula: String,
    },
    /// Monadic normal form.
    Normalize { formula: String },
    /// Syntactic classes of a formula.
    Classify { formula: String },
    /// Agreement of two sentences on all models up to a size.
    Equiv {
        #[arg(long, value_name = "N")]
        max_size: usize,
        first: String,
        second: String,
    },
    /// Least submodel size bound over all models up to a size.
    WitnessScan {
        #[arg(long, value_name = "N")]
        max_size: usize,
        formula: String,
    },
    /// Universal consequences within a variable budget, up to a size.
    Sieve {
        #[arg(long, value_name = "S")]
        budget: usize,
        #[arg(long, value_name = "N")]
        max_size: usize,
        formula: String,
    },
    /// Scripted finite-scale verification: maltsev, quasigroup, abelian,
    /// group-extension, wellfounded, density, theorem1.
    Demo {
        name: String,
        #[arg(long, value_name = "N")]
        max_size: Option<usize>,
    },
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

/// What a command produces: a report, or a derived formula or classification.
enum Output {
    Report(Report),
    Formula(Formula),
    Classes(submodel_core::Classification),
}

#[derive(Serialize)]
struct FormulaJson {
    formula: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(USAGE_ERROR);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    }
    let start = Instant::now();
    let out = match run(&cli) {
        Ok(o) => o,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    let mut stdout = std::io::stdout().lock();
    let code = match out {
        Output::Report(mut r) => {
            if cli.timing {
                r.runtime_ms = Some(start.elapsed().as_millis() as u64);
            }
            let text = if cli.json { r.to_json() + "\n" } else { r.to_text() };
            let _ = stdout.write_all(text.as_bytes());
            r.verdict.exit_code() as u8
        }
        Output::Formula(f) => {
            let text = if cli.json {
                serde_json::to_string_pretty(&FormulaJson { formula: f.to_string() }).expect("serializes") + "\n"
            } else {
                format!("{f}\n")
            };
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Output::Classes(c) => {
            let text = serde_json::to_string_pretty(&c).expect("serializes") + "\n";
            let _ = stdout.write_all(text.as_bytes());
            0
        }
    };
    ExitCode::from(code)
}

struct Inputs {
    sig: Arc<Signature>,
}

impl Inputs {
    fn load(cli: &Cli) -> Result<Inputs, Failure> {
        let path = cli
            .sig
            .as_deref()
            .ok_or_else(|| Failure("this command needs --sig FILE.sig".into()))?;
        let doc = SourceDocument::read(SourceKind::Signature, path).map_err(|e| Failure(format!("{path}: {e}")))?;
        let sig = doc.signature().map_err(|e| Failure(format!("{}: {e}", doc.origin)))?;
        Ok(Inputs { sig: Arc::new(sig) })
    }

    fn formula(&self, arg: &str) -> Result<Formula, Failure> {
        let doc = SourceDocument::from_arg(SourceKind::Formula, arg).map_err(|e| Failure(format!("{arg}: {e}")))?;
        doc.formula(&self.sig)
            .map_err(|e| Failure(format!("{}: {e}", doc.origin)))
    }

    fn sentence(&self, arg: &str) -> Result<Formula, Failure> {
        let f = self.formula(arg)?;
        if !f.is_sentence() {
            return Err(Failure(format!("{arg}: not a sentence")));
        }
        Ok(f)
    }

    fn model(&self, arg: &str) -> Result<FiniteModel, Failure> {
        let doc = SourceDocument::from_arg(SourceKind::Model, arg).map_err(|e| Failure(format!("{arg}: {e}")))?;
        doc.model(&self.sig)
            .map_err(|e| Failure(format!("{}: {e}", doc.origin)))
    }
}

fn truth_report(
    id: &str,
    params: Parameters,
    holds: bool,
    model: &FiniteModel,
    f: &Formula,
    why: Option<String>,
) -> Report {
    let mut r = Report::new(id, params);
    if !holds {
        r.refute(Counterexample::new(model, f, why));
    }
    r
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    if let Command::Demo { name, max_size } = &cli.command {
        return Ok(Output::Report(verify::run_demo(name, *max_size)?));
    }
    let inputs = Inputs::load(cli)?;
    let sig = &inputs.sig;
    let out = match &cli.command {
        Command::Eval { model, formula } => {
            let m = inputs.model(model)?;
            let f = inputs.sentence(formula)?;
            let holds = submodel_core::evaluate_sentence(&m, &f)?;
            Output::Report(truth_report("eval", Parameters::default(), holds, &m, &f, None))
        }
        Command::Theta { bound, model, formula } => {
            let m = inputs.model(model)?;
            let f = inputs.sentence(formula)?;
            let b = match (bound.le, bound.eq, bound.gen) {
                (Some(n), _, _) => Bound::AtMost(n),
                (_, Some(n), _) => Bound::Exactly(n),
                (_, _, Some(n)) => Bound::Generated(n),
                _ => Bound::Any,
            };
            let witness = theta_witness(&m, &f, b)?;
            let mut r = truth_report(
                "theta",
                Parameters::default(),
                witness.is_some(),
                &m,
                &f,
                Some(match b {
                    Bound::Any => "no submodel".to_string(),
                    Bound::AtMost(n) => format!("no submodel with at most {n} elements"),
                    Bound::Exactly(n) => format!("no submodel with exactly {n} elements"),
                    Bound::Generated(n) => format!("no submodel generated by at most {n} elements"),
                }),
            );
            if let Some(w) = witness {
                r.detail(format!("submodel on {w:?}"));
            }
            Output::Report(r)
        }
        Command::ThetaStar { bound, model, formula } => {
            let m = inputs.model(model)?;
            let f = inputs.sentence(formula)?;
            let ext = theta_star_witness(&m, &f, *bound)?;
            let params = Parameters {
                extension_bound: Some(*bound),
                ..Parameters::default()
            };
            let mut r = truth_report(
                "theta-star",
                params,
                ext.is_some(),
                &m,
                &f,
                Some(format!("no extension with at most {bound} elements")),
            );
            if let Some(e) = ext {
                r.detail(format!("extension:\n{}", submodel_core::render_model(&e)));
            }
            Output::Report(r)
        }
        Command::BuildTheta { n, exact, formula } => {
            let f = inputs.sentence(formula)?;
            Output::Formula(if *exact {
                modal::build_theta_eq(sig, &f, *n)?
            } else {
                modal::build_theta_le(sig, &f, *n)?
            })
        }
        Command::Relativize {
            vars,
            expanded,
            formula,
        } => {
            let f = inputs.formula(formula)?;
            Output::Formula(if *expanded {
                relativize_expanded(&f, vars)
            } else {
                modal::relativize(&f, vars)?
            })
        }
        Command::Normalize { formula } => Output::Formula(normalize_monadic(&inputs.formula(formula)?)?),
        Command::Classify { formula } => Output::Classes(classify(&inputs.formula(formula)?)),
        Command::Equiv {
            max_size,
            first,
            second,
        } => {
            let (a, b) = (inputs.sentence(first)?, inputs.sentence(second)?);
            Output::Report(verify::check_equiv(sig, &a, &b, *max_size)?)
        }
        Command::WitnessScan { max_size, formula } => {
            Output::Report(verify::witness_bound_scan(sig, &inputs.sentence(formula)?, *max_size)?.report)
        }
        Command::Sieve {
            budget,
            max_size,
            formula,
        } => {
            let f = inputs.sentence(formula)?;
            Output::Report(verify::universal_consequence_sieve(sig, &f, *budget, *max_size)?.report)
        }
        Command::Demo { .. } => unreachable!("handled above"),
    };
    Ok(out)
}

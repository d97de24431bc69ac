//! Acceptance run: one PASS/FAIL line per criterion. Bounds and time limits
//! are fixed below.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use submodel_core::parse_formula;
use submodel_core::verify::demos::first_model_failing;
use submodel_core::verify::{self, corpus, oracle, universal_consequence_sieve, Report};

const BUILDER_MAX_SIZE: usize = 4;
const BUILDER_NS: [usize; 3] = [1, 2, 3];
const BUILDER_TIME_LIMIT: Duration = Duration::from_secs(60);
const BUILDER_MIN_SENTENCES: usize = 20;
const EA_MAX_SIZE: usize = 5;
// 2^25 relations on five points do not fit in memory as a model list
const EA_MAX_SIZE_BINARY: usize = 4;
const PRESERVATION_MAX_SIZE: usize = 4;
const MONADIC_MAX_SIZE: usize = 4;
const MONADIC_MIN_SENTENCES: usize = 10;
const QUASIGROUP_SIZE: usize = 3;
const QUASIGROUP_CANCELLATIVE_AT_3: usize = 12;
const ABELIAN_MAX_SIZE: usize = 3;
const GROUP_EXTENSION_MAX_SIZE: usize = 4;
const FINDER_SIZE: usize = 6;
const FINDER_TIME_LIMIT: Duration = Duration::from_secs(10);
const SIEVE_BUDGET: usize = 3;
const WELLFOUNDED_MAX_SIZE: usize = 4;
const DETERMINISM_RUNS: usize = 2;

struct Outcome {
    pass: bool,
    note: String,
}

fn from_report(r: &Report) -> Outcome {
    Outcome {
        pass: r.is_verified(),
        note: match &r.counterexample {
            Some(c) if !r.is_verified() => format!("{}: {}", r.verdict.as_str(), c.witness.clone().unwrap_or_default()),
            _ => r.verdict.as_str().to_string(),
        },
    }
}

fn both(a: Outcome, b: Outcome) -> Outcome {
    Outcome {
        pass: a.pass && b.pass,
        note: format!("{}; {}", a.note, b.note),
    }
}

fn builder_soundness() -> Outcome {
    let entries = corpus::relational_corpus();
    let shape_ok = entries.len() >= BUILDER_MIN_SENTENCES
        && entries
            .iter()
            .all(|e| e.sig.is_relational() && e.sig.predicates().len() <= 2);
    let start = Instant::now();
    let r = verify::builder_soundness(&entries, BUILDER_MAX_SIZE, &BUILDER_NS).expect("builder check runs");
    let took = start.elapsed();
    let o = from_report(&r);
    Outcome {
        pass: o.pass && shape_ok && took < BUILDER_TIME_LIMIT,
        note: format!("{}; {} sentences; {:.1}s", o.note, entries.len(), took.as_secs_f64()),
    }
}

fn ea_witness_bound() -> Outcome {
    let (binary, rest): (Vec<_>, Vec<_>) = corpus::ea_corpus()
        .into_iter()
        .partition(|e| e.sig.predicates().contains_key("R"));
    let a = from_report(&verify::ea_bound_check(&rest, EA_MAX_SIZE).expect("runs"));
    let b = from_report(&verify::ea_bound_check(&binary, EA_MAX_SIZE_BINARY).expect("runs"));
    let mut o = both(a, b);
    o.note = format!(
        "{}; {} sentences up to size {EA_MAX_SIZE}, {} over R up to size {EA_MAX_SIZE_BINARY}",
        o.note,
        rest.len(),
        binary.len()
    );
    o
}

fn preservation() -> Outcome {
    from_report(&verify::preservation_check(&corpus::preservation_corpus(), PRESERVATION_MAX_SIZE).expect("runs"))
}

fn monadic_closure() -> Outcome {
    let entries = corpus::monadic_corpus();
    let enough = entries.len() >= MONADIC_MIN_SENTENCES
        && entries
            .iter()
            .all(|e| e.sig.is_purely_monadic() && !e.formula.uses_equality());
    let o = from_report(&verify::monadic_closure_check(&entries, MONADIC_MAX_SIZE).expect("runs"));
    Outcome {
        pass: o.pass && enough,
        note: format!("{}; {} sentences", o.note, entries.len()),
    }
}

fn normal_form() -> Outcome {
    from_report(&verify::normal_form_check(&corpus::monadic_corpus(), MONADIC_MAX_SIZE).expect("runs"))
}

fn theta_star_examples() -> Outcome {
    let q = verify::run_demo("quasigroup", Some(QUASIGROUP_SIZE)).expect("runs");
    let twelve = q
        .details
        .iter()
        .any(|d| d.starts_with("size 3:") && d.contains(&format!("{QUASIGROUP_CANCELLATIVE_AT_3} cancellative")));
    let q = Outcome {
        pass: q.is_verified() && twelve,
        note: format!("quasigroup {}", q.verdict.as_str()),
    };
    let a = verify::run_demo("abelian", Some(ABELIAN_MAX_SIZE)).expect("runs");
    let g = verify::run_demo("group-extension", Some(GROUP_EXTENSION_MAX_SIZE)).expect("runs");
    let mut o = both(q, both(from_report(&a), from_report(&g)));
    o.note = format!(
        "{}; {} cancellative tables of size 3",
        o.note,
        if twelve { "12" } else { "not 12" }
    );
    o
}

fn sieve_discriminates() -> Outcome {
    let g = corpus::group_signature();
    let law = |t: &str| parse_formula(t, &g).expect("built-in law");
    let start = Instant::now();
    let found = first_model_failing(&g, &corpus::group_axioms(), &law(corpus::COMMUTATIVITY), FINDER_SIZE)
        .expect("search runs");
    let took = start.elapsed();
    let genuine = found.as_ref().is_some_and(|m| {
        let n = m.size();
        let t: Vec<usize> = (0..n * n).map(|i| m.apply("mul", &[i / n, i % n]).unwrap()).collect();
        oracle::is_group(&t, n) && !oracle::is_commutative(&t, n)
    });
    let sieve = universal_consequence_sieve(&g, &corpus::group_axioms(), SIEVE_BUDGET, FINDER_SIZE).expect("runs");
    let below = universal_consequence_sieve(&g, &corpus::group_axioms(), SIEVE_BUDGET, FINDER_SIZE - 1).expect("runs");
    let comm_out = !sieve.retains(&law(corpus::COMMUTATIVITY));
    let comm_before = below.retains(&law(corpus::COMMUTATIVITY));
    let cancel_in = sieve.retains(&law(corpus::LEFT_CANCELLATION)) && sieve.retains(&law(corpus::RIGHT_CANCELLATION));
    Outcome {
        pass: genuine && took < FINDER_TIME_LIMIT && comm_out && comm_before && cancel_in && sieve.report.is_verified(),
        note: format!(
            "non-commutative group of order {FINDER_SIZE} found in {:.3}s; commutativity retained at {}: {comm_before}, at {FINDER_SIZE}: {}; cancellation retained: {cancel_in}",
            took.as_secs_f64(),
            FINDER_SIZE - 1,
            !comm_out
        ),
    }
}

fn wellfounded() -> Outcome {
    from_report(&verify::run_demo("wellfounded", Some(WELLFOUNDED_MAX_SIZE)).expect("runs"))
}

fn run_cli(dir: &Path, args: &[&str], jobs: Option<&str>) -> (Vec<u8>, Option<i32>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_submodel"));
    cmd.current_dir(dir).args(args).arg("--json");
    if let Some(j) = jobs {
        cmd.args(["--jobs", j]);
    }
    let out = cmd.output().expect("binary runs");
    (out.stdout, out.status.code())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let p = dir.path();
    std::fs::write(p.join("r.sig"), "pred R/2\nequality on\n").unwrap();
    std::fs::write(p.join("g.sig"), "fun mul/2\nconst e\nequality on\n").unwrap();
    std::fs::write(p.join("m.sig"), "pred P/1\npred Q/1\n").unwrap();
    std::fs::write(p.join("r.mdl"), "universe 3\npred R = {(0,1), (1,2), (2,0)}\n").unwrap();
    std::fs::write(
        p.join("c2.mdl"),
        "universe 2\nfun mul: (0,0)=0 (0,1)=1 (1,0)=1 (1,1)=0\nconst e = 0\n",
    )
    .unwrap();
    std::fs::write(p.join("serial.fml"), "(forall (x) (exists (y) (R x y)))\n").unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["--sig", "r.sig", "eval", "r.mdl", "serial.fml"],
        vec!["--sig", "r.sig", "theta", "--le", "2", "r.mdl", "serial.fml"],
        vec![
            "--sig",
            "g.sig",
            "theta-star",
            "--bound",
            "3",
            "c2.mdl",
            "(exists (x) (not (= (mul x x) e)))",
        ],
        vec!["--sig", "r.sig", "build-theta", "--n", "2", "serial.fml"],
        vec!["--sig", "r.sig", "relativize", "--vars", "x0,x1", "serial.fml"],
        vec![
            "--sig",
            "m.sig",
            "normalize",
            "(forall (x) (exists (y) (or (P x) (Q y))))",
        ],
        vec!["--sig", "r.sig", "classify", "serial.fml"],
        vec![
            "--sig",
            "r.sig",
            "equiv",
            "--max-size",
            "3",
            "serial.fml",
            "(exists (x) (R x x))",
        ],
        vec!["--sig", "r.sig", "witness-scan", "--max-size", "3", "serial.fml"],
        vec![
            "--sig",
            "g.sig",
            "sieve",
            "--budget",
            "2",
            "--max-size",
            "3",
            "(forall (x y) (= (mul x y) (mul y x)))",
        ],
        vec!["demo", "quasigroup"],
        vec!["demo", "maltsev"],
        vec!["demo", "theorem1"],
    ];
    let mut mismatches = Vec::new();
    for args in &commands {
        let mut outputs = Vec::new();
        for _ in 0..DETERMINISM_RUNS {
            outputs.push(run_cli(p, args, None));
        }
        outputs.push(run_cli(p, args, Some("1")));
        outputs.push(run_cli(p, args, Some("4")));
        let usable = outputs[0].1.is_some_and(|c| c <= 2) && !outputs[0].0.is_empty();
        if !usable || outputs.iter().any(|o| o != &outputs[0]) {
            mismatches.push(args.join(" "));
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        note: if mismatches.is_empty() {
            format!(
                "{} commands identical over {} runs and --jobs 1/4",
                commands.len(),
                DETERMINISM_RUNS
            )
        } else {
            format!("differing output: {}", mismatches.join(" | "))
        },
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("builder soundness", builder_soundness),
        ("EA witness bound", ea_witness_bound),
        ("preservation", preservation),
        ("monadic closure", monadic_closure),
        ("monadic normal form", normal_form),
        ("extension examples", theta_star_examples),
        ("sieve discriminates at size 6", sieve_discriminates),
        ("well-foundedness shadow", wellfounded),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name} ({}) [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.note,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

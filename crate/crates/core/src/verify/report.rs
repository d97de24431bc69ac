use serde::{Deserialize, Serialize};

use crate::model::FiniteModel;
use crate::parse::render_model;
use crate::syntax::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Refuted,
    ExhaustedWithoutDecision,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::Refuted => 1,
            Verdict::ExhaustedWithoutDecision => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Refuted => "refuted",
            Verdict::ExhaustedWithoutDecision => "exhausted-without-decision",
        }
    }
}

/// Bounds a run was performed under. Absent fields did not apply.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub max_size: Option<usize>,
    pub extension_bound: Option<usize>,
    pub budget: Option<usize>,
}

impl Parameters {
    pub fn sizes(max_size: usize) -> Parameters {
        Parameters {
            max_size: Some(max_size),
            ..Parameters::default()
        }
    }
}

/// A replayable counterexample: the model in `.mdl` syntax, the formula in
/// s-expression syntax, and optionally what was looked for and not found
/// (or found).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub model: String,
    pub formula: String,
    pub witness: Option<String>,
}

impl Counterexample {
    pub fn new(model: &FiniteModel, formula: &Formula, witness: Option<String>) -> Counterexample {
        Counterexample {
            model: render_model(model),
            formula: formula.to_string(),
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub claim_id: String,
    pub parameters: Parameters,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub details: Vec<String>,
    /// Wall-clock time; left out unless explicitly requested so that reports
    /// stay byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<u64>,
}

impl Report {
    pub fn new(claim_id: &str, parameters: Parameters) -> Report {
        Report {
            claim_id: claim_id.to_string(),
            parameters,
            verdict: Verdict::Verified,
            counterexample: None,
            details: Vec::new(),
            runtime_ms: None,
        }
    }

    pub fn refute(&mut self, cex: Counterexample) {
        self.verdict = Verdict::Refuted;
        self.counterexample = Some(cex);
    }

    pub fn detail(&mut self, line: impl Into<String>) {
        self.details.push(line.into());
    }

    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Human-readable form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.claim_id, self.verdict.as_str());
        let p = &self.parameters;
        let mut bounds = Vec::new();
        if let Some(n) = p.max_size {
            bounds.push(format!("max_size={n}"));
        }
        if let Some(k) = p.extension_bound {
            bounds.push(format!("extension_bound={k}"));
        }
        if let Some(s) = p.budget {
            bounds.push(format!("budget={s}"));
        }
        if !bounds.is_empty() {
            out.push_str(&format!("  bounds: {}\n", bounds.join(" ")));
        }
        for d in &self.details {
            let mut lines = d.lines();
            out.push_str(&format!("  {}\n", lines.next().unwrap_or("")));
            for l in lines {
                out.push_str(&format!("    {l}\n"));
            }
        }
        if let Some(c) = &self.counterexample {
            out.push_str(&format!("  formula: {}\n", c.formula));
            if let Some(w) = &c.witness {
                out.push_str(&format!("  witness: {w}\n"));
            }
            out.push_str("  model:\n");
            for line in c.model.lines() {
                out.push_str(&format!("    {line}\n"));
            }
        }
        if let Some(ms) = self.runtime_ms {
            out.push_str(&format!("  runtime_ms: {ms}\n"));
        }
        out
    }
}

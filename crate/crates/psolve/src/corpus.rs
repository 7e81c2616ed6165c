//! JSON-lines corpus of ODE fixtures and the batch runner.
//!
//! Each line holds one entry:
//!
//! ```json
//! {"id": "kamke-21", "ode": "y' = ...",
//!  "options": {"degree": 1, "numberf": 7, "all_solutions": false,
//!              "extended": true, "guess": false},
//!  "expected_R": "exp(-cos(x))/(y - sin(x))^2",
//!  "expected_solution": null,
//!  "expect": "solved"}
//! ```
//!
//! Expected fields are checked by verification, not string comparison: an
//! expected integrating factor passes when it satisfies the defining
//! identity for the entry's ODE, and an expected solution when it is a
//! formal first integral. Integrating factors are not unique, so this is
//! the meaningful notion of "matches".

use crate::error::{Error, Result};
use crate::intfact::NumberF;
use crate::solve::{self, RunOptions, Stage};
use serde_json::{json, Value};
use std::time::Instant;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Expectation {
    Solved,
    IntfactOnly,
    Unsolved,
}

impl Expectation {
    pub fn as_str(self) -> &'static str {
        match self {
            Expectation::Solved => "solved",
            Expectation::IntfactOnly => "intfact_only",
            Expectation::Unsolved => "unsolved",
        }
    }

    pub fn from_str(s: &str) -> Option<Expectation> {
        match s {
            "solved" => Some(Expectation::Solved),
            "intfact_only" => Some(Expectation::IntfactOnly),
            "unsolved" => Some(Expectation::Unsolved),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub id: String,
    pub ode: String,
    pub degree: u32,
    pub numberf: NumberF,
    pub all_solutions: bool,
    pub extended: bool,
    pub guess: bool,
    pub expected_r: Option<String>,
    pub expected_solution: Option<String>,
    pub expect: Expectation,
}

impl CorpusEntry {
    pub fn to_json(&self) -> Value {
        let numberf = match self.numberf {
            NumberF::All => json!("all"),
            NumberF::Count(k) => json!(k),
        };
        json!({
            "id": self.id,
            "ode": self.ode,
            "options": {
                "degree": self.degree,
                "numberf": numberf,
                "all_solutions": self.all_solutions,
                "extended": self.extended,
                "guess": self.guess,
            },
            "expected_R": self.expected_r,
            "expected_solution": self.expected_solution,
            "expect": self.expect.as_str(),
        })
    }

    pub fn from_json(v: &Value) -> Result<CorpusEntry> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::BadInput("corpus entry must be an object".into()))?;
        let id = obj
            .get("id")
            .and_then(|s| s.as_str())
            .ok_or_else(|| Error::BadInput("corpus entry missing 'id'".into()))?
            .to_string();
        let ode = obj
            .get("ode")
            .and_then(|s| s.as_str())
            .ok_or_else(|| Error::BadInput("corpus entry missing 'ode'".into()))?
            .to_string();
        // the ODE must parse for the entry to be well-formed
        crate::parse::parse_ode(&ode)?;
        let options = obj.get("options").and_then(|o| o.as_object());
        let degree = options
            .and_then(|o| o.get("degree"))
            .and_then(|d| d.as_u64())
            .unwrap_or(1) as u32;
        if degree < 1 {
            return Err(Error::BadInput("degree must be at least 1".into()));
        }
        let numberf = match options.and_then(|o| o.get("numberf")) {
            None => NumberF::default(),
            Some(Value::String(s)) if s == "all" => NumberF::All,
            Some(Value::Number(n)) => {
                let k = n
                    .as_u64()
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::BadInput("numberf must be positive".into()))?;
                NumberF::Count(k as usize)
            }
            Some(other) => {
                return Err(Error::BadInput(format!(
                    "numberf must be a positive integer or \"all\", got {other}"
                )))
            }
        };
        let flag = |name: &str| -> bool {
            options
                .and_then(|o| o.get(name))
                .and_then(|b| b.as_bool())
                .unwrap_or(false)
        };
        let expected_r = obj
            .get("expected_R")
            .and_then(|s| s.as_str())
            .map(|s| s.to_string());
        let expected_solution = obj
            .get("expected_solution")
            .and_then(|s| s.as_str())
            .map(|s| s.to_string());
        if let Some(r) = &expected_r {
            crate::parse::parse_expr(r)?;
        }
        if let Some(s) = &expected_solution {
            crate::parse::parse_expr(s)?;
        }
        let expect = obj
            .get("expect")
            .and_then(|s| s.as_str())
            .and_then(Expectation::from_str)
            .ok_or_else(|| {
                Error::BadInput("'expect' must be solved, intfact_only, or unsolved".into())
            })?;
        Ok(CorpusEntry {
            id,
            ode,
            degree,
            numberf,
            all_solutions: flag("all_solutions"),
            extended: flag("extended"),
            guess: flag("guess"),
            expected_r,
            expected_solution,
            expect,
        })
    }

    fn run_options(&self) -> RunOptions {
        RunOptions {
            degree: self.degree,
            numberf: self.numberf,
            all_solutions: self.all_solutions,
            extended: self.extended,
            guess: self.guess,
            time_limit: solve::default_time_limit(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EntryOutcome {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    pub millis: f64,
}

#[derive(Debug, Default)]
pub struct CorpusReport {
    pub outcomes: Vec<EntryOutcome>,
}

impl CorpusReport {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.passed()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            out.push_str(&format!(
                "{:4} {:<40} {:>9.1} ms  {}\n",
                if o.passed { "ok" } else { "FAIL" },
                o.id,
                o.millis,
                o.detail
            ));
        }
        out.push_str(&format!(
            "{} passed, {} failed, {} total\n",
            self.passed(),
            self.failed(),
            self.outcomes.len()
        ));
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "entries": self.outcomes.iter().map(|o| json!({
                "id": o.id,
                "passed": o.passed,
                "detail": o.detail,
                "ms": o.millis,
            })).collect::<Vec<_>>(),
            "passed": self.passed(),
            "failed": self.failed(),
        })
    }
}

/// Evaluates one entry: runs the pipeline to the expected stage, verifies
/// outputs, and checks the expectation fields.
pub fn run_entry(entry: &CorpusEntry) -> EntryOutcome {
    let started = Instant::now();
    let opts = entry.run_options();
    let outcome = evaluate(entry, &opts);
    let millis = started.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(detail) => EntryOutcome {
            id: entry.id.clone(),
            passed: true,
            detail,
            millis,
        },
        Err(msg) => EntryOutcome {
            id: entry.id.clone(),
            passed: false,
            detail: msg,
            millis,
        },
    }
}

fn evaluate(entry: &CorpusEntry, opts: &RunOptions) -> std::result::Result<String, String> {
    match entry.expect {
        Expectation::Unsolved => match solve::run(Stage::Intfact, &entry.ode, opts) {
            Err(Error::NoIntegratingFactor) => Ok("no factor at this degree, as expected".into()),
            Err(e) => Err(format!("expected clean no-factor exit, got error: {e}")),
            Ok(_) => Err("unexpectedly found an integrating factor".into()),
        },
        Expectation::IntfactOnly | Expectation::Solved => {
            let stage = if entry.expect == Expectation::Solved {
                Stage::Solve
            } else {
                Stage::Intfact
            };
            let report = solve::run(stage, &entry.ode, opts).map_err(|e| format!("{e}"))?;
            let mut notes = Vec::new();
            let r_expr = report
                .factor_expr()
                .ok_or_else(|| "no integrating factor in report".to_string())?;
            notes.push(format!("R = {r_expr}"));
            if entry.expect == Expectation::Solved {
                let sol = report
                    .solution
                    .as_ref()
                    .ok_or_else(|| "no solution in report".to_string())?;
                let ok = quadrature_verify(entry, &sol.expr).map_err(|e| e.to_string())?;
                if !ok {
                    return Err(format!("solution failed verification: {sol}"));
                }
            }
            if let Some(expected_r) = &entry.expected_r {
                let ok = solve::check_integrating_factor(&entry.ode, expected_r)
                    .map_err(|e| e.to_string())?;
                if !ok {
                    return Err(format!(
                        "expected_R is not an integrating factor for this ODE: {expected_r}"
                    ));
                }
                notes.push("expected_R verified".into());
            }
            if let Some(expected_sol) = &entry.expected_solution {
                let ok = solve::check_solution(&entry.ode, expected_sol)
                    .map_err(|e| e.to_string())?;
                if !ok {
                    return Err(format!(
                        "expected_solution is not a first integral: {expected_sol}"
                    ));
                }
                notes.push("expected_solution verified".into());
            }
            Ok(notes.join("; "))
        }
    }
}

fn quadrature_verify(entry: &CorpusEntry, sol: &crate::expr::Expr) -> Result<bool> {
    solve::check_solution(&entry.ode, &sol.to_string())
}

/// Runs every entry of a JSON-lines file, in file order. Malformed lines
/// count as failures.
pub fn run_corpus(path: &std::path::Path) -> Result<CorpusReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadInput(format!("cannot read {}: {e}", path.display())))?;
    Ok(run_corpus_text(&text))
}

pub fn run_corpus_text(text: &str) -> CorpusReport {
    let mut report = CorpusReport::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<CorpusEntry, String> = serde_json::from_str::<Value>(line)
            .map_err(|e| format!("line {}: invalid JSON: {e}", lineno + 1))
            .and_then(|v| {
                CorpusEntry::from_json(&v).map_err(|e| format!("line {}: {e}", lineno + 1))
            });
        match parsed {
            Ok(entry) => report.outcomes.push(run_entry(&entry)),
            Err(msg) => report.outcomes.push(EntryOutcome {
                id: format!("line-{}", lineno + 1),
                passed: false,
                detail: msg,
                millis: 0.0,
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_round_trip() {
        let entry = CorpusEntry {
            id: "kamke-21".into(),
            ode: "y' = y^2 - y*sin(x) + cos(x)".into(),
            degree: 1,
            numberf: NumberF::default(),
            all_solutions: false,
            extended: true,
            guess: false,
            expected_r: Some("exp(-cos(x))/(y - sin(x))^2".into()),
            expected_solution: None,
            expect: Expectation::Solved,
        };
        let j = entry.to_json();
        let back = CorpusEntry::from_json(&j).unwrap();
        assert_eq!(back.id, entry.id);
        assert_eq!(back.extended, true);
        assert_eq!(back.expect, Expectation::Solved);
    }

    #[test]
    fn empty_corpus_passes_with_zero_entries() {
        let report = run_corpus_text("");
        assert_eq!(report.outcomes.len(), 0);
        assert_eq!(report.failed(), 0);
    }

    #[test]
    fn malformed_entry_counts_as_failure() {
        let report = run_corpus_text("{\"id\": \"broken\"}\nnot json at all\n");
        assert_eq!(report.outcomes.len(), 2);
        assert_eq!(report.failed(), 2);
    }

    #[test]
    fn unsolved_expectation_passes_on_exit_one() {
        let line = json!({
            "id": "kamke-21-plain",
            "ode": "y' = y^2 - y*sin(x) + cos(x)",
            "options": {"degree": 1},
            "expect": "unsolved",
        })
        .to_string();
        let report = run_corpus_text(&line);
        assert_eq!(report.passed(), 1, "{}", report.render());
    }

    #[test]
    fn solved_expectation_with_expected_r() {
        let line = json!({
            "id": "kamke-21",
            "ode": "y' = y^2 - y*sin(x) + cos(x)",
            "options": {"degree": 1, "extended": true},
            "expected_R": "exp(-cos(x))/(y - sin(x))^2",
            "expect": "solved",
        })
        .to_string();
        let report = run_corpus_text(&line);
        assert_eq!(report.passed(), 1, "{}", report.render());
    }

    #[test]
    fn manufactured_entry_passes() {
        let made = crate::manufacture::manufacture(3, 2).unwrap();
        let line = made.entry.to_json().to_string();
        let report = run_corpus_text(&line);
        assert_eq!(report.passed(), 1, "{}", report.render());
    }
}

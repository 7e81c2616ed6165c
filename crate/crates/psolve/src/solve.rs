//! Pipeline orchestration: run the solver up to a requested stage and
//! collect every intermediate object into a report.

use crate::basis::{self, BasisTable};
use crate::darboux::{self, DarbouxPair, SearchConfig, SearchMode};
use crate::dop::{self, DOperator};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::funcfield::FuncField;
use crate::intfact::{self, ExpAnsatz, IntegratingFactor, NumberF};
use crate::parse::{self, OdeSpec};
use crate::poly::MultiPoly;
use crate::quadrature::{self, FirstIntegral};
use serde_json::{json, Value};
use std::time::{Duration, Instant};

/// How far to take the pipeline.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Stage {
    Basis,
    DBasis,
    Dop,
    Eigenpol,
    Intfact,
    Solve,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub degree: u32,
    pub numberf: NumberF,
    pub all_solutions: bool,
    pub extended: bool,
    pub guess: bool,
    pub time_limit: Duration,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            degree: 1,
            numberf: NumberF::default(),
            all_solutions: false,
            extended: false,
            guess: false,
            time_limit: default_time_limit(),
        }
    }
}

/// Default 500 seconds, overridable through PSOLVE_TIME_LIMIT.
pub fn default_time_limit() -> Duration {
    if let Ok(v) = std::env::var("PSOLVE_TIME_LIMIT") {
        if let Ok(secs) = v.trim().parse::<f64>() {
            if secs > 0.0 {
                return Duration::from_secs_f64(secs);
            }
        }
    }
    Duration::from_secs(500)
}

/// Everything the pipeline produced, stage by stage.
#[derive(Debug)]
pub struct Report {
    pub input: String,
    pub spec: OdeSpec,
    pub table: BasisTable,
    pub m: MultiPoly,
    pub n: MultiPoly,
    pub normalized: Expr,
    pub operator: Option<DOperator>,
    pub divergence: Option<MultiPoly>,
    pub pairs: Vec<DarbouxPair>,
    pub truncated: bool,
    pub factor: Option<IntegratingFactor>,
    pub solution: Option<FirstIntegral>,
    pub timings: Vec<(String, f64)>,
}

impl Report {
    pub fn factor_expr(&self) -> Option<Expr> {
        self.factor
            .as_ref()
            .and_then(|f| f.to_expr(&self.table).ok())
    }

    /// Eigen-polynomials and cofactors with kernels substituted back, as
    /// the reports print them.
    pub fn unsub_display(&self, p: &MultiPoly) -> String {
        basis::unsubstitute(&p.remap(self.table.vars()), &self.table)
            .map(|e| e.to_string())
            .unwrap_or_else(|_| p.to_string())
    }

    /// The ODE in the form the pipeline actually used.
    fn normalized_expr(table: &BasisTable, m: &MultiPoly, n: &MultiPoly) -> Result<Expr> {
        let m_expr = basis::unsubstitute(m, table)?;
        if n.is_one() {
            return Ok(m_expr);
        }
        let n_expr = basis::unsubstitute(n, table)?;
        Ok(Expr::div(m_expr, n_expr))
    }

    /// Human-readable rendering up to `stage`.
    pub fn render(&self, stage: Stage) -> String {
        let mut out = String::new();
        let dep = &self.spec.dep;
        let indep = &self.spec.indep;
        out.push_str(&format!(
            "For the ODE in the form\n  {dep}' = {}\n",
            self.normalized
        ));
        if stage >= Stage::Basis {
            out.push_str(&format!("basis = {}\n", self.table));
        }
        if stage >= Stage::DBasis {
            let items: Vec<String> = self
                .table
                .dbasis()
                .iter()
                .map(|(v, dx, dy)| format!("d{v}/d{indep} = {dx}, d{v}/d{dep} = {dy}"))
                .collect();
            out.push_str(&format!("dbasis = [{}]\n", items.join(", ")));
        }
        if stage >= Stage::Dop {
            if let Some(op) = &self.operator {
                out.push_str(&format!("D = {op}\n"));
                out.push_str(&format!("delta = {}\n", op.delta));
            }
            if let Some(t) = &self.divergence {
                out.push_str(&format!("divergence = {t}\n"));
            }
        }
        if stage >= Stage::Eigenpol {
            let fs: Vec<String> = self
                .pairs
                .iter()
                .map(|p| self.unsub_display(&p.f))
                .collect();
            let gs: Vec<String> = self
                .pairs
                .iter()
                .map(|p| self.unsub_display(&p.g))
                .collect();
            out.push_str(&format!("eigen_p = [{}]\n", fs.join(", ")));
            out.push_str(&format!("eigen_p_val = [{}]\n", gs.join(", ")));
            if self.truncated {
                out.push_str("(search truncated)\n");
            }
        }
        if stage >= Stage::Intfact {
            match self.factor_expr() {
                Some(e) => out.push_str(&format!("the integrating factor will be\n  R = {e}\n")),
                None => out.push_str("no integrating factor found at this degree\n"),
            }
        }
        if stage >= Stage::Solve {
            if let Some(s) = &self.solution {
                out.push_str(&format!("solution: {s}\n"));
            }
        }
        out
    }

    /// Machine-readable document. Deterministic for fixed inputs except the
    /// timings block.
    pub fn to_json(&self, stage: Stage) -> Value {
        let mut doc = serde_json::Map::new();
        doc.insert(
            "ode".into(),
            json!({
                "input": self.input,
                "normalized": self.normalized.to_string(),
                "indep": self.spec.indep,
                "dep": self.spec.dep,
                "m": self.m.to_string(),
                "n": self.n.to_string(),
            }),
        );
        let basis_items: Vec<Value> = (0..self.table.len())
            .map(|i| {
                json!({
                    "var": self.table.entries()[i].var,
                    "kernel": self.table.kernel_expr(i).to_string(),
                })
            })
            .collect();
        doc.insert("basis".into(), Value::Array(basis_items));
        if stage >= Stage::DBasis {
            let items: Vec<Value> = self
                .table
                .dbasis()
                .iter()
                .map(|(v, dx, dy)| json!({"var": v, "dx": dx.to_string(), "dy": dy.to_string()}))
                .collect();
            doc.insert("dbasis".into(), Value::Array(items));
        }
        if stage >= Stage::Dop {
            if let (Some(op), Some(t)) = (&self.operator, &self.divergence) {
                let coeffs: Vec<Value> = op
                    .coefficients()
                    .iter()
                    .map(|(idx, c)| json!({"var": op.vars().name(*idx), "coeff": c.to_string()}))
                    .collect();
                doc.insert(
                    "dop".into(),
                    json!({
                        "coefficients": coeffs,
                        "delta": op.delta.to_string(),
                        "divergence": t.to_string(),
                    }),
                );
            }
        }
        if stage >= Stage::Eigenpol {
            let pairs: Vec<Value> = self
                .pairs
                .iter()
                .map(|p| {
                    json!({
                        "f": p.f.to_string(),
                        "g": p.g.to_string(),
                        "f_expr": self.unsub_display(&p.f),
                        "g_expr": self.unsub_display(&p.g),
                    })
                })
                .collect();
            doc.insert("eigenpairs".into(), Value::Array(pairs));
            doc.insert("truncated".into(), json!(self.truncated));
        }
        if stage >= Stage::Intfact {
            match self.factor_expr() {
                Some(e) => {
                    doc.insert(
                        "R".into(),
                        json!({"text": e.to_string(), "tree": e.to_json()}),
                    );
                }
                None => {
                    doc.insert("R".into(), Value::Null);
                }
            }
        }
        if stage >= Stage::Solve {
            match &self.solution {
                Some(s) => {
                    doc.insert(
                        "solution".into(),
                        json!({
                            "text": s.to_string(),
                            "tree": s.expr.to_json(),
                            "constant": s.constant_name,
                        }),
                    );
                }
                None => {
                    doc.insert("solution".into(), Value::Null);
                }
            }
        }
        let timings: Vec<Value> = self
            .timings
            .iter()
            .map(|(k, ms)| json!({"step": k, "ms": ms}))
            .collect();
        doc.insert("timings".into(), Value::Array(timings));
        Value::Object(doc)
    }
}

/// Runs the pipeline on ODE text up to the requested stage.
pub fn run(stage: Stage, ode_text: &str, opts: &RunOptions) -> Result<Report> {
    let started = Instant::now();
    let deadline = started + opts.time_limit;
    let mut timings: Vec<(String, f64)> = Vec::new();
    let mut mark = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, f64)>| {
        let now = Instant::now();
        timings.push((name.to_string(), (now - mark).as_secs_f64() * 1e3));
        mark = now;
    };

    let spec = parse::parse_ode(ode_text)?;
    lap("parse", &mut timings);
    let table = basis::close_basis(&spec)?;
    let (m, n) = basis::polynomialize(&spec, &table)?;
    let normalized = Report::normalized_expr(&table, &m, &n)?;
    lap("basis", &mut timings);

    let mut report = Report {
        input: ode_text.to_string(),
        spec,
        table,
        m,
        n,
        normalized,
        operator: None,
        divergence: None,
        pairs: Vec::new(),
        truncated: false,
        factor: None,
        solution: None,
        timings: Vec::new(),
    };
    if stage <= Stage::DBasis {
        report.timings = timings;
        return Ok(report);
    }

    let op = dop::build_operator(&report.m, &report.n, &report.table)?;
    let t = dop::divergence(&report.m, &report.n, &report.table)?;
    lap("dop", &mut timings);
    report.operator = Some(op);
    report.divergence = Some(t);
    if stage <= Stage::Dop {
        report.timings = timings;
        return Ok(report);
    }

    let op = report.operator.as_ref().unwrap();
    let t = report.divergence.as_ref().unwrap();
    let seeds = if opts.guess {
        darboux::guess_candidates(&report.m, &report.n, &report.table, opts.degree)
    } else {
        Vec::new()
    };
    let mut cfg = SearchConfig::new(opts.degree.max(1));
    cfg.mode = if opts.all_solutions {
        SearchMode::All
    } else {
        SearchMode::Fast
    };
    cfg.deadline = Some(deadline);
    let outcome = darboux::eigenpol_search(op, &cfg, &seeds)?;
    report.pairs = outcome.pairs;
    report.truncated = outcome.truncated;
    lap("eigenpol", &mut timings);
    if stage <= Stage::Eigenpol {
        report.timings = timings;
        return Ok(report);
    }

    let factor = if opts.extended {
        intfact::extended_search(&report.pairs, t, op, &ExpAnsatz::default(), opts.numberf)
    } else {
        intfact::solve_exponents(&report.pairs, t, opts.numberf)
            .map(|nvec| {
                let k = match opts.numberf {
                    NumberF::Count(c) => c.min(report.pairs.len()),
                    NumberF::All => report.pairs.len(),
                };
                intfact::assemble(&report.pairs[..k], &nvec, false)
            })
    };
    let factor = factor.ok_or(Error::NoIntegratingFactor)?;
    if !intfact::verify(&factor, op, t) {
        return Err(Error::Internal(
            "integrating factor failed verification".into(),
        ));
    }
    lap("intfact", &mut timings);
    report.factor = Some(factor);
    if stage <= Stage::Intfact {
        report.timings = timings;
        return Ok(report);
    }

    if Instant::now() >= deadline {
        return Err(Error::TimeLimit);
    }
    let solution = quadrature::first_integral(
        &report.m,
        &report.n,
        &report.table,
        report.factor.as_ref().unwrap(),
    )?;
    lap("solve", &mut timings);
    report.solution = Some(solution);
    report.timings = timings;
    Ok(report)
}

/// Checks a candidate first integral against an ODE:
/// `N*F_x + M*F_y = 0` under formal differentiation.
pub fn check_solution(ode_text: &str, solution_text: &str) -> Result<bool> {
    let spec = parse::parse_ode(ode_text)?;
    let table = basis::close_basis(&spec)?;
    let (m, n) = basis::polynomialize(&spec, &table)?;
    let expr = parse::parse_expr(solution_text)?;
    let fi = FirstIntegral {
        expr,
        constant_name: "C".to_string(),
    };
    quadrature::verify_first_integral(&fi, &m, &n, &table)
}

/// Checks that an expression is an integrating factor for the ODE via the
/// defining identity `d(R*N)/dx + d(R*M)/dy = 0` with formal chain-rule
/// differentiation.
pub fn check_integrating_factor(ode_text: &str, r_text: &str) -> Result<bool> {
    let spec = parse::parse_ode(ode_text)?;
    let table = basis::close_basis(&spec)?;
    let (m, n) = basis::polynomialize(&spec, &table)?;
    let r = parse::parse_expr(r_text)?;
    let m_expr = basis::unsubstitute(&m, &table)?;
    let n_expr = basis::unsubstitute(&n, &table)?;
    let rn = Expr::mul(r.clone(), n_expr);
    let rm = Expr::mul(r, m_expr);
    let identity = Expr::add(
        rn.derivative(&spec.indep),
        rm.derivative(&spec.dep),
    );
    let mut field = FuncField::for_table(&table);
    field.is_zero_expr(&identity)
}

/// Exit code mapping shared by the CLI and the corpus runner.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NoIntegratingFactor => 1,
        Error::TimeLimit => 3,
        Error::Internal(_) => 4,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_solve_simple_example() {
        let opts = RunOptions::default();
        let report = run(
            Stage::Solve,
            "y' = y*(cos(x)+y*exp(-x)+1)/cos(x)",
            &opts,
        )
        .unwrap();
        assert_eq!(report.pairs.len(), 5);
        let r = report.factor_expr().unwrap().to_string();
        assert_eq!(r, "1/(cos(x)*y*(y + exp(x)))");
        assert!(report.solution.is_some());
        let rendered = report.render(Stage::Solve);
        assert!(rendered.contains("the integrating factor will be"));
        assert!(rendered.contains("exp(x)"));
    }

    #[test]
    fn kamke_without_extension_exits_with_no_factor() {
        let opts = RunOptions::default();
        let err = run(Stage::Intfact, "y' = y^2 - y*sin(x) + cos(x)", &opts).unwrap_err();
        assert!(matches!(err, Error::NoIntegratingFactor));
        assert_eq!(exit_code_for(&err), 1);
    }

    #[test]
    fn kamke_with_extension_solves() {
        let opts = RunOptions {
            extended: true,
            ..RunOptions::default()
        };
        let report = run(Stage::Solve, "y' = y^2 - y*sin(x) + cos(x)", &opts).unwrap();
        let sol = report.solution.as_ref().unwrap().to_string();
        assert!(sol.contains("Int(exp(-cos(x)), x)"), "{sol}");
    }

    #[test]
    fn json_document_is_deterministic() {
        let opts = RunOptions::default();
        let a = run(Stage::Solve, "y' = y/x", &opts).unwrap();
        let b = run(Stage::Solve, "y' = y/x", &opts).unwrap();
        let mut ja = a.to_json(Stage::Solve);
        let mut jb = b.to_json(Stage::Solve);
        ja.as_object_mut().unwrap().remove("timings");
        jb.as_object_mut().unwrap().remove("timings");
        assert_eq!(ja.to_string(), jb.to_string());
        // solution tree re-parses
        let tree = &ja["solution"]["tree"];
        let expr = Expr::from_json(tree).unwrap();
        assert!(check_solution("y' = y/x", &expr.to_string()).unwrap());
    }

    #[test]
    fn check_subcommand_semantics() {
        assert!(check_solution("y' = -x/y", "x^2 + y^2").unwrap());
        assert!(!check_solution("y' = -x/y", "x + y").unwrap());
        assert!(check_integrating_factor(
            "y' = y^2 - y*sin(x) + cos(x)",
            "exp(-cos(x))/(y - sin(x))^2"
        )
        .unwrap());
        assert!(!check_integrating_factor("y' = y/x", "x").unwrap());
    }

    #[test]
    fn time_limit_reports_exit_three() {
        let opts = RunOptions {
            degree: 4,
            all_solutions: true,
            time_limit: Duration::from_millis(1),
            ..RunOptions::default()
        };
        // a deliberately wide search so the deadline fires during it
        let err = run(
            Stage::Solve,
            "y' = (y^3 + x^2*y + x + 1)/(x^3 + y^2 + 2)",
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, Error::TimeLimit), "{err:?}");
        assert_eq!(exit_code_for(&err), 3);
    }

    #[test]
    fn trivial_exact_ode_has_unit_factor() {
        let report = run(Stage::Solve, "y' = -x/y", &RunOptions::default()).unwrap();
        assert!(report.factor.as_ref().unwrap().is_trivial());
        assert_eq!(report.solution.unwrap().to_string(), "-1/2*x^2 - 1/2*y^2 = C");
    }
}

//! Orchestration: spectrum → analysis → verdicts → continuation, producing
//! named text artifacts (JSON, CSV, SVG). Everything here is deterministic
//! for a fixed configuration.

use serde_json::{json, Value};

use crate::analysis::{analysis_report, degree_jump, global_bifurcation_test, AnalysisReport, LambdaWindow};
use crate::config::ProblemConfig;
use crate::continuation::{trace_branches, Branch};
use crate::diagram::{render_svg, BranchCurve};
use crate::error::{Error, Result};
use crate::galerkin::{default_cutoff, GalerkinSystem};
use crate::problem::{EllipticProblem, SpectralValue};
use crate::scalar::{f64_to_rational, format_rational, parse_rational, Rational};
use crate::spectra::{neumann_spectrum, simplicity_report};

/// Spectrum cutoff used by `spectrum` when the config gives none.
pub const DEFAULT_SPECTRUM_CUTOFF: i64 = 50;

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn json(name: &str, value: &Value) -> Self {
        let mut contents = serde_json::to_string_pretty(value).expect("JSON values serialize");
        contents.push('\n');
        Artifact { name: name.into(), contents }
    }

    fn text(name: &str, contents: String) -> Self {
        Artifact { name: name.into(), contents }
    }
}

/// Which candidates to act on.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSelection {
    /// Every flagged candidate in the analysis window.
    AllFlagged,
    Value(Rational),
}

impl LambdaSelection {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim() == "all" {
            return Ok(LambdaSelection::AllFlagged);
        }
        parse_rational(text)
            .map(LambdaSelection::Value)
            .ok_or_else(|| Error::Contract(format!("cannot parse λ0 '{text}' (expected a rational or 'all')")))
    }
}

pub fn spectrum(cfg: &ProblemConfig) -> Result<Vec<Artifact>> {
    let domain = cfg.domain()?;
    let cutoff = cfg.spectrum_cutoff()?.unwrap_or_else(|| Rational::from_integer(DEFAULT_SPECTRUM_CUTOFF.into()));
    let entries = neumann_spectrum(&domain, &cutoff)?;
    let simplicity = if domain.dim() == 2 { Some(simplicity_report(&domain, &cutoff)?) } else { None };
    let value = json!({
        "squared_lengths": domain.squared_lengths().iter().map(format_rational).collect::<Vec<_>>(),
        "incommensurable": domain.incommensurable(),
        "cutoff": format_rational(&cutoff),
        "simplicity": simplicity,
        "eigenvalues": entries.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
    });
    Ok(vec![Artifact::json("spectrum.json", &value)])
}

fn report(cfg: &ProblemConfig, problem: &EllipticProblem<f64>) -> Result<AnalysisReport> {
    analysis_report(problem, &cfg.window()?, cfg.spectrum_cutoff()?.as_ref())
}

pub fn analyze(cfg: &ProblemConfig) -> Result<(AnalysisReport, Vec<Artifact>)> {
    let problem = cfg.problem::<f64>()?;
    let r = report(cfg, &problem)?;
    let artifacts = vec![Artifact::json("analysis.json", r.to_json()), Artifact::text("candidates.csv", r.candidates_csv())];
    Ok((r, artifacts))
}

pub fn candidates(cfg: &ProblemConfig) -> Result<Vec<Artifact>> {
    let problem = cfg.problem::<f64>()?;
    Ok(vec![Artifact::text("candidates.csv", report(cfg, &problem)?.candidates_csv())])
}

/// The candidates selected for action: flagged ones for `all`, or the given
/// value (which must lie in Λ).
fn selected(problem: &EllipticProblem<f64>, report: &AnalysisReport, sel: &LambdaSelection, flagged_only: bool) -> Result<Vec<SpectralValue>> {
    match sel {
        LambdaSelection::AllFlagged => Ok(report.flagged().map(|c| c.lambda.clone()).collect()),
        LambdaSelection::Value(q) => {
            let value = report
                .candidates
                .iter()
                .map(|(c, _)| c.lambda.clone())
                .find(|l| l.same(&SpectralValue::exact(q.clone())))
                .unwrap_or_else(|| SpectralValue::exact(q.clone()));
            let verdict = global_bifurcation_test(problem, &value)?;
            if flagged_only && verdict.verdict != crate::analysis::VerdictKind::GlobalBifurcation {
                return Err(Error::Contract(format!(
                    "λ0 = {} has even criterion sum {}; continuation needs a certified candidate",
                    value.label(),
                    verdict.criterion_sum
                )));
            }
            Ok(vec![value])
        }
    }
}

pub fn euler(cfg: &ProblemConfig, sel: &LambdaSelection) -> Result<Vec<Artifact>> {
    let problem = cfg.problem::<f64>()?;
    let r = match sel {
        LambdaSelection::AllFlagged => Some(report(cfg, &problem)?),
        LambdaSelection::Value(_) => None,
    };
    let lambdas = match (&r, sel) {
        (Some(r), _) => r.candidates.iter().map(|(c, _)| c.lambda.clone()).collect(),
        (None, LambdaSelection::Value(q)) => {
            let v = SpectralValue::exact(q.clone());
            global_bifurcation_test(&problem, &v)?;
            vec![v]
        }
        (None, LambdaSelection::AllFlagged) => unreachable!(),
    };
    let jumps = lambdas.iter().map(|l| degree_jump(&problem, l).map(|j| j.to_json())).collect::<Result<Vec<_>>>()?;
    Ok(vec![Artifact::json("euler.json", &json!({ "group": problem.rep.group().name(), "jumps": jumps }))])
}

/// Everything computed by `continue`.
#[derive(Debug)]
pub struct ContinuationRun {
    pub report: AnalysisReport,
    pub lambda0: Vec<SpectralValue>,
    pub galerkin_cutoff: Rational,
    pub branches: Vec<Branch<f64>>,
    pub artifacts: Vec<Artifact>,
}

/// Λ over the continuation window as floats, for reconnection tests.
fn lambda_points(problem: &EllipticProblem<f64>, cfg: &ProblemConfig, window: (f64, f64)) -> Result<Vec<f64>> {
    let w = cfg.window()?;
    let lo = f64_to_rational(window.0).map_or(w.lo.clone(), |x| x.min(w.lo.clone()));
    let hi = f64_to_rational(window.1).map_or(w.hi.clone(), |x| x.max(w.hi.clone()));
    let all = crate::analysis::bifurcation_candidates(problem, &LambdaWindow::new(lo, hi)?, None)?;
    Ok(all.iter().map(|c| c.lambda.approx).collect())
}

pub fn run_continuation(cfg: &ProblemConfig, sel: &LambdaSelection) -> Result<ContinuationRun> {
    let problem = cfg.problem::<f64>()?;
    let r = report(cfg, &problem)?;
    let lambda0 = selected(&problem, &r, sel, true)?;
    let opts = cfg.continuation_options()?;
    let points = lambda_points(&problem, cfg, opts.lambda_window)?;
    let max_l0 = lambda0.iter().map(|l| l.approx.abs()).fold(0.0, f64::max);
    let cutoff = match cfg.galerkin_cutoff()? {
        Some(c) => c,
        None => default_cutoff(&problem, max_l0)?,
    };
    let sys = GalerkinSystem::new(problem, &cutoff, cfg.quadrature_points())?;
    let mut branches = Vec::new();
    for l in &lambda0 {
        branches.extend(trace_branches(&sys, l, &points, &opts)?);
    }
    let mut artifacts = Vec::new();
    let mut summaries = Vec::new();
    let mut curves = Vec::new();
    for (i, b) in branches.iter().enumerate() {
        let name = format!("branch_{i:03}.csv");
        let mut s = b.summary_json();
        s.as_object_mut().expect("summary is an object").insert("file".into(), json!(name));
        summaries.push(s);
        curves.push(BranchCurve {
            label: format!("λ0={} {}", b.origin.lambda0.label(), if b.origin.sign > 0 { "+" } else { "−" }),
            points: b.points.iter().map(|p| (p.lambda, p.h1_norm)).collect(),
        });
        artifacts.push(Artifact::text(&name, b.to_csv()));
    }
    let flagged: Vec<f64> = lambda0.iter().map(|l| l.approx).collect();
    let summary = json!({
        "galerkin_cutoff": format_rational(&cutoff),
        "coefficients": sys.dim(),
        "quadrature_nodes": sys.quadrature_nodes(),
        "lambda0": lambda0.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
        "lambda_window": [opts.lambda_window.0, opts.lambda_window.1],
        "norm_bound": opts.norm_bound,
        "branches": summaries,
    });
    artifacts.push(Artifact::json("branches.json", &summary));
    artifacts.push(Artifact::text("diagram.svg", render_svg(&curves, &flagged)));
    Ok(ContinuationRun { report: r, lambda0, galerkin_cutoff: cutoff, branches, artifacts })
}

/// Full pipeline: analysis artifacts followed by continuation artifacts.
pub fn run_pipeline(cfg: &ProblemConfig, sel: &LambdaSelection) -> Result<ContinuationRun> {
    let (_, mut artifacts) = analyze(cfg)?;
    let mut run = run_continuation(cfg, sel)?;
    artifacts.append(&mut run.artifacts);
    run.artifacts = artifacts;
    Ok(run)
}

/// Redraws `diagram.svg` from the CSVs listed in `branches.json` (or every
/// `branch_*.csv` when there is no summary) in `dir`.
pub fn diagram_from_dir(dir: &std::path::Path) -> Result<Vec<Artifact>> {
    let summary_path = dir.join("branches.json");
    let (files, flagged): (Vec<String>, Vec<f64>) = if summary_path.exists() {
        let summary: Value = serde_json::from_str(&std::fs::read_to_string(&summary_path)?)
            .map_err(|e| Error::Contract(format!("branches.json: {e}")))?;
        let files = summary["branches"]
            .as_array()
            .map(|a| a.iter().filter_map(|b| b["file"].as_str().map(String::from)).collect())
            .unwrap_or_default();
        let flagged = summary["lambda0"]
            .as_array()
            .map(|a| a.iter().filter_map(|l| l["float"].as_f64()).collect())
            .unwrap_or_default();
        (files, flagged)
    } else {
        let mut files: Vec<String> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
            .filter(|n| n.starts_with("branch_") && n.ends_with(".csv"))
            .collect();
        files.sort();
        (files, Vec::new())
    };
    let curves = files
        .iter()
        .map(|f| crate::diagram::read_branch_csv(&dir.join(f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![Artifact::text("diagram.svg", render_svg(&curves, &flagged))])
}

/// Writes artifacts into `dir`, creating it if needed.
pub fn write_artifacts(dir: &std::path::Path, artifacts: &[Artifact]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}

/// JSON error detail for failed runs.
pub fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::AssumptionViolated { assumption, .. } => format!("assumption:{assumption}"),
        Error::Config { .. } => "config".into(),
        Error::NewtonFailed { .. } | Error::NumericalDegeneracy(_) | Error::Quadrature(_) | Error::NotIntegral(_) => {
            "numerical".into()
        }
        _ => "error".into(),
    };
    json!({ "error": kind, "message": e.to_string(), "exit_code": e.exit_code() })
}

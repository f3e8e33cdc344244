//! Self-check battery run by `verify`. `Fast` covers the algebraic and
//! spectral checks; `Full` adds larger random samples and the continuation
//! fixtures.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{analysis_report, LambdaWindow, VerdictKind};
use crate::continuation::{classify_branch, trace_branches, ContinuationOptions, Termination};
use crate::error::Result;
use crate::euler::{verify_main_theorem, BurnsideRing};
use crate::families::{circle_orbit, mode_loop, scalar_cubic, z2_swap};
use crate::galerkin::GalerkinSystem;
use crate::group::{FiniteGroup, SubgroupLattice};
use crate::problem::{EllipticProblem, SpectralValue};
use crate::representation::{DirectSum, FixedDimension, MonomialRepresentation};
use crate::scalar::Rational;
use crate::spectra::{neumann_spectrum, simplicity_report, BoxDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult { name: name.into(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Random `(W, V)` pairs over every subgroup class of small groups, with
/// `dim V^H` odd: the `(H)`-coordinates of `χ(G⁺ ∧_H S^{W⊕V})` and
/// `χ(G⁺ ∧_H S^W)` must differ, and equal `(−1)^{dim(W⊕V)^H}` and
/// `(−1)^{dim W^H}`.
pub fn check_euler_parity(samples: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = [
        FiniteGroup::cyclic(2)?,
        FiniteGroup::cyclic(3)?,
        FiniteGroup::cyclic(4)?,
        FiniteGroup::symmetric(3)?,
        FiniteGroup::dihedral(4)?,
    ];
    let (mut total, mut failed) = (0usize, Vec::new());
    for g in groups {
        let g = Arc::new(g);
        let ring = BurnsideRing::new(g.clone())?;
        let lattice = SubgroupLattice::new(g.clone())?;
        for class in 0..lattice.len() {
            let h = lattice.representative(class).to_vec();
            for _ in 0..samples {
                let w = MonomialRepresentation::random(g.clone(), &h, rng.random_range(0..4), &mut rng)?;
                let mut v = MonomialRepresentation::random(g.clone(), &h, rng.random_range(0..4), &mut rng)?;
                if v.fixed_dim(&h)? % 2 == 0 {
                    v = v.direct_sum(&MonomialRepresentation::trivial(g.clone(), &h, 1)?)?;
                }
                let check = verify_main_theorem(&ring, &h, &w, &v)?;
                let sign = |d: usize| if d % 2 == 0 { 1 } else { -1 };
                let lhs_ok = check.lhs.coordinates[check.h_class] == sign(DirectSum(&w, &v).fixed_dim(&h)?);
                let rhs_ok = check.rhs.coordinates[check.h_class] == sign(w.fixed_dim(&h)?);
                total += 1;
                if !(check.hypothesis_met && check.differ_at_h && lhs_ok && rhs_ok) {
                    failed.push(format!("{} H={}", g.name(), lattice.names()[class]));
                }
            }
        }
    }
    Ok((failed.is_empty(), format!("{} of {total} pairs differ at (H){}", total - failed.len(), summarize(&failed))))
}

fn summarize(failures: &[String]) -> String {
    match failures.first() {
        Some(f) => format!("; first failure: {f}"),
        None => String::new(),
    }
}

/// `H¹`-normalized eigenvalues at the trivial solution against
/// `(β − λα)/(1 + β)` over the retained modes.
pub fn check_trivial_spectrum() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let cases: [(EllipticProblem<f64>, Vec<f64>); 2] =
        [(scalar_cubic(BoxDomain::interval())?, vec![1.0]), (circle_orbit(BoxDomain::interval())?, vec![-2.0, 0.0])];
    for (problem, alphas) in cases {
        let sys = GalerkinSystem::new(problem, &q(25, 1), None)?;
        for l in [-1.0, 0.0, 0.5, 2.0] {
            let got = sys.h1_eigenvalues(sys.trivial(), l);
            let mut expect: Vec<f64> = (0..sys.modes().len())
                .flat_map(|m| {
                    let b = sys.beta_f64(m);
                    alphas.iter().map(move |a| (b - l * a) / (1.0 + b))
                })
                .collect();
            expect.sort_by(f64::total_cmp);
            if got.len() != expect.len() {
                return Ok((false, format!("{} eigenvalues, expected {}", got.len(), expect.len())));
            }
            worst = got.iter().zip(&expect).map(|(g, e)| (g - e).abs()).fold(worst, f64::max);
        }
    }
    Ok((worst < 1e-9, format!("max deviation {worst:.3e}")))
}

/// Λ against the closed forms `{k²}` and `{−k²/2}`, with verdicts following
/// the parity of the criterion sum, and the square's double eigenvalues
/// inconclusive.
pub fn check_candidates() -> Result<(bool, String)> {
    let mut notes = Vec::new();
    let window = LambdaWindow::new(q(-20, 1), q(20, 1))?;
    let scalar = analysis_report(&scalar_cubic::<f64>(BoxDomain::interval())?, &window, None)?;
    let got: Vec<Option<Rational>> = scalar.candidates.iter().map(|(c, _)| c.lambda.exact.clone()).collect();
    let want: Vec<Option<Rational>> = (0..=4).map(|k: i64| Some(q(k * k, 1))).collect();
    if got != want {
        notes.push("scalar Λ mismatch".to_string());
    }
    let circle = analysis_report(&circle_orbit::<f64>(BoxDomain::interval())?, &window, None)?;
    let got: Vec<Option<Rational>> = circle.candidates.iter().map(|(c, _)| c.lambda.exact.clone()).collect();
    let want: Vec<Option<Rational>> = (0..=6).rev().map(|k: i64| Some(q(-k * k, 2))).collect();
    if got != want {
        notes.push("circle Λ mismatch".to_string());
    }
    let square = analysis_report(&scalar_cubic::<f64>(BoxDomain::square())?, &LambdaWindow::new(q(0, 1), q(10, 1))?, None)?;
    for r in [&scalar, &circle, &square] {
        for (c, v) in &r.candidates {
            let odd = v.criterion_sum % 2 == 1;
            if odd != (v.verdict == VerdictKind::GlobalBifurcation) {
                notes.push(format!("verdict at {}", c.lambda.label()));
            }
        }
    }
    for (c, v) in &square.candidates {
        if v.criterion_sum == 2 && v.verdict != VerdictKind::Inconclusive {
            notes.push(format!("square λ={} not inconclusive", c.lambda.label()));
        }
    }
    Ok((notes.is_empty(), if notes.is_empty() { "closed forms and parities agree".into() } else { notes.join("; ") }))
}

/// First 200 eigenvalues of the square against brute-force multiplicities,
/// and the incommensurable flag.
pub fn check_simplicity() -> Result<(bool, String)> {
    let flagged = BoxDomain::new(vec![q(1, 1), q(2, 1)], true)?;
    let flag_ok = simplicity_report(&flagged, &q(100, 1))?.simple;
    let square = BoxDomain::square();
    let cutoff = q(800, 1);
    let spectrum = neumann_spectrum(&square, &cutoff)?;
    let mut brute = std::collections::BTreeMap::new();
    for a in 0..=28u64 {
        for b in 0..=28u64 {
            if a * a + b * b <= 800 {
                *brute.entry(a * a + b * b).or_insert(0usize) += 1;
            }
        }
    }
    let n = spectrum.len().min(200);
    let agree = spectrum
        .iter()
        .zip(brute.iter())
        .take(200)
        .all(|(e, (v, m))| e.value == q(*v as i64, 1) && e.multiplicity() == *m);
    let at = |v: i64| spectrum.iter().find(|e| e.value == q(v, 1)).map_or(0, |e| e.multiplicity());
    Ok((
        flag_ok && agree && n == 200,
        format!("flag: {flag_ok}; {n} eigenvalues match enumeration: {agree}; multiplicity at 1: {}, at 25: {}", at(1), at(25)),
    ))
}

fn hygiene_systems() -> Result<Vec<GalerkinSystem<f64>>> {
    Ok(vec![
        GalerkinSystem::new(scalar_cubic(BoxDomain::interval())?, &q(16, 1), None)?,
        GalerkinSystem::new(scalar_cubic(BoxDomain::square())?, &q(5, 1), None)?,
        GalerkinSystem::new(circle_orbit(BoxDomain::interval())?, &q(9, 1), None)?,
        GalerkinSystem::new(mode_loop(BoxDomain::interval())?, &q(4, 1), None)?,
        GalerkinSystem::new(z2_swap(BoxDomain::interval())?, &q(9, 1), None)?,
    ])
}

/// Largest relative gap between the assembled Jacobian and central
/// differences of the residual.
pub fn jacobian_fd_error(sys: &GalerkinSystem<f64>, c: &DVector<f64>, lambda: f64) -> f64 {
    let jac = sys.jacobian(c, lambda);
    let h = 1e-6 * (1.0 + c.amax());
    let mut fd = DMatrix::zeros(sys.dim(), sys.dim());
    for k in 0..sys.dim() {
        let (mut cp, mut cm) = (c.clone(), c.clone());
        cp[k] += h;
        cm[k] -= h;
        fd.set_column(k, &((sys.residual(&cp, lambda) - sys.residual(&cm, lambda)) / (2.0 * h)));
    }
    (&jac - &fd).amax() / fd.amax().max(1.0)
}

/// Jacobians against finite differences and `r(g·c) = g·r(c)` on 20 random
/// states per fixture.
pub fn check_hygiene(states: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut fd_worst, mut eq_worst) = (0.0f64, 0.0f64);
    for sys in hygiene_systems()? {
        let actions = sys.problem.rep.generator_actions();
        for _ in 0..states {
            let c = sys.trivial() + DVector::from_fn(sys.dim(), |_, _| 0.5 * rng.random_range(-1.0..1.0));
            let l = rng.random_range(-2.0..2.0);
            fd_worst = fd_worst.max(jacobian_fd_error(&sys, &c, l));
            let r = sys.residual(&c, l);
            for (_, g) in &actions {
                eq_worst = eq_worst.max((sys.residual(&sys.act(g, &c), l) - sys.act(g, &r)).amax());
            }
        }
    }
    Ok((fd_worst < 1e-5 && eq_worst < 1e-10, format!("jacobian rel. error {fd_worst:.3e}, equivariance {eq_worst:.3e}")))
}

/// Branch of `−u'' = λu − u³` from `λ0 = 1` against `a² = 4(λ − 1)/3`.
pub fn check_pitchfork() -> Result<(bool, String)> {
    let sys = GalerkinSystem::<f64>::new(scalar_cubic(BoxDomain::interval())?, &q(16, 1), None)?;
    let opts = ContinuationOptions { lambda_window: (0.0, 1.5), ..Default::default() };
    let branches = trace_branches(&sys, &SpectralValue::exact(q(1, 1)), &[0.0, 1.0, 4.0], &opts)?;
    let k = sys.mode_index(&[1]).expect("mode 1 retained");
    let (mut law, mut res) = (0.0f64, 0.0f64);
    let mut exits = true;
    for b in &branches {
        exits &= b.termination == Termination::ExitedLambdaWindow;
        for p in &b.points {
            res = res.max(p.residual);
            if p.lambda > 1.0 + 1e-4 && p.lambda <= 1.2 {
                let expect = 4.0 * (p.lambda - 1.0) / 3.0;
                law = law.max((p.c[k] * p.c[k] - expect).abs() / expect);
            }
        }
    }
    Ok((
        !branches.is_empty() && exits && law < 0.02 && res < 1e-10,
        format!("{} branches, amplitude law rel. error {law:.3e}, max residual {res:.3e}, window exit: {exits}", branches.len()),
    ))
}

/// Circle fixture: nonconstant branch from `λ0 = −1/2` with the phase row
/// satisfied.
pub fn check_circle_branch() -> Result<(bool, String)> {
    let problem = circle_orbit::<f64>(BoxDomain::interval())?;
    let (p0, b) = (problem.slice.p0(), problem.blocks.b_pairs.iter().map(|e| e.value.label()).collect::<Vec<_>>());
    let sys = GalerkinSystem::new(problem, &q(9, 1), None)?;
    let opts = ContinuationOptions { lambda_window: (-3.0, 0.5), ..Default::default() };
    let branches = trace_branches(&sys, &SpectralValue::exact(q(-1, 2)), &[0.0, -0.5, -2.0, -4.5], &opts)?;
    let (mut res, mut phase, mut nonconstant) = (0.0f64, 0.0f64, false);
    for br in &branches {
        for p in &br.points {
            res = res.max(p.residual);
            phase = phase.max(p.phase_residual);
            let higher: f64 = (sys.components()..sys.dim()).map(|i| p.c[i] * p.c[i]).sum();
            nonconstant |= higher.sqrt() > 1e-3;
        }
    }
    Ok((
        p0 == 1 && b == ["-2"] && nonconstant && res < 1e-9 && phase < 1e-12,
        format!("p0 = {p0}, B = {b:?}, {} branches, residual {res:.3e}, phase {phase:.3e}", branches.len()),
    ))
}

/// Two-mode loop fixture: the branch from `λ0 = 1/2` returns at `λ = 1`.
pub fn check_loop() -> Result<(bool, String)> {
    let sys = GalerkinSystem::<f64>::new(mode_loop(BoxDomain::interval())?, &q(1, 1), None)?;
    let opts = ContinuationOptions { lambda_window: (-2.0, 3.0), ..Default::default() };
    let branches = trace_branches(&sys, &SpectralValue::exact(q(1, 2)), &[0.0, 0.5, 1.0, 2.0], &opts)?;
    let ends: Vec<String> = branches.iter().map(|b| format!("{:?}", classify_branch(b).termination)).collect();
    let ok = branches
        .iter()
        .any(|b| matches!(b.termination, Termination::ReconnectedTrivial(l) if (l - 1.0).abs() < 1e-3));
    Ok((ok, ends.join(", ")))
}

pub fn run(level: Level) -> Vec<CheckResult> {
    let samples = match level {
        Level::Fast => 20,
        Level::Full => 100,
    };
    let mut out = vec![
        timed("euler-parity", || check_euler_parity(samples, 0x5eed)),
        timed("trivial-spectrum", check_trivial_spectrum),
        timed("candidate-set", check_candidates),
        timed("simplicity", check_simplicity),
        timed("numerical-hygiene", || check_hygiene(20, 0x4a11)),
    ];
    if level == Level::Full {
        out.push(timed("pitchfork", check_pitchfork));
        out.push(timed("circle-branch", check_circle_branch));
        out.push(timed("mode-loop", check_loop));
    }
    out
}

/// `{"level", "passed", "checks": [...]}`.
pub fn summary_json(level: Level, results: &[CheckResult]) -> serde_json::Value {
    serde_json::json!({
        "level": level,
        "passed": results.iter().all(|r| r.passed),
        "checks": results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_battery_passes() {
        let results = run(Level::Fast);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert_eq!(results.len(), 5);
    }

    #[test]
    fn continuation_checks_pass() {
        for (name, r) in [("pitchfork", check_pitchfork()), ("circle", check_circle_branch()), ("loop", check_loop())] {
            let (ok, detail) = r.unwrap();
            assert!(ok, "{name}: {detail}");
        }
    }
}

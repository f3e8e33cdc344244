//! Newton correction, branch switching and pseudo-arclength continuation of
//! bifurcating branches, with classification of how each branch ends.
//!
//! For the circle group the orbit of every solution is a curve of solutions;
//! it is removed by a phase row `⟨t0, c − c0⟩ = 0` balanced by a multiplier
//! `σ` on the orbit direction `ξ(c)`, which vanishes at exact solutions.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{global_bifurcation_test, kernel_fixed_dimension, VerdictKind};
use crate::error::{Error, Result};
use crate::galerkin::GalerkinSystem;
use crate::problem::SpectralValue;
use crate::representation::OrthogonalRepresentation;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationOptions {
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Amplitude of the branch-switching predictor.
    pub delta: f64,
    pub initial_step: f64,
    pub step_min: f64,
    pub step_max: f64,
    /// Radius `R` of the norm ball.
    pub norm_bound: f64,
    pub max_steps: usize,
    pub lambda_window: (f64, f64),
    pub reconnect_tol: f64,
    pub lambda_tol: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            newton_tol: 1e-10,
            max_iter: 25,
            delta: 1e-2,
            initial_step: 0.02,
            step_min: 1e-5,
            step_max: 0.5,
            norm_bound: 50.0,
            max_steps: 2000,
            lambda_window: (-10.0, 10.0),
            reconnect_tol: 1e-4,
            lambda_tol: 1e-3,
        }
    }
}

/// The extra scalar equation that closes the Newton system.
#[derive(Debug, Clone)]
pub enum Constraint<T: Real> {
    FixedLambda(T),
    /// `⟨direction, c − c0⟩ = value`.
    Amplitude { direction: DVector<T>, value: T },
    /// `⟨t_c, c − c_prev⟩ + t_λ (λ − λ_prev) = ds`.
    Arclength { c: DVector<T>, lambda: T, tangent_c: DVector<T>, tangent_lambda: T, ds: T },
}

/// A corrected point on a branch.
#[derive(Debug, Clone)]
pub struct BranchPoint<T: Real> {
    pub c: DVector<T>,
    pub lambda: T,
    /// Gauge multiplier (zero without a continuous symmetry).
    pub sigma: T,
    /// Discrete `‖u − ũ0‖_{H¹}`.
    pub h1_norm: f64,
    /// `‖r(c, λ)‖₂`.
    pub residual: f64,
    /// `|⟨t0, c − c0⟩|`, zero without a continuous symmetry.
    pub phase_residual: f64,
    /// Negative eigenvalues of the `H¹`-normalized Jacobian.
    pub inertia: usize,
    /// Newton iterations and the residual history of the correction.
    pub iterations: usize,
    pub history: Vec<f64>,
}

struct Corrected<T: Real> {
    c: DVector<T>,
    lambda: T,
    sigma: T,
    iterations: usize,
    history: Vec<f64>,
}

/// Unit phase direction `ξ(c0)/|ξ(c0)|` when a gauge is needed.
fn phase_direction<T: Real>(sys: &GalerkinSystem<T>) -> Option<DVector<T>> {
    if !sys.has_gauge() {
        return None;
    }
    sys.orbit_direction(sys.trivial()).map(|x| {
        let n = x.norm();
        x / n
    })
}

fn augmented<T: Real>(
    sys: &GalerkinSystem<T>,
    c: &DVector<T>,
    lambda: T,
    sigma: T,
    phase: Option<&DVector<T>>,
    constraint: &Constraint<T>,
) -> (DVector<T>, DMatrix<T>, f64) {
    let m = sys.dim();
    let g = usize::from(phase.is_some());
    let n = m + 1 + g;
    let asm = sys.evaluate_all(c, lambda, true);
    let mut f = DVector::zeros(n);
    let mut jac = DMatrix::zeros(n, n);
    f.rows_mut(0, m).copy_from(&asm.residual);
    jac.view_mut((0, 0), (m, m)).copy_from(asm.jacobian.as_ref().unwrap());
    jac.view_mut((0, m), (m, 1)).copy_from(&asm.d_lambda);
    if let Some(t0) = phase {
        let xi = sys.orbit_direction(c).unwrap();
        let gen = sys.generator().unwrap();
        let p = sys.components();
        let mut rows = f.rows_mut(0, m);
        rows += &xi * sigma;
        for b in 0..m / p {
            let mut block = jac.view_mut((b * p, b * p), (p, p));
            block += gen * sigma;
        }
        jac.view_mut((0, m + 1), (m, 1)).copy_from(&xi);
        f[m + 1] = t0.dot(&(c - sys.trivial()));
        jac.view_mut((m + 1, 0), (1, m)).copy_from(&t0.transpose());
    }
    match constraint {
        Constraint::FixedLambda(l) => {
            f[m] = lambda - *l;
            jac[(m, m)] = T::one();
        }
        Constraint::Amplitude { direction, value } => {
            f[m] = direction.dot(&(c - sys.trivial())) - *value;
            jac.view_mut((m, 0), (1, m)).copy_from(&direction.transpose());
        }
        Constraint::Arclength { c: cp, lambda: lp, tangent_c, tangent_lambda, ds } => {
            f[m] = tangent_c.dot(&(c - cp)) + *tangent_lambda * (lambda - *lp) - *ds;
            jac.view_mut((m, 0), (1, m)).copy_from(&tangent_c.transpose());
            jac[(m, m)] = *tangent_lambda;
        }
    }
    (f, jac, asm.scale)
}

fn correct<T: Real>(
    sys: &GalerkinSystem<T>,
    c: &DVector<T>,
    lambda: T,
    constraint: &Constraint<T>,
    opts: &ContinuationOptions,
) -> Result<Corrected<T>> {
    let phase = phase_direction(sys);
    let m = sys.dim();
    let mut c = c.clone();
    let mut lambda = lambda;
    let mut sigma = T::zero();
    let mut history = Vec::new();
    for it in 0..=opts.max_iter {
        let (f, jac, scale) = augmented(sys, &c, lambda, sigma, phase.as_ref(), constraint);
        let norm = f.norm().as_f64();
        history.push(norm);
        // The attainable residual is bounded below by rounding in the
        // largest assembled term.
        let tol = opts.newton_tol.max(1e3 * T::EPS * scale);
        if norm.is_finite() && norm <= tol {
            return Ok(Corrected { c, lambda, sigma, iterations: it, history });
        }
        if !norm.is_finite() || it == opts.max_iter || (it > 2 && norm > 1e6 * history[0].max(1e-300)) {
            return Err(Error::NewtonFailed { iterations: it, residual: norm });
        }
        let step = jac.lu().solve(&f).ok_or(Error::NewtonFailed { iterations: it, residual: norm })?;
        c -= step.rows(0, m);
        lambda -= step[m];
        if phase.is_some() {
            sigma -= step[m + 1];
        }
    }
    unreachable!("loop returns")
}

fn finish_point<T: Real>(sys: &GalerkinSystem<T>, k: Corrected<T>) -> BranchPoint<T> {
    let asm = sys.evaluate_all(&k.c, k.lambda, true);
    let phase_residual = phase_direction(sys).map_or(0.0, |t0| t0.dot(&(&k.c - sys.trivial())).abs().as_f64());
    BranchPoint {
        h1_norm: sys.h1_norm(&k.c).as_f64(),
        residual: asm.residual.norm().as_f64(),
        inertia: sys.inertia_of(asm.jacobian.as_ref().unwrap()),
        phase_residual,
        c: k.c,
        lambda: k.lambda,
        sigma: k.sigma,
        iterations: k.iterations,
        history: k.history,
    }
}

/// Newton's method on the (gauge-augmented) system closed by `constraint`.
pub fn newton_correct<T: Real>(
    sys: &GalerkinSystem<T>,
    guess: &DVector<T>,
    lambda: T,
    constraint: &Constraint<T>,
    opts: &ContinuationOptions,
) -> Result<BranchPoint<T>> {
    correct(sys, guess, lambda, constraint, opts).map(|k| finish_point(sys, k))
}

/// Initial guess `ũ0 ± δψ` at `λ0 ± δ²` for a kernel direction `ψ`.
#[derive(Debug, Clone)]
pub struct Predictor<T: Real> {
    pub lambda0: SpectralValue,
    /// Unit kernel direction in coefficient space.
    pub direction: DVector<T>,
    pub sign: i8,
    pub c: DVector<T>,
    pub lambda: T,
    pub delta: f64,
    /// `"beta=…, mode=[…], b=…"`.
    pub label: String,
}

/// Predictors along each basis vector of `V(λ0)^H`, both signs.
pub fn branch_switch<T: Real>(sys: &GalerkinSystem<T>, lambda0: &SpectralValue, delta: f64) -> Result<Vec<Predictor<T>>> {
    let problem = &sys.problem;
    let kernel = kernel_fixed_dimension(problem, lambda0)?;
    if kernel.dim_vh == 0 {
        return Err(Error::Contract(format!("V(λ0)^H is trivial at λ0 = {}", lambda0.label())));
    }
    // dim W grows on the side of λ0 away from zero.
    let side = if lambda0.approx < 0.0 { -1.0 } else { 1.0 };
    let lambda = T::lit(lambda0.approx + side * delta * delta);
    let mut out = Vec::new();
    for mode in &kernel.modes {
        for k in &mode.laplace_indices {
            for j in 0..mode.vectors.ncols() {
                let v = mode.vectors.column(j).into_owned();
                let psi = sys.mode_vector(k, &v)?;
                let psi = &psi / psi.norm();
                for sign in [1i8, -1] {
                    out.push(Predictor {
                        lambda0: lambda0.clone(),
                        c: sys.trivial() + &psi * T::lit(sign as f64 * delta),
                        direction: psi.clone(),
                        sign,
                        lambda,
                        delta,
                        label: format!("beta={}, mode={k:?}, b={}, vector={j}", crate::scalar::format_rational(&mode.beta), mode.b.label()),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// How a branch ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "lambda")]
pub enum Termination {
    ReconnectedTrivial(f64),
    ExitedNormBound,
    ExitedLambdaWindow,
    StepLimit,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct BranchOrigin {
    pub lambda0: SpectralValue,
    pub label: String,
    pub sign: i8,
}

#[derive(Debug, Clone)]
pub struct Branch<T: Real> {
    pub origin: BranchOrigin,
    pub points: Vec<BranchPoint<T>>,
    pub termination: Termination,
}

/// Unit tangent of the solution curve at a corrected point, oriented along
/// `border` (a previous tangent or the initial kernel direction).
fn tangent<T: Real>(
    sys: &GalerkinSystem<T>,
    point: &BranchPoint<T>,
    border_c: &DVector<T>,
    border_lambda: T,
) -> Result<(DVector<T>, T)> {
    let phase = phase_direction(sys);
    let m = sys.dim();
    let dummy = Constraint::Arclength {
        c: point.c.clone(),
        lambda: point.lambda,
        tangent_c: border_c.clone(),
        tangent_lambda: border_lambda,
        ds: T::zero(),
    };
    let (_, jac, _) = augmented(sys, &point.c, point.lambda, point.sigma, phase.as_ref(), &dummy);
    let mut rhs = DVector::zeros(jac.nrows());
    rhs[m] = T::one();
    let t = jac.lu().solve(&rhs).ok_or_else(|| Error::NumericalDegeneracy("singular tangent system".into()))?;
    let tc = t.rows(0, m).into_owned();
    let tl = t[m];
    let norm = (tc.norm_squared() + tl * tl).sqrt();
    Ok((tc / norm, tl / norm))
}

/// Corrects a predictor onto the branch with the amplitude fixed at `±δ`.
pub fn start_branch<T: Real>(sys: &GalerkinSystem<T>, pred: &Predictor<T>, opts: &ContinuationOptions) -> Result<BranchPoint<T>> {
    if pred.delta == 0.0 || (&pred.c - sys.trivial()).norm() == T::zero() {
        return Err(Error::Contract("degenerate predictor: zero amplitude".into()));
    }
    let constraint = Constraint::Amplitude { direction: pred.direction.clone(), value: T::lit(pred.sign as f64 * pred.delta) };
    newton_correct(sys, &pred.c, pred.lambda, &constraint, opts)
}

fn inside(window: (f64, f64), x: f64) -> bool {
    window.0 <= x && x <= window.1
}

/// Pseudo-arclength continuation from a corrected start point.
///
/// `lambda_points` is Λ (for deciding reconnection) and `direction` orients
/// the first step.
pub fn continue_branch<T: Real>(
    sys: &GalerkinSystem<T>,
    start: BranchPoint<T>,
    direction: (&DVector<T>, T),
    origin: BranchOrigin,
    lambda_points: &[f64],
    opts: &ContinuationOptions,
) -> Branch<T> {
    let lambda0 = origin.lambda0.approx;
    let start_norm = start.h1_norm;
    let mut points = vec![start];
    let finish = |points, termination| Branch { origin: origin.clone(), points, termination };
    let (mut tc, mut tl) = match tangent(sys, &points[0], direction.0, direction.1) {
        Ok(t) => t,
        Err(_) => return finish(points, Termination::Stalled),
    };
    let mut ds = opts.initial_step.clamp(opts.step_min, opts.step_max);
    let mut successes = 0;
    let mut left = false;
    for _ in 0..opts.max_steps {
        let last = points.last().unwrap();
        let constraint = Constraint::Arclength {
            c: last.c.clone(),
            lambda: last.lambda,
            tangent_c: tc.clone(),
            tangent_lambda: tl,
            ds: T::lit(ds),
        };
        let guess = &last.c + &tc * T::lit(ds);
        let lguess = last.lambda + tl * T::lit(ds);
        let corrected = match newton_correct(sys, &guess, lguess, &constraint, opts) {
            Ok(p) => p,
            Err(_) => {
                ds /= 2.0;
                successes = 0;
                if ds < opts.step_min {
                    return finish(points, Termination::Stalled);
                }
                continue;
            }
        };
        let (ntc, ntl) = match tangent(sys, &corrected, &tc, tl) {
            Ok(t) => t,
            Err(_) => return finish(points, Termination::Stalled),
        };
        let prev_norm = last.h1_norm;
        let norm = corrected.h1_norm;
        let lambda = corrected.lambda.as_f64();
        (tc, tl) = (ntc, ntl);
        points.push(corrected);

        if (lambda - lambda0).abs() > opts.lambda_tol || norm > 10.0 * start_norm {
            left = true;
        }
        if left && norm < opts.reconnect_tol && (lambda - lambda0).abs() > opts.lambda_tol {
            let near = lambda_points.iter().any(|l| (l - lambda).abs() < opts.lambda_tol);
            if near {
                return finish(points, Termination::ReconnectedTrivial(lambda));
            }
        }
        if norm > opts.norm_bound {
            return finish(points, Termination::ExitedNormBound);
        }
        if !inside(opts.lambda_window, lambda) {
            return finish(points, Termination::ExitedLambdaWindow);
        }
        successes += 1;
        if successes >= 3 {
            ds = (ds * 1.3).min(opts.step_max);
            successes = 0;
        }
        if left && norm < prev_norm {
            // Approach the trivial family in shrinking steps.
            ds = ds.min(0.5 * norm).max(opts.step_min);
        }
    }
    finish(points, Termination::StepLimit)
}

/// Which side of the global alternative a branch supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Alternative {
    /// Returned to the trivial family at another candidate.
    MeetsTrivialFamily,
    /// Left the norm ball or the parameter window.
    UnboundedWithinBox,
    /// Continuation did not reach a decision.
    InconclusiveNumerics,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchClassification {
    pub termination: Termination,
    pub alternative: Alternative,
    pub consistent: bool,
}

pub fn classify_branch<T: Real>(branch: &Branch<T>) -> BranchClassification {
    let alternative = match branch.termination {
        Termination::ReconnectedTrivial(_) => Alternative::MeetsTrivialFamily,
        Termination::ExitedNormBound | Termination::ExitedLambdaWindow => Alternative::UnboundedWithinBox,
        Termination::StepLimit | Termination::Stalled => Alternative::InconclusiveNumerics,
    };
    BranchClassification {
        termination: branch.termination,
        alternative,
        consistent: alternative != Alternative::InconclusiveNumerics,
    }
}

/// `min_g ‖g·b − a‖` over the group (sampled and refined for the circle).
pub fn orbit_distance<T: Real>(sys: &GalerkinSystem<T>, a: &DVector<T>, b: &DVector<T>) -> f64 {
    match &sys.problem.rep {
        OrthogonalRepresentation::Finite(_) => sys
            .problem
            .rep
            .sampled_actions(0)
            .iter()
            .map(|g| (sys.act(g, b) - a).norm().as_f64())
            .fold(f64::INFINITY, f64::min),
        OrthogonalRepresentation::Circle(circle) => {
            let dist = |theta: f64| (sys.act(&circle.rotation::<T>(theta), b) - a).norm().as_f64();
            let samples = 720;
            let h = std::f64::consts::TAU / samples as f64;
            let best = (0..samples).map(|k| k as f64 * h).min_by(|x, y| dist(*x).total_cmp(&dist(*y))).unwrap();
            // Golden-section refinement inside the bracketing cell.
            let (mut lo, mut hi) = (best - h, best + h);
            let r = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let x1 = hi - r * (hi - lo);
                let x2 = lo + r * (hi - lo);
                if dist(x1) < dist(x2) {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            dist(0.5 * (lo + hi)).min(dist(best))
        }
    }
}

/// Traces every branch leaving `λ0` along `V(λ0)^H`. Branches whose start
/// points are group-related are reported once.
pub fn trace_branches<T: Real>(
    sys: &GalerkinSystem<T>,
    lambda0: &SpectralValue,
    lambda_points: &[f64],
    opts: &ContinuationOptions,
) -> Result<Vec<Branch<T>>> {
    let verdict = global_bifurcation_test(&sys.problem, lambda0)?;
    if verdict.verdict != VerdictKind::GlobalBifurcation {
        return Err(Error::Contract(format!(
            "λ0 = {} is not certified (criterion sum {} is even)",
            lambda0.label(),
            verdict.criterion_sum
        )));
    }
    let predictors = branch_switch(sys, lambda0, opts.delta)?;
    let starts: Vec<(usize, BranchPoint<T>)> = predictors
        .iter()
        .enumerate()
        .filter_map(|(i, p)| start_branch(sys, p, opts).ok().map(|s| (i, s)))
        .collect();
    let mut kept: Vec<(usize, BranchPoint<T>)> = Vec::new();
    for (i, s) in starts {
        let duplicate = kept
            .iter()
            .any(|(_, k)| orbit_distance(sys, &k.c, &s.c) < 1e-8 * k.c.norm().as_f64().max(1.0));
        if !duplicate {
            kept.push((i, s));
        }
    }
    let branches = kept
        .into_par_iter()
        .map(|(i, start)| {
            let p = &predictors[i];
            let origin = BranchOrigin { lambda0: lambda0.clone(), label: p.label.clone(), sign: p.sign };
            let dir = &p.direction * T::lit(p.sign as f64);
            continue_branch(sys, start, (&dir, T::zero()), origin, lambda_points, opts)
        })
        .collect();
    Ok(branches)
}

impl<T: Real> Branch<T> {
    /// `step,lambda,h1_norm,residual,inertia`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,lambda,h1_norm,residual,inertia\n");
        for (i, p) in self.points.iter().enumerate() {
            out.push_str(&format!(
                "{i},{:.16e},{:.16e},{:.16e},{}\n",
                p.lambda.as_f64(),
                p.h1_norm,
                p.residual,
                p.inertia
            ));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let last = self.points.last();
        serde_json::json!({
            "lambda0": self.origin.lambda0.to_json(),
            "origin": self.origin.label,
            "sign": self.origin.sign,
            "points": self.points.len(),
            "termination": self.termination,
            "classification": classify_branch(self),
            "final_lambda": last.map(|p| p.lambda.as_f64()),
            "final_h1_norm": last.map(|p| p.h1_norm),
            "max_residual": self.points.iter().map(|p| p.residual).fold(0.0, f64::max),
            "max_phase_residual": self.points.iter().map(|p| p.phase_residual).fold(0.0, f64::max),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{circle_orbit, mode_loop, scalar_cubic, z2_swap};
    use crate::scalar::Rational;
    use crate::spectra::BoxDomain;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn opts(window: (f64, f64)) -> ContinuationOptions {
        ContinuationOptions { lambda_window: window, ..Default::default() }
    }

    #[test]
    fn pitchfork_follows_the_amplitude_law() {
        let sys = GalerkinSystem::<f64>::new(scalar_cubic(BoxDomain::interval()).unwrap(), &q(16, 1), None).unwrap();
        let branches = trace_branches(&sys, &SpectralValue::exact(q(1, 1)), &[0.0, 1.0, 4.0, 9.0], &opts((-1.0, 1.5))).unwrap();
        assert_eq!(branches.len(), 2);
        let k = sys.mode_index(&[1]).unwrap();
        for b in &branches {
            assert_eq!(b.termination, Termination::ExitedLambdaWindow);
            let mut checked = 0;
            for p in &b.points {
                assert!(p.residual < 1e-10, "residual {}", p.residual);
                let l = p.lambda;
                if l > 1.0 + 1e-4 && l <= 1.2 {
                    let a2 = p.c[k] * p.c[k];
                    let law = 4.0 * (l - 1.0) / 3.0;
                    assert!((a2 - law).abs() <= 0.02 * law, "λ={l} a²={a2} law={law}");
                    checked += 1;
                }
            }
            assert!(checked > 3);
        }
        assert!(branches[0].points[5].c[k] * branches[1].points[5].c[k] < 0.0);
    }

    #[test]
    fn circle_branch_keeps_the_phase() {
        let sys = GalerkinSystem::<f64>::new(circle_orbit(BoxDomain::interval()).unwrap(), &q(9, 1), None).unwrap();
        let branches = trace_branches(&sys, &SpectralValue::exact(q(-1, 2)), &[0.0, -0.5, -2.0, -4.5], &opts((-1.5, 0.5))).unwrap();
        assert!(!branches.is_empty());
        for b in &branches {
            assert!(b.points.len() > 5);
            for p in &b.points {
                assert!(p.phase_residual < 1e-12, "phase {}", p.phase_residual);
                assert!(p.residual < 1e-9, "residual {}", p.residual);
            }
            assert!(classify_branch(b).consistent, "{:?}", b.termination);
        }
    }

    /// Reduced two-amplitude equations, exact for cutoff 1.
    fn loop_oracle(a: f64, b: f64, l: f64) -> (f64, f64) {
        let qa = 3.0 * a.powi(3) + 2.0 * a * b * b - 3.0 * a * a * b + b.powi(3);
        let qb = -3.0 * b.powi(3) + 2.0 * a * a * b - a.powi(3) + 3.0 * a * b * b;
        (a * (1.0 - l) - 0.75 * qa, b * (1.0 - 2.0 * l) - 0.75 * qb)
    }

    #[test]
    fn loop_branch_reconnects_at_the_next_candidate() {
        let sys = GalerkinSystem::<f64>::new(mode_loop(BoxDomain::interval()).unwrap(), &q(1, 1), None).unwrap();
        let branches = trace_branches(&sys, &SpectralValue::exact(q(1, 2)), &[0.0, 0.5, 1.0], &opts((-2.0, 3.0))).unwrap();
        let reconnected: Vec<f64> = branches
            .iter()
            .filter_map(|b| match b.termination {
                Termination::ReconnectedTrivial(l) => Some(l),
                _ => None,
            })
            .collect();
        assert!(!reconnected.is_empty(), "{:?}", branches.iter().map(|b| b.termination).collect::<Vec<_>>());
        for l in reconnected {
            assert!((l - 1.0).abs() < 1e-3, "λ* = {l}");
        }
        let k = sys.mode_index(&[1]).unwrap();
        for b in &branches {
            for p in &b.points {
                let (ra, rb) = loop_oracle(p.c[2 * k], p.c[2 * k + 1], p.lambda);
                assert!(ra.abs() < 1e-9 && rb.abs() < 1e-9, "oracle residual {ra} {rb}");
            }
        }
    }

    #[test]
    fn symmetric_branch_stays_symmetric() {
        let sys = GalerkinSystem::<f64>::new(z2_swap(BoxDomain::interval()).unwrap(), &q(9, 1), None).unwrap();
        let branches = trace_branches(&sys, &SpectralValue::exact(q(1, 1)), &[0.0, 1.0, 4.0, 9.0], &opts((-1.0, 2.0))).unwrap();
        assert!(!branches.is_empty());
        for b in &branches {
            for p in &b.points {
                for m in 0..sys.dim() / 2 {
                    assert!((p.c[2 * m] - p.c[2 * m + 1]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_amplitude_predictor_is_rejected() {
        let sys = GalerkinSystem::<f64>::new(scalar_cubic(BoxDomain::interval()).unwrap(), &q(9, 1), None).unwrap();
        let mut preds = branch_switch(&sys, &SpectralValue::exact(q(1, 1)), 0.0).unwrap();
        assert_eq!(preds[0].c, *sys.trivial());
        preds[0].delta = 0.0;
        assert!(matches!(start_branch(&sys, &preds[0], &ContinuationOptions::default()), Err(Error::Contract(_))));
    }

    #[test]
    fn uncertified_lambda_is_refused() {
        let sys = GalerkinSystem::<f64>::new(scalar_cubic(BoxDomain::interval()).unwrap(), &q(9, 1), None).unwrap();
        assert!(trace_branches(&sys, &SpectralValue::exact(q(2, 1)), &[], &ContinuationOptions::default()).is_err());
    }

    #[test]
    fn trivial_family_stays_trivial() {
        let sys = GalerkinSystem::<f64>::new(circle_orbit(BoxDomain::interval()).unwrap(), &q(9, 1), None).unwrap();
        for l in [-0.3, 0.2, 1.7] {
            let p = newton_correct(&sys, sys.trivial(), l, &Constraint::FixedLambda(l), &ContinuationOptions::default()).unwrap();
            assert!((&p.c - sys.trivial()).norm() < 1e-14);
            assert_eq!(p.iterations, 0);
        }
    }
}

//! Candidate set Λ, kernel dimensions and the odd-multiplicity criterion for
//! global bifurcation from the trivial orbit.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::euler::{BurnsideElement, BurnsideRing};
use crate::group::{Subgroup, SubgroupLattice};
use crate::problem::{EigenPair, EllipticProblem, SpectralValue};
use crate::representation::{FixedDimension, OrthogonalRepresentation};
use crate::scalar::{f64_to_rational, format_rational, Rational, Real};
use crate::spectra::{neumann_spectrum, EigenvalueEntry};

/// A bounded parameter window `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaWindow {
    pub lo: Rational,
    pub hi: Rational,
}

impl LambdaWindow {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Contract(format!(
                "empty λ-window [{}, {}]",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(LambdaWindow { lo, hi })
    }

    pub fn max_abs(&self) -> Rational {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, x: &SpectralValue) -> bool {
        match &x.exact {
            Some(q) => &self.lo <= q && q <= &self.hi,
            None => {
                let (lo, hi) = (crate::scalar::rational_to_f64(&self.lo), crate::scalar::rational_to_f64(&self.hi));
                lo <= x.approx && x.approx <= hi
            }
        }
    }
}

/// Smallest integer strictly above `x·max|α|`, the spectrum range needed to
/// see every sign change of `β − λα` for `|λ| ≤ x`.
pub fn required_cutoff<T: Real>(problem: &EllipticProblem<T>, x: &Rational) -> Rational {
    let bound = x.abs() * f64_to_rational(problem.max_abs_alpha()).unwrap_or_else(Rational::zero);
    bound.floor() + Rational::one()
}

fn check_cutoff(cutoff: &Rational, needed: &Rational) -> Result<()> {
    if cutoff < needed {
        return Err(Error::CutoffTooSmall { cutoff: format_rational(cutoff), needed: format_rational(needed) });
    }
    Ok(())
}

/// Is `β < λα`?
fn below(beta: &Rational, lambda_alpha: &SpectralValue) -> bool {
    match &lambda_alpha.exact {
        Some(q) => beta < q,
        None => {
            let b = crate::scalar::rational_to_f64(beta);
            b < lambda_alpha.approx - 1e-12 * b.abs().max(1.0)
        }
    }
}

/// Spectrum entries with `β = target` (exactly, or within `1e-9` relative for
/// inexact targets).
fn matching_entries<'a>(spectrum: &'a [EigenvalueEntry], target: &SpectralValue) -> Vec<&'a EigenvalueEntry> {
    match &target.exact {
        Some(q) => spectrum
            .binary_search_by(|e| e.value.cmp(q))
            .map(|i| vec![&spectrum[i]])
            .unwrap_or_default(),
        None => spectrum
            .iter()
            .filter(|e| (e.value_float - target.approx).abs() <= 1e-9 * target.approx.abs().max(1.0))
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct OperatorEigenvalue {
    pub beta: Rational,
    pub alpha: SpectralValue,
    /// `(β − λα)/(1 + β)`.
    pub value: SpectralValue,
    /// `μ_A(α) · dim V_{-Δ}(β)`.
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct OperatorSpectrum {
    pub lambda: SpectralValue,
    pub values: Vec<OperatorEigenvalue>,
    /// Dimension of the negative eigenspace `W(λ)`.
    pub dim_w: usize,
}

/// Eigenvalues of `Id − L_{λA}` over all `β ≤ cutoff`.
pub fn operator_spectrum<T: Real>(problem: &EllipticProblem<T>, lambda: &SpectralValue, cutoff: &Rational) -> Result<OperatorSpectrum> {
    let lam = lambda.exact.clone().or_else(|| f64_to_rational(lambda.approx)).unwrap_or_else(Rational::zero);
    let needed = lam.abs() * f64_to_rational(problem.max_abs_alpha()).unwrap_or_else(Rational::zero);
    if cutoff <= &needed {
        return Err(Error::CutoffTooSmall { cutoff: format_rational(cutoff), needed: format!("> {}", format_rational(&needed)) });
    }
    let spectrum = neumann_spectrum(&problem.domain, cutoff)?;
    let mut values = Vec::new();
    let mut dim_w = 0;
    for entry in &spectrum {
        let beta = SpectralValue::exact(entry.value.clone());
        let one_plus = SpectralValue::exact(&entry.value + Rational::one());
        for pair in &problem.a_pairs {
            let la = lambda.mul(&pair.value);
            let diff = match (&beta.exact, &la.exact) {
                (Some(b), Some(x)) => SpectralValue::exact(b - x),
                _ => SpectralValue::approx(beta.approx - la.approx),
            };
            let multiplicity = pair.multiplicity * entry.multiplicity();
            if below(&entry.value, &la) {
                dim_w += multiplicity;
            }
            values.push(OperatorEigenvalue {
                beta: entry.value.clone(),
                alpha: pair.value.clone(),
                value: diff.div(&one_plus),
                multiplicity,
            });
        }
    }
    Ok(OperatorSpectrum { lambda: lambda.clone(), values, dim_w })
}

#[derive(Debug, Clone)]
pub struct CandidatePair {
    pub alpha: SpectralValue,
    pub beta: Rational,
    pub alpha_multiplicity: usize,
    pub beta_multiplicity: usize,
}

/// A point of Λ with the `(α, β)` pairs producing it.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub lambda: SpectralValue,
    pub pairs: Vec<CandidatePair>,
}

/// `Λ ∩ window`, where `Λ = {β_k/α_j : α_j ≠ 0}`.
pub fn bifurcation_candidates<T: Real>(
    problem: &EllipticProblem<T>,
    window: &LambdaWindow,
    cutoff: Option<&Rational>,
) -> Result<Vec<Candidate>> {
    let needed = required_cutoff(problem, &window.max_abs());
    let cutoff = match cutoff {
        Some(c) => {
            check_cutoff(c, &needed)?;
            c.clone()
        }
        None => needed,
    };
    let spectrum = neumann_spectrum(&problem.domain, &cutoff)?;
    let mut raw: Vec<(SpectralValue, CandidatePair)> = Vec::new();
    for pair in problem.nonzero_alphas() {
        for entry in &spectrum {
            let lambda = SpectralValue::exact(entry.value.clone()).div(&pair.value);
            if window.contains(&lambda) {
                raw.push((
                    lambda,
                    CandidatePair {
                        alpha: pair.value.clone(),
                        beta: entry.value.clone(),
                        alpha_multiplicity: pair.multiplicity,
                        beta_multiplicity: entry.multiplicity(),
                    },
                ));
            }
        }
    }
    raw.sort_by(|a, b| a.0.approx.total_cmp(&b.0.approx));
    let mut out: Vec<Candidate> = Vec::new();
    for (lambda, pair) in raw {
        match out.last_mut() {
            Some(last) if last.lambda.same(&lambda) => last.pairs.push(pair),
            _ => out.push(Candidate { lambda, pairs: vec![pair] }),
        }
    }
    Ok(out)
}

/// One `(b_j, β_k)` block of `V(λ0)^H`.
#[derive(Debug, Clone)]
pub struct KernelMode<T: Real> {
    pub b: SpectralValue,
    pub beta: Rational,
    pub b_multiplicity: usize,
    /// Laplacian multi-indices spanning `V_{-Δ}(β)`.
    pub laplace_indices: Vec<Vec<u32>>,
    /// Eigenvectors `f_j` of `B` in `R^p` coordinates (columns).
    pub vectors: DMatrix<T>,
}

#[derive(Debug, Clone)]
pub struct KernelInfo<T: Real> {
    pub lambda0: SpectralValue,
    pub dim_v: usize,
    pub dim_vh: usize,
    pub modes: Vec<KernelMode<T>>,
}

fn lambda_as_rational(x: &SpectralValue) -> Rational {
    x.exact.clone().or_else(|| f64_to_rational(x.approx)).unwrap_or_else(Rational::zero)
}

/// `dim V(λ0)` over the nonzero eigenvalues of `A` and `dim V(λ0)^H` over
/// the eigenvalues of `B`, with the `(f_j, β_k)` data spanning `V(λ0)^H`.
pub fn kernel_fixed_dimension<T: Real>(problem: &EllipticProblem<T>, lambda0: &SpectralValue) -> Result<KernelInfo<T>> {
    let cutoff = required_cutoff(problem, &lambda_as_rational(lambda0));
    let spectrum = neumann_spectrum(&problem.domain, &cutoff)?;
    let dim_v = problem
        .nonzero_alphas()
        .map(|pair| {
            let target = lambda0.mul(&pair.value);
            matching_entries(&spectrum, &target).iter().map(|e| e.multiplicity()).sum::<usize>() * pair.multiplicity
        })
        .sum();
    let mut modes = Vec::new();
    for pair in problem.blocks.b_pairs.iter().filter(|e| !e.value.is_zero()) {
        let target = lambda0.mul(&pair.value);
        for entry in matching_entries(&spectrum, &target) {
            modes.push(KernelMode {
                b: pair.value.clone(),
                beta: entry.value.clone(),
                b_multiplicity: pair.multiplicity,
                laplace_indices: entry.indices.clone(),
                vectors: pair.vectors.clone(),
            });
        }
    }
    let dim_vh = modes.iter().map(|m| m.b_multiplicity * m.laplace_indices.len()).sum();
    Ok(KernelInfo { lambda0: lambda0.clone(), dim_v, dim_vh, modes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    GlobalBifurcation,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateEntry {
    pub b: String,
    pub beta: String,
    pub mu_b: usize,
    pub dim_beta: usize,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub lambda0: SpectralValue,
    pub verdict: VerdictKind,
    /// `Σ μ_B(b_j) · dim V_{-Δ}(λ0 b_j)`, equal to `dim V(λ0)^H`.
    pub criterion_sum: usize,
    pub dim_v: usize,
    pub certificate: Vec<CertificateEntry>,
}

/// Global bifurcation is certified when the criterion sum is odd.
pub fn global_bifurcation_test<T: Real>(problem: &EllipticProblem<T>, lambda0: &SpectralValue) -> Result<Verdict> {
    let kernel = kernel_fixed_dimension(problem, lambda0)?;
    if kernel.dim_v == 0 {
        return Err(Error::Contract(format!("λ0 = {} is not in Λ", lambda0.label())));
    }
    let certificate = kernel
        .modes
        .iter()
        .map(|m| CertificateEntry {
            b: m.b.label(),
            beta: format_rational(&m.beta),
            mu_b: m.b_multiplicity,
            dim_beta: m.laplace_indices.len(),
        })
        .collect();
    let verdict = if kernel.dim_vh % 2 == 1 { VerdictKind::GlobalBifurcation } else { VerdictKind::Inconclusive };
    Ok(Verdict { lambda0: lambda0.clone(), verdict, criterion_sum: kernel.dim_vh, dim_v: kernel.dim_v, certificate })
}

/// Human-readable name of a subgroup: its conjugacy-class name for finite
/// groups, `Zm`/`SO(2)` for the circle.
pub fn subgroup_label<T: Real>(rep: &OrthogonalRepresentation<T>, h: &Subgroup) -> String {
    match (rep, h) {
        (OrthogonalRepresentation::Finite(r), Subgroup::Finite(e)) => SubgroupLattice::new(r.group().clone())
            .ok()
            .and_then(|l| l.class_of(e).map(|c| l.names()[c].clone()))
            .unwrap_or_else(|| format!("subgroup of order {}", e.len())),
        (_, Subgroup::Cyclic(1)) => "e".into(),
        (_, Subgroup::Cyclic(m)) => format!("Z{m}"),
        (_, Subgroup::Circle) => "SO(2)".into(),
        (_, Subgroup::Finite(e)) => format!("subgroup of order {}", e.len()),
    }
}

fn matrix_json<T: Real>(m: &DMatrix<T>) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!((0..m.ncols()).map(|j| m[(i, j)].as_f64()).collect::<Vec<_>>())).collect())
}

fn pairs_json<T: Real>(pairs: &[EigenPair<T>]) -> Value {
    Value::Array(pairs.iter().map(|e| json!({"value": e.value.to_json(), "multiplicity": e.multiplicity})).collect())
}

/// Λ within a window with a verdict at each point.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub window: LambdaWindow,
    pub candidates: Vec<(Candidate, Verdict)>,
    json: Value,
}

impl AnalysisReport {
    pub fn to_json(&self) -> &Value {
        &self.json
    }

    pub fn flagged(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates
            .iter()
            .filter(|(_, v)| v.verdict == VerdictKind::GlobalBifurcation)
            .map(|(c, _)| c)
    }

    /// CSV with one row per candidate: lambda, contributing pairs, verdict.
    pub fn candidates_csv(&self) -> String {
        let mut out = String::from("lambda,lambda_float,pairs,dim_v,dim_vh,verdict\n");
        for (c, v) in &self.candidates {
            let pairs: Vec<String> = c
                .pairs
                .iter()
                .map(|p| format!("alpha={};beta={}", p.alpha.label(), format_rational(&p.beta)))
                .collect();
            out.push_str(&format!(
                "{},{:.16e},{},{},{},{:?}\n",
                c.lambda.label(),
                c.lambda.approx,
                pairs.join(" "),
                v.dim_v,
                v.criterion_sum,
                v.verdict
            ));
        }
        out
    }
}

pub fn analysis_report<T: Real>(problem: &EllipticProblem<T>, window: &LambdaWindow, cutoff: Option<&Rational>) -> Result<AnalysisReport> {
    let candidates = bifurcation_candidates(problem, window, cutoff)?;
    let mut rows = Vec::new();
    let mut annotated = Vec::new();
    for c in candidates {
        let v = global_bifurcation_test(problem, &c.lambda)?;
        rows.push(json!({
            "lambda": c.lambda.to_json(),
            "pairs": c.pairs.iter().map(|p| json!({
                "alpha": p.alpha.to_json(),
                "beta": format_rational(&p.beta),
                "mu_alpha": p.alpha_multiplicity,
                "dim_beta": p.beta_multiplicity,
            })).collect::<Vec<_>>(),
            "dim_v": v.dim_v,
            "dim_vh": v.criterion_sum,
            "verdict": v.verdict,
            "certificate": v.certificate,
        }));
        annotated.push((c, v));
    }
    let s = &problem.slice;
    let a_exact: Vec<Vec<String>> = problem
        .decomposition
        .hessian
        .iter()
        .map(|r| r.iter().map(format_rational).collect())
        .collect();
    let json = json!({
        "group": problem.rep.group().name(),
        "p": problem.dim(),
        "p0": s.p0(),
        "p1": s.p1(),
        "p2": s.p2(),
        "isotropy": subgroup_label(&problem.rep, &s.isotropy),
        "base_point": problem.base_point.iter().map(format_rational).collect::<Vec<_>>(),
        "A": a_exact,
        "alpha": pairs_json(&problem.a_pairs),
        "B": matrix_json(&problem.blocks.b),
        "C": matrix_json(&problem.blocks.c),
        "b": pairs_json(&problem.blocks.b_pairs),
        "c": pairs_json(&problem.blocks.c_pairs),
        "window": [format_rational(&window.lo), format_rational(&window.hi)],
        "candidates": rows,
    });
    Ok(AnalysisReport { window: window.clone(), candidates: annotated, json })
}

/// The negative spectral space `W(λ)` of `−Δ − λA` on the slice, seen as an
/// `H`-representation through fixed-point dimensions.
struct NegativeSpace<'a, T: Real> {
    rep: &'a crate::representation::FiniteRepresentation<T>,
    /// `(dim V_{-Δ}(β), eigenvectors of A)` for every negative pair.
    blocks: Vec<(usize, &'a DMatrix<T>)>,
}

impl<T: Real> FixedDimension for NegativeSpace<'_, T> {
    fn dimension(&self) -> usize {
        self.blocks.iter().map(|(m, v)| m * v.ncols()).sum()
    }

    fn fixed_dim(&self, k: &[usize]) -> Result<usize> {
        let p = self.rep.averaging_projector(k);
        let mut total = 0;
        for (m, v) in &self.blocks {
            let t = (v.transpose() * &p * *v).trace().as_f64();
            let r = t.round();
            if (t - r).abs() > 1e-6 {
                return Err(Error::NumericalDegeneracy(format!("fixed dimension {t} is not an integer")));
            }
            total += m * r as usize;
        }
        Ok(total)
    }
}

/// `χ_G(G⁺ ∧_H S^{W(λ0 ± ε)})` and their difference.
#[derive(Debug, Clone)]
pub struct DegreeJump {
    pub lambda0: SpectralValue,
    pub isotropy: String,
    pub dim_below: usize,
    pub dim_above: usize,
    pub below: BurnsideElement,
    pub above: BurnsideElement,
    pub difference: BurnsideElement,
    /// Coefficient of the difference at the isotropy class.
    pub isotropy_coefficient: i64,
}

impl DegreeJump {
    pub fn to_json(&self) -> Value {
        json!({
            "lambda0": self.lambda0.to_json(),
            "isotropy": self.isotropy,
            "dim_w_below": self.dim_below,
            "dim_w_above": self.dim_above,
            "below": self.below.to_json(),
            "above": self.above.to_json(),
            "difference": self.difference.to_json(),
            "isotropy_coefficient": self.isotropy_coefficient,
        })
    }
}

/// Euler characteristics of the smash products at `λ0 ± ε`, for finite groups.
pub fn degree_jump<T: Real>(problem: &EllipticProblem<T>, lambda0: &SpectralValue) -> Result<DegreeJump> {
    let (OrthogonalRepresentation::Finite(rep), Subgroup::Finite(h)) = (&problem.rep, &problem.slice.isotropy) else {
        return Err(Error::Contract("Euler-ring degrees are computed for finite groups only".into()));
    };
    let bound = lambda_as_rational(lambda0).abs() + Rational::one();
    let spectrum = neumann_spectrum(&problem.domain, &required_cutoff(problem, &bound))?;
    // Sign of β − λ0α just above (side = 1) or below (side = −1) λ0.
    let negative = |beta: &Rational, alpha: &SpectralValue, side: i32| {
        let b = SpectralValue::exact(beta.clone());
        let target = lambda0.mul(alpha);
        if b.same(&target) {
            side * alpha.signum() > 0
        } else {
            b.approx < target.approx
        }
    };
    let space = |side: i32| NegativeSpace {
        rep,
        blocks: problem
            .nonzero_alphas()
            .flat_map(|pair| {
                spectrum
                    .iter()
                    .filter(move |e| negative(&e.value, &pair.value, side))
                    .map(move |e| (e.multiplicity(), &pair.vectors))
            })
            .collect(),
    };
    let ring = BurnsideRing::new(rep.group().clone())?;
    let (wb, wa) = (space(-1), space(1));
    let below = ring.smash(h, &wb)?;
    let above = ring.smash(h, &wa)?;
    let diff: Vec<i64> = above.coordinates.iter().zip(&below.coordinates).map(|(a, b)| a - b).collect();
    let difference = ring.element(diff)?;
    let class = ring.table().lattice.class_of_subgroup(&problem.slice.isotropy)?;
    Ok(DegreeJump {
        lambda0: lambda0.clone(),
        isotropy: subgroup_label(&problem.rep, &problem.slice.isotropy),
        dim_below: wb.dimension(),
        dim_above: wa.dimension(),
        isotropy_coefficient: difference.coefficient(class),
        below,
        above,
        difference,
    })
}

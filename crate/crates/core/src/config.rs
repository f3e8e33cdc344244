//! TOML problem description.
//!
//! ```toml
//! [domain]
//! squared_lengths = ["1"]          # s_i², side i has length π·s_i
//! incommensurable = false          # two-dimensional boxes only
//!
//! [group]
//! preset = "cyclic:2"              # cyclic:n, dihedral:n, symmetric:n, circle
//! # table = [[0, 1], [1, 0]]       # or an explicit multiplication table
//!
//! [representation]
//! dim = 2
//! generators = [{ element = 1, matrix = [[0, 1], [1, 0]] }]
//! # weights = [1]; trivial = 0     # circle: rotation blocks and fixed lines
//!
//! [potential]
//! monomials = [{ coeff = "1/2", exponents = [2, 0], lambda = 1 }]
//!
//! [base_point]
//! u0 = ["0", "0"]
//! eigenvalues = ["1"]              # optional exact eigenvalues of A
//!
//! [analysis]
//! window = ["-5", "10"]
//! cutoff = "100"                   # optional Laplacian cutoff
//!
//! [continuation]                   # all optional
//! newton_tol = 1e-10
//! max_iter = 25
//! delta = 0.01
//! initial_step = 0.02
//! step_min = 1e-5
//! step_max = 0.5
//! norm_bound = 50.0
//! max_steps = 2000
//! lambda_window = [-10.0, 10.0]    # defaults to the analysis window
//! galerkin_cutoff = "16"           # defaults to 4·max|λ0|·max|α|
//! quadrature_points = 12
//! ```
//!
//! Matrix entries may be numbers, rationals such as `"-1/2"`, or expressions
//! `"[-][q*]sqrt(r)[/d]"` such as `"sqrt(3)/2"`.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use toml::Spanned;

use crate::continuation::ContinuationOptions;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupDescriptor};
use crate::polynomial::{Monomial, PolynomialPotential};
use crate::problem::EllipticProblem;
use crate::representation::{CircleRepresentation, FiniteRepresentation, OrthogonalRepresentation};
use crate::scalar::{parse_rational, rational_to_real, Rational, Real};
use crate::spectra::BoxDomain;
use crate::analysis::LambdaWindow;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub squared_lengths: Spanned<Vec<String>>,
    #[serde(default)]
    pub incommensurable: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub preset: Option<Spanned<String>>,
    pub table: Option<Spanned<Vec<Vec<usize>>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorImage {
    pub element: usize,
    pub matrix: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSection {
    pub dim: Option<usize>,
    pub generators: Option<Spanned<Vec<GeneratorImage>>>,
    pub weights: Option<Spanned<Vec<u64>>>,
    #[serde(default)]
    pub trivial: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialEntry {
    pub coeff: String,
    pub exponents: Vec<u32>,
    #[serde(default)]
    pub lambda: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub monomials: Spanned<Vec<MonomialEntry>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasePointSection {
    pub u0: Spanned<Vec<String>>,
    #[serde(default)]
    pub eigenvalues: Option<Spanned<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub window: Spanned<Vec<String>>,
    pub cutoff: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationSection {
    pub newton_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub delta: Option<f64>,
    pub initial_step: Option<f64>,
    pub step_min: Option<f64>,
    pub step_max: Option<f64>,
    pub norm_bound: Option<f64>,
    pub max_steps: Option<usize>,
    pub lambda_window: Option<[f64; 2]>,
    pub galerkin_cutoff: Option<Spanned<String>>,
    pub quadrature_points: Option<usize>,
}

/// A parsed configuration file. Only `domain` is needed for spectra; the
/// other sections are checked when the problem is built.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainSection,
    pub group: Option<GroupSection>,
    pub representation: Option<RepresentationSection>,
    pub potential: Option<PotentialSection>,
    pub base_point: Option<BasePointSection>,
    pub analysis: Option<AnalysisSection>,
    #[serde(default)]
    pub continuation: ContinuationSection,
    #[serde(skip)]
    source: String,
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

fn missing(section: &str) -> Error {
    Error::Config { line: 0, message: format!("missing [{section}] section") }
}

impl ProblemConfig {
    pub fn parse(source: &str) -> Result<Self> {
        let mut cfg: ProblemConfig = toml::from_str(source).map_err(|e| Error::Config {
            line: e.span().map_or(0, |s| line_of(source, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.source = source.to_string();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn at<V>(&self, item: &Spanned<V>, message: impl Into<String>) -> Error {
        Error::Config { line: line_of(&self.source, item.span().start), message: message.into() }
    }

    fn rationals(&self, item: &Spanned<Vec<String>>, what: &str) -> Result<Vec<Rational>> {
        item.get_ref()
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| self.at(item, format!("{what}: cannot parse '{s}' as a rational"))))
            .collect()
    }

    fn rational(&self, item: &Spanned<String>, what: &str) -> Result<Rational> {
        parse_rational(item.get_ref()).ok_or_else(|| self.at(item, format!("{what}: cannot parse '{}' as a rational", item.get_ref())))
    }

    pub fn domain(&self) -> Result<BoxDomain> {
        let d = &self.domain;
        let sq = self.rationals(&d.squared_lengths, "squared_lengths")?;
        BoxDomain::new(sq, d.incommensurable).map_err(|e| self.at(&d.squared_lengths, e.to_string()))
    }

    pub fn group(&self) -> Result<GroupDescriptor> {
        let g = self.group.as_ref().ok_or_else(|| missing("group"))?;
        match (&g.preset, &g.table) {
            (Some(p), None) => GroupDescriptor::preset(p.get_ref()).map_err(|e| self.at(p, e.to_string())),
            (None, Some(t)) => FiniteGroup::from_table("table", t.get_ref())
                .map(|g| GroupDescriptor::Finite(Arc::new(g)))
                .map_err(|e| self.at(t, e.to_string())),
            _ => Err(Error::Config { line: 0, message: "[group] needs exactly one of 'preset' or 'table'".into() }),
        }
    }

    pub fn representation<T: Real>(&self, group: &GroupDescriptor) -> Result<OrthogonalRepresentation<T>> {
        let r = self.representation.as_ref().ok_or_else(|| missing("representation"))?;
        match group {
            GroupDescriptor::Circle => {
                let w = r
                    .weights
                    .as_ref()
                    .ok_or_else(|| Error::Config { line: 0, message: "circle representation needs 'weights'".into() })?;
                let rep = CircleRepresentation::new(w.get_ref().clone(), r.trivial).map_err(|e| self.at(w, e.to_string()))?;
                if r.dim.is_some_and(|d| d != rep.dim()) {
                    return Err(self.at(w, format!("dim = {} but weights give {}", r.dim.unwrap(), rep.dim())));
                }
                Ok(OrthogonalRepresentation::Circle(rep))
            }
            GroupDescriptor::Finite(g) => {
                let dim = r.dim.ok_or_else(|| Error::Config { line: 0, message: "[representation] needs 'dim'".into() })?;
                let gens = match &r.generators {
                    Some(gens) => gens,
                    None => return Ok(OrthogonalRepresentation::Finite(FiniteRepresentation::trivial(g.clone(), dim))),
                };
                let mut images = Vec::new();
                for gi in gens.get_ref() {
                    if gi.matrix.len() != dim || gi.matrix.iter().any(|row| row.len() != dim) {
                        return Err(self.at(gens, format!("generator element {} is not a {dim}x{dim} matrix", gi.element)));
                    }
                    let mut m = nalgebra::DMatrix::<T>::zeros(dim, dim);
                    for (i, row) in gi.matrix.iter().enumerate() {
                        for (j, e) in row.iter().enumerate() {
                            m[(i, j)] = parse_entry(e).ok_or_else(|| self.at(gens, format!("bad matrix entry {e:?}")))?;
                        }
                    }
                    images.push((gi.element, m));
                }
                FiniteRepresentation::from_generators(g.clone(), dim, &images)
                    .map(OrthogonalRepresentation::Finite)
                    .map_err(|e| self.at(gens, e.to_string()))
            }
        }
    }

    pub fn potential(&self, dim: usize) -> Result<PolynomialPotential> {
        let p = self.potential.as_ref().ok_or_else(|| missing("potential"))?;
        let mut monomials = Vec::new();
        for m in p.monomials.get_ref() {
            let coeff = parse_rational(&m.coeff)
                .ok_or_else(|| self.at(&p.monomials, format!("cannot parse coefficient '{}'", m.coeff)))?;
            monomials.push(Monomial { coeff, exponents: m.exponents.clone(), lambda_power: m.lambda });
        }
        PolynomialPotential::new(dim, monomials).map_err(|e| self.at(&p.monomials, e.to_string()))
    }

    /// Builds and validates the problem. Standing-assumption failures are
    /// passed through unchanged.
    pub fn problem<T: Real>(&self) -> Result<EllipticProblem<T>> {
        let domain = self.domain()?;
        let group = self.group()?;
        let rep = self.representation::<T>(&group)?;
        let potential = self.potential(rep.dim())?;
        let b = self.base_point.as_ref().ok_or_else(|| missing("base_point"))?;
        let u0 = self.rationals(&b.u0, "u0")?;
        if u0.len() != rep.dim() {
            return Err(self.at(&b.u0, format!("u0 has {} entries, representation dimension is {}", u0.len(), rep.dim())));
        }
        let declared = match &b.eigenvalues {
            Some(e) => self.rationals(e, "eigenvalues")?,
            None => Vec::new(),
        };
        EllipticProblem::new(domain, rep, potential, u0, &declared)
    }

    pub fn window(&self) -> Result<LambdaWindow> {
        let a = self.analysis.as_ref().ok_or_else(|| missing("analysis"))?;
        let w = self.rationals(&a.window, "window")?;
        if w.len() != 2 {
            return Err(self.at(&a.window, "window needs two entries [lo, hi]"));
        }
        LambdaWindow::new(w[0].clone(), w[1].clone()).map_err(|e| self.at(&a.window, e.to_string()))
    }

    pub fn spectrum_cutoff(&self) -> Result<Option<Rational>> {
        match self.analysis.as_ref().and_then(|a| a.cutoff.as_ref()) {
            Some(c) => self.rational(c, "cutoff").map(Some),
            None => Ok(None),
        }
    }

    pub fn galerkin_cutoff(&self) -> Result<Option<Rational>> {
        match &self.continuation.galerkin_cutoff {
            Some(c) => self.rational(c, "galerkin_cutoff").map(Some),
            None => Ok(None),
        }
    }

    pub fn quadrature_points(&self) -> Option<usize> {
        self.continuation.quadrature_points
    }

    /// Continuation options; the λ-window defaults to the analysis window.
    pub fn continuation_options(&self) -> Result<ContinuationOptions> {
        let c = &self.continuation;
        let d = ContinuationOptions::default();
        let window = match (c.lambda_window, &self.analysis) {
            (Some([lo, hi]), _) => (lo, hi),
            (None, Some(_)) => {
                let w = self.window()?;
                (crate::scalar::rational_to_f64(&w.lo), crate::scalar::rational_to_f64(&w.hi))
            }
            (None, None) => d.lambda_window,
        };
        Ok(ContinuationOptions {
            newton_tol: c.newton_tol.unwrap_or(d.newton_tol),
            max_iter: c.max_iter.unwrap_or(d.max_iter),
            delta: c.delta.unwrap_or(d.delta),
            initial_step: c.initial_step.unwrap_or(d.initial_step),
            step_min: c.step_min.unwrap_or(d.step_min),
            step_max: c.step_max.unwrap_or(d.step_max),
            norm_bound: c.norm_bound.unwrap_or(d.norm_bound),
            max_steps: c.max_steps.unwrap_or(d.max_steps),
            lambda_window: window,
            ..d
        })
    }
}

fn parse_entry<T: Real>(e: &Entry) -> Option<T> {
    match e {
        Entry::Number(x) => Some(T::lit(*x)),
        Entry::Text(s) => parse_expression(s),
    }
}

/// `[-][q*]sqrt(r)[/d]` or a plain rational.
fn parse_expression<T: Real>(s: &str) -> Option<T> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(start) = s.find("sqrt(") else {
        return parse_rational(&s).map(|q| rational_to_real(&q));
    };
    let end = start + s[start..].find(')')?;
    let radicand: T = rational_to_real(&parse_rational(&s[start + 5..end])?);
    if radicand < T::zero() {
        return None;
    }
    let prefix = &s[..start];
    let factor: T = match prefix.trim_end_matches('*') {
        "" => T::one(),
        "-" => -T::one(),
        "+" => T::one(),
        q => rational_to_real(&parse_rational(q)?),
    };
    let suffix = &s[end + 1..];
    let divisor: T = match suffix.strip_prefix('/') {
        Some(d) => rational_to_real(&parse_rational(d)?),
        None if suffix.is_empty() => T::one(),
        None => return None,
    };
    Some(factor * radicand.sqrt() / divisor)
}

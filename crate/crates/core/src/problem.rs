//! The elliptic problem `-Δu = ∇_u F(u, λ)` with Neumann conditions on a box,
//! together with the standing checks on the potential and the base point.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Assumption, Error, Result};
use crate::linalg::clustered_eigen;
use crate::polynomial::{CompiledPotential, PolynomialPotential};
use crate::representation::{OrthogonalRepresentation, SlicePackage};
use crate::scalar::{format_rational, rational_to_real, recognize_rational, Rational, Real};
use crate::spectra::BoxDomain;

/// Seed for the sample points of the invariance check.
const INVARIANCE_SEED: u64 = 0x00e9_b1f0;

/// `F(u, λ) = (λ/2)(A w, w) + F0(w, λ)` with `w = u − u0`, up to a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Exact hessian `A = ∇²_u F(u0, 1)`.
    pub hessian: Vec<Vec<Rational>>,
    pub f0: PolynomialPotential,
}

/// Splits off the quadratic part at `u0` and checks that `u0` is critical for
/// every `λ` with a hessian linear in `λ`. Both checks are exact.
pub fn decompose_potential(pot: &PolynomialPotential, u0: &[Rational]) -> Result<Decomposition> {
    let p = pot.dim();
    let shifted = pot.shift(u0)?;
    let linear = shifted.homogeneous_part(1);
    if let Some(m) = linear.monomials().next() {
        let i = m.exponents.iter().position(|&e| e == 1).unwrap();
        return Err(Error::assumption(
            Assumption::CriticalBasePoint,
            format!(
                "base point is not critical: dF/du{} at u0 contains {}·λ^{}",
                i + 1,
                format_rational(&m.coeff),
                m.lambda_power
            ),
        ));
    }
    let quadratic = shifted.homogeneous_part(2);
    let mut hessian = vec![vec![Rational::zero(); p]; p];
    for m in quadratic.monomials() {
        if m.lambda_power != 1 {
            return Err(Error::assumption(
                Assumption::CriticalBasePoint,
                format!(
                    "hessian at u0 is not linear in λ: quadratic term with λ^{} (coefficient {})",
                    m.lambda_power,
                    format_rational(&m.coeff)
                ),
            ));
        }
        let idx: Vec<usize> = m.exponents.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i).collect();
        match idx.as_slice() {
            [i] => hessian[*i][*i] = &m.coeff * Rational::from_integer(2.into()),
            [i, j] => {
                hessian[*i][*j] = m.coeff.clone();
                hessian[*j][*i] = m.coeff.clone();
            }
            _ => unreachable!("degree-2 monomial"),
        }
    }
    let f0 = shifted.sub(&quadratic);
    Ok(Decomposition { hessian, f0 })
}

/// Rank of a rational matrix by exact elimination.
pub fn exact_rank(m: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, pivot);
        let inv = a[rank][c].recip();
        for r in 0..rows {
            if r != rank && !a[r][c].is_zero() {
                let f = &a[r][c] * &inv;
                for k in c..cols {
                    let t = &f * &a[rank][k];
                    a[r][k] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// An eigenvalue known either exactly or only as a float.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralValue {
    pub exact: Option<Rational>,
    pub approx: f64,
}

impl SpectralValue {
    pub fn exact(q: Rational) -> Self {
        SpectralValue { approx: crate::scalar::rational_to_f64(&q), exact: Some(q) }
    }

    pub fn approx(x: f64) -> Self {
        SpectralValue { exact: None, approx: x }
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(q) => q.is_zero(),
            None => self.approx == 0.0,
        }
    }

    /// Equality: exact when both sides are exact, else relative `1e-9`.
    pub fn same(&self, other: &SpectralValue) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => (self.approx - other.approx).abs() <= 1e-9 * self.approx.abs().max(other.approx.abs()).max(1.0),
        }
    }

    pub fn mul(&self, other: &SpectralValue) -> SpectralValue {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => SpectralValue::exact(a * b),
            _ => SpectralValue::approx(self.approx * other.approx),
        }
    }

    pub fn div(&self, other: &SpectralValue) -> SpectralValue {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => SpectralValue::exact(a / b),
            _ => SpectralValue::approx(self.approx / other.approx),
        }
    }

    /// Sign with exact zero detection when possible.
    pub fn signum(&self) -> i32 {
        match &self.exact {
            Some(q) if q.is_zero() => 0,
            Some(q) if q > &Rational::zero() => 1,
            Some(_) => -1,
            None if self.approx.abs() <= 1e-12 => 0,
            None => self.approx.signum() as i32,
        }
    }

    /// `"p/q"` when exact, else the shortest round-trip float.
    pub fn label(&self) -> String {
        match &self.exact {
            Some(q) => format_rational(q),
            None => format!("{:?}", self.approx),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "exact": self.exact.as_ref().map(format_rational),
            "float": self.approx,
        })
    }
}

/// An eigenvalue with multiplicity and eigenvectors in ambient coordinates.
#[derive(Debug, Clone)]
pub struct EigenPair<T: Real> {
    pub value: SpectralValue,
    pub multiplicity: usize,
    /// `p × multiplicity`, orthonormal columns in `R^p`.
    pub vectors: DMatrix<T>,
}

/// Clustered symmetric eigensolve of `m`, with eigenvalues promoted to exact
/// rationals when declared or recognized.
pub fn spectral_pairs<T: Real>(m: &DMatrix<T>, embed: &DMatrix<T>, declared: &[Rational]) -> Result<Vec<EigenPair<T>>> {
    let scale = m.amax().as_f64().max(1.0);
    let clusters = clustered_eigen(m, 1e-8);
    clusters
        .into_iter()
        .map(|c| {
            let x = c.value.as_f64();
            let tol = T::tol(1e-9).as_f64() * scale;
            let exact = if x.abs() <= tol {
                Some(Rational::zero())
            } else if let Some(d) = declared.iter().find(|d| (crate::scalar::rational_to_f64(d) - x).abs() <= tol) {
                Some(d.clone())
            } else {
                recognize_rational(x, 1000, T::tol(1e-12).as_f64())
            };
            let value = match exact {
                Some(q) => SpectralValue::exact(q),
                None => SpectralValue::approx(x),
            };
            Ok(EigenPair { value, multiplicity: c.multiplicity, vectors: embed * c.vectors })
        })
        .collect()
}

/// `B = (W^H)ᵀ A W^H` and `C = (W^H⊥)ᵀ A W^H⊥` with their spectra.
#[derive(Debug, Clone)]
pub struct BlockDecomposition<T: Real> {
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub b_pairs: Vec<EigenPair<T>>,
    pub c_pairs: Vec<EigenPair<T>>,
}

pub fn block_decompose<T: Real>(a: &DMatrix<T>, slice: &SlicePackage<T>, declared: &[Rational]) -> Result<BlockDecomposition<T>> {
    let tangent_block = (a * &slice.tangent).amax();
    if tangent_block.as_f64() > T::tol(1e-9).as_f64() * a.amax().as_f64().max(1.0) {
        return Err(Error::assumption(
            Assumption::Nondegenerate,
            format!("hessian does not vanish on the orbit tangent (|A T| = {:e})", tangent_block.as_f64()),
        ));
    }
    let b = slice.fixed_slice.transpose() * a * &slice.fixed_slice;
    let c = slice.complement.transpose() * a * &slice.complement;
    let b_pairs = spectral_pairs(&b, &slice.fixed_slice, declared)?;
    let c_pairs = spectral_pairs(&c, &slice.complement, declared)?;
    Ok(BlockDecomposition { b, c, b_pairs, c_pairs })
}

#[derive(Debug, Clone)]
pub struct EllipticProblem<T: Real> {
    pub domain: BoxDomain,
    pub rep: OrthogonalRepresentation<T>,
    pub potential: PolynomialPotential,
    pub base_point: Vec<Rational>,
    pub u0: DVector<T>,
    pub slice: SlicePackage<T>,
    pub decomposition: Decomposition,
    /// `A` as floats.
    pub a: DMatrix<T>,
    pub a_pairs: Vec<EigenPair<T>>,
    pub blocks: BlockDecomposition<T>,
    compiled: CompiledPotential<T>,
}

impl<T: Real> EllipticProblem<T> {
    /// Validates the problem: invariance of `F`, criticality of `u0` with a
    /// λ-linear hessian, and `dim ker A = dim G(u0)`.
    pub fn new(
        domain: BoxDomain,
        rep: OrthogonalRepresentation<T>,
        potential: PolynomialPotential,
        base_point: Vec<Rational>,
        declared_eigenvalues: &[Rational],
    ) -> Result<Self> {
        let p = rep.dim();
        if potential.dim() != p || base_point.len() != p {
            return Err(Error::Contract(format!(
                "dimension mismatch: representation {p}, potential {}, base point {}",
                potential.dim(),
                base_point.len()
            )));
        }
        let compiled = potential.compile::<T>();
        check_invariance(&rep, &compiled)?;
        let decomposition = decompose_potential(&potential, &base_point)?;
        let u0 = DVector::from_iterator(p, base_point.iter().map(rational_to_real::<T>));
        let slice = rep.build_slice(&u0)?;
        let a = DMatrix::from_fn(p, p, |i, j| rational_to_real::<T>(&decomposition.hessian[i][j]));
        let kernel = p - exact_rank(&decomposition.hessian);
        if kernel != slice.p0() {
            return Err(Error::assumption(
                Assumption::Nondegenerate,
                format!("dim ker A = {kernel} but the orbit of u0 has dimension {}", slice.p0()),
            ));
        }
        let blocks = block_decompose(&a, &slice, declared_eigenvalues)?;
        let a_pairs = spectral_pairs(&a, &DMatrix::identity(p, p), declared_eigenvalues)?;
        Ok(EllipticProblem {
            domain,
            rep,
            potential,
            base_point,
            u0,
            slice,
            decomposition,
            a,
            a_pairs,
            blocks,
            compiled,
        })
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn compiled(&self) -> &CompiledPotential<T> {
        &self.compiled
    }

    /// Nonzero eigenvalues of `A`.
    pub fn nonzero_alphas(&self) -> impl Iterator<Item = &EigenPair<T>> {
        self.a_pairs.iter().filter(|e| !e.value.is_zero())
    }

    pub fn max_abs_alpha(&self) -> f64 {
        self.a_pairs.iter().map(|e| e.value.approx.abs()).fold(0.0, f64::max)
    }
}

/// `F(gu, λ) = F(u, λ)` at seeded sample points for each generator.
fn check_invariance<T: Real>(rep: &OrthogonalRepresentation<T>, pot: &CompiledPotential<T>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(INVARIANCE_SEED);
    let p = rep.dim();
    let actions = rep.generator_actions();
    for _ in 0..8 {
        let u = DVector::<T>::from_fn(p, |_, _| T::lit(rng.random_range(-1.5..1.5)));
        for lambda in [-1.0, 0.5, 2.0] {
            let l = T::lit(lambda);
            let f = pot.value(u.as_slice(), l);
            for (name, g) in &actions {
                let gu = g * &u;
                let fg = pot.value(gu.as_slice(), l);
                if (fg - f).abs() > T::tol(1e-10) * (T::one() + f.abs()) {
                    return Err(Error::assumption(
                        Assumption::Invariance,
                        format!(
                            "potential is not invariant under generator {name}: F(gu) - F(u) = {:e} at λ = {lambda}",
                            (fg - f).as_f64()
                        ),
                    ));
                }
            }
        }
    }
    Ok(())
}

//! Polynomial potentials `F(u, λ)` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, rational_to_real, Rational, Real};

/// `coeff · λ^lambda_power · Π u_i^exponents[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rational,
    pub exponents: Vec<u32>,
    pub lambda_power: u32,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

type Key = (Vec<u32>, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialPotential {
    dim: usize,
    terms: BTreeMap<Key, Rational>,
}

impl PolynomialPotential {
    pub fn new(dim: usize, monomials: impl IntoIterator<Item = Monomial>) -> Result<Self> {
        let mut p = PolynomialPotential { dim, terms: BTreeMap::new() };
        for m in monomials {
            if m.exponents.len() != dim {
                return Err(Error::Contract(format!(
                    "monomial has {} exponents, potential has dimension {dim}",
                    m.exponents.len()
                )));
            }
            p.add_term(m.exponents, m.lambda_power, m.coeff);
        }
        Ok(p)
    }

    pub fn zero(dim: usize) -> Self {
        PolynomialPotential { dim, terms: BTreeMap::new() }
    }

    fn add_term(&mut self, exponents: Vec<u32>, lambda_power: u32, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let key = (exponents, lambda_power);
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms.iter().map(|((e, l), c)| Monomial { coeff: c.clone(), exponents: e.clone(), lambda_power: *l })
    }

    /// Highest total degree in `u`.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn lambda_degree(&self) -> u32 {
        self.terms.keys().map(|(_, l)| *l).max().unwrap_or(0)
    }

    /// `∂F/∂u_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for ((e, l), c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, *l, c * Rational::from_integer(BigInt::from(e[i])));
        }
        out
    }

    /// `∂F/∂λ`.
    pub fn lambda_derivative(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for ((e, l), c) in &self.terms {
            if *l > 0 {
                out.add_term(e.clone(), l - 1, c * Rational::from_integer(BigInt::from(*l)));
            }
        }
        out
    }

    /// `w ↦ F(u0 + w, λ)`.
    pub fn shift(&self, u0: &[Rational]) -> Result<Self> {
        if u0.len() != self.dim {
            return Err(Error::Contract(format!("shift vector has length {}, expected {}", u0.len(), self.dim)));
        }
        let mut out = Self::zero(self.dim);
        for ((e, l), c) in &self.terms {
            // Expand Π (u0_i + w_i)^{e_i} one axis at a time.
            let mut partial: Vec<(Vec<u32>, Rational)> = vec![(vec![0; self.dim], c.clone())];
            for (i, &ei) in e.iter().enumerate() {
                if ei == 0 {
                    continue;
                }
                let mut next = Vec::new();
                for (exps, coeff) in &partial {
                    for j in 0..=ei {
                        let b = Rational::from_integer(binomial(BigInt::from(ei), BigInt::from(j)));
                        let shift_pow = pow(&u0[i], ei - j);
                        if shift_pow.is_zero() {
                            continue;
                        }
                        let mut e2 = exps.clone();
                        e2[i] = j;
                        next.push((e2, coeff * b * shift_pow));
                    }
                }
                partial = next;
            }
            for (exps, coeff) in partial {
                out.add_term(exps, *l, coeff);
            }
        }
        Ok(out)
    }

    /// Terms whose total `u`-degree equals `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        let mut out = Self::zero(self.dim);
        for ((e, l), c) in &self.terms {
            if e.iter().sum::<u32>() == d {
                out.add_term(e.clone(), *l, c.clone());
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((e, l), c) in &other.terms {
            out.add_term(e.clone(), *l, -c.clone());
        }
        out
    }

    pub fn eval_exact(&self, u: &[Rational], lambda: &Rational) -> Rational {
        let mut sum = Rational::zero();
        for ((e, l), c) in &self.terms {
            let mut t = c * pow(lambda, *l);
            for (x, &k) in u.iter().zip(e) {
                t *= pow(x, k);
            }
            sum += t;
        }
        sum
    }

    pub fn compile<T: Real>(&self) -> CompiledPotential<T> {
        let degree = self.degree();
        let lambda_degree = self.lambda_degree();
        let grads: Vec<Self> = (0..self.dim).map(|i| self.derivative(i)).collect();
        let mut hess = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for i in 0..self.dim {
            for j in i..self.dim {
                hess.push(TermList::new(&grads[i].derivative(j)));
            }
        }
        let dl = self.lambda_derivative();
        CompiledPotential {
            dim: self.dim,
            degree,
            lambda_degree,
            value: TermList::new(self),
            gradient: grads.iter().map(TermList::new).collect(),
            hessian: hess,
            lambda_gradient: (0..self.dim).map(|i| TermList::new(&dl.derivative(i))).collect(),
        }
    }
}

impl fmt::Display for PolynomialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for ((e, l), c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({})", format_rational(c))?;
            if *l > 0 {
                write!(f, "*lambda^{l}")?;
            }
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    write!(f, "*u{}^{k}", i + 1)?;
                }
            }
        }
        Ok(())
    }
}

fn pow(x: &Rational, k: u32) -> Rational {
    let mut r = Rational::one();
    for _ in 0..k {
        r *= x;
    }
    r
}

/// Floating-point evaluation plan for a polynomial.
#[derive(Debug, Clone)]
struct TermList<T> {
    terms: Vec<(T, Vec<u32>, u32)>,
}

impl<T: Real> TermList<T> {
    fn new(p: &PolynomialPotential) -> Self {
        TermList { terms: p.terms.iter().map(|((e, l), c)| (rational_to_real(c), e.clone(), *l)).collect() }
    }

    fn eval(&self, pows: &Powers<T>) -> T {
        let mut sum = T::zero();
        for (c, e, l) in &self.terms {
            let mut t = *c * pows.lambda[*l as usize];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= pows.u[i][k as usize];
                }
            }
            sum += t;
        }
        sum
    }
}

struct Powers<T> {
    u: Vec<Vec<T>>,
    lambda: Vec<T>,
}

impl<T: Real> Powers<T> {
    fn new(u: &[T], lambda: T, degree: u32, lambda_degree: u32) -> Self {
        let table = |x: T, n: u32| {
            let mut v = Vec::with_capacity(n as usize + 1);
            let mut acc = T::one();
            v.push(acc);
            for _ in 0..n {
                acc *= x;
                v.push(acc);
            }
            v
        };
        Powers { u: u.iter().map(|&x| table(x, degree)).collect(), lambda: table(lambda, lambda_degree) }
    }
}

/// A potential prepared for repeated floating-point evaluation of its value,
/// gradient, hessian and `λ`-derivative of the gradient.
#[derive(Debug, Clone)]
pub struct CompiledPotential<T> {
    dim: usize,
    degree: u32,
    lambda_degree: u32,
    value: TermList<T>,
    gradient: Vec<TermList<T>>,
    /// Upper triangle, row-major.
    hessian: Vec<TermList<T>>,
    lambda_gradient: Vec<TermList<T>>,
}

impl<T: Real> CompiledPotential<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    fn powers(&self, u: &[T], lambda: T) -> Powers<T> {
        Powers::new(u, lambda, self.degree, self.lambda_degree)
    }

    pub fn value(&self, u: &[T], lambda: T) -> T {
        self.value.eval(&self.powers(u, lambda))
    }

    pub fn gradient(&self, u: &[T], lambda: T) -> DVector<T> {
        let pw = self.powers(u, lambda);
        DVector::from_iterator(self.dim, self.gradient.iter().map(|t| t.eval(&pw)))
    }

    pub fn hessian(&self, u: &[T], lambda: T) -> DMatrix<T> {
        let pw = self.powers(u, lambda);
        let mut h = DMatrix::zeros(self.dim, self.dim);
        let mut idx = 0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.hessian[idx].eval(&pw);
                h[(i, j)] = v;
                h[(j, i)] = v;
                idx += 1;
            }
        }
        h
    }

    /// Gradient, hessian (upper triangle, row-major) and `∂_λ∇F` in one pass.
    pub fn derivatives_into(&self, u: &[T], lambda: T, grad: &mut [T], hess: &mut [T], dlambda: &mut [T]) {
        let pw = self.powers(u, lambda);
        for (g, t) in grad.iter_mut().zip(&self.gradient) {
            *g = t.eval(&pw);
        }
        for (h, t) in hess.iter_mut().zip(&self.hessian) {
            *h = t.eval(&pw);
        }
        for (d, t) in dlambda.iter_mut().zip(&self.lambda_gradient) {
            *d = t.eval(&pw);
        }
    }
}

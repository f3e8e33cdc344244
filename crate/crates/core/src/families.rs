//! Built-in problem families used by the fixtures, the verification battery
//! and the tests.

use std::sync::Arc;

use crate::error::Result;
use crate::group::FiniteGroup;
use crate::polynomial::{Monomial, PolynomialPotential};
use crate::problem::EllipticProblem;
use crate::representation::{CircleRepresentation, FiniteRepresentation, OrthogonalRepresentation};
use crate::scalar::{Rational, Real};
use crate::spectra::BoxDomain;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn mono(n: i64, d: i64, exponents: &[u32], lambda_power: u32) -> Monomial {
    Monomial { coeff: q(n, d), exponents: exponents.to_vec(), lambda_power }
}

fn trivial_group_rep<T: Real>(p: usize) -> Result<OrthogonalRepresentation<T>> {
    Ok(OrthogonalRepresentation::Finite(FiniteRepresentation::trivial(Arc::new(FiniteGroup::cyclic(1)?), p)))
}

/// `F = λu²/2 − u⁴/4` at `u0 = 0`, so `−Δu = λu − u³` and `A = [1]`.
pub fn scalar_cubic<T: Real>(domain: BoxDomain) -> Result<EllipticProblem<T>> {
    let pot = PolynomialPotential::new(1, [mono(1, 2, &[2], 1), mono(-1, 4, &[4], 0)])?;
    EllipticProblem::new(domain, trivial_group_rep(1)?, pot, vec![q(0, 1)], &[])
}

/// `F = λ(|u|²/2 − |u|⁴/4)` on `R²` with the weight-1 circle action and
/// `u0 = (1, 0)` on the critical circle: `A = diag(−2, 0)`, `B = [−2]`.
pub fn circle_orbit<T: Real>(domain: BoxDomain) -> Result<EllipticProblem<T>> {
    let pot = PolynomialPotential::new(
        2,
        [
            mono(1, 2, &[2, 0], 1),
            mono(1, 2, &[0, 2], 1),
            mono(-1, 4, &[4, 0], 1),
            mono(-1, 2, &[2, 2], 1),
            mono(-1, 4, &[0, 4], 1),
        ],
    )?;
    let rep = OrthogonalRepresentation::Circle(CircleRepresentation::new(vec![1], 0)?);
    EllipticProblem::new(domain, rep, pot, vec![q(1, 1), q(0, 1)], &[])
}

/// Two components with `A = diag(1, 2)` coupled by a quartic whose reduced
/// two-amplitude equations on the `cos x` mode,
///
/// `a(1 − λ) = (3/4) ∂_a Q`,  `b(1 − 2λ) = (3/4) ∂_b Q`,
/// `Q = (3a⁴ − 3b⁴)/4 + a²b² − a³b + ab³`,
///
/// carry a bounded branch leaving `λ = 1/2` along `b` and returning to the
/// trivial solution at `λ = 1` along `a`.
pub fn mode_loop<T: Real>(domain: BoxDomain) -> Result<EllipticProblem<T>> {
    let pot = PolynomialPotential::new(
        2,
        [
            mono(1, 2, &[2, 0], 1),
            mono(1, 1, &[0, 2], 1),
            mono(3, 4, &[4, 0], 0),
            mono(-3, 4, &[0, 4], 0),
            mono(1, 1, &[2, 2], 0),
            mono(-1, 1, &[3, 1], 0),
            mono(1, 1, &[1, 3], 0),
        ],
    )?;
    EllipticProblem::new(domain, trivial_group_rep(2)?, pot, vec![q(0, 1), q(0, 1)], &[])
}

/// `F = λ|u|²/2 − (u1⁴ + u2⁴)/4 − u1²u2²/4` at `u0 = 0` with `Z2` swapping
/// the two components. `V(1)` is two-dimensional and its fixed part is the
/// diagonal.
pub fn z2_swap<T: Real>(domain: BoxDomain) -> Result<EllipticProblem<T>> {
    let pot = PolynomialPotential::new(
        2,
        [
            mono(1, 2, &[2, 0], 1),
            mono(1, 2, &[0, 2], 1),
            mono(-1, 4, &[4, 0], 0),
            mono(-1, 4, &[0, 4], 0),
            mono(-1, 4, &[2, 2], 0),
        ],
    )?;
    let swap = nalgebra::DMatrix::from_row_slice(2, 2, &[T::zero(), T::one(), T::one(), T::zero()]);
    let rep = FiniteRepresentation::from_generators(Arc::new(FiniteGroup::cyclic(2)?), 2, &[(1, swap)])?;
    EllipticProblem::new(domain, OrthogonalRepresentation::Finite(rep), pot, vec![q(0, 1), q(0, 1)], &[])
}

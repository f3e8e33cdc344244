//! Spectral Galerkin discretization in the Neumann cosine basis.
//!
//! A state is `u(x) = Σ_m φ_m(x) c_m` with `φ_m = Π cos(k_i x_i / s_i)` and
//! `c_m ∈ R^p`; coefficients are stored mode-major (`c[m·p + i]`). The trivial
//! solution `ũ0 ≡ u0` lives entirely in the constant mode.
//!
//! Integrals use the per-axis midpoint rule, which integrates every cosine of
//! frequency below `2Q` exactly on `Q` points.

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::problem::EllipticProblem;
use crate::representation::OrthogonalRepresentation;
use crate::scalar::{rational_to_f64, Rational, Real};
use crate::spectra::{cosine_mode, neumann_spectrum};

#[derive(Debug, Clone)]
pub struct GalerkinSystem<T: Real> {
    pub problem: EllipticProblem<T>,
    p: usize,
    modes: Vec<Vec<u32>>,
    betas: Vec<Rational>,
    beta: Vec<T>,
    mass: Vec<T>,
    /// Basis values at the quadrature nodes: `points × modes`.
    phi: DMatrix<T>,
    weights: Vec<T>,
    c0: DVector<T>,
    /// Infinitesimal circle generator on `R^p`, when the group is the circle.
    generator: Option<DMatrix<T>>,
}

/// Midpoint points per axis needed for exact integrals of products whose
/// total cosine frequency reaches `degree · kmax`.
pub fn required_quadrature_points(degree: u32, kmax: u32) -> usize {
    (degree as usize * kmax as usize) / 2 + 1
}

/// Default discretization cutoff: `4 · max|λ0| · max|α|`, and at least the
/// first nonzero Laplacian eigenvalue.
pub fn default_cutoff<T: Real>(problem: &EllipticProblem<T>, max_abs_lambda0: f64) -> Result<Rational> {
    let raw = 4.0 * max_abs_lambda0 * problem.max_abs_alpha();
    let mut cutoff = crate::scalar::f64_to_rational(raw.ceil().max(1.0))
        .ok_or_else(|| Error::Contract("non-finite discretization cutoff".into()))?;
    let spectrum = neumann_spectrum(&problem.domain, &cutoff)?;
    if spectrum.len() < 2 {
        // Extend until the first nonzero eigenvalue is included.
        let smallest = problem
            .domain
            .squared_lengths()
            .iter()
            .map(|s| s.recip())
            .min()
            .expect("nonempty domain");
        cutoff = cutoff.max(smallest);
    }
    Ok(cutoff)
}

impl<T: Real> GalerkinSystem<T> {
    pub fn new(problem: EllipticProblem<T>, cutoff: &Rational, quadrature_points: Option<usize>) -> Result<Self> {
        let p = problem.dim();
        let spectrum = neumann_spectrum(&problem.domain, cutoff)?;
        let mut modes = Vec::new();
        let mut betas = Vec::new();
        for e in &spectrum {
            for k in &e.indices {
                modes.push(k.clone());
                betas.push(e.value.clone());
            }
        }
        let d = problem.domain.dim();
        let degree = problem.potential.degree().max(2);
        let kmax: Vec<u32> = (0..d).map(|i| modes.iter().map(|k| k[i]).max().unwrap_or(0)).collect();
        let needed = kmax.iter().map(|&k| required_quadrature_points(degree, k)).max().unwrap_or(1);
        let q = match quadrature_points {
            Some(q) if q < needed => {
                return Err(Error::Quadrature(format!(
                    "{q} points per axis cannot integrate degree {degree} products of modes up to {kmax:?}; need {needed}"
                )))
            }
            Some(q) => q,
            None => needed + 1,
        };
        let total = q.checked_pow(d as u32).filter(|&n| n <= 4_000_000).ok_or_else(|| {
            Error::SizeLimit(format!("{q}^{d} quadrature nodes"))
        })?;

        let axis_nodes: Vec<Vec<T>> = (0..d)
            .map(|i| {
                let h = problem.domain.side_length(i) / q as f64;
                (0..q).map(|j| T::lit((j as f64 + 0.5) * h)).collect()
            })
            .collect();
        let cell: f64 = (0..d).map(|i| problem.domain.side_length(i) / q as f64).product();
        let mut nodes = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            nodes.push((0..d).map(|i| axis_nodes[i][idx[i]]).collect::<Vec<T>>());
            for i in (0..d).rev() {
                idx[i] += 1;
                if idx[i] < q {
                    break;
                }
                idx[i] = 0;
            }
        }
        let phi = DMatrix::from_fn(total, modes.len(), |r, m| cosine_mode(&problem.domain, &modes[m], &nodes[r]));
        let weights = vec![T::lit(cell); total];
        let beta: Vec<T> = betas.iter().map(|b| T::lit(rational_to_f64(b))).collect();
        let mass: Vec<T> = modes.iter().map(|k| T::lit(problem.domain.mass(k))).collect();
        let mut c0 = DVector::zeros(p * modes.len());
        c0.rows_mut(0, p).copy_from(&problem.u0);
        let generator = match &problem.rep {
            OrthogonalRepresentation::Circle(c) => Some(c.generator::<T>()),
            OrthogonalRepresentation::Finite(_) => None,
        };
        Ok(GalerkinSystem { problem, p, modes, betas, beta, mass, phi, weights, c0, generator })
    }

    /// Number of unknowns `M = p · modes`.
    pub fn dim(&self) -> usize {
        self.p * self.modes.len()
    }

    pub fn components(&self) -> usize {
        self.p
    }

    pub fn modes(&self) -> &[Vec<u32>] {
        &self.modes
    }

    pub fn mode_betas(&self) -> &[Rational] {
        &self.betas
    }

    pub fn mode_index(&self, k: &[u32]) -> Option<usize> {
        self.modes.iter().position(|m| m == k)
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.weights.len()
    }

    /// Coefficients of the trivial solution `ũ0`.
    pub fn trivial(&self) -> &DVector<T> {
        &self.c0
    }

    pub fn has_gauge(&self) -> bool {
        self.generator.is_some() && self.problem.slice.p0() == 1
    }

    /// `u(x)` at a point of the box.
    pub fn evaluate(&self, c: &DVector<T>, x: &[T]) -> DVector<T> {
        let mut u = DVector::zeros(self.p);
        for (m, k) in self.modes.iter().enumerate() {
            let v = cosine_mode(&self.problem.domain, k, x);
            u += c.rows(m * self.p, self.p) * v;
        }
        u
    }

    fn as_matrix(&self, c: &DVector<T>) -> DMatrix<T> {
        DMatrix::from_column_slice(self.p, self.modes.len(), c.as_slice())
    }

    fn flatten(m: DMatrix<T>) -> DVector<T> {
        let n = m.len();
        DVector::from_vec(m.reshape_generic(nalgebra::Dyn(n), nalgebra::Const::<1>).as_slice().to_vec())
    }

    /// `g · c`, the action of a `p × p` matrix on every mode block.
    pub fn act(&self, g: &DMatrix<T>, c: &DVector<T>) -> DVector<T> {
        Self::flatten(g * self.as_matrix(c))
    }

    /// `ξ(c)`, the infinitesimal orbit direction (circle only).
    pub fn orbit_direction(&self, c: &DVector<T>) -> Option<DVector<T>> {
        self.generator.as_ref().map(|g| self.act(g, c))
    }

    pub fn generator(&self) -> Option<&DMatrix<T>> {
        self.generator.as_ref()
    }

    /// State at every quadrature node: `p × nodes`.
    fn states(&self, c: &DVector<T>) -> DMatrix<T> {
        self.as_matrix(c) * self.phi.transpose()
    }

    fn pointwise(&self, c: &DVector<T>, lambda: T) -> Vec<(Vec<T>, Vec<T>, Vec<T>)> {
        let u = self.states(c);
        let pot = self.problem.compiled();
        let p = self.p;
        (0..u.ncols())
            .into_par_iter()
            .map(|j| {
                let col: Vec<T> = u.column(j).iter().copied().collect();
                let mut g = vec![T::zero(); p];
                let mut h = vec![T::zero(); p * (p + 1) / 2];
                let mut dl = vec![T::zero(); p];
                pot.derivatives_into(&col, lambda, &mut g, &mut h, &mut dl);
                (g, h, dl)
            })
            .collect()
    }

    fn stiffness_times(&self, c: &DVector<T>) -> DVector<T> {
        DVector::from_fn(self.dim(), |r, _| {
            let m = r / self.p;
            self.beta[m] * self.mass[m] * c[r]
        })
    }

    /// `∫ f_i(u(x)) φ_m(x) dx` from pointwise values `f` (`p × nodes`).
    fn project(&self, f: DMatrix<T>) -> DVector<T> {
        let mut weighted = f;
        for (j, w) in self.weights.iter().enumerate() {
            weighted.column_mut(j).scale_mut(*w);
        }
        Self::flatten(weighted * &self.phi)
    }

    /// `r_a = ∫ ∇u·∇φ_a − ∫ ∇_u F(u, λ)·φ_a`.
    pub fn residual(&self, c: &DVector<T>, lambda: T) -> DVector<T> {
        self.evaluate_all(c, lambda, false).residual
    }

    /// Symmetric Jacobian `∂r/∂c`.
    pub fn jacobian(&self, c: &DVector<T>, lambda: T) -> DMatrix<T> {
        self.evaluate_all(c, lambda, true).jacobian.expect("requested")
    }

    pub fn lambda_derivative(&self, c: &DVector<T>, lambda: T) -> DVector<T> {
        self.evaluate_all(c, lambda, false).d_lambda
    }

    /// Residual, optional Jacobian, `∂r/∂λ` and the magnitude of the terms
    /// that make up the residual, in one quadrature sweep.
    pub fn evaluate_all(&self, c: &DVector<T>, lambda: T, with_jacobian: bool) -> Assembly<T> {
        let p = self.p;
        let n = self.modes.len();
        let nodes = self.weights.len();
        let pts = self.pointwise(c, lambda);
        let grad = DMatrix::from_fn(p, nodes, |i, j| pts[j].0[i]);
        let dl = DMatrix::from_fn(p, nodes, |i, j| pts[j].2[i]);
        let stiff = self.stiffness_times(c);
        let force = self.project(grad);
        let scale = stiff.amax().max(force.amax()).as_f64();
        let residual = &stiff - &force;
        let d_lambda = -self.project(dl);
        let jacobian = with_jacobian.then(|| {
            let mut jac = DMatrix::zeros(p * n, p * n);
            let mut idx = 0;
            for i in 0..p {
                for j in i..p {
                    let mut weighted = self.phi.clone();
                    for r in 0..nodes {
                        weighted.row_mut(r).scale_mut(self.weights[r] * pts[r].1[idx]);
                    }
                    let block = self.phi.transpose() * weighted;
                    for a in 0..n {
                        for b in 0..n {
                            jac[(a * p + i, b * p + j)] -= block[(a, b)];
                            if i != j {
                                jac[(a * p + j, b * p + i)] -= block[(a, b)];
                            }
                        }
                    }
                    idx += 1;
                }
            }
            for m in 0..n {
                for i in 0..p {
                    jac[(m * p + i, m * p + i)] += self.beta[m] * self.mass[m];
                }
            }
            jac
        });
        Assembly { residual, jacobian, d_lambda, scale }
    }

    /// Diagonal of the `L²` Gram matrix.
    pub fn mass_diagonal(&self) -> DVector<T> {
        DVector::from_fn(self.dim(), |r, _| self.mass[r / self.p])
    }

    /// Diagonal of the `H¹` Gram matrix `(1 + β) M`.
    pub fn h1_diagonal(&self) -> DVector<T> {
        DVector::from_fn(self.dim(), |r, _| (T::one() + self.beta[r / self.p]) * self.mass[r / self.p])
    }

    /// Discrete `‖u − ũ0‖_{H¹}`.
    pub fn h1_norm(&self, c: &DVector<T>) -> T {
        let d = c - &self.c0;
        self.h1_diagonal().iter().zip(d.iter()).fold(T::zero(), |acc, (g, x)| acc + *g * *x * *x).sqrt()
    }

    /// Eigenvalues of `J` relative to a diagonal Gram matrix, ascending.
    pub fn generalized_eigenvalues(j: &DMatrix<T>, gram: &DVector<T>) -> Vec<T> {
        let s = gram.map(|g| T::one() / g.sqrt());
        let scaled = DMatrix::from_fn(j.nrows(), j.ncols(), |a, b| s[a] * j[(a, b)] * s[b]);
        sym_eigen(&scaled).0
    }

    /// `L²`-weak-form eigenvalues `β − λα` at `c`.
    pub fn l2_eigenvalues(&self, c: &DVector<T>, lambda: T) -> Vec<T> {
        Self::generalized_eigenvalues(&self.jacobian(c, lambda), &self.mass_diagonal())
    }

    /// `H¹`-normalized eigenvalues `(β − λα)/(1 + β)` at `c`.
    pub fn h1_eigenvalues(&self, c: &DVector<T>, lambda: T) -> Vec<T> {
        Self::generalized_eigenvalues(&self.jacobian(c, lambda), &self.h1_diagonal())
    }

    /// Negative eigenvalues of the `H¹`-normalized Jacobian.
    pub fn inertia_of(&self, jac: &DMatrix<T>) -> usize {
        let tol = T::tol(1e-10);
        Self::generalized_eigenvalues(jac, &self.h1_diagonal()).into_iter().filter(|&v| v < -tol).count()
    }

    /// Coefficient vector of `φ_k ⊗ v`.
    pub fn mode_vector(&self, k: &[u32], v: &DVector<T>) -> Result<DVector<T>> {
        let m = self
            .mode_index(k)
            .ok_or_else(|| Error::Contract(format!("mode {k:?} is not retained by the discretization")))?;
        let mut c = DVector::zeros(self.dim());
        c.rows_mut(m * self.p, self.p).copy_from(v);
        Ok(c)
    }

    pub fn beta_f64(&self, m: usize) -> f64 {
        self.betas[m].to_f64().unwrap_or(f64::NAN)
    }
}

/// Output of one quadrature sweep.
#[derive(Debug, Clone)]
pub struct Assembly<T: Real> {
    pub residual: DVector<T>,
    pub jacobian: Option<DMatrix<T>>,
    pub d_lambda: DVector<T>,
    /// Largest entry among the stiffness and force terms.
    pub scale: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{circle_orbit, mode_loop, scalar_cubic};
    use crate::spectra::BoxDomain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn cubic(domain: BoxDomain, cutoff: i64) -> GalerkinSystem<f64> {
        GalerkinSystem::new(scalar_cubic(domain).unwrap(), &q(cutoff, 1), None).unwrap()
    }

    fn random_state(sys: &GalerkinSystem<f64>, rng: &mut ChaCha8Rng, scale: f64) -> DVector<f64> {
        sys.trivial() + DVector::from_fn(sys.dim(), |_, _| scale * rng.random_range(-1.0..1.0))
    }

    #[test]
    fn trivial_solution_has_zero_residual() {
        let systems = [
            cubic(BoxDomain::interval(), 9),
            GalerkinSystem::new(circle_orbit(BoxDomain::interval()).unwrap(), &q(9, 1), None).unwrap(),
            GalerkinSystem::new(mode_loop(BoxDomain::interval()).unwrap(), &q(4, 1), None).unwrap(),
        ];
        for sys in &systems {
            for l in [-1.0, 0.0, 0.7, 3.0] {
                assert!(sys.residual(sys.trivial(), l).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn cubic_residual_on_first_mode() {
        let sys = cubic(BoxDomain::interval(), 9);
        let pi = std::f64::consts::PI;
        for (a, l) in [(0.3, 1.1), (-0.8, 0.2), (1.5, 4.0)] {
            let c = sys.mode_vector(&[1], &DVector::from_element(1, a)).unwrap();
            let r = sys.residual(&c, l);
            let expect = pi / 2.0 * (a - l * a + 0.75 * a * a * a);
            assert!((r[1] - expect).abs() < 1e-12, "{} vs {expect}", r[1]);
        }
    }

    #[test]
    fn linear_potential_gives_diagonal_residual() {
        use crate::polynomial::{Monomial, PolynomialPotential};
        use crate::representation::{FiniteRepresentation, OrthogonalRepresentation};
        use std::sync::Arc;
        let pot = PolynomialPotential::new(1, [Monomial { coeff: q(1, 2), exponents: vec![2], lambda_power: 1 }]).unwrap();
        let rep = OrthogonalRepresentation::Finite(FiniteRepresentation::trivial(
            Arc::new(crate::group::FiniteGroup::cyclic(1).unwrap()),
            1,
        ));
        let prob = EllipticProblem::new(BoxDomain::interval(), rep, pot, vec![q(0, 1)], &[]).unwrap();
        let sys = GalerkinSystem::new(prob, &q(16, 1), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_state(&sys, &mut rng, 1.0);
        let l = 2.5;
        let r = sys.residual(&c, l);
        for (m, k) in sys.modes().iter().enumerate() {
            let beta = (k[0] * k[0]) as f64;
            let expect = (beta - l) * sys.mass_diagonal()[m] * c[m];
            assert!((r[m] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let systems = [
            cubic(BoxDomain::interval(), 9),
            cubic(BoxDomain::square(), 5),
            GalerkinSystem::new(circle_orbit(BoxDomain::interval()).unwrap(), &q(9, 1), None).unwrap(),
            GalerkinSystem::new(mode_loop(BoxDomain::interval()).unwrap(), &q(4, 1), None).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for sys in &systems {
            for _ in 0..3 {
                let c = random_state(sys, &mut rng, 0.5);
                let l = rng.random_range(-2.0..2.0);
                let jac = sys.jacobian(&c, l);
                assert!((&jac - jac.transpose()).amax() < 1e-9);
                let h = 1e-6 * (1.0 + c.amax());
                let mut fd = DMatrix::zeros(sys.dim(), sys.dim());
                for k in 0..sys.dim() {
                    let mut cp = c.clone();
                    let mut cm = c.clone();
                    cp[k] += h;
                    cm[k] -= h;
                    fd.set_column(k, &((sys.residual(&cp, l) - sys.residual(&cm, l)) / (2.0 * h)));
                }
                assert!((&jac - &fd).amax() <= 1e-5 * fd.amax().max(1.0));
                let dl = sys.lambda_derivative(&c, l);
                let fdl = (sys.residual(&c, l + h) - sys.residual(&c, l - h)) / (2.0 * h);
                assert!((dl - &fdl).amax() <= 1e-5 * fdl.amax().max(1.0));
            }
        }
    }

    #[test]
    fn trivial_spectrum_matches_formula() {
        let sys = GalerkinSystem::new(circle_orbit(BoxDomain::interval()).unwrap(), &q(16, 1), None).unwrap();
        for l in [-1.0, 0.0, 0.5, 2.0] {
            let got = sys.h1_eigenvalues(sys.trivial(), l);
            let mut expect: Vec<f64> = Vec::new();
            for k in 0..=4u32 {
                let b = (k * k) as f64;
                for alpha in [-2.0, 0.0] {
                    expect.push((b - l * alpha) / (1.0 + b));
                }
            }
            expect.sort_by(f64::total_cmp);
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() < 1e-9, "{g} vs {e}");
            }
            let l2 = sys.l2_eigenvalues(sys.trivial(), l);
            assert!(l2.iter().any(|v| (v - 1.0 - 2.0 * l).abs() < 1e-9));
        }
    }

    #[test]
    fn zero_lambda_jacobian_is_stiffness() {
        let sys = cubic(BoxDomain::interval(), 9);
        let jac = sys.jacobian(sys.trivial(), 0.0);
        let stiff = DMatrix::from_diagonal(&DVector::from_fn(sys.dim(), |m, _| sys.beta_f64(m) * sys.mass_diagonal()[m]));
        assert!((jac - stiff).amax() < 1e-12);
    }

    #[test]
    fn circle_equivariance() {
        let sys = GalerkinSystem::new(circle_orbit(BoxDomain::interval()).unwrap(), &q(9, 1), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (_, g) in sys.problem.rep.generator_actions() {
            let c = random_state(&sys, &mut rng, 0.5);
            let lhs = sys.residual(&sys.act(&g, &c), 0.7);
            let rhs = sys.act(&g, &sys.residual(&c, 0.7));
            assert!((lhs - rhs).amax() < 1e-10);
        }
    }

    #[test]
    fn quadrature_is_exact_and_checked() {
        let prob = scalar_cubic::<f64>(BoxDomain::interval()).unwrap();
        // Modes up to k = 3 and a quartic: needed = 4·3/2 + 1 = 7 points.
        assert!(matches!(GalerkinSystem::new(prob.clone(), &q(9, 1), Some(6)), Err(Error::Quadrature(_))));
        let coarse = GalerkinSystem::new(prob.clone(), &q(9, 1), Some(7)).unwrap();
        let fine = GalerkinSystem::new(prob, &q(9, 1), Some(40)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_state(&coarse, &mut rng, 1.0);
        assert!((coarse.residual(&c, 1.3) - fine.residual(&c, 1.3)).amax() < 1e-12);
        assert!((coarse.jacobian(&c, 1.3) - fine.jacobian(&c, 1.3)).amax() < 1e-12);
    }

    #[test]
    fn single_precision_assembly() {
        let sys = GalerkinSystem::<f32>::new(scalar_cubic(BoxDomain::interval()).unwrap(), &q(4, 1), None).unwrap();
        let c = sys.mode_vector(&[1], &DVector::from_element(1, 0.5f32)).unwrap();
        let expect = std::f32::consts::PI / 2.0 * (0.5 - 1.2 * 0.5 + 0.75 * 0.125);
        assert!((sys.residual(&c, 1.2)[1] - expect).abs() < 1e-5);
    }
}

//! Orthogonal representations, fixed-point subspaces, isotropy groups and
//! the slice decomposition at a base point.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupDescriptor, Subgroup};
use crate::linalg::{complement_basis, projector_basis, projector_rank};
use crate::scalar::Real;

/// Anything that can report `dim V^K` for subgroups `K` given by sorted
/// element indices of the ambient finite group.
pub trait FixedDimension {
    fn dimension(&self) -> usize;
    fn fixed_dim(&self, k: &[usize]) -> Result<usize>;
}

/// `V ⊕ W` seen through fixed-point dimensions only.
pub struct DirectSum<'a>(pub &'a dyn FixedDimension, pub &'a dyn FixedDimension);

impl FixedDimension for DirectSum<'_> {
    fn dimension(&self) -> usize {
        self.0.dimension() + self.1.dimension()
    }

    fn fixed_dim(&self, k: &[usize]) -> Result<usize> {
        Ok(self.0.fixed_dim(k)? + self.1.fixed_dim(k)?)
    }
}

/// A finite-group representation by orthogonal matrices, one per element.
#[derive(Debug, Clone)]
pub struct FiniteRepresentation<T: Real> {
    group: Arc<FiniteGroup>,
    dim: usize,
    matrices: Vec<DMatrix<T>>,
}

impl<T: Real> FiniteRepresentation<T> {
    /// Extends generator images to the whole group and checks orthogonality
    /// and the homomorphism property.
    pub fn from_generators(group: Arc<FiniteGroup>, dim: usize, images: &[(usize, DMatrix<T>)]) -> Result<Self> {
        let n = group.order();
        for (g, m) in images {
            if *g >= n {
                return Err(Error::InvalidRepresentation(format!("generator element {g} out of range")));
            }
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InvalidRepresentation(format!(
                    "image of element {g} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let mut slots: Vec<Option<DMatrix<T>>> = vec![None; n];
        slots[group.identity()] = Some(DMatrix::identity(dim, dim));
        let mut queue = vec![group.identity()];
        let mut cursor = 0;
        while cursor < queue.len() {
            let x = queue[cursor];
            cursor += 1;
            for (g, m) in images {
                let y = group.mul(x, *g);
                if slots[y].is_none() {
                    slots[y] = Some(slots[x].as_ref().unwrap() * m);
                    queue.push(y);
                }
            }
        }
        if queue.len() != n {
            return Err(Error::InvalidRepresentation(format!(
                "generator elements span only {} of {n} group elements",
                queue.len()
            )));
        }
        let rep = FiniteRepresentation { group, dim, matrices: slots.into_iter().map(Option::unwrap).collect() };
        rep.validate()?;
        Ok(rep)
    }

    pub fn trivial(group: Arc<FiniteGroup>, dim: usize) -> Self {
        let matrices = vec![DMatrix::identity(dim, dim); group.order()];
        FiniteRepresentation { group, dim, matrices }
    }

    pub fn from_monomial(rep: &MonomialRepresentation) -> Result<Self> {
        let matrices = (0..rep.group.order())
            .map(|g| {
                rep.image(g)
                    .map(|s| s.to_matrix())
                    .ok_or_else(|| Error::InvalidRepresentation(format!("monomial representation undefined at {g}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteRepresentation { group: rep.group.clone(), dim: rep.dim, matrices })
    }

    fn validate(&self) -> Result<()> {
        let tol = T::tol(1e-12);
        let eye = DMatrix::<T>::identity(self.dim, self.dim);
        for (g, m) in self.matrices.iter().enumerate() {
            if (m.transpose() * m - &eye).amax() > tol {
                return Err(Error::InvalidRepresentation(format!("image of element {g} is not orthogonal")));
            }
        }
        let n = self.group.order();
        for a in 0..n {
            for b in 0..n {
                let ab = self.group.mul(a, b);
                if (&self.matrices[a] * &self.matrices[b] - &self.matrices[ab]).amax() > tol {
                    return Err(Error::InvalidRepresentation(format!(
                        "homomorphism fails for elements ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &DMatrix<T> {
        &self.matrices[g]
    }

    /// Averaging projector `|K|^{-1} Σ ρ(k)` onto `V^K`.
    pub fn averaging_projector(&self, k: &[usize]) -> DMatrix<T> {
        let mut p = DMatrix::zeros(self.dim, self.dim);
        for &x in k {
            p += &self.matrices[x];
        }
        p / T::lit(k.len() as f64)
    }
}

impl<T: Real> FixedDimension for FiniteRepresentation<T> {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn fixed_dim(&self, k: &[usize]) -> Result<usize> {
        projector_rank(&self.averaging_projector(k), "fixed subspace")
    }
}

/// `e_j ↦ signs[j] · e_{perm[j]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(dim: usize) -> Self {
        SignedPermutation { perm: (0..dim).collect(), signs: vec![1; dim] }
    }

    pub fn trace(&self) -> i64 {
        self.perm.iter().enumerate().filter(|(j, &p)| *j == p).map(|(j, _)| self.signs[j] as i64).sum()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        let dim = self.perm.len();
        let mut perm = vec![0; dim];
        let mut signs = vec![0; dim];
        for j in 0..dim {
            let mid = other.perm[j];
            perm[j] = self.perm[mid];
            signs[j] = other.signs[j] * self.signs[mid];
        }
        SignedPermutation { perm, signs }
    }

    pub fn to_matrix<T: Real>(&self) -> DMatrix<T> {
        let dim = self.perm.len();
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            m[(self.perm[j], j)] = T::lit(self.signs[j] as f64);
        }
        m
    }

    fn direct_sum(&self, other: &SignedPermutation) -> SignedPermutation {
        let shift = self.perm.len();
        let mut perm = self.perm.clone();
        perm.extend(other.perm.iter().map(|p| p + shift));
        let mut signs = self.signs.clone();
        signs.extend_from_slice(&other.signs);
        SignedPermutation { perm, signs }
    }
}

/// An exact representation of a subgroup `H ⊆ G` by signed permutation
/// matrices. Fixed-point dimensions are computed with integer characters.
#[derive(Debug, Clone)]
pub struct MonomialRepresentation {
    group: Arc<FiniteGroup>,
    domain: Vec<usize>,
    dim: usize,
    images: Vec<Option<SignedPermutation>>,
}

impl MonomialRepresentation {
    fn from_fn(
        group: Arc<FiniteGroup>,
        domain: &[usize],
        dim: usize,
        f: impl Fn(usize) -> SignedPermutation,
    ) -> Result<Self> {
        if !group.is_subgroup(domain) {
            return Err(Error::InvalidRepresentation("domain is not a subgroup".into()));
        }
        let mut images = vec![None; group.order()];
        for &h in domain {
            images[h] = Some(f(h));
        }
        let mut sorted = domain.to_vec();
        sorted.sort_unstable();
        Ok(MonomialRepresentation { group, domain: sorted, dim, images })
    }

    pub fn trivial(group: Arc<FiniteGroup>, domain: &[usize], dim: usize) -> Result<Self> {
        Self::from_fn(group, domain, dim, |_| SignedPermutation::identity(dim))
    }

    /// Permutation action of `H` on the cosets `H/L`.
    pub fn permutation_on_cosets(group: Arc<FiniteGroup>, domain: &[usize], sub: &[usize]) -> Result<Self> {
        if !group.is_subgroup(sub) || !sub.iter().all(|x| domain.contains(x)) {
            return Err(Error::InvalidRepresentation("coset subgroup is not inside the domain".into()));
        }
        // Cosets xL labelled by their smallest element.
        let label = |x: usize| sub.iter().map(|&l| group.mul(x, l)).min().unwrap();
        let mut labels: Vec<usize> = domain.iter().map(|&x| label(x)).collect();
        labels.sort_unstable();
        labels.dedup();
        let dim = labels.len();
        let g = group.clone();
        Self::from_fn(group, domain, dim, move |h| {
            let perm = labels
                .iter()
                .map(|&x| {
                    let target = sub.iter().map(|&l| g.mul(g.mul(h, x), l)).min().unwrap();
                    labels.binary_search(&target).unwrap()
                })
                .collect();
            SignedPermutation { perm, signs: vec![1; dim] }
        })
    }

    /// Regular representation of the whole group.
    pub fn regular(group: Arc<FiniteGroup>) -> Result<Self> {
        let all: Vec<usize> = (0..group.order()).collect();
        let e = vec![group.identity()];
        Self::permutation_on_cosets(group, &all, &e)
    }

    /// One-dimensional sign character of `H` with the given index-2 kernel.
    pub fn sign_character(group: Arc<FiniteGroup>, domain: &[usize], kernel: &[usize]) -> Result<Self> {
        if !group.is_subgroup(kernel) || kernel.len() * 2 != domain.len() || !kernel.iter().all(|x| domain.contains(x)) {
            return Err(Error::InvalidRepresentation("sign character needs an index-2 kernel".into()));
        }
        let kernel = kernel.to_vec();
        Self::from_fn(group, domain, 1, move |h| SignedPermutation {
            perm: vec![0],
            signs: vec![if kernel.contains(&h) { 1 } else { -1 }],
        })
    }

    /// Tensor product with a sign character of the same domain.
    pub fn twisted(&self, character: &MonomialRepresentation) -> Result<Self> {
        if character.dim != 1 || character.domain != self.domain {
            return Err(Error::InvalidRepresentation("twist needs a 1-dim character on the same domain".into()));
        }
        let mut out = self.clone();
        for &h in &self.domain {
            let s = character.images[h].as_ref().unwrap().signs[0];
            let img = out.images[h].as_mut().unwrap();
            img.signs.iter_mut().for_each(|x| *x *= s);
        }
        Ok(out)
    }

    pub fn direct_sum(&self, other: &MonomialRepresentation) -> Result<Self> {
        if self.domain != other.domain || !Arc::ptr_eq(&self.group, &other.group) && self.group != other.group {
            return Err(Error::InvalidRepresentation("direct sum of representations of different groups".into()));
        }
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a.direct_sum(b)),
                _ => None,
            })
            .collect();
        Ok(MonomialRepresentation {
            group: self.group.clone(),
            domain: self.domain.clone(),
            dim: self.dim + other.dim,
            images,
        })
    }

    /// A random direct sum of `pieces` summands, each a trivial line, a sign
    /// character, a coset permutation action or a twisted one.
    pub fn random(group: Arc<FiniteGroup>, domain: &[usize], pieces: usize, rng: &mut impl rand::Rng) -> Result<Self> {
        let subs = subgroups_within(&group, domain);
        let kernels: Vec<&Vec<usize>> = subs.iter().filter(|k| 2 * k.len() == domain.len()).collect();
        let mut out = Self::zero(group.clone(), domain)?;
        for _ in 0..pieces {
            let piece = match rng.random_range(0..4) {
                0 => Self::trivial(group.clone(), domain, 1)?,
                1 if !kernels.is_empty() => {
                    Self::sign_character(group.clone(), domain, kernels[rng.random_range(0..kernels.len())])?
                }
                3 if !kernels.is_empty() => {
                    let chi = Self::sign_character(group.clone(), domain, kernels[rng.random_range(0..kernels.len())])?;
                    Self::permutation_on_cosets(group.clone(), domain, &subs[rng.random_range(0..subs.len())])?.twisted(&chi)?
                }
                _ => Self::permutation_on_cosets(group.clone(), domain, &subs[rng.random_range(0..subs.len())])?,
            };
            out = out.direct_sum(&piece)?;
        }
        Ok(out)
    }

    pub fn zero(group: Arc<FiniteGroup>, domain: &[usize]) -> Result<Self> {
        Self::trivial(group, domain, 0)
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn image(&self, g: usize) -> Option<&SignedPermutation> {
        self.images.get(g).and_then(Option::as_ref)
    }

    /// Checks `ρ(ab) = ρ(a)ρ(b)` on the domain.
    pub fn is_homomorphism(&self) -> bool {
        self.domain.iter().all(|&a| {
            self.domain.iter().all(|&b| {
                let ab = self.group.mul(a, b);
                self.images[ab].as_ref() == Some(&self.images[a].as_ref().unwrap().compose(self.images[b].as_ref().unwrap()))
            })
        })
    }
}

impl FixedDimension for MonomialRepresentation {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn fixed_dim(&self, k: &[usize]) -> Result<usize> {
        let mut sum = 0i64;
        for &x in k {
            let img = self.image(x).ok_or_else(|| {
                Error::Contract(format!("element {x} lies outside the representation's domain"))
            })?;
            sum += img.trace();
        }
        let n = k.len() as i64;
        if sum % n != 0 || sum < 0 {
            return Err(Error::NumericalDegeneracy(format!("character sum {sum} not divisible by |K| = {n}")));
        }
        Ok((sum / n) as usize)
    }
}

/// A circle action in block-rotation form: weight `m_i` rotates the plane
/// `(x_{2i}, x_{2i+1})` by `m_i θ`; the last `trivial` coordinates are fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircleRepresentation {
    weights: Vec<u64>,
    trivial: usize,
}

impl CircleRepresentation {
    pub fn new(weights: Vec<u64>, trivial: usize) -> Result<Self> {
        if weights.contains(&0) {
            return Err(Error::InvalidRepresentation("circle weights must be >= 1".into()));
        }
        Ok(CircleRepresentation { weights, trivial })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn trivial_count(&self) -> usize {
        self.trivial
    }

    pub fn dim(&self) -> usize {
        2 * self.weights.len() + self.trivial
    }

    pub fn rotation<T: Real>(&self, theta: f64) -> DMatrix<T> {
        let mut m = DMatrix::identity(self.dim(), self.dim());
        for (i, &w) in self.weights.iter().enumerate() {
            let a = T::lit(w as f64 * theta);
            let (s, c) = (a.sin(), a.cos());
            m[(2 * i, 2 * i)] = c;
            m[(2 * i, 2 * i + 1)] = -s;
            m[(2 * i + 1, 2 * i)] = s;
            m[(2 * i + 1, 2 * i + 1)] = c;
        }
        m
    }

    /// Infinitesimal generator: derivative of the rotation at `θ = 0`.
    pub fn generator<T: Real>(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (i, &w) in self.weights.iter().enumerate() {
            m[(2 * i, 2 * i + 1)] = -T::lit(w as f64);
            m[(2 * i + 1, 2 * i)] = T::lit(w as f64);
        }
        m
    }

    fn fixed_coordinates(&self, h: &Subgroup) -> Result<Vec<usize>> {
        let mut coords = Vec::new();
        for (i, &w) in self.weights.iter().enumerate() {
            let fixed = match h {
                Subgroup::Cyclic(m) => w % m == 0,
                Subgroup::Circle => false,
                Subgroup::Finite(_) => {
                    return Err(Error::Contract("finite subgroup passed to a circle representation".into()))
                }
            };
            if fixed {
                coords.extend([2 * i, 2 * i + 1]);
            }
        }
        coords.extend(2 * self.weights.len()..self.dim());
        Ok(coords)
    }
}

/// Action of the ambient group on `R^p` by orthogonal matrices.
#[derive(Debug, Clone)]
pub enum OrthogonalRepresentation<T: Real> {
    Finite(FiniteRepresentation<T>),
    Circle(CircleRepresentation),
}

/// Absolute tolerance for fixed-point and isotropy decisions.
const FIX_TOL: f64 = 1e-10;

impl<T: Real> OrthogonalRepresentation<T> {
    pub fn dim(&self) -> usize {
        match self {
            OrthogonalRepresentation::Finite(r) => r.dim(),
            OrthogonalRepresentation::Circle(c) => c.dim(),
        }
    }

    pub fn group(&self) -> GroupDescriptor {
        match self {
            OrthogonalRepresentation::Finite(r) => GroupDescriptor::Finite(r.group().clone()),
            OrthogonalRepresentation::Circle(_) => GroupDescriptor::Circle,
        }
    }

    /// Labelled matrices that generate the action (a dense subgroup for the
    /// circle). Used for invariance and equivariance checks.
    pub fn generator_actions(&self) -> Vec<(String, DMatrix<T>)> {
        match self {
            OrthogonalRepresentation::Finite(r) => r
                .group()
                .generators()
                .iter()
                .map(|&g| (format!("element {g}"), r.matrix(g).clone()))
                .collect(),
            OrthogonalRepresentation::Circle(c) => vec![
                ("rotation(1)".to_string(), c.rotation(1.0)),
                ("rotation(2pi/5)".to_string(), c.rotation(2.0 * std::f64::consts::PI / 5.0)),
            ],
        }
    }

    /// Every element (finite) or `samples` equally spaced rotations (circle).
    pub fn sampled_actions(&self, samples: usize) -> Vec<DMatrix<T>> {
        match self {
            OrthogonalRepresentation::Finite(r) => (0..r.group().order()).map(|g| r.matrix(g).clone()).collect(),
            OrthogonalRepresentation::Circle(c) => (0..samples)
                .map(|k| c.rotation(2.0 * std::f64::consts::PI * k as f64 / samples as f64))
                .collect(),
        }
    }

    /// Orthogonal projector onto `V^H`.
    pub fn fixed_projector(&self, h: &Subgroup) -> Result<DMatrix<T>> {
        match (self, h) {
            (OrthogonalRepresentation::Finite(r), Subgroup::Finite(elements)) => {
                if !r.group().is_subgroup(elements) {
                    return Err(Error::Contract(format!("{elements:?} is not a subgroup")));
                }
                Ok(r.averaging_projector(elements))
            }
            (OrthogonalRepresentation::Circle(c), _) => {
                let mut p = DMatrix::zeros(c.dim(), c.dim());
                for i in c.fixed_coordinates(h)? {
                    p[(i, i)] = T::one();
                }
                Ok(p)
            }
            _ => Err(Error::Contract("subgroup does not belong to this representation's group".into())),
        }
    }

    /// Orthonormal basis of `V^H` (columns); its width is `dim V^H`.
    pub fn fixed_subspace(&self, h: &Subgroup) -> Result<DMatrix<T>> {
        let p = self.fixed_projector(h)?;
        let rank = projector_rank(&p, "fixed subspace")?;
        Ok(projector_basis(&p, rank))
    }

    /// `G_{u0}`.
    pub fn isotropy_group(&self, u0: &DVector<T>) -> Subgroup {
        match self {
            OrthogonalRepresentation::Finite(r) => {
                let tol = T::tol(FIX_TOL);
                let elements = (0..r.group().order())
                    .filter(|&g| (r.matrix(g) * u0 - u0).norm() < tol)
                    .collect();
                Subgroup::Finite(elements)
            }
            OrthogonalRepresentation::Circle(c) => {
                let tol = T::tol(FIX_TOL);
                let d = c
                    .weights
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| u0[2 * i].abs() > tol || u0[2 * i + 1].abs() > tol)
                    .fold(0u64, |acc, (_, &w)| acc.gcd(&w));
                if d == 0 {
                    Subgroup::Circle
                } else {
                    Subgroup::Cyclic(d)
                }
            }
        }
    }

    /// Orthonormal basis of `T_{u0} G(u0)`: empty for finite groups, at most
    /// one column for the circle.
    pub fn orbit_tangent(&self, u0: &DVector<T>) -> DMatrix<T> {
        match self {
            OrthogonalRepresentation::Finite(_) => DMatrix::zeros(u0.len(), 0),
            OrthogonalRepresentation::Circle(c) => {
                let xi = c.generator::<T>() * u0;
                let norm = xi.norm();
                if norm <= T::tol(1e-12) {
                    DMatrix::zeros(u0.len(), 0)
                } else {
                    DMatrix::from_columns(&[xi / norm])
                }
            }
        }
    }

    /// Matrices of the isotropy elements used to check fixedness.
    fn isotropy_actions(&self, h: &Subgroup) -> Vec<DMatrix<T>> {
        match (self, h) {
            (OrthogonalRepresentation::Finite(r), Subgroup::Finite(e)) => e.iter().map(|&g| r.matrix(g).clone()).collect(),
            (OrthogonalRepresentation::Circle(c), Subgroup::Cyclic(m)) => {
                vec![c.rotation(2.0 * std::f64::consts::PI / *m as f64)]
            }
            (OrthogonalRepresentation::Circle(c), Subgroup::Circle) => vec![c.rotation(1.0)],
            _ => Vec::new(),
        }
    }

    pub fn build_slice(&self, u0: &DVector<T>) -> Result<SlicePackage<T>> {
        let p = self.dim();
        if u0.len() != p {
            return Err(Error::Contract(format!("base point has length {}, expected {p}", u0.len())));
        }
        let isotropy = self.isotropy_group(u0);
        let tangent = self.orbit_tangent(u0);
        let eye = DMatrix::<T>::identity(p, p);
        let slice_proj = &eye - &tangent * tangent.transpose();
        let fixed_proj = self.fixed_projector(&isotropy)?;

        let sym = |m: DMatrix<T>| (&m + m.transpose()) * T::lit(0.5);
        let wh_proj = sym(&slice_proj * &fixed_proj);
        let comp_proj = sym(&slice_proj * (&eye - &fixed_proj));
        let p1 = projector_rank(&wh_proj, "fixed slice")?;
        let p2 = projector_rank(&comp_proj, "slice complement")?;
        let p0 = tangent.ncols();
        if p0 + p1 + p2 != p {
            return Err(Error::NumericalDegeneracy(format!(
                "slice dimensions {p0}+{p1}+{p2} do not add up to {p}"
            )));
        }
        let fixed_slice = projector_basis(&wh_proj, p1);
        let complement = projector_basis(&comp_proj, p2);
        let slice = complement_basis(&tangent);

        let tol = T::tol(FIX_TOL);
        for g in self.isotropy_actions(&isotropy) {
            if (&g * &fixed_slice - &fixed_slice).amax() > tol {
                return Err(Error::NumericalDegeneracy("fixed slice basis not fixed by the isotropy group".into()));
            }
        }
        Ok(SlicePackage { base_point: u0.clone(), isotropy, tangent, slice, fixed_slice, complement })
    }
}

/// Decomposition `R^p = T_{u0}G(u0) ⊕ W^H ⊕ (W^H)^⊥` at the base point.
#[derive(Debug, Clone)]
pub struct SlicePackage<T: Real> {
    pub base_point: DVector<T>,
    pub isotropy: Subgroup,
    /// `p x p0`, orthonormal columns.
    pub tangent: DMatrix<T>,
    /// `p x (p - p0)`: the slice `W`.
    pub slice: DMatrix<T>,
    /// `p x p1`: `W^H`.
    pub fixed_slice: DMatrix<T>,
    /// `p x p2`: complement of `W^H` inside `W`.
    pub complement: DMatrix<T>,
}

impl<T: Real> SlicePackage<T> {
    pub fn p0(&self) -> usize {
        self.tangent.ncols()
    }

    pub fn p1(&self) -> usize {
        self.fixed_slice.ncols()
    }

    pub fn p2(&self) -> usize {
        self.complement.ncols()
    }
}

/// Every subgroup of `domain` generated by at most two elements, sorted.
fn subgroups_within(group: &FiniteGroup, domain: &[usize]) -> Vec<Vec<usize>> {
    let mut subs: Vec<Vec<usize>> = Vec::new();
    for &a in domain {
        for &b in domain {
            let mut s = group.closure(&[a, b]);
            s.sort_unstable();
            subs.push(s);
        }
    }
    subs.sort();
    subs.dedup();
    subs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s3() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::symmetric(3).unwrap())
    }

    /// Null-space dimension of the stacked `(ρ(h) - I)` over generators of H,
    /// via SVD. Independent of the averaging projector.
    fn stacked_kernel_dim(rep: &FiniteRepresentation<f64>, h: &[usize]) -> usize {
        let g = rep.group();
        let p = rep.dim();
        let blocks: Vec<DMatrix<f64>> = h.iter().map(|&x| rep.matrix(x) - DMatrix::identity(p, p)).collect();
        let mut stacked = DMatrix::zeros(p * blocks.len(), p);
        for (i, b) in blocks.iter().enumerate() {
            stacked.view_mut((i * p, 0), (p, p)).copy_from(b);
        }
        let _ = g;
        let sv = stacked.svd(false, false).singular_values;
        sv.iter().filter(|&&s| s < 1e-9).count() + p.saturating_sub(sv.len())
    }

    #[test]
    fn trivial_rep_fixes_everything() {
        let g = s3();
        let rep = OrthogonalRepresentation::Finite(FiniteRepresentation::<f64>::trivial(g.clone(), 3));
        for h in [vec![0], (0..6).collect::<Vec<_>>()] {
            assert_eq!(rep.fixed_subspace(&Subgroup::Finite(h)).unwrap().ncols(), 3);
        }
    }

    #[test]
    fn sign_rep_of_z2() {
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let rep = FiniteRepresentation::from_generators(z2, 1, &[(1, DMatrix::from_element(1, 1, -1.0))]).unwrap();
        let rep = OrthogonalRepresentation::Finite(rep);
        assert_eq!(rep.fixed_subspace(&Subgroup::Finite(vec![0, 1])).unwrap().ncols(), 0);
    }

    #[test]
    fn regular_rep_of_s3_on_z3() {
        let g = s3();
        let regular = MonomialRepresentation::regular(g.clone()).unwrap();
        assert!(regular.is_homomorphism());
        let rep = FiniteRepresentation::<f64>::from_monomial(&regular).unwrap();
        let z3 = g.closure(&[g.generators()[1]]);
        assert_eq!(z3.len(), 3);
        assert_eq!(rep.fixed_dim(&z3).unwrap(), 2);
        assert_eq!(regular.fixed_dim(&z3).unwrap(), 2);
        assert_eq!(stacked_kernel_dim(&rep, &z3), 2);
    }

    #[test]
    fn circle_fixed_subspaces() {
        let rep = OrthogonalRepresentation::<f64>::Circle(CircleRepresentation::new(vec![2], 0).unwrap());
        assert_eq!(rep.fixed_subspace(&Subgroup::Cyclic(2)).unwrap().ncols(), 2);
        assert_eq!(rep.fixed_subspace(&Subgroup::Cyclic(3)).unwrap().ncols(), 0);
        // Cross-check against the rotation matrix itself.
        let Subgroup::Cyclic(_) = Subgroup::Cyclic(2) else { unreachable!() };
        if let OrthogonalRepresentation::Circle(c) = &rep {
            let r = c.rotation::<f64>(std::f64::consts::PI);
            assert!((r - DMatrix::identity(2, 2)).amax() < 1e-12);
        }
    }

    #[test]
    fn isotropy_examples() {
        let circle1 = OrthogonalRepresentation::<f64>::Circle(CircleRepresentation::new(vec![1], 0).unwrap());
        assert_eq!(circle1.isotropy_group(&DVector::from_vec(vec![1.0, 0.0])), Subgroup::Cyclic(1));
        assert_eq!(circle1.isotropy_group(&DVector::zeros(2)), Subgroup::Circle);
        let circle2 = OrthogonalRepresentation::<f64>::Circle(CircleRepresentation::new(vec![2], 0).unwrap());
        assert_eq!(circle2.isotropy_group(&DVector::from_vec(vec![1.0, 0.0])), Subgroup::Cyclic(2));
        let mixed = OrthogonalRepresentation::<f64>::Circle(CircleRepresentation::new(vec![4, 6], 1).unwrap());
        assert_eq!(mixed.isotropy_group(&DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0, 3.0])), Subgroup::Cyclic(2));
        assert_eq!(mixed.isotropy_group(&DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 3.0])), Subgroup::Circle);

        let g = s3();
        let regular = FiniteRepresentation::<f64>::from_monomial(&MonomialRepresentation::regular(g).unwrap()).unwrap();
        let rep = OrthogonalRepresentation::Finite(regular);
        assert_eq!(rep.isotropy_group(&DVector::zeros(6)), Subgroup::Finite((0..6).collect()));
    }

    #[test]
    fn tangent_examples() {
        let circle = OrthogonalRepresentation::<f64>::Circle(CircleRepresentation::new(vec![1], 0).unwrap());
        let t = circle.orbit_tangent(&DVector::from_vec(vec![1.0, 0.0]));
        assert_eq!(t.ncols(), 1);
        assert!((t[(0, 0)]).abs() < 1e-15 && (t[(1, 0)] - 1.0).abs() < 1e-15);
        assert_eq!(circle.orbit_tangent(&DVector::zeros(2)).ncols(), 0);

        let fin = OrthogonalRepresentation::Finite(FiniteRepresentation::<f64>::trivial(s3(), 2));
        assert_eq!(fin.orbit_tangent(&DVector::from_vec(vec![1.0, 2.0])).ncols(), 0);
    }

    #[test]
    fn slice_examples() {
        let fin = OrthogonalRepresentation::Finite(FiniteRepresentation::<f64>::trivial(s3(), 3));
        let s = fin.build_slice(&DVector::from_vec(vec![0.5, 0.0, -1.0])).unwrap();
        assert_eq!((s.p0(), s.p1(), s.p2()), (0, 3, 0));

        let circle = OrthogonalRepresentation::<f64>::Circle(CircleRepresentation::new(vec![1], 0).unwrap());
        let s = circle.build_slice(&DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!((s.p0(), s.p1(), s.p2()), (1, 1, 0));
        assert!((s.fixed_slice[(0, 0)] - 1.0).abs() < 1e-14 && s.fixed_slice[(1, 0)].abs() < 1e-14);

        // Circle with a weight-2 block and a trivial coordinate, base point in
        // the rotating plane: H = Z_2 fixes everything.
        let mixed = OrthogonalRepresentation::<f64>::Circle(CircleRepresentation::new(vec![2], 1).unwrap());
        let s = mixed.build_slice(&DVector::from_vec(vec![0.0, 1.0, 0.0])).unwrap();
        assert_eq!(s.isotropy, Subgroup::Cyclic(2));
        assert_eq!((s.p0(), s.p1(), s.p2()), (1, 2, 0));
        let basis = DMatrix::from_columns(&[
            s.tangent.column(0).into_owned(),
            s.fixed_slice.column(0).into_owned(),
            s.fixed_slice.column(1).into_owned(),
        ]);
        assert!((basis.transpose() * &basis - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn slice_with_nontrivial_complement() {
        // Z2 swapping two coordinates; u0 on the diagonal has isotropy Z2,
        // W^H = diagonal, complement = antidiagonal.
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let rep = OrthogonalRepresentation::Finite(FiniteRepresentation::from_generators(z2, 2, &[(1, swap)]).unwrap());
        let s = rep.build_slice(&DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert_eq!(s.isotropy, Subgroup::Finite(vec![0, 1]));
        assert_eq!((s.p0(), s.p1(), s.p2()), (0, 1, 1));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.fixed_slice.column(0) - DVector::from_vec(vec![h, h])).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_generators() {
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(FiniteRepresentation::from_generators(z2.clone(), 2, &[(1, shear)]).is_err());
        // Rotation by 90 degrees does not square to the identity.
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(FiniteRepresentation::from_generators(z2.clone(), 2, &[(1, rot)]).is_err());
        assert!(FiniteRepresentation::<f64>::from_generators(z2, 2, &[]).is_err());
        assert!(CircleRepresentation::new(vec![0], 1).is_err());
    }

    #[test]
    fn single_precision_representation() {
        let d4 = Arc::new(FiniteGroup::dihedral(4).unwrap());
        let r = DMatrix::<f32>::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let s = DMatrix::<f32>::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let rep = FiniteRepresentation::from_generators(d4.clone(), 2, &[(1, r), (4, s)]).unwrap();
        assert_eq!(rep.fixed_dim(&[0, 4]).unwrap(), 1);
        assert_eq!(rep.fixed_dim(&(0..8).collect::<Vec<_>>()).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn projector_properties_on_s4_coset_reps(pick in 0usize..11, sub_pick in 0usize..11) {
            let g = Arc::new(FiniteGroup::symmetric(4).unwrap());
            let lattice = crate::group::SubgroupLattice::new(g.clone()).unwrap();
            let all: Vec<usize> = (0..g.order()).collect();
            let l = lattice.representative(sub_pick % lattice.len()).to_vec();
            let mono = MonomialRepresentation::permutation_on_cosets(g.clone(), &all, &l).unwrap();
            let rep = FiniteRepresentation::<f64>::from_monomial(&mono).unwrap();
            let h = lattice.representative(pick % lattice.len()).to_vec();
            let p = rep.averaging_projector(&h);
            prop_assert!((&p * &p - &p).amax() < 1e-10);
            for &x in &h {
                prop_assert!((rep.matrix(x) * &p - &p).amax() < 1e-10);
            }
            let d = rep.fixed_dim(&h).unwrap();
            prop_assert_eq!(d, stacked_kernel_dim(&rep, &h));
            prop_assert_eq!(d, mono.fixed_dim(&h).unwrap());
        }
    }
}

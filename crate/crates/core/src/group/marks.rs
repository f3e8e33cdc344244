use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{FiniteGroup, GroupDescriptor, SubgroupLattice};
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Table of marks `M[H][K] = |(G/H)^K|`, rows and columns in lattice order.
///
/// Lower-triangular: `M[H][K] != 0` only if `K` is subconjugate to `H`.
#[derive(Debug, Clone)]
pub struct TableOfMarks {
    pub lattice: SubgroupLattice,
    marks: Vec<Vec<i64>>,
}

impl PartialEq for TableOfMarks {
    fn eq(&self, other: &Self) -> bool {
        self.lattice.group == other.lattice.group && self.marks == other.marks
    }
}

pub fn table_of_marks(g: &GroupDescriptor) -> Result<TableOfMarks> {
    let group = g
        .finite()
        .ok_or_else(|| Error::Contract("table of marks requires a finite group".into()))?;
    TableOfMarks::new(group.clone())
}

impl TableOfMarks {
    pub fn new(group: Arc<FiniteGroup>) -> Result<Self> {
        let lattice = SubgroupLattice::new(group)?;
        let n = lattice.len();
        let mut marks = vec![vec![0i64; n]; n];
        for (h, row) in marks.iter_mut().enumerate() {
            let cosets = left_coset_representatives(&lattice.group, lattice.representative(h));
            for (k, cell) in row.iter_mut().enumerate() {
                *cell = fixed_coset_count(&lattice.group, &cosets, lattice.representative(h), lattice.representative(k));
            }
        }
        Ok(TableOfMarks { lattice, marks })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.lattice.group
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn mark(&self, h: usize, k: usize) -> i64 {
        self.marks[h][k]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.marks
    }

    pub fn class_names(&self) -> Vec<String> {
        self.lattice.names()
    }

    /// Mark vector of `sum_H x_H [G/H]`, i.e. `M^T x`.
    pub fn coordinates_to_marks(&self, coords: &[i64]) -> Vec<i64> {
        let n = self.len();
        (0..n).map(|k| (0..n).map(|h| coords[h] * self.marks[h][k]).sum()).collect()
    }

    /// Inverts [`Self::coordinates_to_marks`]; see [`marks_to_coordinates`].
    pub fn coordinates(&self, marks: &[Rational]) -> Result<Vec<i64>> {
        marks_to_coordinates(self, marks)
    }

    pub fn coordinates_from_integer_marks(&self, marks: &[i64]) -> Result<Vec<i64>> {
        let q: Vec<Rational> = marks.iter().map(|&m| BigRational::from_integer(BigInt::from(m))).collect();
        marks_to_coordinates(self, &q)
    }
}

/// Solves `M^T x = marks` by back substitution from the top class down and
/// asserts the solution is integral.
pub fn marks_to_coordinates(t: &TableOfMarks, marks: &[Rational]) -> Result<Vec<i64>> {
    let n = t.len();
    if marks.len() != n {
        return Err(Error::Contract(format!("mark vector has length {}, expected {n}", marks.len())));
    }
    let mut x: Vec<Rational> = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let mut rhs = marks[k].clone();
        for h in k + 1..n {
            let m = t.marks[h][k];
            if m != 0 {
                rhs -= &x[h] * BigRational::from_integer(BigInt::from(m));
            }
        }
        x[k] = rhs / BigRational::from_integer(BigInt::from(t.marks[k][k]));
    }
    x.iter()
        .zip(t.class_names())
        .map(|(v, name)| {
            if !v.is_integer() {
                return Err(Error::NotIntegral(format!("coefficient {v} at class {name}")));
            }
            v.to_integer()
                .to_i64()
                .ok_or_else(|| Error::NotIntegral(format!("coefficient at class {name} overflows i64")))
        })
        .collect()
}

pub(crate) fn left_coset_representatives(group: &FiniteGroup, h: &[usize]) -> Vec<usize> {
    let mut covered = vec![false; group.order()];
    let mut reps = Vec::with_capacity(group.order() / h.len());
    for g in 0..group.order() {
        if covered[g] {
            continue;
        }
        reps.push(g);
        for &x in h {
            covered[group.mul(g, x)] = true;
        }
    }
    reps
}

/// Number of cosets `gH` fixed by every `k in K`, i.e. with `g^{-1} K g ⊆ H`.
fn fixed_coset_count(group: &FiniteGroup, coset_reps: &[usize], h: &[usize], k: &[usize]) -> i64 {
    let mut in_h = vec![false; group.order()];
    for &x in h {
        in_h[x] = true;
    }
    coset_reps
        .iter()
        .filter(|&&g| k.iter().all(|&y| in_h[group.conjugate(y, g)]))
        .count() as i64
}

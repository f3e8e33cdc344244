//! Exact Burnside-ring coordinates of `χ_G(G⁺ ∧_H S^W)` for finite groups.
//!
//! Coordinates are taken in the basis `[G/K]` (one per conjugacy class of
//! subgroups, in lattice order) and are obtained from mark vectors, which
//! are ring homomorphisms and therefore make every ring operation markwise.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::marks::left_coset_representatives;
use crate::group::{FiniteGroup, TableOfMarks};
use crate::representation::{DirectSum, FixedDimension};

/// Integer coefficients over the conjugacy classes of subgroups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BurnsideElement {
    pub group: String,
    pub classes: Vec<String>,
    pub coordinates: Vec<i64>,
}

impl BurnsideElement {
    /// Coordinates as a JSON object keyed by class name, in class order.
    pub fn to_json(&self) -> serde_json::Value {
        let map = self
            .classes
            .iter()
            .zip(&self.coordinates)
            .map(|(c, x)| (c.clone(), serde_json::Value::from(*x)))
            .collect::<serde_json::Map<_, _>>();
        serde_json::Value::Object(map)
    }

    pub fn coefficient(&self, class: usize) -> i64 {
        self.coordinates[class]
    }
}

/// The Burnside ring of a finite group, realized through its table of marks.
#[derive(Debug, Clone)]
pub struct BurnsideRing {
    table: TableOfMarks,
}

impl BurnsideRing {
    pub fn new(group: Arc<FiniteGroup>) -> Result<Self> {
        Ok(BurnsideRing { table: TableOfMarks::new(group)? })
    }

    pub fn from_table(table: TableOfMarks) -> Self {
        BurnsideRing { table }
    }

    pub fn table(&self) -> &TableOfMarks {
        &self.table
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.table.group()
    }

    pub fn rank(&self) -> usize {
        self.table.len()
    }

    pub fn element(&self, coordinates: Vec<i64>) -> Result<BurnsideElement> {
        if coordinates.len() != self.rank() {
            return Err(Error::Contract(format!(
                "{} coordinates given, ring has rank {}",
                coordinates.len(),
                self.rank()
            )));
        }
        Ok(BurnsideElement { group: self.group().name().to_string(), classes: self.table.class_names(), coordinates })
    }

    /// The unit `[G/G]`.
    pub fn unit(&self) -> BurnsideElement {
        let mut x = vec![0; self.rank()];
        x[self.rank() - 1] = 1;
        self.element(x).unwrap()
    }

    /// The basis element `[G/H]` for class index `h`.
    pub fn basis(&self, h: usize) -> BurnsideElement {
        let mut x = vec![0; self.rank()];
        x[h] = 1;
        self.element(x).unwrap()
    }

    pub fn marks(&self, a: &BurnsideElement) -> Vec<i64> {
        self.table.coordinates_to_marks(&a.coordinates)
    }

    pub fn from_marks(&self, marks: &[i64]) -> Result<BurnsideElement> {
        let x = self.table.coordinates_from_integer_marks(marks)?;
        self.element(x)
    }

    pub fn add(&self, a: &BurnsideElement, b: &BurnsideElement) -> BurnsideElement {
        let x = a.coordinates.iter().zip(&b.coordinates).map(|(p, q)| p + q).collect();
        self.element(x).unwrap()
    }

    pub fn multiply(&self, a: &BurnsideElement, b: &BurnsideElement) -> Result<BurnsideElement> {
        self.check(a)?;
        self.check(b)?;
        let m: Vec<i64> = self.marks(a).iter().zip(self.marks(b)).map(|(p, q)| p * q).collect();
        self.from_marks(&m)
    }

    fn check(&self, a: &BurnsideElement) -> Result<()> {
        if a.group != self.group().name() || a.coordinates.len() != self.rank() {
            return Err(Error::Contract(format!("element of {} used in the ring of {}", a.group, self.group().name())));
        }
        Ok(())
    }

    /// Mark vector of `G⁺ ∧_H S^W`: the reduced Euler characteristic of the
    /// `K`-fixed part, summed over the cosets `gH` fixed by `K`.
    pub fn smash_marks(&self, h: &[usize], w: &dyn FixedDimension) -> Result<Vec<i64>> {
        let g = self.group();
        if !g.is_subgroup(h) {
            return Err(Error::Contract("H is not a subgroup".into()));
        }
        let mut in_h = vec![false; g.order()];
        for &x in h {
            in_h[x] = true;
        }
        let cosets = left_coset_representatives(g, h);
        let mut marks = Vec::with_capacity(self.rank());
        for class in 0..self.rank() {
            let k = self.table.lattice.representative(class);
            let mut m = 0i64;
            for &rep in &cosets {
                let conj = g.conjugate_set(k, rep);
                if conj.iter().all(|&x| in_h[x]) {
                    m += if w.fixed_dim(&conj)? % 2 == 0 { 1 } else { -1 };
                }
            }
            marks.push(m);
        }
        Ok(marks)
    }

    pub fn smash(&self, h: &[usize], w: &dyn FixedDimension) -> Result<BurnsideElement> {
        let marks = self.smash_marks(h, w)?;
        self.from_marks(&marks)
    }
}

/// `χ_G(G⁺ ∧_H S^W)` for a representation `W` of `H ⊆ G`.
pub fn euler_characteristic_smash(ring: &BurnsideRing, h: &[usize], w: &dyn FixedDimension) -> Result<BurnsideElement> {
    ring.smash(h, w)
}

pub fn burnside_multiply(ring: &BurnsideRing, a: &BurnsideElement, b: &BurnsideElement) -> Result<BurnsideElement> {
    ring.multiply(a, b)
}

/// Outcome of comparing `χ_G(G⁺ ∧_H S^{W⊕V})` with `χ_G(G⁺ ∧_H S^W)`.
#[derive(Debug, Clone, Serialize)]
pub struct SmashDifference {
    pub lhs: BurnsideElement,
    pub rhs: BurnsideElement,
    /// Class index of `H`.
    pub h_class: usize,
    /// Whether `dim V^H` is odd.
    pub hypothesis_met: bool,
    pub differ_at_h: bool,
}

impl SmashDifference {
    /// False only when the hypothesis holds and the `(H)`-coordinates agree.
    pub fn holds(&self) -> bool {
        !self.hypothesis_met || self.differ_at_h
    }
}

pub fn verify_main_theorem(
    ring: &BurnsideRing,
    h: &[usize],
    w: &dyn FixedDimension,
    v: &dyn FixedDimension,
) -> Result<SmashDifference> {
    let mut sorted = h.to_vec();
    sorted.sort_unstable();
    let h_class = ring
        .table()
        .lattice
        .class_of(&sorted)
        .ok_or_else(|| Error::Contract("H is not a subgroup".into()))?;
    let sum = DirectSum(w, v);
    let lhs = ring.smash(&sorted, &sum)?;
    let rhs = ring.smash(&sorted, w)?;
    let hypothesis_met = v.fixed_dim(&sorted)? % 2 == 1;
    let differ_at_h = lhs.coordinates[h_class] != rhs.coordinates[h_class];
    Ok(SmashDifference { lhs, rhs, h_class, hypothesis_met, differ_at_h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::MonomialRepresentation;
    use proptest::prelude::*;

    fn z2() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(2).unwrap())
    }

    #[test]
    fn z2_examples() {
        let g = z2();
        let ring = BurnsideRing::new(g.clone()).unwrap();
        let whole = [0, 1];
        let sign = MonomialRepresentation::sign_character(g.clone(), &whole, &[0]).unwrap();
        assert_eq!(ring.smash(&whole, &sign).unwrap().coordinates, vec![-1, 1]);
        let zero = MonomialRepresentation::zero(g.clone(), &whole).unwrap();
        assert_eq!(ring.smash(&whole, &zero).unwrap(), ring.unit());
        let line = MonomialRepresentation::trivial(g.clone(), &[0], 1).unwrap();
        assert_eq!(ring.smash_marks(&[0], &line).unwrap(), vec![-2, 0]);
        assert_eq!(ring.smash(&[0], &line).unwrap().coordinates, vec![-1, 0]);
    }

    #[test]
    fn z2_products() {
        let ring = BurnsideRing::new(z2()).unwrap();
        let free = ring.basis(0);
        assert_eq!(ring.multiply(&free, &free).unwrap().coordinates, vec![2, 0]);
        let x = ring.element(vec![-1, 1]).unwrap();
        assert_eq!(ring.multiply(&x, &x).unwrap(), ring.unit());
    }

    #[test]
    fn smash_difference_on_z2() {
        let g = z2();
        let ring = BurnsideRing::new(g.clone()).unwrap();
        let whole = [0, 1];
        let zero = MonomialRepresentation::zero(g.clone(), &whole).unwrap();
        let line = MonomialRepresentation::trivial(g.clone(), &whole, 1).unwrap();
        let check = verify_main_theorem(&ring, &whole, &zero, &line).unwrap();
        assert!(check.hypothesis_met && check.differ_at_h);
        assert_eq!((check.lhs.coordinates[1], check.rhs.coordinates[1]), (-1, 1));
        let sign = MonomialRepresentation::sign_character(g, &whole, &[0]).unwrap();
        let check = verify_main_theorem(&ring, &whole, &zero, &sign).unwrap();
        assert!(!check.hypothesis_met);
    }

    #[test]
    fn burnside_element_json_is_keyed_by_class() {
        let ring = BurnsideRing::new(z2()).unwrap();
        let json = ring.element(vec![-1, 1]).unwrap().to_json();
        assert_eq!(json.to_string(), r#"{"e":-1,"Z2":1}"#);
    }

    fn s3_ring() -> BurnsideRing {
        BurnsideRing::new(Arc::new(FiniteGroup::symmetric(3).unwrap())).unwrap()
    }

    proptest! {
        #[test]
        fn ring_laws_on_s3(a in prop::collection::vec(-5i64..5, 4),
                           b in prop::collection::vec(-5i64..5, 4),
                           c in prop::collection::vec(-5i64..5, 4)) {
            let ring = s3_ring();
            let (a, b, c) = (ring.element(a).unwrap(), ring.element(b).unwrap(), ring.element(c).unwrap());
            let ab = ring.multiply(&a, &b).unwrap();
            prop_assert_eq!(&ab, &ring.multiply(&b, &a).unwrap());
            prop_assert_eq!(ring.multiply(&ab, &c).unwrap(), ring.multiply(&a, &ring.multiply(&b, &c).unwrap()).unwrap());
            let lhs = ring.multiply(&a, &ring.add(&b, &c)).unwrap();
            let rhs = ring.add(&ab, &ring.multiply(&a, &c).unwrap());
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(ring.multiply(&ring.unit(), &a).unwrap(), a);
        }
    }
}

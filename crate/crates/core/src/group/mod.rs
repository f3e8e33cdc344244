//! Finite-group combinatorics: multiplication tables, subgroups up to
//! conjugacy and the table of marks.
//!
//! The circle group is carried as a tag only; its closed subgroups are the
//! cyclic groups `Z_m` and the circle itself.

mod lattice;
pub(crate) mod marks;

pub use lattice::{enumerate_subgroup_classes, ConjClass, SubgroupLattice};
pub use marks::{marks_to_coordinates, table_of_marks, TableOfMarks};

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest finite group order accepted anywhere in the crate.
pub const MAX_GROUP_ORDER: usize = 512;

/// A finite group given by its full multiplication table.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    generators: Vec<usize>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("name", &self.name)
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}

impl FiniteGroup {
    /// Builds a group from an explicit `n x n` table, checking the group axioms
    /// by brute force.
    pub fn from_table(name: impl Into<String>, rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty multiplication table".into()));
        }
        if n > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge { order: n, cap: MAX_GROUP_ORDER });
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidGroup(format!("entry {bad} in row {i} out of range")));
            }
            table.extend_from_slice(row);
        }
        let group = Self::assemble(name.into(), n, table, None)?;
        group.check_associative()?;
        Ok(group)
    }

    fn assemble(name: String, n: usize, table: Vec<usize>, generators: Option<Vec<usize>>) -> Result<Self> {
        let at = |a: usize, b: usize| table[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or_else(|| Error::InvalidGroup("no two-sided identity".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
            inverse[a] = b;
        }
        let mut group = FiniteGroup { name, order: n, table, identity, inverse, generators: Vec::new() };
        group.generators = match generators {
            Some(g) => g,
            None => group.greedy_generators(),
        };
        Ok(group)
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.order;
        for a in 0..n {
            for b in 0..n {
                let ab = self.mul(a, b);
                for c in 0..n {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(Error::InvalidGroup(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(())
    }

    fn greedy_generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span: HashSet<usize> = HashSet::from([self.identity]);
        for g in 0..self.order {
            if !span.contains(&g) {
                gens.push(g);
                span = self.closure(&gens).into_iter().collect();
            }
        }
        gens
    }

    /// Cyclic group `Z_n`; element `k` is the rotation by `k`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        if n > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge { order: n, cap: MAX_GROUP_ORDER });
        }
        let table = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        let gens = if n == 1 { vec![] } else { vec![1] };
        Self::assemble(format!("Z{n}"), n, table, Some(gens))
    }

    /// Dihedral group of order `2n`. Element `k + n*f` is `r^k s^f`,
    /// with generators `r` (index 1) and `s` (index `n`).
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("dihedral group needs n >= 1".into()));
        }
        let order = 2 * n;
        if order > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge { order, cap: MAX_GROUP_ORDER });
        }
        let decode = |x: usize| (x % n, x / n);
        let mut table = Vec::with_capacity(order * order);
        for a in 0..order {
            for b in 0..order {
                let (ka, fa) = decode(a);
                let (kb, fb) = decode(b);
                let k = if fa == 0 { (ka + kb) % n } else { (ka + n - kb) % n };
                table.push(k + n * ((fa + fb) % 2));
            }
        }
        let gens = if n == 1 { vec![1] } else { vec![1, n] };
        Self::assemble(format!("D{n}"), order, table, Some(gens))
    }

    /// Symmetric group on `n` letters. Elements are permutations in
    /// lexicographic order (identity first); `(st)(i) = s(t(i))`.
    pub fn symmetric(n: usize) -> Result<Self> {
        let order: usize = (1..=n.max(1)).product();
        if order > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge { order, cap: MAX_GROUP_ORDER });
        }
        let perms = permutations(n);
        let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).expect("permutation listed");
        let mut table = Vec::with_capacity(order * order);
        for s in &perms {
            for t in &perms {
                let st: Vec<usize> = (0..n).map(|i| s[t[i]]).collect();
                table.push(index(&st));
            }
        }
        let mut gens = Vec::new();
        if n >= 2 {
            let mut transposition: Vec<usize> = (0..n).collect();
            transposition.swap(0, 1);
            gens.push(index(&transposition));
            if n >= 3 {
                let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
                gens.push(index(&cycle));
            }
        }
        Self::assemble(format!("S{n}"), order, table, Some(gens))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// `g^{-1} x g`.
    #[inline]
    pub fn conjugate(&self, x: usize, g: usize) -> usize {
        self.mul(self.inv(g), self.mul(x, g))
    }

    /// A generating set; for presets these are the standard generators.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[self.identity] = true;
        let mut members = vec![self.identity];
        let mut cursor = 0;
        while cursor < members.len() {
            let x = members[cursor];
            cursor += 1;
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    members.push(y);
                }
            }
        }
        members.sort_unstable();
        members
    }

    pub fn is_subgroup(&self, elements: &[usize]) -> bool {
        let set: HashSet<usize> = elements.iter().copied().collect();
        set.contains(&self.identity)
            && elements.iter().all(|&a| set.contains(&self.inv(a)))
            && elements.iter().all(|&a| elements.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    /// `g^{-1} S g` as a sorted element list.
    pub fn conjugate_set(&self, elements: &[usize], g: usize) -> Vec<usize> {
        let mut out: Vec<usize> = elements.iter().map(|&x| self.conjugate(x, g)).collect();
        out.sort_unstable();
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// The ambient symmetry group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupDescriptor {
    Finite(Arc<FiniteGroup>),
    Circle,
}

impl GroupDescriptor {
    /// Parses a preset name: `cyclic:n`, `dihedral:n`, `symmetric:n` or `circle`.
    pub fn preset(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "circle" {
            return Ok(GroupDescriptor::Circle);
        }
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidGroup(format!("unknown group preset '{spec}'")))?;
        let n: usize = arg
            .trim()
            .parse()
            .map_err(|_| Error::InvalidGroup(format!("bad order in preset '{spec}'")))?;
        let group = match kind.trim() {
            "cyclic" => FiniteGroup::cyclic(n)?,
            "dihedral" => FiniteGroup::dihedral(n)?,
            "symmetric" => FiniteGroup::symmetric(n)?,
            other => return Err(Error::InvalidGroup(format!("unknown group family '{other}'"))),
        };
        Ok(GroupDescriptor::Finite(Arc::new(group)))
    }

    pub fn finite(&self) -> Option<&Arc<FiniteGroup>> {
        match self {
            GroupDescriptor::Finite(g) => Some(g),
            GroupDescriptor::Circle => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            GroupDescriptor::Finite(g) => g.name(),
            GroupDescriptor::Circle => "SO(2)",
        }
    }
}

/// A closed subgroup of the ambient group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Subgroup {
    /// Sorted element indices of a subgroup of a finite group.
    Finite(Vec<usize>),
    /// The cyclic subgroup `Z_m` of the circle (`m = 1` is trivial).
    Cyclic(u64),
    /// The whole circle.
    Circle,
}

impl Subgroup {
    pub fn trivial(group: &GroupDescriptor) -> Self {
        match group {
            GroupDescriptor::Finite(g) => Subgroup::Finite(vec![g.identity()]),
            GroupDescriptor::Circle => Subgroup::Cyclic(1),
        }
    }

    pub fn whole(group: &GroupDescriptor) -> Self {
        match group {
            GroupDescriptor::Finite(g) => Subgroup::Finite((0..g.order()).collect()),
            GroupDescriptor::Circle => Subgroup::Circle,
        }
    }

    /// Element count, `None` for the circle.
    pub fn order(&self) -> Option<usize> {
        match self {
            Subgroup::Finite(e) => Some(e.len()),
            Subgroup::Cyclic(m) => Some(*m as usize),
            Subgroup::Circle => None,
        }
    }

    pub fn elements(&self) -> Option<&[usize]> {
        match self {
            Subgroup::Finite(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == Some(1)
    }
}

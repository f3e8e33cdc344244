use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::{FiniteGroup, GroupDescriptor, Subgroup, MAX_GROUP_ORDER};
use crate::error::{Error, Result};

/// A conjugacy class `(H)` of closed subgroups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjClass {
    pub name: String,
    /// Lexicographically smallest member (finite case).
    pub representative: Subgroup,
    /// Every conjugate subgroup, sorted.
    pub members: Vec<Subgroup>,
}

impl ConjClass {
    pub fn order(&self) -> Option<usize> {
        self.representative.order()
    }
}

/// Lists the conjugacy classes of closed subgroups.
///
/// For the circle the lattice is infinite and `circle_cutoff` bounds the
/// cyclic orders returned (`Z_1 .. Z_cutoff`, then the circle itself).
pub fn enumerate_subgroup_classes(g: &GroupDescriptor, circle_cutoff: Option<u64>) -> Result<Vec<ConjClass>> {
    match g {
        GroupDescriptor::Finite(group) => Ok(SubgroupLattice::new(group.clone())?.classes),
        GroupDescriptor::Circle => {
            let cutoff = circle_cutoff
                .ok_or_else(|| Error::Contract("circle subgroup enumeration needs an order cutoff".into()))?;
            let mut classes: Vec<ConjClass> = (1..=cutoff)
                .map(|m| ConjClass {
                    name: if m == 1 { "e".into() } else { format!("Z{m}") },
                    representative: Subgroup::Cyclic(m),
                    members: vec![Subgroup::Cyclic(m)],
                })
                .collect();
            classes.push(ConjClass {
                name: "SO(2)".into(),
                representative: Subgroup::Circle,
                members: vec![Subgroup::Circle],
            });
            Ok(classes)
        }
    }
}

/// All subgroups of a finite group, grouped into conjugacy classes in a
/// deterministic order: ascending order, then lexicographic representative.
#[derive(Debug, Clone)]
pub struct SubgroupLattice {
    pub group: Arc<FiniteGroup>,
    pub classes: Vec<ConjClass>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl SubgroupLattice {
    pub fn new(group: Arc<FiniteGroup>) -> Result<Self> {
        if group.order() > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge { order: group.order(), cap: MAX_GROUP_ORDER });
        }
        let subgroups = all_subgroups(&group);

        // Canonical form of a class: its lexicographically smallest member.
        let mut by_canonical: BTreeMap<(usize, Vec<usize>), Vec<Vec<usize>>> = BTreeMap::new();
        let mut assigned: HashSet<Vec<usize>> = HashSet::new();
        for s in &subgroups {
            if assigned.contains(s) {
                continue;
            }
            let mut conjugates: Vec<Vec<usize>> = (0..group.order()).map(|g| group.conjugate_set(s, g)).collect();
            conjugates.sort();
            conjugates.dedup();
            for c in &conjugates {
                assigned.insert(c.clone());
            }
            by_canonical.insert((s.len(), conjugates[0].clone()), conjugates);
        }

        let mut classes = Vec::with_capacity(by_canonical.len());
        let mut lookup = HashMap::new();
        for (idx, ((_, rep), members)) in by_canonical.into_iter().enumerate() {
            for m in &members {
                lookup.insert(m.clone(), idx);
            }
            classes.push(ConjClass {
                name: String::new(),
                representative: Subgroup::Finite(rep),
                members: members.into_iter().map(Subgroup::Finite).collect(),
            });
        }
        name_classes(&group, &mut classes);
        Ok(SubgroupLattice { group, classes, lookup })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Index of the class containing the subgroup with these (sorted) elements.
    pub fn class_of(&self, elements: &[usize]) -> Option<usize> {
        self.lookup.get(elements).copied()
    }

    pub fn class_of_subgroup(&self, h: &Subgroup) -> Result<usize> {
        let elements = h
            .elements()
            .ok_or_else(|| Error::Contract("finite lattice queried with a circle subgroup".into()))?;
        self.class_of(elements)
            .ok_or_else(|| Error::Contract(format!("{elements:?} is not a subgroup of {}", self.group.name())))
    }

    pub fn representative(&self, class: usize) -> &[usize] {
        self.classes[class].representative.elements().expect("finite class")
    }

    pub fn names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }
}

fn all_subgroups(group: &FiniteGroup) -> Vec<Vec<usize>> {
    // Each subgroup is reached by repeatedly joining one more element onto a
    // known subgroup, starting from the cyclic ones.
    let mut found: HashSet<Vec<usize>> = HashSet::new();
    let mut queue: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for g in 0..group.order() {
        let gens = vec![g];
        let s = group.closure(&gens);
        if found.insert(s.clone()) {
            queue.push((s, gens));
        }
    }
    while let Some((s, gens)) = queue.pop() {
        let mut member = vec![false; group.order()];
        for &x in &s {
            member[x] = true;
        }
        for g in 0..group.order() {
            if member[g] {
                continue;
            }
            let mut joined = gens.clone();
            joined.push(g);
            let t = group.closure(&joined);
            if found.insert(t.clone()) {
                queue.push((t, joined));
            }
        }
    }
    let mut out: Vec<Vec<usize>> = found.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn name_classes(group: &FiniteGroup, classes: &mut [ConjClass]) {
    let base: Vec<String> = classes
        .iter()
        .map(|c| {
            let elems = c.representative.elements().expect("finite");
            let n = elems.len();
            if n == 1 {
                "e".to_string()
            } else if n == group.order() {
                group.name().to_string()
            } else if elems.iter().any(|&x| group.element_order(x) == n) {
                format!("Z{n}")
            } else if n == 4 {
                "V4".to_string()
            } else {
                format!("H{n}")
            }
        })
        .collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let totals: HashMap<&str, usize> = base.iter().fold(HashMap::new(), |mut m, b| {
        *m.entry(b.as_str()).or_default() += 1;
        m
    });
    for (class, name) in classes.iter_mut().zip(&base) {
        if totals[name.as_str()] > 1 {
            let k = seen.entry(name.as_str()).or_default();
            *k += 1;
            class.name = format!("{name}_{k}");
        } else {
            class.name = name.clone();
        }
    }
}

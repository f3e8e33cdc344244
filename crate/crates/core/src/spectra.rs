//! Neumann Laplacian spectra on boxes.
//!
//! Side `i` of the box has length `l_i = π·s_i` with `s_i²` a positive
//! rational, so the eigenvalue of `Π cos(k_i x_i / s_i)` is the rational
//! `β = Σ k_i² / s_i²` and multiplicities are decided by exact equality.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{format_rational, rational_to_f64, Rational, Real};

/// Enumeration refuses to visit more multi-indices than this.
pub const MAX_INDICES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    squared_lengths: Vec<Rational>,
    incommensurable: bool,
}

impl BoxDomain {
    /// `squared_lengths[i] = s_i²` where the side is `π·s_i`.
    pub fn new(squared_lengths: Vec<Rational>, incommensurable: bool) -> Result<Self> {
        if squared_lengths.is_empty() {
            return Err(Error::Contract("box domain needs at least one side".into()));
        }
        if squared_lengths.iter().any(|s| !s.is_positive()) {
            return Err(Error::Contract("squared side lengths must be positive".into()));
        }
        if incommensurable && squared_lengths.len() != 2 {
            return Err(Error::Contract("the incommensurable flag applies to rectangles only".into()));
        }
        Ok(BoxDomain { squared_lengths, incommensurable })
    }

    /// The interval `(0, π)`.
    pub fn interval() -> Self {
        BoxDomain { squared_lengths: vec![Rational::one()], incommensurable: false }
    }

    /// The square `(0, π)²`.
    pub fn square() -> Self {
        BoxDomain { squared_lengths: vec![Rational::one(); 2], incommensurable: false }
    }

    pub fn dim(&self) -> usize {
        self.squared_lengths.len()
    }

    pub fn squared_lengths(&self) -> &[Rational] {
        &self.squared_lengths
    }

    pub fn incommensurable(&self) -> bool {
        self.incommensurable
    }

    /// `s_i` as a float.
    pub fn scale(&self, i: usize) -> f64 {
        rational_to_f64(&self.squared_lengths[i]).sqrt()
    }

    /// Physical side length `π·s_i`.
    pub fn side_length(&self, i: usize) -> f64 {
        std::f64::consts::PI * self.scale(i)
    }

    pub fn eigenvalue(&self, index: &[u32]) -> Rational {
        index
            .iter()
            .zip(&self.squared_lengths)
            .map(|(&k, s)| Rational::from_integer(BigInt::from(k as u64 * k as u64)) / s)
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// `∫ φ_k²` over the box for the unnormalized cosine `φ_k`.
    pub fn mass(&self, index: &[u32]) -> f64 {
        index
            .iter()
            .enumerate()
            .map(|(i, &k)| if k == 0 { self.side_length(i) } else { self.side_length(i) / 2.0 })
            .product()
    }
}

/// One eigenvalue with all multi-indices realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueEntry {
    pub value: Rational,
    pub value_float: f64,
    pub indices: Vec<Vec<u32>>,
}

impl EigenvalueEntry {
    pub fn multiplicity(&self) -> usize {
        self.indices.len()
    }

    pub fn to_json(&self) -> EigenvalueJson {
        EigenvalueJson {
            value_rational: format_rational(&self.value),
            value_float: self.value_float,
            indices: self.indices.clone(),
            multiplicity: self.multiplicity(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueJson {
    pub value_rational: String,
    pub value_float: f64,
    pub indices: Vec<Vec<u32>>,
    pub multiplicity: usize,
}

/// All eigenvalues `β ≤ cutoff`, ascending, grouped by exact equality.
pub fn neumann_spectrum(d: &BoxDomain, cutoff: &Rational) -> Result<Vec<EigenvalueEntry>> {
    if !cutoff.is_positive() {
        return Err(Error::Contract("spectrum cutoff must be positive".into()));
    }
    // k_i ≤ floor(sqrt(cutoff · s_i²)) along each axis.
    let bounds: Vec<u32> = d
        .squared_lengths
        .iter()
        .map(|s| {
            let x = cutoff * s;
            let r = x.floor().to_integer().sqrt();
            r.to_u32().ok_or_else(|| Error::SizeLimit("axis index bound overflows".into()))
        })
        .collect::<Result<_>>()?;
    let total = bounds.iter().try_fold(1usize, |acc, &b| acc.checked_mul(b as usize + 1));
    match total {
        Some(n) if n <= MAX_INDICES => {}
        _ => {
            return Err(Error::SizeLimit(format!(
                "cutoff {} needs more than {MAX_INDICES} multi-indices",
                format_rational(cutoff)
            )))
        }
    }

    let inverse: Vec<Rational> = d.squared_lengths.iter().map(|s| s.recip()).collect();
    let mut groups: BTreeMap<Rational, Vec<Vec<u32>>> = BTreeMap::new();
    let mut index = vec![0u32; d.dim()];
    enumerate(0, &bounds, &inverse, cutoff, Rational::zero(), &mut index, &mut groups);
    Ok(groups
        .into_iter()
        .map(|(value, indices)| EigenvalueEntry { value_float: rational_to_f64(&value), value, indices })
        .collect())
}

fn enumerate(
    axis: usize,
    bounds: &[u32],
    inverse: &[Rational],
    cutoff: &Rational,
    partial: Rational,
    index: &mut Vec<u32>,
    out: &mut BTreeMap<Rational, Vec<Vec<u32>>>,
) {
    if axis == bounds.len() {
        out.entry(partial).or_default().push(index.clone());
        return;
    }
    for k in 0..=bounds[axis] {
        let value = &partial + &inverse[axis] * Rational::from_integer(BigInt::from(k as u64 * k as u64));
        if &value > cutoff {
            break;
        }
        index[axis] = k;
        enumerate(axis + 1, bounds, inverse, cutoff, value, index, out);
    }
    index[axis] = 0;
}

/// `Π cos(k_i x_i / s_i)`, the cosine eigenfunction for `index`.
pub fn eigenfunction_eval<T: Real>(e: &EigenvalueEntry, d: &BoxDomain, index: &[u32], x: &[T]) -> Result<T> {
    if !e.indices.iter().any(|k| k == index) {
        return Err(Error::Contract(format!("index {index:?} does not belong to eigenvalue {}", e.value)));
    }
    if x.len() != d.dim() {
        return Err(Error::Contract(format!("point has dimension {}, domain {}", x.len(), d.dim())));
    }
    Ok(cosine_mode(d, index, x))
}

pub(crate) fn cosine_mode<T: Real>(d: &BoxDomain, index: &[u32], x: &[T]) -> T {
    index
        .iter()
        .zip(x)
        .enumerate()
        .map(|(i, (&k, &xi))| (T::lit(k as f64) * xi / T::lit(d.scale(i))).cos())
        .fold(T::one(), |a, b| a * b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplicityReport {
    pub simple: bool,
    /// Smallest eigenvalue with multiplicity > 1, if any was found.
    pub first_violation: Option<String>,
    /// Whether the answer rests on the incommensurability flag rather than enumeration.
    pub from_flag: bool,
}

/// Whether every eigenvalue of a rectangle is simple (within `cutoff` when
/// decided by enumeration).
pub fn simplicity_report(d: &BoxDomain, cutoff: &Rational) -> Result<SimplicityReport> {
    if d.dim() != 2 {
        return Err(Error::Contract("simplicity report is defined for rectangles".into()));
    }
    if d.incommensurable {
        return Ok(SimplicityReport { simple: true, first_violation: None, from_flag: true });
    }
    let first = neumann_spectrum(d, cutoff)?.into_iter().find(|e| e.multiplicity() > 1);
    Ok(SimplicityReport {
        simple: first.is_none(),
        first_violation: first.map(|e| format_rational(&e.value)),
        from_flag: false,
    })
}

/// `dim V_{-Δ}(β)`, zero when `β` is not an eigenvalue.
pub fn multiplicity_of(spectrum: &[EigenvalueEntry], beta: &Rational) -> usize {
    spectrum
        .binary_search_by(|e| e.value.cmp(beta))
        .map(|i| spectrum[i].multiplicity())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn interval_spectrum() {
        let s = neumann_spectrum(&BoxDomain::interval(), &q(50, 1)).unwrap();
        let values: Vec<Rational> = s.iter().map(|e| e.value.clone()).collect();
        assert_eq!(values, (0..=7).map(|k| q(k * k, 1)).collect::<Vec<_>>());
        assert!(s.iter().all(|e| e.multiplicity() == 1));
    }

    #[test]
    fn square_spectrum_head() {
        let s = neumann_spectrum(&BoxDomain::square(), &q(5, 1)).unwrap();
        let got: Vec<(Rational, usize)> = s.iter().map(|e| (e.value.clone(), e.multiplicity())).collect();
        assert_eq!(got, vec![(q(0, 1), 1), (q(1, 1), 2), (q(2, 1), 1), (q(4, 1), 2), (q(5, 1), 2)]);
        assert_eq!(s[1].indices, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn rectangle_one_two() {
        let d = BoxDomain::new(vec![q(1, 1), q(2, 1)], false).unwrap();
        let s = neumann_spectrum(&d, &q(3, 1)).unwrap();
        let one = s.iter().find(|e| e.value == q(1, 1)).unwrap();
        assert_eq!(one.indices, vec![vec![1, 0]]);
        // 2k² + m² = 9 has the solutions (0,3) and (2,1): the ratio of
        // squared sides is rational, so multiplicities do occur.
        let r = simplicity_report(&d, &q(50, 1)).unwrap();
        assert!(!r.simple && !r.from_flag);
        assert_eq!(r.first_violation.as_deref(), Some("9/2"));
    }

    #[test]
    fn simplicity_examples() {
        let flagged = BoxDomain::new(vec![q(1, 1), q(2, 1)], true).unwrap();
        assert!(simplicity_report(&flagged, &q(10, 1)).unwrap().simple);
        let r = simplicity_report(&BoxDomain::square(), &q(10, 1)).unwrap();
        assert_eq!((r.simple, r.first_violation.as_deref()), (false, Some("1")));
        assert!(simplicity_report(&BoxDomain::interval(), &q(10, 1)).is_err());
    }

    #[test]
    fn eigenfunction_values() {
        let d = BoxDomain::interval();
        let s = neumann_spectrum(&d, &q(4, 1)).unwrap();
        let pi = std::f64::consts::PI;
        assert!((eigenfunction_eval(&s[0], &d, &[0], &[1.3]).unwrap() - 1.0).abs() < 1e-15);
        assert!((eigenfunction_eval(&s[1], &d, &[1], &[0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((eigenfunction_eval(&s[1], &d, &[1], &[pi]).unwrap() + 1.0).abs() < 1e-15);
        assert!(eigenfunction_eval(&s[1], &d, &[2], &[0.0]).is_err());

        let sq = BoxDomain::square();
        let s = neumann_spectrum(&sq, &q(2, 1)).unwrap();
        let mid = eigenfunction_eval(&s[2], &sq, &[1, 1], &[pi / 2.0, pi / 2.0]).unwrap();
        assert!(mid.abs() < 1e-15);
    }

    #[test]
    fn size_limit_and_bad_cutoff() {
        let d = BoxDomain::new(vec![q(1, 1); 3], false).unwrap();
        assert!(matches!(neumann_spectrum(&d, &q(1_000_000, 1)), Err(Error::SizeLimit(_))));
        assert!(neumann_spectrum(&d, &q(0, 1)).is_err());
    }

    #[test]
    fn eigenfunctions_are_orthogonal() {
        // Composite Simpson on a rectangle with s² = (1, 2); exact to well
        // below 1e-10 for these low frequencies at this resolution.
        let d = BoxDomain::new(vec![q(1, 1), q(2, 1)], false).unwrap();
        let s = neumann_spectrum(&d, &q(3, 1)).unwrap();
        let modes: Vec<Vec<u32>> = s.iter().flat_map(|e| e.indices.clone()).collect();
        let n = 400;
        let (lx, ly) = (d.side_length(0), d.side_length(1));
        let simpson = |i: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        for a in 0..modes.len() {
            for b in a + 1..modes.len() {
                let mut sum = 0.0;
                for i in 0..=n {
                    for j in 0..=n {
                        let x = [lx * i as f64 / n as f64, ly * j as f64 / n as f64];
                        sum += simpson(i) * simpson(j) * cosine_mode(&d, &modes[a], &x) * cosine_mode(&d, &modes[b], &x);
                    }
                }
                let integral = sum * (lx / n as f64 / 3.0) * (ly / n as f64 / 3.0);
                assert!(integral.abs() < 1e-10, "{:?} {:?}: {integral}", modes[a], modes[b]);
            }
        }
    }

    proptest! {
        #[test]
        fn exact_grouping_matches_float_equality(a in 1i64..6, b in 1i64..6, c in 1i64..4) {
            let d = BoxDomain::new(vec![q(a, c), q(b, 1)], false).unwrap();
            let s = neumann_spectrum(&d, &q(20, 1)).unwrap();
            // Floats of distinct groups never coincide; members of a group share one float.
            for w in s.windows(2) {
                prop_assert!(w[0].value_float < w[1].value_float);
            }
            for e in &s {
                for k in &e.indices {
                    prop_assert_eq!(&d.eigenvalue(k), &e.value);
                }
            }
        }

        #[test]
        fn counting_function_is_monotone(x in 1i64..40, y in 1i64..40) {
            let d = BoxDomain::square();
            let (lo, hi) = (x.min(y), x.max(y));
            let count = |c: i64| neumann_spectrum(&d, &q(c, 1)).unwrap().iter().map(|e| e.multiplicity()).sum::<usize>();
            prop_assert!(count(lo) <= count(hi));
        }
    }
}

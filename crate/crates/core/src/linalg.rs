//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::scalar::Real;

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending and
/// eigenvector signs fixed (largest-magnitude entry positive).
pub fn sym_eigen<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * T::lit(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        normalize_sign(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

pub fn normalize_sign<T: Real>(v: &mut DVector<T>) {
    let mut best = T::zero();
    let mut pick = T::zero();
    for &x in v.iter() {
        // Ties resolved toward the earlier entry.
        if x.abs() > best + T::tol(1e-12) {
            best = x.abs();
            pick = x;
        }
    }
    if pick < T::zero() {
        v.neg_mut();
    }
}

/// Orthonormal basis (as columns) of the range of a symmetric projector.
/// `rank` is decided by the caller, typically from the trace.
pub fn projector_basis<T: Real>(p: &DMatrix<T>, rank: usize) -> DMatrix<T> {
    let n = p.nrows();
    if rank == 0 {
        return DMatrix::zeros(n, 0);
    }
    let (_, vectors) = sym_eigen(p);
    let cols: Vec<DVector<T>> = (n - rank..n).map(|c| vectors.column(c).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Orthonormal basis of the orthogonal complement of the span of `q`'s
/// orthonormal columns.
pub fn complement_basis<T: Real>(q: &DMatrix<T>) -> DMatrix<T> {
    let n = q.nrows();
    let p = DMatrix::<T>::identity(n, n) - q * q.transpose();
    projector_basis(&p, n - q.ncols())
}

/// Rank of a projector from its trace, failing if the trace is not close to
/// an integer.
pub fn projector_rank<T: Real>(p: &DMatrix<T>, what: &str) -> crate::Result<usize> {
    let trace = p.trace().as_f64();
    let rank = trace.round();
    if (trace - rank).abs() > 1e-6 || rank < 0.0 {
        return Err(crate::Error::NumericalDegeneracy(format!(
            "{what}: projector trace {trace} is not an integer"
        )));
    }
    Ok(rank as usize)
}

/// A cluster of numerically equal eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenCluster<T> {
    pub value: T,
    pub multiplicity: usize,
    /// Orthonormal eigenvectors spanning the eigenspace (columns).
    pub vectors: DMatrix<T>,
}

/// Symmetric eigensolve with eigenvalues clustered when their gap is below
/// `rel_gap * max(1, |λ|)`.
pub fn clustered_eigen<T: Real>(m: &DMatrix<T>, rel_gap: f64) -> Vec<EigenCluster<T>> {
    let (values, vectors) = sym_eigen(m);
    let mut clusters: Vec<(Vec<usize>, T)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some((members, _)) if {
                let last = values[*members.last().unwrap()];
                (v - last).abs() <= T::tol(rel_gap) * T::one().max(v.abs())
            } => members.push(i),
            _ => clusters.push((vec![i], v)),
        }
    }
    clusters
        .into_iter()
        .map(|(members, _)| {
            let sum = members.iter().fold(T::zero(), |acc, &i| acc + values[i]);
            let cols: Vec<DVector<T>> = members.iter().map(|&i| vectors.column(i).into_owned()).collect();
            EigenCluster {
                value: sum / T::lit(members.len() as f64),
                multiplicity: members.len(),
                vectors: DMatrix::from_columns(&cols),
            }
        })
        .collect()
}

/// Number of negative eigenvalues of a symmetric matrix.
pub fn negative_count<T: Real>(m: &DMatrix<T>, tol: f64) -> usize {
    sym_eigen(m).0.into_iter().filter(|&v| v < -T::tol(tol)).count()
}

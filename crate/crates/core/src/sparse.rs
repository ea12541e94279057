//! Triplet assembly, compressed-column storage and the sparse direct solve.

use faer::prelude::Solve;
use serde::{Deserialize, Serialize};
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Unordered `(row, col, value)` entries; duplicates are summed on compression.
#[derive(Debug, Clone, Default)]
pub struct TripletList {
    pub n_rows: usize,
    pub n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletList {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        TripletList {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, cap: usize) -> Self {
        TripletList {
            n_rows,
            n_cols,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    pub fn extend(&mut self, other: &TripletList) {
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Compress to CSC. Entries are sorted first, so the result does not
    /// depend on the order in which triplets were pushed.
    pub fn to_csc(&self) -> CscMatrix {
        let mut sorted = self.entries.clone();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)).then(a.2.total_cmp(&b.2)));
        let mut col_ptr = vec![0usize; self.n_cols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..self.n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        CscMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_ptr,
            row_idx,
            values,
        }
    }
}

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn identity(n: usize) -> Self {
        CscMatrix {
            n_rows: n,
            n_cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.row_idx[range.clone()].binary_search(&row) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_add(x, &mut y);
        y
    }

    /// `y = |A| x`, entrywise absolute values; bounds the rounding error of `A x`.
    pub fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for (c, &xc) in x.iter().enumerate() {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += self.values[k].abs() * xc;
            }
        }
        y
    }

    /// `y += A x`.
    pub fn mul_vec_add(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for c in 0..self.n_cols {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += self.values[k] * xc;
            }
        }
    }

    /// Entries as triplets in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_cols).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    pub fn to_triplets(&self) -> TripletList {
        let mut t = TripletList::with_capacity(self.n_rows, self.n_cols, self.nnz());
        for (r, c, v) in self.triplets() {
            t.push(r, c, v);
        }
        t
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut t = TripletList::with_capacity(self.n_cols, self.n_rows, self.nnz());
        for (r, c, v) in self.triplets() {
            t.push(c, r, v);
        }
        t.to_csc()
    }

    /// `self + other`; shapes must agree.
    pub fn add(&self, other: &CscMatrix) -> CscMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut t = self.to_triplets();
        t.extend(&other.to_triplets());
        t.to_csc()
    }

    /// Max-norm of the entries.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n_rows];
        for (r, _, v) in self.triplets() {
            rows[r] += v.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Dense row-major copy, for small matrices.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, c, v) in self.triplets() {
            d[r][c] += v;
        }
        d
    }
}

/// Statistics of a direct solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolveStats {
    pub n: usize,
    pub nnz: usize,
    /// `‖Ax − b‖₂ / ‖b‖₂` (absolute when `b = 0`).
    pub relative_residual: f64,
}

/// Relative residual above which a solve is reported as singular.
const SINGULAR_RESIDUAL: f64 = 1e-8;
/// `‖A‖∞ ‖x‖∞ / ‖b‖∞` above which a solve is reported as singular.
const SINGULAR_GROWTH: f64 = 1e15;

/// Solve `A x = b` by sparse LU with partial pivoting.
///
/// Structural singularity, non-finite output, an excessive residual or an
/// exploding solution are all reported as [`Error::SingularSystem`].
pub fn solve_linear(a: &CscMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearSolveStats)> {
    if a.n_rows != a.n_cols {
        return Err(Error::invalid(format!(
            "linear solve needs a square matrix, got {}x{}",
            a.n_rows, a.n_cols
        )));
    }
    if b.len() != a.n_rows {
        return Err(Error::invalid(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            a.n_rows
        )));
    }
    let n = a.n_rows;
    if n == 0 {
        let stats = LinearSolveStats { n, nnz: 0, relative_residual: 0.0 };
        return Ok((Vec::new(), stats));
    }
    let triplets: Vec<Triplet<usize, usize, f64>> =
        a.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::SingularSystem(format!("matrix construction failed: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::SingularSystem(format!("LU factorization failed: {e:?}")))?;
    let rhs = faer::Col::<f64>::from_fn(n, |i| b[i]);
    let sol = lu.solve(&rhs);
    let x: Vec<f64> = (0..n).map(|i| sol[i]).collect();

    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("solution is not finite".into()));
    }
    let ax = a.mul_vec(&x);
    let res = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let relative_residual = if bnorm > 0.0 { res / bnorm } else { res };
    if relative_residual > SINGULAR_RESIDUAL {
        return Err(Error::SingularSystem(format!(
            "relative residual {relative_residual:.3e} after factorization"
        )));
    }
    let b_inf = b.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let x_inf = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if b_inf > 0.0 && a.norm_inf() * x_inf / b_inf > SINGULAR_GROWTH {
        return Err(Error::SingularSystem(format!(
            "solution growth {:.3e} indicates a (near) singular matrix",
            a.norm_inf() * x_inf / b_inf
        )));
    }
    let stats = LinearSolveStats {
        n,
        nnz: a.nnz(),
        relative_residual,
    };
    Ok((x, stats))
}

/// Whether a symmetric matrix is positive definite, by attempting a sparse
/// Cholesky factorization of its lower triangle.
pub fn is_positive_definite(a: &CscMatrix) -> bool {
    if a.n_rows != a.n_cols {
        return false;
    }
    let triplets: Vec<Triplet<usize, usize, f64>> = a
        .triplets()
        .filter(|(r, c, _)| r >= c)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    match SparseColMat::<usize, f64>::try_new_from_triplets(a.n_rows, a.n_cols, &triplets) {
        Ok(m) => m.sp_cholesky(faer::Side::Lower).is_ok(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_order_is_irrelevant() {
        let mut a = TripletList::new(3, 3);
        a.push(2, 1, 1.0);
        a.push(0, 0, 2.0);
        a.push(2, 1, 0.5);
        let mut b = TripletList::new(3, 3);
        b.push(2, 1, 0.5);
        b.push(2, 1, 1.0);
        b.push(0, 0, 2.0);
        let (ca, cb) = (a.to_csc(), b.to_csc());
        assert_eq!(ca, cb);
        assert_eq!(ca.get(2, 1), 1.5);
        assert_eq!(ca.get(1, 2), 0.0);
        assert_eq!(ca.nnz(), 2);
    }

    #[test]
    fn identity_solve() {
        let a = CscMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let (x, stats) = solve_linear(&a, &b).unwrap();
        assert_eq!(x, b);
        assert!(stats.relative_residual < 1e-15);
    }

    #[test]
    fn nonsymmetric_solve() {
        let mut t = TripletList::new(3, 3);
        for (r, c, v) in [(0, 0, 0.0), (0, 1, 2.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 3.0), (0, 2, 1.0)] {
            t.push(r, c, v);
        }
        let a = t.to_csc();
        let x_true = [1.0, 2.0, -1.0];
        let b = a.mul_vec(&x_true);
        let (x, _) = solve_linear(&a, &b).unwrap();
        for (p, q) in x.iter().zip(x_true) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut t = TripletList::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        let a = t.to_csc();
        assert!(matches!(solve_linear(&a, &[1.0, 0.0]), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn abs_product_bounds_the_product() {
        let mut t = TripletList::new(2, 2);
        t.push(0, 0, 2.0);
        t.push(0, 1, -3.0);
        t.push(1, 1, -1.0);
        let a = t.to_csc();
        assert_eq!(a.abs_mul_vec(&[1.0, 2.0]), vec![8.0, 2.0]);
        assert_eq!(a.mul_vec(&[1.0, 2.0]), vec![-4.0, -2.0]);
    }

    #[test]
    fn definiteness() {
        let mut t = TripletList::new(2, 2);
        t.push(0, 0, 2.0);
        t.push(1, 1, 2.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        assert!(is_positive_definite(&t.to_csc()));
        t.push(0, 1, 2.0);
        t.push(1, 0, 2.0);
        assert!(!is_positive_definite(&t.to_csc()));
    }

    #[test]
    fn transpose_and_add() {
        let mut t = TripletList::new(2, 3);
        t.push(0, 2, 4.0);
        t.push(1, 0, -1.0);
        let a = t.to_csc();
        let at = a.transpose();
        assert_eq!((at.n_rows, at.n_cols), (3, 2));
        assert_eq!(at.get(2, 0), 4.0);
        let s = a.add(&a);
        assert_eq!(s.get(1, 0), -2.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, -1.0]);
    }
}

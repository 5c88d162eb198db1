//! Compressed sparse row storage and a sparse Cholesky wrapper.
//!
//! Assembly goes through [`TripletBuilder`], which merges duplicates in a
//! fixed order so the resulting matrices do not depend on thread scheduling.
//! Factorizations are delegated to `faer`.

use std::ops::{Add, AddAssign, Mul, Sub};

use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::traits::ComplexField;
use faer::{Mat, Side};
use num_complex::Complex64;

/// Field of matrix entries: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Default
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + ComplexField
    + 'static
{
    fn conj_s(self) -> Self;
    fn abs2(self) -> f64;
    fn from_f64(x: f64) -> Self;
    fn real_part(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    fn conj_s(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn real_part(self) -> f64 {
        self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    fn conj_s(self) -> Self {
        self.conj()
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn real_part(self) -> f64 {
        self.re
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => T::default(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::default(); self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_cols);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::default();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    /// `xᴴ A y`.
    pub fn form(&self, x: &[T], y: &[T]) -> T {
        let ay = self.matvec(y);
        dot(x, &ay)
    }

    /// `max |A_ij - conj(A_ji)| / max |A_ij|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut scale: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                scale = scale.max(v.abs2().sqrt());
                defect = defect.max((v - self.get(j, i).conj_s()).abs2().sqrt());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }

    /// Linear combination `a·self + b·other` of two matrices of equal shape.
    pub fn combine(&self, a: T, other: &CsrMatrix<T>, b: T) -> CsrMatrix<T> {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut builder = TripletBuilder::new(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                builder.push(i, j, a * v);
            }
            for (j, v) in other.row(i) {
                builder.push(i, j, b * v);
            }
        }
        builder.build()
    }

    pub fn to_dense(&self) -> Mat<T> {
        let mut m = Mat::<T>::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, T>, String> {
        let triplets: Vec<Triplet<usize, usize, T>> = (0..self.n_rows)
            .flat_map(|i| self.row(i).map(move |(j, v)| Triplet::new(i, j, v)))
            .collect();
        SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &triplets)
            .map_err(|e| format!("{e:?}"))
    }
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone)]
pub struct TripletBuilder<T> {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletBuilder<T> {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, capacity: usize) -> Self {
        Self { n_rows, n_cols, entries: Vec::with_capacity(capacity) }
    }

    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> CsrMatrix<T> {
        // stable sort keeps the summation order of duplicates fixed
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr, col_idx, values }
    }
}

/// `xᴴ y`.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut acc = T::default();
    for (a, b) in x.iter().zip(y) {
        acc += a.conj_s() * *b;
    }
    acc
}

pub fn norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
}

#[derive(Debug, thiserror::Error)]
pub enum FactorError {
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("sparse structure error: {0}")]
    Structure(String),
}

/// Sparse `LLᴴ` factorization of a Hermitian positive definite matrix.
pub struct SparseCholesky<T: Scalar> {
    n: usize,
    llt: Llt<usize, T>,
}

impl<T: Scalar> SparseCholesky<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self, FactorError> {
        assert_eq!(a.n_rows, a.n_cols);
        let mat = a.to_faer().map_err(FactorError::Structure)?;
        let llt = mat
            .sp_cholesky(Side::Lower)
            .map_err(|e| FactorError::NotPositiveDefinite(format!("{e:?}")))?;
        Ok(Self { n: a.n_rows, llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut cols = vec![rhs.to_vec()];
        self.solve_columns(&mut cols);
        cols.pop().unwrap()
    }

    /// Solves in place for every column of `cols`.
    pub fn solve_columns(&self, cols: &mut [Vec<T>]) {
        use faer::linalg::solvers::Solve;
        if cols.is_empty() {
            return;
        }
        let mut rhs = Mat::<T>::from_fn(self.n, cols.len(), |i, j| cols[j][i]);
        self.llt.solve_in_place(rhs.as_mut());
        for (j, col) in cols.iter_mut().enumerate() {
            for (i, v) in col.iter_mut().enumerate() {
                *v = rhs[(i, j)];
            }
        }
    }
}

/// Runs `faer` kernels single-threaded: parallelism lives at the level of
/// independent Floquet parameters and results must not depend on the thread
/// count.
pub fn use_sequential_kernels() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matio::SpectralNorms;

/// Compressed sparse row storage with sorted, duplicate-free column indices
/// and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Validates the raw arrays against the CSR invariants.
    pub fn try_new(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 {
            return Err(Error::Dimension {
                expected: nrows + 1,
                got: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() || row_ptr[nrows] != values.len() || row_ptr[0] != 0 {
            return Err(Error::invalid("CSR arrays have inconsistent lengths"));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if hi < lo {
                return Err(Error::invalid(format!("row pointer decreases at row {i}")));
            }
            let cols = &col_idx[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "column indices of row {i} are not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::invalid(format!("column index out of range in row {i}")));
            }
        }
        if values.contains(&0.0) {
            return Err(Error::invalid("explicit zero stored in CSR values"));
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds CSR storage from 0-based triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        if let Some(&(i, j, _)) = t.iter().find(|&&(i, j, _)| i >= nrows || j >= ncols) {
            return Err(Error::invalid(format!(
                "entry ({i}, {j}) outside a {nrows}x{ncols} matrix"
            )));
        }
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut rows_of = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            if rows_of.last() == Some(&i) && col_idx.last() == Some(&j) {
                *values.last_mut().unwrap() += v;
            } else {
                rows_of.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        let mut keep_rows = Vec::with_capacity(values.len());
        let mut keep_cols = Vec::with_capacity(values.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((i, j), v) in rows_of.into_iter().zip(col_idx).zip(values) {
            if v != 0.0 {
                keep_rows.push(i);
                keep_cols.push(j);
                keep_vals.push(v);
            }
        }
        for &i in &keep_rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self::try_new(nrows, ncols, row_ptr, keep_cols, keep_vals)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates over the stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    /// Column-major dense storage.
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

/// A real matrix, dense or CSR, with a lazily filled cache of its extreme
/// singular values.
///
/// The handle is immutable after construction. The norm cache is written at
/// most once; concurrent readers see either nothing or the final value.
#[derive(Debug, Clone)]
pub struct MatrixHandle {
    storage: Storage,
    pub(crate) norms: OnceLock<SpectralNorms>,
}

impl PartialEq for MatrixHandle {
    fn eq(&self, other: &Self) -> bool {
        self.storage == other.storage
    }
}

impl MatrixHandle {
    pub fn dense(m: DMatrix<f64>) -> Self {
        MatrixHandle {
            storage: Storage::Dense(m),
            norms: OnceLock::new(),
        }
    }

    pub fn sparse(m: CsrMatrix) -> Self {
        MatrixHandle {
            storage: Storage::Sparse(m),
            norms: OnceLock::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::dense(DMatrix::identity(n, n))
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn nrows(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.ncols(),
            Storage::Sparse(m) => m.ncols(),
        }
    }

    /// Number of stored entries (every entry for dense storage).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.len(),
            Storage::Sparse(m) => m.nnz(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// `y = A x`
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols());
        assert_eq!(y.len(), self.nrows());
        match &self.storage {
            Storage::Dense(a) => {
                y.fill(0.0);
                for (j, &xj) in x.iter().enumerate() {
                    if xj != 0.0 {
                        crate::vecops::axpy(xj, a.column(j).as_slice(), y);
                    }
                }
            }
            Storage::Sparse(a) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = a.row(i).map(|(j, v)| v * x[j]).sum();
                }
            }
        }
    }

    /// `x = Aᵀ y`
    pub fn tr_mul_vec_into(&self, y: &[f64], x: &mut [f64]) {
        assert_eq!(y.len(), self.nrows());
        assert_eq!(x.len(), self.ncols());
        match &self.storage {
            Storage::Dense(a) => {
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = crate::vecops::dot(a.column(j).as_slice(), y);
                }
            }
            Storage::Sparse(a) => {
                x.fill(0.0);
                for (i, &yi) in y.iter().enumerate() {
                    if yi != 0.0 {
                        for (j, v) in a.row(i) {
                            x[j] += v * yi;
                        }
                    }
                }
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ncols()];
        self.tr_mul_vec_into(y, &mut x);
        x
    }

    /// Residual `A x - b`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = self.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= bi;
        }
        r
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }

    /// Entries as 0-based `(row, col, value)`; dense storage yields every
    /// nonzero in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            Storage::Dense(m) => {
                let mut t = Vec::new();
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        let v = m[(i, j)];
                        if v != 0.0 {
                            t.push((i, j, v));
                        }
                    }
                }
                t
            }
            Storage::Sparse(m) => m.triplets().collect(),
        }
    }

    /// Cached norms, if [`MatrixHandle::spectral_norms`] already ran.
    pub fn cached_norms(&self) -> Option<&SpectralNorms> {
        self.norms.get()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_are_sorted_summed_and_zero_free() {
        let m = CsrMatrix::from_triplets(
            3,
            3,
            vec![(2, 1, 1.0), (0, 2, 2.0), (0, 0, 1.0), (2, 1, 2.0), (1, 1, 0.0)],
        )
        .unwrap();
        assert_eq!(m.row_ptr(), &[0, 2, 2, 3]);
        assert_eq!(m.col_idx(), &[0, 2, 1]);
        assert_eq!(m.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn csr_rejects_unsorted_columns_and_zeros() {
        assert!(CsrMatrix::try_new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::try_new(1, 3, vec![0, 1], vec![1], vec![0.0]).is_err());
        assert!(CsrMatrix::try_new(2, 3, vec![0, 1, 0], vec![1], vec![1.0]).is_err());
    }

    #[test]
    fn dense_and_sparse_products_agree() {
        let t = vec![(0, 0, 1.0), (1, 2, -2.0), (3, 1, 4.0), (2, 0, 0.5)];
        let s = MatrixHandle::sparse(CsrMatrix::from_triplets(4, 3, t).unwrap());
        let d = MatrixHandle::dense(s.to_dense());
        let x = [1.0, 2.0, 3.0];
        let y = [1.0, -1.0, 2.0, 0.5];
        assert_eq!(s.mul_vec(&x), d.mul_vec(&x));
        assert_eq!(s.tr_mul_vec(&y), d.tr_mul_vec(&y));
    }
}

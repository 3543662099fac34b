//! Row-major compressed sparse storage.

use crate::error::{invalid, Result};

/// Sparse real matrix stored row by row. Each row holds `(column, value)`
/// pairs sorted by strictly increasing column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRows {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, indptr: vec![0], indices: Vec::new(), values: Vec::new() }
    }

    /// Builds a matrix from explicit rows, validating column order, range and
    /// finiteness.
    pub fn from_rows<I>(ncols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<(usize, f64)>>,
    {
        let mut out = Self::new(ncols);
        for (r, row) in rows.into_iter().enumerate() {
            for (k, &(c, v)) in row.iter().enumerate() {
                if c >= ncols {
                    return Err(invalid(format!("row {r}: column {c} out of range (ncols {ncols})")));
                }
                if !v.is_finite() {
                    return Err(invalid(format!("row {r}: non-finite value {v}")));
                }
                if k > 0 && row[k - 1].0 >= c {
                    return Err(invalid(format!("row {r}: columns not strictly increasing")));
                }
            }
            out.push_row_unchecked(&row);
        }
        Ok(out)
    }

    pub(crate) fn push_row_unchecked(&mut self, row: &[(usize, f64)]) {
        debug_assert!(row.windows(2).all(|p| p[0].0 < p[1].0));
        for &(c, v) in row {
            self.indices.push(c);
            self.values.push(v);
        }
        self.indptr.push(self.indices.len());
    }

    /// Appends the row `scale * (e_plus - e_minus)`.
    pub(crate) fn push_difference(&mut self, plus: usize, minus: usize, scale: f64) {
        if plus < minus {
            self.push_row_unchecked(&[(plus, scale), (minus, -scale)]);
        } else {
            self.push_row_unchecked(&[(minus, -scale), (plus, scale)]);
        }
    }

    pub fn nrows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn row(&self, j: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[j], self.indptr[j + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn row_entries(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (idx, val) = self.row(j);
        idx.iter().copied().zip(val.iter().copied())
    }

    /// `<a_j, x>`.
    #[inline]
    pub fn row_dot(&self, j: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(j);
        idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum()
    }

    pub fn row_is_zero(&self, j: usize) -> bool {
        self.row(j).1.iter().all(|&v| v == 0.0)
    }

    /// Copy of the rows listed in `rows`, in that order, each scaled by the
    /// matching entry of `scales`.
    pub(crate) fn select_scaled(&self, rows: &[usize], scales: &[f64]) -> Self {
        let mut out = Self::new(self.ncols);
        for (&j, &s) in rows.iter().zip(scales) {
            let (idx, val) = self.row(j);
            out.indices.extend_from_slice(idx);
            out.values.extend(val.iter().map(|v| v * s));
            out.indptr.push(out.indices.len());
        }
        out
    }

    /// Dense row-major copy, mostly for tests and small oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.nrows())
            .map(|j| {
                let mut d = vec![0.0; self.ncols];
                for (c, v) in self.row_entries(j) {
                    d[c] = v;
                }
                d
            })
            .collect()
    }
}

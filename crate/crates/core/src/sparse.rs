//! Compressed-row sparse matrices built from triplet lists.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Accumulates `(row, col, value)` contributions; duplicates are summed on
/// finalization.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Sorts by `(row, col)` (stable, so duplicates are summed in insertion
    /// order) and compresses.
    pub fn finalize(mut self, symmetric: bool) -> SparseMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
            symmetric,
        }
    }
}

/// Real sparse matrix in CSR layout with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    /// Structural hint set by the assembler; not verified.
    pub symmetric: bool,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).finalize(true)
    }

    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::with_capacity(n, n, n);
        for i in 0..n {
            b.push(i, i, 1.0);
        }
        b.finalize(true)
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

    /// Iterates over the stored entries of `row` as `(col, value)`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[span.clone()].binary_search(&col) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `Aᵀ x` without forming the transpose.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        (0..self.nrows)
            .map(|r| x[r] * self.row(r).map(|(c, v)| v * x[c]).sum::<f64>())
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Entrywise sum; the sparsity pattern is the union of both patterns.
    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} + {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for (r, c, v) in self.triplets().chain(other.triplets()) {
            b.push(r, c, v);
        }
        Ok(b.finalize(self.symmetric && other.symmetric))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (r, c, v) in self.triplets() {
            b.push(c, r, v);
        }
        b.finalize(self.symmetric)
    }

    /// Exact entrywise check of `A = Aᵀ`.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && self.triplets().all(|(r, c, v)| self.get(c, r) == v)
    }

    /// Row-major dense copy, for small-scale checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    pub fn matrix_market_string(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(out, "{} {} {}", r + 1, c + 1, v);
        }
        out
    }

    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.matrix_market_string()).map_err(|e| Error::io(path, e))
    }
}

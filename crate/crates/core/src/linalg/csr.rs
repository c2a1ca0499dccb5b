use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Collects `(row, col, value)` contributions. Duplicates are summed when the
/// matrix is built, after sorting by index, so the result does not depend on
/// the order in which contributions were pushed.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        // total order on (row, col, value bits) makes the summation order canonical
        self.entries
            .sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut row_ptr = vec![0usize; self.rows + 1];
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
        for r in 0..self.rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterate `(col, value)` over the stored entries of `row`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[span.clone()].binary_search(&col) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in CSR product");
        (0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `selfᵀ x`.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(
            x.len(),
            self.rows,
            "dimension mismatch in CSR transpose product"
        );
        let mut y = vec![0.0; self.cols];
        for (r, xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    /// Bilinear form `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.rows)
            .map(|r| x[r] * self.row(r).map(|(c, v)| v * y[c]).sum::<f64>())
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Entry-wise sum of equally shaped matrices.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut b = TripletBuilder::new(self.rows, self.cols);
        for m in [self, other] {
            for r in 0..m.rows {
                for (c, v) in m.row(r) {
                    b.push(r, c, v);
                }
            }
        }
        b.build()
    }

    /// `Tᵀ diag(w) T` for a sampling operator `T` and quadrature weights `w`.
    pub fn weighted_gram(&self, w: &[f64]) -> CsrMatrix {
        assert_eq!(w.len(), self.rows);
        let mut b = TripletBuilder::new(self.cols, self.cols);
        for (r, wr) in w.iter().enumerate() {
            let entries: Vec<(usize, f64)> = self.row(r).collect();
            for &(i, vi) in &entries {
                for &(j, vj) in &entries {
                    b.push(i, j, wr * vi * vj);
                }
            }
        }
        b.build()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::new(self.cols, self.rows);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                b.push(c, r, v);
            }
        }
        b.build()
    }

    /// `self x` given `transposed = selfᵀ`, touching only the nonzeros of `x`.
    pub fn mul_sparse_vec(transposed: &CsrMatrix, x: &[f64]) -> Vec<f64> {
        assert_eq!(
            x.len(),
            transposed.rows,
            "dimension mismatch in CSR product"
        );
        let mut y = vec![0.0; transposed.cols];
        for (k, xk) in x.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            for (i, t) in transposed.row(k) {
                y[i] += t * xk;
            }
        }
        y
    }

    /// Columns with at least one stored nonzero, ascending.
    pub fn nonzero_columns(&self) -> Vec<usize> {
        let mut seen = vec![false; self.cols];
        for (c, v) in self.col_idx.iter().zip(&self.values) {
            if *v != 0.0 {
                seen[*c] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(c, _)| c)
            .collect()
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                worst = worst.max(math::abs(v - self.get(c, r)));
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)))
    }

    /// Dense copy of the submatrix with the given rows and columns.
    pub fn dense_block(&self, rows: &[usize], cols: &[usize]) -> nalgebra::DMatrix<f64> {
        let mut pos = vec![usize::MAX; self.cols];
        for (k, &c) in cols.iter().enumerate() {
            pos[c] = k;
        }
        let mut m = nalgebra::DMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    m[(i, pos[c])] = v;
                }
            }
        }
        m
    }

    /// Sparse copy of the submatrix with the given rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut pos = vec![usize::MAX; self.cols];
        for (k, &c) in cols.iter().enumerate() {
            pos[c] = k;
        }
        let mut b = TripletBuilder::new(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    b.push(i, pos[c], v);
                }
            }
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum_independently_of_push_order() {
        let mut a = TripletBuilder::new(2, 2);
        a.push(0, 0, 1.0);
        a.push(1, 1, 2.0);
        a.push(0, 0, 1e-17);
        a.push(0, 1, 3.0);
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 1, 3.0);
        b.push(0, 0, 1e-17);
        b.push(1, 1, 2.0);
        b.push(0, 0, 1.0);
        assert_eq!(a.build(), b.build());
    }

    #[test]
    fn products_agree_with_dense() {
        let mut t = TripletBuilder::new(2, 3);
        t.push(0, 0, 1.0);
        t.push(0, 2, 2.0);
        t.push(1, 1, -1.0);
        let m = t.build();
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![7.0, -2.0]);
        assert_eq!(m.mul_transpose_vec(&[1.0, 1.0]), vec![1.0, -1.0, 2.0]);
        let g = m.weighted_gram(&[2.0, 1.0]);
        assert_eq!(g.get(0, 2), 4.0);
        assert_eq!(g.get(2, 2), 8.0);
        assert_eq!(g.get(1, 1), 1.0);
        assert_eq!(m.nonzero_columns(), vec![0, 1, 2]);
        let x = [0.0, 2.0, 3.0];
        assert_eq!(CsrMatrix::mul_sparse_vec(&m.transpose(), &x), m.mul_vec(&x));
    }
}

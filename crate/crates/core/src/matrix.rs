//! Minimal dense row-major matrix.
//!
//! Just the handful of operations the training code needs, written so the
//! inner loops run over contiguous slices. No BLAS: at the scale this crate
//! targets (thousands of samples, tens of thousands of weights) plain loops
//! are fast enough and every arithmetic step stays auditable.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// New matrix made of the given rows of `self`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(indices.len(), self.cols);
        for (i, &src) in indices.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(src));
        }
        out
    }

    /// `self * rhs^T`, where `self` is m x k and `rhs` is n x k.
    ///
    /// This is the layout the forward pass wants: activations times a
    /// (out_dim, in_dim) weight matrix. Both operands are walked row-wise so
    /// the inner loop is a dot product of contiguous slices.
    pub fn matmul_nt(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.cols, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (j, oj) in o.iter_mut().enumerate() {
                let b = rhs.row(j);
                let mut acc = 0.0;
                for (x, y) in a.iter().zip(b) {
                    acc += x * y;
                }
                *oj = acc;
            }
        }
        out
    }

    /// `self * rhs`, where `self` is m x k and `rhs` is k x n.
    pub fn matmul_nn(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            for (k, &aik) in a.iter().enumerate() {
                let b = rhs.row(k);
                let o = out.row_mut(i);
                for (oj, bj) in o.iter_mut().zip(b) {
                    *oj += aik * bj;
                }
            }
        }
        out
    }

    /// `self^T * rhs`, where `self` is m x k and `rhs` is m x n.
    pub fn matmul_tn(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "outer dimensions differ");
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let b = rhs.row(i);
            for (k, &aik) in a.iter().enumerate() {
                let o = out.row_mut(k);
                for (oj, bj) in o.iter_mut().zip(b) {
                    *oj += aik * bj;
                }
            }
        }
        out
    }

    /// Add `bias` (length = cols) to every row.
    pub fn add_row_bias(&mut self, bias: &[f64]) {
        assert_eq!(bias.len(), self.cols, "bias length differs from cols");
        for r in 0..self.rows {
            for (v, b) in self.row_mut(r).iter_mut().zip(bias) {
                *v += b;
            }
        }
    }

    /// Sum of each column, as a vector of length cols.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(r)) {
                *s += v;
            }
        }
        sums
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise product, in place.
    pub fn hadamard_assign(&mut self, rhs: &Matrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a *= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Matrix::from_vec(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn matmul_nt_matches_hand_computation() {
        // a = [[1,2],[3,4]], b = [[5,6],[7,8]]  =>  a * b^T
        let a = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = m(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        let c = a.matmul_nt(&b);
        assert_eq!(c.data(), &[17.0, 23.0, 39.0, 53.0]);
    }

    #[test]
    fn matmul_variants_agree_on_transposes() {
        let a = m(2, 3, &[1.0, -2.0, 0.5, 3.0, 4.0, -1.0]);
        let b = m(4, 3, &[2.0, 0.0, 1.0, -1.0, 5.0, 2.0, 0.5, 0.5, 0.5, 3.0, -3.0, 1.0]);
        // a * b^T computed two ways: directly, and via nn against an
        // explicitly transposed copy of b.
        let mut bt = Matrix::zeros(3, 4);
        for i in 0..4 {
            for j in 0..3 {
                bt.set(j, i, b.get(i, j));
            }
        }
        let direct = a.matmul_nt(&b);
        let via_nn = a.matmul_nn(&bt);
        assert_eq!(direct, via_nn);

        // (a^T * b2) against explicit loops.
        let b2 = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let tn = a.matmul_tn(&b2);
        for k in 0..3 {
            for j in 0..2 {
                let want: f64 = (0..2).map(|i| a.get(i, k) * b2.get(i, j)).sum();
                assert!((tn.get(k, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bias_and_column_sums() {
        let mut a = m(2, 3, &[0.0; 6]);
        a.add_row_bias(&[1.0, 2.0, 3.0]);
        assert_eq!(a.row(1), &[1.0, 2.0, 3.0]);
        assert_eq!(a.column_sums(), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn select_rows_copies_in_order() {
        let a = m(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let s = a.select_rows(&[2, 0]);
        assert_eq!(s.data(), &[5.0, 6.0, 1.0, 2.0]);
    }
}

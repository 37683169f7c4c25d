use std::io::Write;

use crate::error::{Error, Result};

/// Square sparse matrix in compressed sparse row form with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed in
    /// input order.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= n || *c >= n) {
            return Err(Error::InvalidIndex {
                index: r.max(c),
                len: n,
            });
        }
        // stable sort keeps the summation order deterministic
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            triplets.extend(
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (i, j, *v)),
            );
        }
        Self::from_triplets(n, triplets)
    }

    pub fn dim(&self) -> usize {
        self.n
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

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Entrywise maximum of `|A - B|` over the union of both patterns.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                worst = worst.max((a - other.get(i, j)).abs());
            }
            for (j, b) in other.row(i) {
                worst = worst.max((b - self.get(i, j)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, a) in self.row(i) {
                row[j] = a;
            }
        }
        out
    }

    /// Matrix Market coordinate format (general, 1-based).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                writeln!(out, "{} {} {:.17e}", i + 1, j + 1, a)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_and_sort() {
        let m = CsrMatrix::from_triplets(
            3,
            vec![
                (2, 0, 1.0),
                (0, 2, 3.0),
                (0, 0, 1.0),
                (0, 2, -1.0),
                (1, 1, 5.0),
            ],
        )
        .unwrap();
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.col_idx(), &[0, 2, 1, 0]);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![3.0, 5.0, 1.0]);
        assert_eq!(m.max_asymmetry(), 1.0);
        assert!(CsrMatrix::from_triplets(2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn matrix_market_dump() {
        let m = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[1], "2 2 4");
        assert!(lines[2].starts_with("1 1 4.0"));
        assert_eq!(lines.len(), 6);
    }
}

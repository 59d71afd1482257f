use std::ops::{Index, IndexMut};

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn from_column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Matrix exponential by scaling and squaring: halve until the 1-norm is
    /// below 0.5, sum the Taylor series to machine precision, square back.
    pub fn expm(&self) -> Self {
        assert_eq!(self.rows, self.cols, "expm needs a square matrix");
        let n = self.rows;
        let norm = self.norm_one();
        let mut squarings = 0u32;
        while norm / 2f64.powi(squarings as i32) >= 0.5 {
            squarings += 1;
        }
        let scaled = self.scaled(1.0 / 2f64.powi(squarings as i32));
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=30 {
            term = term.matmul(&scaled).scaled(1.0 / k as f64);
            sum.add_scaled(&term, 1.0);
            if term.max_abs() <= f64::EPSILON * sum.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }

    /// Rank by Gaussian elimination with partial pivoting. A pivot counts
    /// when it exceeds `rel_tol` times the largest absolute entry of its
    /// column in the original matrix.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let mut m = self.clone();
        let col_scale: Vec<f64> = (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).fold(0.0, f64::max))
            .collect();
        let mut rank = 0;
        for j in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let (p, best) = (rank..m.rows)
                .map(|i| (i, m[(i, j)].abs()))
                .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if col_scale[j] == 0.0 || best <= rel_tol * col_scale[j] {
                continue;
            }
            m.swap_rows(rank, p);
            let pivot = m[(rank, j)];
            for i in rank + 1..m.rows {
                let factor = m[(i, j)] / pivot;
                if factor != 0.0 {
                    for k in j..m.cols {
                        let v = m[(rank, k)];
                        m[(i, k)] -= factor * v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.cols {
                self.data.swap(a * self.cols + k, b * self.cols + k);
            }
        }
    }

    /// Solves `self · x = rhs` by elimination with partial pivoting. Returns
    /// the solution and the ratio of largest to smallest pivot magnitude, an
    /// inexpensive condition estimate (infinite when singular).
    pub fn solve(&self, rhs: &[f64]) -> (Vec<f64>, f64) {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.len(), self.rows);
        let n = self.rows;
        let mut m = self.clone();
        let mut b = rhs.to_vec();
        let (mut pmax, mut pmin) = (0.0f64, f64::INFINITY);
        for j in 0..n {
            let p = (j..n)
                .max_by(|&x, &y| m[(x, j)].abs().total_cmp(&m[(y, j)].abs()))
                .unwrap();
            m.swap_rows(j, p);
            b.swap(j, p);
            let pivot = m[(j, j)];
            pmax = pmax.max(pivot.abs());
            pmin = pmin.min(pivot.abs());
            if pivot == 0.0 {
                return (vec![f64::NAN; n], f64::INFINITY);
            }
            for i in j + 1..n {
                let factor = m[(i, j)] / pivot;
                if factor != 0.0 {
                    for k in j..n {
                        let v = m[(j, k)];
                        m[(i, k)] -= factor * v;
                    }
                    b[i] -= factor * b[j];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| m[(i, k)] * x[k]).sum();
            x[i] = (b[i] - s) / m[(i, i)];
        }
        let cond = if n == 0 { 1.0 } else { pmax / pmin };
        (x, cond)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

//! Dense row-major matrices and a column-pivoting Householder QR.

use serde::{Deserialize, Serialize};

/// A pivot below this fraction of the largest pivot marks rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        self.row_iter().map(|r| dot(r, v)).collect()
    }

    /// Xᵀ v.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &w) in self.row_iter().zip(v) {
            for (o, x) in out.iter_mut().zip(row) {
                *o += x * w;
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Copy keeping only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, keep.len());
        for i in 0..self.rows {
            for (jj, &j) in keep.iter().enumerate() {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    /// Copy keeping only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &i in keep {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: keep.len(),
            cols: self.cols,
            data,
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Householder QR with column pivoting, A·P = Q·R.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    n: usize,
    p: usize,
    /// Column-major; R above the diagonal, reflectors below.
    a: Vec<f64>,
    /// Leading element of each reflector (the rest live below the diagonal).
    v0: Vec<f64>,
    beta: Vec<f64>,
    /// `perm[k]` = original column at pivoted position k.
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(x: &Matrix) -> Self {
        let (n, p) = (x.rows(), x.cols());
        let mut a = vec![0.0; n * p];
        for j in 0..p {
            for i in 0..n {
                a[j * n + i] = x.get(i, j);
            }
        }
        let mut perm: Vec<usize> = (0..p).collect();
        let mut v0 = vec![0.0; p.min(n)];
        let mut beta = vec![0.0; p.min(n)];
        let steps = p.min(n);
        let mut first_pivot = 0.0f64;
        let mut rank = steps;

        for k in 0..steps {
            // remaining column norms, recomputed to avoid downdating drift
            let (best, best_norm) = (k..p)
                .map(|j| (j, norm2(&a[j * n + k..j * n + n])))
                .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            if best != k {
                for i in 0..n {
                    a.swap(k * n + i, best * n + i);
                }
                perm.swap(k, best);
            }
            if k == 0 {
                first_pivot = best_norm;
            }
            if best_norm <= RANK_TOLERANCE * first_pivot || best_norm == 0.0 {
                rank = k;
                break;
            }

            // reflector for a[k.., k]
            let col = &mut a[k * n + k..k * n + n];
            let alpha = if col[0] >= 0.0 { -best_norm } else { best_norm };
            let head = col[0] - alpha;
            let vnorm2 = head * head + col[1..].iter().map(|x| x * x).sum::<f64>();
            let b = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };
            col[0] = alpha;
            v0[k] = head;
            beta[k] = b;

            for j in k + 1..p {
                let (left, right) = a.split_at_mut(j * n);
                let vk = &left[k * n + k..k * n + n];
                let cj = &mut right[k..n];
                let s = b * (head * cj[0] + dot(&vk[1..], &cj[1..]));
                cj[0] -= s * head;
                for (c, v) in cj[1..].iter_mut().zip(&vk[1..]) {
                    *c -= s * v;
                }
            }
        }

        PivotedQr {
            n,
            p,
            a,
            v0,
            beta,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.p
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        self.a[j * self.n + i]
    }

    /// Qᵀ y.
    pub fn qt_mul(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n);
        let mut out = y.to_vec();
        for k in 0..self.rank {
            let v = &self.a[k * self.n + k..k * self.n + self.n];
            let s = self.beta[k] * (self.v0[k] * out[k] + dot(&v[1..], &out[k + 1..]));
            out[k] -= s * self.v0[k];
            for (o, vi) in out[k + 1..].iter_mut().zip(&v[1..]) {
                *o -= s * vi;
            }
        }
        out
    }

    /// Solves R[..m, ..m] z = rhs[..m] by back substitution.
    fn back_substitute(&self, m: usize, rhs: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for (j, zj) in z.iter().enumerate().take(m).skip(i + 1) {
                s -= self.r(i, j) * zj;
            }
            z[i] = s / self.r(i, i);
        }
        z
    }

    /// Least-squares solution in original column order. Requires full rank.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        assert!(self.is_full_rank(), "solve on rank-deficient QR");
        let qty = self.qt_mul(y);
        let z = self.back_substitute(self.p, &qty);
        let mut b = vec![0.0; self.p];
        for (k, &orig) in self.perm.iter().enumerate() {
            b[orig] = z[k];
        }
        b
    }

    /// Diagonal of (XᵀX)⁻¹ in original column order. Requires full rank.
    pub fn xtx_inverse_diagonal(&self) -> Vec<f64> {
        assert!(self.is_full_rank());
        let p = self.p;
        // rows of R⁻¹: solve R Rinv = I column by column
        let mut rinv = vec![vec![0.0; p]; p];
        for c in 0..p {
            let mut e = vec![0.0; p];
            e[c] = 1.0;
            let col = self.back_substitute(p, &e);
            for (i, v) in col.into_iter().enumerate() {
                rinv[i][c] = v;
            }
        }
        let mut diag = vec![0.0; p];
        for (k, &orig) in self.perm.iter().enumerate() {
            diag[orig] = rinv[k].iter().map(|v| v * v).sum();
        }
        diag
    }

    /// Groups of linearly dependent columns (original indices, sorted):
    /// each column beyond the rank together with the independent columns it
    /// is expressed by.
    pub fn dependent_columns(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let r = self.rank;
        for k in r..self.p {
            let rhs: Vec<f64> = (0..r).map(|i| self.r(i, k)).collect();
            let coef = self.back_substitute(r, &rhs);
            let scale = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            out.push(self.perm[k]);
            for (i, c) in coef.iter().enumerate() {
                if c.abs() > 1e-8 * scale.max(1.0) {
                    out.push(self.perm[i]);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

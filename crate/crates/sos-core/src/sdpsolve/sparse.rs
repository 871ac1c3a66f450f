//! Minimal CSR sparse matrix used by the feasibility solver.

use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl SparseMat {
    /// Builds from per-row (column, value) lists; duplicate columns are summed.
    pub fn from_rows(rows: &[Vec<(usize, f64)>], cols: usize) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for row in rows {
            scratch.clear();
            scratch.extend_from_slice(row);
            scratch.sort_unstable_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < scratch.len() {
                let (c, mut v) = scratch[i];
                let mut j = i + 1;
                while j < scratch.len() && scratch[j].0 == c {
                    v += scratch[j].1;
                    j += 1;
                }
                if v != 0.0 {
                    indices.push(c as u32);
                    data.push(v);
                }
                i = j;
            }
            indptr.push(indices.len());
        }
        SparseMat { rows: rows.len(), cols, indptr, indices, data }
    }

    /// Builds a symmetric matrix from an upper-triangle triplet map.
    pub fn from_upper_triplets(n: usize, upper: &HashMap<(u32, u32), f64>) -> Self {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &v) in upper {
            per_row[i as usize].push((j as usize, v));
            if i != j {
                per_row[j as usize].push((i as usize, v));
            }
        }
        Self::from_rows(&per_row, n)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k] as usize];
            }
            out[r] = acc;
        }
    }

    pub fn tr_matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for r in 0..self.rows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                out[self.indices[k] as usize] += self.data[k] * xr;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows.min(self.cols)];
        for r in 0..d.len() {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.indices[k] as usize == r {
                    d[r] += self.data[k];
                }
            }
        }
        d
    }
}

/// Jacobi-preconditioned conjugate gradients for SPD systems given as a
/// matvec closure. Returns the iterate and its relative residual.
pub fn pcg(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    inv_diag: &[f64],
    tol: f64,
    max_iters: usize,
) -> (usize, f64) {
    let n = b.len();
    let bnorm = norm2(b).max(1e-300);
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(inv_diag.iter()).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut iters = 0;
    let mut res = norm2(&r) / bnorm;
    while res > tol && iters < max_iters {
        apply(&p, &mut ax);
        let pap = dot(&p, &ax);
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ax[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iters += 1;
        res = norm2(&r) / bnorm;
    }
    (iters, res)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

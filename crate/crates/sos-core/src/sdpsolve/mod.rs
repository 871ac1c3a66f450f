//! A self-contained feasibility solver for affine + PSD problems at desk
//! scale.
//!
//! The problem data is an unknown moment vector `y`, affine rows `Ay = b`,
//! and PSD blocks, each a linear map `y ↦ L_j y` into symmetric matrices.
//! The solver runs Dykstra-corrected alternating projections in the product
//! space of block matrices and the affine image vector `w`:
//!
//! * the *graph subspace* `{(L_1 y, …, L_k y, Ay) : y}`, projected onto by
//!   solving the SPD normal system `K y = Σ L_jᵀ Z_j + Aᵀ w` with
//!   `K = Σ L_jᵀ L_j + Aᵀ A` (dense Cholesky at small sizes, Jacobi-
//!   preconditioned CG above), and
//! * the product of PSD cones and the point `{w = b}`, projected onto by
//!   blockwise eigenvalue clipping.
//!
//! Infeasibility is never claimed: when the two sets do not meet, the
//! residuals stall at a positive floor and the solver reports
//! `NoConvergence` with diagnostics. Genuine refutations are produced only by
//! the spectral certificates module.

pub mod eigs;
pub mod sparse;

pub use eigs::{lanczos_extreme, min_eig, min_eig_operator, project_psd, sym_eigen_sorted, EigPair, Which};

use nalgebra::{Cholesky, DMatrix};
use sparse::{pcg, SparseMat};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("malformed problem: {msg}")]
    Malformed { msg: String },
    #[error("non-finite values at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("eigendecomposition failed on a {side}x{side} block")]
    EigenFailure { side: usize },
    #[error("eigensolver did not converge (best residual {best_residual:.3e})")]
    EigNotConverged { best_residual: f64 },
    #[error("dense factorization failed (normal matrix not positive definite)")]
    FactorizationFailure,
}

/// Linear map from the unknown vector to a symmetric matrix, one entry form
/// per upper-triangle position.
#[derive(Debug, Clone)]
pub struct BlockMap {
    pub side: usize,
    /// `entries[tri(i,j)]` is the sparse linear form for entry (i,j), i ≤ j.
    pub entries: Vec<Vec<(usize, f64)>>,
}

impl BlockMap {
    pub fn tri_index(side: usize, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < side);
        i * side - i * (i + 1) / 2 + j
    }

    pub fn apply(&self, y: &[f64], out: &mut DMatrix<f64>) {
        debug_assert_eq!(out.nrows(), self.side);
        for i in 0..self.side {
            for j in i..self.side {
                let form = &self.entries[Self::tri_index(self.side, i, j)];
                let mut acc = 0.0;
                for &(u, c) in form {
                    acc += c * y[u];
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
    }

    /// Accumulates `Lᵀ Z` into `out` (Frobenius adjoint of `apply`).
    pub fn adjoint_accumulate(&self, z: &DMatrix<f64>, out: &mut [f64]) {
        for i in 0..self.side {
            for j in i..self.side {
                let w = if i == j { z[(i, i)] } else { z[(i, j)] + z[(j, i)] };
                for &(u, c) in &self.entries[Self::tri_index(self.side, i, j)] {
                    out[u] += c * w;
                }
            }
        }
    }
}

/// Affine rows + PSD blocks over a shared unknown vector.
#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    pub n_unknowns: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
    pub blocks: Vec<BlockMap>,
    /// Diagnostic names, parallel to `blocks` (e.g. "moment", "ineq[0]").
    pub block_labels: Vec<String>,
}

impl FeasibilityProblem {
    fn validate(&self) -> Result<(), SolveError> {
        if self.rows.is_empty() {
            return Err(SolveError::Malformed { msg: "no affine rows (normalization row required)".into() });
        }
        if self.rows.len() != self.rhs.len() {
            return Err(SolveError::Malformed {
                msg: format!("{} rows but {} rhs entries", self.rows.len(), self.rhs.len()),
            });
        }
        for (r, row) in self.rows.iter().enumerate() {
            for &(u, c) in row {
                if u >= self.n_unknowns {
                    return Err(SolveError::Malformed { msg: format!("row {r} references unknown {u}") });
                }
                if !c.is_finite() {
                    return Err(SolveError::Malformed { msg: format!("row {r} has non-finite coefficient") });
                }
            }
        }
        for (b, blk) in self.blocks.iter().enumerate() {
            if blk.entries.len() != blk.side * (blk.side + 1) / 2 {
                return Err(SolveError::Malformed { msg: format!("block {b} entry table has wrong length") });
            }
            for form in &blk.entries {
                for &(u, _) in form {
                    if u >= self.n_unknowns {
                        return Err(SolveError::Malformed { msg: format!("block {b} references unknown {u}") });
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOpts {
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts { max_iters: 5000, tol: 1e-6, seed: 0 }
    }
}

/// Residuals of a candidate moment vector: `affine` is `‖Ay − b‖_∞`; `cone`
/// is the largest relative negative eigenvalue over PSD blocks,
/// `max_j (−λ_min(L_j y))_+ / (1 + ‖L_j y‖₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub affine: f64,
    pub cone: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iteration: usize,
    pub affine: f64,
    pub cone: f64,
}

#[derive(Debug, Clone)]
pub enum SolveStatus {
    Feasible {
        moments: Vec<f64>,
        residuals: Residuals,
        iterations: usize,
        history: Vec<HistoryRow>,
    },
    /// Not a proof of infeasibility.
    NoConvergence {
        residuals: Residuals,
        iterations: usize,
        history: Vec<HistoryRow>,
    },
}

impl SolveStatus {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveStatus::Feasible { .. })
    }

    pub fn history(&self) -> &[HistoryRow] {
        match self {
            SolveStatus::Feasible { history, .. } | SolveStatus::NoConvergence { history, .. } => history,
        }
    }
}

const DENSE_LIMIT: usize = 1500;
const CHECK_EVERY: usize = 10;
const FINITE_EVERY: usize = 50;

enum NormalSolver {
    Dense(Cholesky<f64, nalgebra::Dyn>),
    Cg { k: SparseMat, inv_diag: Vec<f64>, warm: Vec<f64> },
}

impl NormalSolver {
    fn solve(&mut self, rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
        match self {
            NormalSolver::Dense(chol) => {
                let mut v = nalgebra::DVector::from_column_slice(rhs);
                chol.solve_mut(&mut v);
                Ok(v.data.into())
            }
            NormalSolver::Cg { k, inv_diag, warm } => {
                let mut x = warm.clone();
                let mut apply = |v: &[f64], out: &mut [f64]| k.matvec(v, out);
                let (_, res) = pcg(&mut apply, rhs, &mut x, inv_diag, 1e-12, 4000);
                if !res.is_finite() {
                    return Err(SolveError::NonFinite { iteration: 0 });
                }
                warm.copy_from_slice(&x);
                Ok(x)
            }
        }
    }
}

/// Solves the feasibility problem; deterministic given `opts`.
pub fn solve_feasibility(prob: &FeasibilityProblem, opts: &SolveOpts) -> Result<SolveStatus, SolveError> {
    prob.validate()?;
    let n = prob.n_unknowns;
    let a = SparseMat::from_rows(&prob.rows, n);
    let m = prob.rows.len();

    // K = Σ L_jᵀ L_j + Aᵀ A, assembled once from upper-triangle triplets.
    let mut upper: HashMap<(u32, u32), f64> = HashMap::new();
    let mut add = |u1: usize, u2: usize, v: f64| {
        let key = if u1 <= u2 { (u1 as u32, u2 as u32) } else { (u2 as u32, u1 as u32) };
        *upper.entry(key).or_insert(0.0) += v;
    };
    for blk in &prob.blocks {
        for i in 0..blk.side {
            for j in i..blk.side {
                let w = if i == j { 1.0 } else { 2.0 };
                let form = &blk.entries[BlockMap::tri_index(blk.side, i, j)];
                for (a_ix, &(u1, c1)) in form.iter().enumerate() {
                    for &(u2, c2) in form.iter().skip(a_ix) {
                        // each unordered pair once; symmetric counterpart implied
                        add(u1, u2, w * c1 * c2);
                    }
                }
            }
        }
    }
    for row in &prob.rows {
        for (a_ix, &(u1, c1)) in row.iter().enumerate() {
            for &(u2, c2) in row.iter().skip(a_ix) {
                add(u1, u2, c1 * c2);
            }
        }
    }

    let mut solver = if n <= DENSE_LIMIT {
        let mut kd = DMatrix::zeros(n, n);
        for (&(i, j), &v) in &upper {
            kd[(i as usize, j as usize)] += v;
            if i != j {
                kd[(j as usize, i as usize)] += v;
            }
        }
        let chol = Cholesky::new(kd).ok_or(SolveError::FactorizationFailure)?;
        NormalSolver::Dense(chol)
    } else {
        let k = SparseMat::from_upper_triplets(n, &upper);
        let inv_diag: Vec<f64> = k.diagonal().iter().map(|&d| if d > 1e-12 { 1.0 / d } else { 1.0 }).collect();
        NormalSolver::Cg { k, inv_diag, warm: vec![0.0; n] }
    };
    drop(upper);

    // Warm start at the affine least-norm point: CG on AᵀA y = Aᵀ b started
    // at zero stays in the row space, so its limit is the min-norm solution.
    let mut y = vec![0.0; n];
    {
        let mut atb = vec![0.0; n];
        a.tr_matvec(&prob.rhs, &mut atb);
        let mut scratch = vec![0.0; m];
        let mut ata_diag = vec![0.0; n];
        for row in &prob.rows {
            for &(u, c) in row {
                ata_diag[u] += c * c;
            }
        }
        let inv_diag: Vec<f64> = ata_diag.iter().map(|&d| if d > 1e-12 { 1.0 / d } else { 1.0 }).collect();
        let mut apply = |v: &[f64], out: &mut [f64]| {
            a.matvec(v, &mut scratch);
            a.tr_matvec(&scratch, out);
        };
        pcg(&mut apply, &atb, &mut y, &inv_diag, 1e-10, 300);
        if y.iter().any(|v| !v.is_finite()) {
            y.fill(0.0);
        }
    }

    // Dykstra state in the product space (blocks…, w).
    let sides: Vec<usize> = prob.blocks.iter().map(|b| b.side).collect();
    let zeros = || -> (Vec<DMatrix<f64>>, Vec<f64>) {
        (sides.iter().map(|&s| DMatrix::zeros(s, s)).collect(), vec![0.0; m])
    };
    let (mut xb, mut xw) = zeros();
    for (j, blk) in prob.blocks.iter().enumerate() {
        blk.apply(&y, &mut xb[j]);
    }
    a.matvec(&y, &mut xw);
    let (mut pb, mut pw) = zeros();
    let (mut qb, mut qw) = zeros();
    let (mut ub, mut uw) = zeros();

    let mut history: Vec<HistoryRow> = Vec::new();
    let mut last = Residuals { affine: f64::INFINITY, cone: f64::INFINITY };
    let mut rhs_acc = vec![0.0; n];
    let mut scratch_n = vec![0.0; n];
    let mut done_iters = 0;

    for iter in 0..opts.max_iters {
        done_iters = iter + 1;

        // graph-subspace projection of (x + p)
        rhs_acc.fill(0.0);
        for (j, blk) in prob.blocks.iter().enumerate() {
            xb[j] += &pb[j];
            blk.adjoint_accumulate(&xb[j], &mut rhs_acc);
        }
        for i in 0..m {
            xw[i] += pw[i];
        }
        a.tr_matvec(&xw, &mut scratch_n);
        for (acc, t) in rhs_acc.iter_mut().zip(scratch_n.iter()) {
            *acc += t;
        }
        y = solver.solve(&rhs_acc)?;
        for (j, blk) in prob.blocks.iter().enumerate() {
            blk.apply(&y, &mut ub[j]);
            // p ← (x + p) − u ; xb currently holds x + p
            xb[j] -= &ub[j];
            std::mem::swap(&mut pb[j], &mut xb[j]);
        }
        a.matvec(&y, &mut uw);
        for i in 0..m {
            pw[i] = xw[i] - uw[i];
        }

        // cone × point projection of (u + q)
        let mut cone_ok = true;
        for (j, blk) in prob.blocks.iter().enumerate() {
            let cin = &ub[j] + &qb[j];
            let (vals, vecs) = sym_eigen_sorted(cin.clone()).map_err(|_| SolveError::EigenFailure { side: blk.side })?;
            if vals[0] >= 0.0 {
                qb[j].fill(0.0);
                xb[j] = cin;
            } else {
                let clipped = clip_from_eigen(&vals, &vecs);
                qb[j] = cin - &clipped;
                xb[j] = clipped;
                cone_ok = false;
            }
        }
        for i in 0..m {
            let cin = uw[i] + qw[i];
            xw[i] = prob.rhs[i];
            qw[i] = cin - prob.rhs[i];
        }

        if (iter + 1) % FINITE_EVERY == 0 && y.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite { iteration: iter + 1 });
        }

        let must_check = (iter + 1) % CHECK_EVERY == 0 || iter + 1 == opts.max_iters || cone_ok;
        if must_check {
            let affine = uw
                .iter()
                .zip(prob.rhs.iter())
                .map(|(u, b)| (u - b).abs())
                .fold(0.0f64, f64::max);
            let mut cone = 0.0f64;
            for blk_m in ub.iter() {
                let (vals, _) = sym_eigen_sorted(blk_m.clone()).map_err(|_| SolveError::EigenFailure { side: blk_m.nrows() })?;
                let lo = vals[0];
                let hi = vals[vals.len() - 1];
                let scale = 1.0 + lo.abs().max(hi.abs());
                cone = cone.max((-lo).max(0.0) / scale);
            }
            last = Residuals { affine, cone };
            history.push(HistoryRow { iteration: iter + 1, affine, cone });
            if affine <= opts.tol && cone <= opts.tol {
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(SolveError::NonFinite { iteration: iter + 1 });
                }
                return Ok(SolveStatus::Feasible {
                    moments: y,
                    residuals: last,
                    iterations: iter + 1,
                    history,
                });
            }
        }
    }

    Ok(SolveStatus::NoConvergence { residuals: last, iterations: done_iters, history })
}

fn clip_from_eigen(vals: &[f64], vecs: &DMatrix<f64>) -> DMatrix<f64> {
    let mut scaled = vecs.clone();
    for (i, &l) in vals.iter().enumerate() {
        let w = l.max(0.0);
        scaled.column_mut(i).scale_mut(w);
    }
    let mut out = scaled * vecs.transpose();
    let n = out.nrows();
    for r in 0..n {
        for c in 0..r {
            let avg = 0.5 * (out[(r, c)] + out[(c, r)]);
            out[(r, c)] = avg;
            out[(c, r)] = avg;
        }
    }
    out
}

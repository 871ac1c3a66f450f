//! Solve-then-round estimation pipelines: compile a polynomial system over
//! hidden variables, solve the moment feasibility problem, and read estimates
//! off the pseudoexpectation. Instantiations: matrix completion, tensor
//! completion, the 3-to-6 tensor lift, overcomplete decomposition via the
//! lift, and numeric identity checkers for the component-incoherence lemmas.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::jennrich::{self, JennrichError, JennrichOpts};
use crate::moments::{
    compile_system, pe_apply_many, validate_pe, MomentsError, PolySystemSpec,
    PseudoExpectation, ValidityReport,
};
use crate::polyring::{Monomial, Polynomial, QuotientRule};
use crate::sdpsolve::{solve_feasibility, sym_eigen_sorted, Residuals, SolveError, SolveOpts, SolveStatus};
use crate::tensors::{SymTensor, TensorError};

#[derive(Debug, Error)]
pub enum EstimatorsError {
    #[error("solver did not converge after {iterations} iterations (affine {affine:.3e}, cone {cone:.3e})",
        affine = residuals.affine, cone = residuals.cone)]
    NoConvergence { residuals: Residuals, iterations: usize },
    #[error("moment matrix side {side} exceeds the desk-scale cap {cap}")]
    BlockTooLarge { side: usize, cap: usize },
    #[error("target expression degree {degree} exceeds relaxation degree {max}")]
    TargetDegree { degree: u32, max: u32 },
    #[error("observation index {index:?} out of range for n = {n}")]
    BadObservation { index: (usize, usize, usize), n: usize },
    #[error("lift needs degree ≥ 6, got {0}")]
    LiftDegree(u32),
    #[error("component matrix column {col} has norm {norm}, expected unit")]
    NonUnitColumn { col: usize, norm: f64 },
    #[error(transparent)]
    Moments(#[from] MomentsError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Jennrich(#[from] JennrichError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// A compiled estimation problem: the system's coefficients are already
/// specialized to the observed instance; `targets` are the polynomials whose
/// pseudoexpectations form the rounded output.
#[derive(Debug, Clone)]
pub struct EstimationTask {
    pub system: PolySystemSpec,
    pub degree: u32,
    pub targets: Vec<Polynomial>,
}

#[derive(Debug, Clone)]
pub struct EstimatorOpts {
    pub solve: SolveOpts,
    /// Compile-time abort when any PSD block side exceeds this.
    pub max_block_side: usize,
    /// Re-validate the returned pseudoexpectation and attach the report.
    pub validate: bool,
}

impl Default for EstimatorOpts {
    fn default() -> Self {
        EstimatorOpts { solve: SolveOpts::default(), max_block_side: 600, validate: false }
    }
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub values: Vec<f64>,
    pub pe: PseudoExpectation,
    pub iterations: usize,
    pub residuals: Residuals,
    pub report: Option<ValidityReport>,
}

/// Solves the task at its relaxation degree and rounds each target through
/// the pseudoexpectation. Non-convergence yields an error carrying the
/// solver diagnostics; no partial output.
pub fn estimate_round(task: &EstimationTask, opts: &EstimatorOpts) -> Result<Estimate, EstimatorsError> {
    for t in &task.targets {
        if t.degree() > task.degree {
            return Err(EstimatorsError::TargetDegree { degree: t.degree(), max: task.degree });
        }
    }
    let prob = compile_system(&task.system, task.degree)?;
    for blk in &prob.blocks {
        if blk.side > opts.max_block_side {
            return Err(EstimatorsError::BlockTooLarge { side: blk.side, cap: opts.max_block_side });
        }
    }
    match solve_feasibility(&prob, &opts.solve)? {
        SolveStatus::Feasible { moments, residuals, iterations, .. } => {
            let pe = PseudoExpectation::from_moments(
                task.system.nvars,
                task.degree,
                task.system.quotient,
                moments,
            )?;
            let values = pe_apply_many(&pe, &task.targets)?;
            let report = opts.validate.then(|| validate_pe(&pe, &task.system, opts.solve.tol));
            Ok(Estimate { values, pe, iterations, residuals, report })
        }
        SolveStatus::NoConvergence { residuals, iterations, .. } => {
            Err(EstimatorsError::NoConvergence { residuals, iterations })
        }
    }
}

// --- completion problems -----------------------------------------------------

/// Variable layout for an n×r matrix of unknowns B: entry (i, a) is
/// variable i·r + a.
fn bvar(r: usize, i: usize, a: usize) -> usize {
    i * r + a
}

/// Polynomial for (BBᵀ)_ij = Σ_a B_ia B_ja.
fn bbt_entry(n: usize, r: usize, i: usize, j: usize) -> Polynomial {
    Polynomial::from_terms(
        n * r,
        (0..r).map(|a| (Monomial::var(bvar(r, i, a)).mul(&Monomial::var(bvar(r, j, a))), 1.0)),
    )
}

/// Polynomial for (BᵀB)_ab = Σ_i B_ia B_ib.
fn btb_entry(n: usize, r: usize, a: usize, b: usize) -> Polynomial {
    Polynomial::from_terms(
        n * r,
        (0..n).map(|i| (Monomial::var(bvar(r, i, a)).mul(&Monomial::var(bvar(r, i, b))), 1.0)),
    )
}

/// Builds the completion system `(BBᵀ)_Ω = X_Ω`, `BᵀB = Id_r` and the target
/// list of all distinct (BBᵀ) entries.
pub fn matrix_completion_task(
    x_obs: &DMatrix<f64>,
    omega: &[(usize, usize)],
    r: usize,
    d: u32,
) -> Result<EstimationTask, EstimatorsError> {
    let n = x_obs.nrows();
    let nv = n * r;
    let mut cells: Vec<(usize, usize)> = omega
        .iter()
        .map(|&(i, j)| if i <= j { (i, j) } else { (j, i) })
        .collect();
    cells.sort_unstable();
    cells.dedup();
    let mut equalities = Vec::new();
    for &(i, j) in &cells {
        if i >= n || j >= n {
            return Err(EstimatorsError::BadObservation { index: (i, j, 0), n });
        }
        equalities.push(bbt_entry(n, r, i, j).sub(&Polynomial::constant(nv, x_obs[(i, j)])));
    }
    for a in 0..r {
        for b in a..r {
            let delta = if a == b { 1.0 } else { 0.0 };
            equalities.push(btb_entry(n, r, a, b).sub(&Polynomial::constant(nv, delta)));
        }
    }
    let system = PolySystemSpec::new(nv, QuotientRule::None, equalities, vec![])?;
    let targets: Vec<Polynomial> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| bbt_entry(n, r, i, j))
        .collect();
    Ok(EstimationTask { system, degree: d, targets })
}

/// Completes a partially observed rank-r projector: returns `pE[BBᵀ]`.
pub fn matrix_complete(
    x_obs: &DMatrix<f64>,
    omega: &[(usize, usize)],
    r: usize,
    d: u32,
    opts: &EstimatorOpts,
) -> Result<(DMatrix<f64>, Estimate), EstimatorsError> {
    let n = x_obs.nrows();
    let task = matrix_completion_task(x_obs, omega, r, d)?;
    let est = estimate_round(&task, opts)?;
    let mut out = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[(i, j)] = est.values[k];
            out[(j, i)] = est.values[k];
            k += 1;
        }
    }
    Ok((out, est))
}

/// Polynomial for `(Σ_a b_a^{⊗3})_{ijk} = Σ_a B_{i,a} B_{j,a} B_{k,a}`.
fn rank_one_sum_entry(n: usize, r: usize, idx: &[usize; 3]) -> Polynomial {
    let terms = (0..r).map(|a| {
        let m = Monomial::var(bvar(r, idx[0], a))
            .mul(&Monomial::var(bvar(r, idx[1], a)))
            .mul(&Monomial::var(bvar(r, idx[2], a)));
        (m, 1.0)
    });
    Polynomial::from_terms(n * r, terms)
}

/// Tensor-completion system `(Σ b_i^{⊗3})_Ω = X_Ω`, `BᵀB = Id_r`; targets are
/// all canonical (sorted-index) entries of `Σ b_i^{⊗3}`.
pub fn tensor_completion_task(
    x_obs: &SymTensor,
    omega: &[[usize; 3]],
    r: usize,
    d: u32,
) -> Result<EstimationTask, EstimatorsError> {
    let n = x_obs.dim();
    let nv = n * r;
    let mut cells: Vec<[usize; 3]> = omega
        .iter()
        .map(|&c| {
            let mut s = c;
            s.sort_unstable();
            s
        })
        .collect();
    cells.sort_unstable();
    cells.dedup();
    let mut equalities = Vec::new();
    for c in &cells {
        if c[2] >= n {
            return Err(EstimatorsError::BadObservation { index: (c[0], c[1], c[2]), n });
        }
        let entry = rank_one_sum_entry(n, r, c);
        equalities.push(entry.sub(&Polynomial::constant(nv, x_obs.get(c))));
    }
    for a in 0..r {
        for b in a..r {
            let delta = if a == b { 1.0 } else { 0.0 };
            equalities.push(btb_entry(n, r, a, b).sub(&Polynomial::constant(nv, delta)));
        }
    }
    let system = PolySystemSpec::new(nv, QuotientRule::None, equalities, vec![])?;
    let mut targets = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                targets.push(rank_one_sum_entry(n, r, &[i, j, k]));
            }
        }
    }
    Ok(EstimationTask { system, degree: d, targets })
}

/// Completes a partially observed orthogonal rank-r 3-tensor: returns
/// `pE[Σ b_i^{⊗3}]` assembled symmetric.
pub fn tensor_complete(
    x_obs: &SymTensor,
    omega: &[[usize; 3]],
    r: usize,
    d: u32,
    opts: &EstimatorOpts,
) -> Result<(SymTensor, Estimate), EstimatorsError> {
    let n = x_obs.dim();
    let task = tensor_completion_task(x_obs, omega, r, d)?;
    let est = estimate_round(&task, opts)?;
    let mut values = vec![0.0; n * n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            for l in j..n {
                let v = est.values[k];
                k += 1;
                let mut idx = [i, j, l];
                permute3(&mut idx, |p| {
                    values[(p[0] * n + p[1]) * n + p[2]] = v;
                });
            }
        }
    }
    let tensor = SymTensor::new_symmetric(3, n, values)?;
    Ok((tensor, est))
}

fn permute3(idx: &mut [usize; 3], mut f: impl FnMut(&[usize; 3])) {
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in perms {
        let q = [idx[p[0]], idx[p[1]], idx[p[2]]];
        f(&q);
    }
}

// --- lift and overcomplete decomposition -------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintMode {
    /// `BᵀB = Id_r` (orthonormal components).
    Orthonormal,
    /// Unit-norm columns plus the norm lower bound
    /// `‖Σ b_i^{⊗3}‖² ≥ (1−ε)·r`. The companion upper bound
    /// `‖Σ b_i^{⊗6}‖² ≤ (1+ε)·r` has degree 12 and is only compiled when the
    /// lift degree admits it, which desk-scale degrees do not.
    UnitNormBeps { eps: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct LiftConfig {
    pub r: usize,
    pub degree: u32,
    pub mode: ConstraintMode,
}

impl LiftConfig {
    pub fn orthonormal(r: usize) -> Self {
        LiftConfig { r, degree: 6, mode: ConstraintMode::Orthonormal }
    }

    pub fn beps(r: usize, eps: f64) -> Self {
        LiftConfig { r, degree: 6, mode: ConstraintMode::UnitNormBeps { eps } }
    }
}

/// `‖Σ_i b_i^{⊗3}‖²_F = Σ_{i,j} <b_i, b_j>³` as a polynomial over B.
fn third_power_gram_norm(n: usize, r: usize) -> Polynomial {
    let nv = n * r;
    let mut acc = Polynomial::zero(nv);
    for i in 0..r {
        for j in 0..r {
            let inner = Polynomial::from_terms(
                nv,
                (0..n).map(|l| (Monomial::var(bvar(r, l, i)).mul(&Monomial::var(bvar(r, l, j))), 1.0)),
            );
            acc = acc.add(&inner.mul(&inner).mul(&inner));
        }
    }
    acc
}

/// Builds the lift system: `Σ b_i^{⊗3}` matches the observed 3-tensor
/// entrywise, plus the constraint-mode axioms; targets are the canonical
/// entries of `Σ b_i^{⊗6}`.
pub fn lift_task(t3: &SymTensor, cfg: &LiftConfig) -> Result<EstimationTask, EstimatorsError> {
    if cfg.degree < 6 {
        return Err(EstimatorsError::LiftDegree(cfg.degree));
    }
    let n = t3.dim();
    let r = cfg.r;
    let nv = n * r;
    let mut equalities = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let entry = rank_one_sum_entry(n, r, &[i, j, k]);
                equalities.push(entry.sub(&Polynomial::constant(nv, t3.get(&[i, j, k]))));
            }
        }
    }
    let mut inequalities = Vec::new();
    match cfg.mode {
        ConstraintMode::Orthonormal => {
            for a in 0..r {
                for b in a..r {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    equalities.push(btb_entry(n, r, a, b).sub(&Polynomial::constant(nv, delta)));
                }
            }
        }
        ConstraintMode::UnitNormBeps { eps } => {
            for a in 0..r {
                equalities.push(btb_entry(n, r, a, a).sub(&Polynomial::constant(nv, 1.0)));
            }
            let lower = third_power_gram_norm(n, r)
                .sub(&Polynomial::constant(nv, (1.0 - eps) * r as f64));
            inequalities.push(lower);
            // the degree-12 norm upper bound is out of reach at lift degrees
            // used here; included only when cfg.degree admits it
            if cfg.degree >= 12 {
                let mut upper = Polynomial::constant(nv, (1.0 + eps) * r as f64);
                let mut six = Polynomial::zero(nv);
                for i in 0..r {
                    for j in 0..r {
                        let inner = Polynomial::from_terms(
                            nv,
                            (0..n).map(|l| {
                                (Monomial::var(bvar(r, l, i)).mul(&Monomial::var(bvar(r, l, j))), 1.0)
                            }),
                        );
                        let sq = inner.mul(&inner);
                        six = six.add(&sq.mul(&sq).mul(&sq));
                    }
                }
                upper = upper.sub(&six);
                inequalities.push(upper);
            }
        }
    }
    let system = PolySystemSpec::new(nv, QuotientRule::None, equalities, inequalities)?;
    let mut targets = Vec::new();
    let mut stack = vec![0usize; 6];
    gen_sorted_tuples(n, 6, 0, &mut stack, 0, &mut |idx: &[usize]| {
        let terms = (0..r).map(|a| {
            let mut m = Monomial::one();
            for &i in idx {
                m = m.mul(&Monomial::var(bvar(r, i, a)));
            }
            (m, 1.0)
        });
        targets.push(Polynomial::from_terms(nv, terms));
    });
    Ok(EstimationTask { system, degree: cfg.degree, targets })
}

fn gen_sorted_tuples(
    n: usize,
    len: usize,
    depth: usize,
    stack: &mut Vec<usize>,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == len {
        f(&stack[..len]);
        return;
    }
    for v in start..n {
        stack[depth] = v;
        gen_sorted_tuples(n, len, depth + 1, stack, v, f);
    }
}

#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub tensor: SymTensor,
    pub estimate: Estimate,
}

/// Lifts an order-3 tensor to the order-6 tensor with the same components by
/// solving the moment relaxation and reading off `pE[Σ b_i^{⊗6}]`.
pub fn lift_3_to_6(t3: &SymTensor, cfg: &LiftConfig, opts: &EstimatorOpts) -> Result<LiftOutcome, EstimatorsError> {
    let n = t3.dim();
    let task = lift_task(t3, cfg)?;
    let est = estimate_round(&task, opts)?;
    // scatter canonical entries to the full order-6 array
    let len = n.pow(6);
    let mut values = vec![0.0; len];
    let mut k = 0usize;
    let mut stack = vec![0usize; 6];
    let mut canon: Vec<(Vec<usize>, f64)> = Vec::new();
    gen_sorted_tuples(n, 6, 0, &mut stack, 0, &mut |idx: &[usize]| {
        canon.push((idx.to_vec(), est.values[k]));
        k += 1;
    });
    let lookup: std::collections::HashMap<Vec<usize>, f64> = canon.into_iter().collect();
    let mut idx = vec![0usize; 6];
    for (flat, slot) in values.iter_mut().enumerate() {
        let mut rem = flat;
        for s in idx.iter_mut().rev() {
            *s = rem % n;
            rem /= n;
        }
        let mut key = idx.clone();
        key.sort_unstable();
        *slot = lookup[&key];
    }
    let tensor = SymTensor::new_symmetric(6, n, values)?;
    Ok(LiftOutcome { tensor, estimate: est })
}

#[derive(Debug, Clone)]
pub struct DecomposeOpts {
    pub estimator: EstimatorOpts,
    pub trials: Option<usize>,
    pub seed: u64,
    /// Components scoring below this against the input tensor are dropped.
    pub score_threshold: f64,
}

impl Default for DecomposeOpts {
    fn default() -> Self {
        DecomposeOpts { estimator: EstimatorOpts::default(), trials: None, seed: 0, score_threshold: 0.2 }
    }
}

#[derive(Debug, Clone)]
pub struct DecomposeOutcome {
    /// Unit vectors in ℝⁿ, sign chosen to make `<T3, u^{⊗3}>` nonnegative.
    pub components: Vec<Vec<f64>>,
    /// `<T3, u^{⊗3}>` per returned component.
    pub scores: Vec<f64>,
    pub dropped: usize,
    pub lift: LiftOutcome,
    pub score_threshold: f64,
}

/// Full overcomplete decomposition: lift to order 6, decompose the lift as a
/// 3-tensor over ℝ^{n²} by random contraction, and factor each recovered
/// n²-vector back to ℝⁿ through the top singular direction of its n×n
/// reshaping.
pub fn decompose_overcomplete(
    t3: &SymTensor,
    r: usize,
    cfg: &LiftConfig,
    opts: &DecomposeOpts,
) -> Result<DecomposeOutcome, EstimatorsError> {
    let n = t3.dim();
    let lift = lift_3_to_6(t3, cfg, &opts.estimator)?;
    let lifted3 = lift.tensor.group_mode_pairs()?;
    let trials = opts.trials.unwrap_or_else(|| jennrich::default_trials(r));
    let dec = jennrich::recover_all(&lifted3, r, &JennrichOpts { trials, seed: opts.seed })?;
    let mut components = Vec::new();
    let mut scores = Vec::new();
    let mut dropped = 0usize;
    for w in &dec.components {
        let mut u = factor_back(w, n);
        let mut score = t3.apply_power(&u);
        if score < 0.0 {
            for x in u.iter_mut() {
                *x = -*x;
            }
            score = -score;
        } else if score == 0.0 {
            fix_sign_by_first_coordinate(&mut u);
        }
        if score >= opts.score_threshold {
            components.push(u);
            scores.push(score);
        } else {
            dropped += 1;
        }
    }
    Ok(DecomposeOutcome { components, scores, dropped, lift, score_threshold: opts.score_threshold })
}

/// Top singular direction of the n×n reshaping of an n²-vector, via the
/// dominant |eigenvalue| eigenvector of the symmetrized reshaping.
fn factor_back(w: &[f64], n: usize) -> Vec<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = w[i * n + j];
        }
    }
    let sym = (&m + m.transpose()) * 0.5;
    let (vals, vecs) = sym_eigen_sorted(sym).expect("n×n eigendecomposition");
    let (lo, hi) = (vals[0], vals[n - 1]);
    let top_ix = if lo.abs() > hi.abs() { 0 } else { n - 1 };
    let mut v: Vec<f64> = vecs.column(top_ix).iter().copied().collect();
    // degenerate-spectrum tie break: first-coordinate sign convention
    if (lo.abs() - hi.abs()).abs() < 1e-12 * (1.0 + hi.abs()) {
        fix_sign_by_first_coordinate(&mut v);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}

fn fix_sign_by_first_coordinate(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

// --- component identity checks -----------------------------------------------

#[derive(Debug, Clone)]
pub struct LiftIdentityReport {
    pub sum3: f64,
    pub sum4: f64,
    pub sum6: f64,
    /// λmax of Σ a_i a_iᵀ.
    pub sigma: f64,
    /// max off-diagonal |<a_i, a_j>|.
    pub rho: f64,
    /// `‖Σ v^{⊗3}‖² − (1−ε)r` for A and B (nonnegative when the norm lower
    /// bound holds).
    pub beps_lower_slack_a: f64,
    pub beps_lower_slack_b: f64,
    /// `(1+ε)r − ‖Σ v^{⊗6}‖²` for A and B.
    pub beps_upper_slack_a: f64,
    pub beps_upper_slack_b: f64,
    /// Chained lemma inequalities evaluated numerically.
    pub sum3_hypothesis: bool,
    pub sum4_conclusion_holds: bool,
    pub sum4_hypothesis: bool,
    pub sum6_conclusion_holds: bool,
    /// Orthogonal-components cube identity: number of columns of B whose
    /// hypotheses hold and the max residual
    /// `‖b_i^{⊗3} − Σ_j <a_j,b_i>³ a_j^{⊗3}‖²` among them.
    pub cube_identity_applicable: usize,
    pub cube_identity_max_residual: f64,
}

/// Computes the inner-product power sums, incoherence parameters, norm-system
/// slacks, and the chained inequalities relating them, for component matrices
/// A (reference) and B (candidate) with unit columns.
pub fn verify_lift_identities(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    eps: f64,
) -> Result<LiftIdentityReport, EstimatorsError> {
    for (label, m) in [("a", a), ("b", b)] {
        for c in 0..m.ncols() {
            let norm = m.column(c).norm();
            if (norm - 1.0).abs() > 1e-8 {
                let _ = label;
                return Err(EstimatorsError::NonUnitColumn { col: c, norm });
            }
        }
    }
    let r = a.ncols();
    let cross = a.transpose() * b; // <a_i, b_j>
    let gram_a = a.transpose() * a;
    let gram_b = b.transpose() * b;
    let (mut sum3, mut sum4, mut sum6) = (0.0, 0.0, 0.0);
    for v in cross.iter() {
        sum3 += v.powi(3);
        sum4 += v.powi(4);
        sum6 += v.powi(6);
    }
    let frame = a * a.transpose();
    let (vals, _) = sym_eigen_sorted(frame)?;
    let sigma = vals[vals.len() - 1];
    let mut rho = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            if i != j {
                rho = rho.max(gram_a[(i, j)].abs());
            }
        }
    }
    let gram_power_sum = |g: &DMatrix<f64>, p: i32| -> f64 { g.iter().map(|v| v.powi(p)).sum() };
    let rf = r as f64;
    let beps_lower_slack_a = gram_power_sum(&gram_a, 3) - (1.0 - eps) * rf;
    let beps_lower_slack_b = gram_power_sum(&gram_b, 3) - (1.0 - eps) * rf;
    let beps_upper_slack_a = (1.0 + eps) * rf - gram_power_sum(&gram_a, 6);
    let beps_upper_slack_b = (1.0 + eps) * rf - gram_power_sum(&gram_b, 6);

    let tol = 1e-9 * rf;
    let sum3_hypothesis = sum3 >= (1.0 - rho * sigma) * rf - tol;
    let sum4_conclusion_holds = sum4 >= (1.0 - rho * sigma * sigma - 2.0 * rho * sigma) * rf - tol;
    let sum4_hypothesis = sum4 >= (1.0 - rho * sigma * sigma - 2.0 * rho * sigma) * rf - tol;
    let sum6_conclusion_holds =
        sum6 >= (1.0 - 3.0 * rho * sigma * sigma - 4.0 * rho * sigma) * rf - tol;

    // cube identity for near-orthogonal reference components
    let mut applicable = 0usize;
    let mut max_residual = 0.0f64;
    let gram_a3: Vec<f64> = gram_a.iter().map(|v| v.powi(3)).collect();
    for i in 0..b.ncols() {
        let col: Vec<f64> = (0..r).map(|j| cross[(j, i)]).collect();
        let h1 = (col.iter().map(|v| v * v).sum::<f64>() - 1.0).abs();
        let mut h2 = 0.0f64;
        for j1 in 0..r {
            for j2 in 0..r {
                if j1 != j2 {
                    h2 = h2.max(col[j1] * col[j1] * col[j2] * col[j2]);
                }
            }
        }
        if h1 <= 1e-6 && h2 <= 1e-6 {
            applicable += 1;
            let mut resid = 1.0; // ‖b_i‖⁶
            for j in 0..r {
                resid -= 2.0 * col[j].powi(6);
            }
            for j1 in 0..r {
                for j2 in 0..r {
                    resid += col[j1].powi(3) * col[j2].powi(3) * gram_a3[j1 * r + j2];
                }
            }
            max_residual = max_residual.max(resid.abs());
        }
    }

    Ok(LiftIdentityReport {
        sum3,
        sum4,
        sum6,
        sigma,
        rho,
        beps_lower_slack_a,
        beps_lower_slack_b,
        beps_upper_slack_a,
        beps_upper_slack_b,
        sum3_hypothesis,
        sum4_conclusion_holds,
        sum4_hypothesis,
        sum6_conclusion_holds,
        cube_identity_applicable: applicable,
        cube_identity_max_residual: max_residual,
    })
}

/// Uniformly random symmetric observation mask covering `fraction` of the
/// unordered index pairs (both orientations included).
pub fn random_symmetric_mask(n: usize, fraction: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    let keep = ((fraction * cells.len() as f64).round() as usize).min(cells.len());
    let mut out = Vec::with_capacity(2 * keep);
    for &(i, j) in &cells[..keep] {
        out.push((i, j));
        if i != j {
            out.push((j, i));
        }
    }
    out.sort_unstable();
    out
}

/// Random symmetric mask over sorted triples for tensor completion.
pub fn random_symmetric_mask3(n: usize, fraction: f64, seed: u64) -> Vec<[usize; 3]> {
    let mut cells: Vec<[usize; 3]> = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                cells.push([i, j, k]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    let keep = ((fraction * cells.len() as f64).round() as usize).min(cells.len());
    let mut out = cells[..keep].to_vec();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_orthonormal(n: usize, r: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = raw.qr().q();
        q.columns(0, r).into_owned()
    }

    #[test]
    fn pinned_point_system_rounds_to_point() {
        let xstar = [0.3, -0.7, 1.2];
        let n = 3;
        let eqs: Vec<Polynomial> = (0..n)
            .map(|i| Polynomial::var(n, i).sub(&Polynomial::constant(n, xstar[i])))
            .collect();
        let system = PolySystemSpec::new(n, QuotientRule::None, eqs, vec![]).unwrap();
        let targets: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
        let task = EstimationTask { system, degree: 2, targets };
        let est = estimate_round(&task, &EstimatorOpts::default()).unwrap();
        for (v, x) in est.values.iter().zip(xstar.iter()) {
            assert!((v - x).abs() <= 1e-6, "{v} vs {x}");
        }
    }

    #[test]
    fn ball_axiom_rounds_within_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let eps = 0.01;
        for _ in 0..3 {
            let xstar: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = 3;
            // eps − ‖x − x*‖² ≥ 0
            let mut ball = Polynomial::constant(n, eps);
            for i in 0..n {
                let diff = Polynomial::var(n, i).sub(&Polynomial::constant(n, xstar[i]));
                ball = ball.sub(&diff.mul(&diff));
            }
            let system = PolySystemSpec::new(n, QuotientRule::None, vec![], vec![ball]).unwrap();
            let targets: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
            let task = EstimationTask { system, degree: 2, targets };
            let est = estimate_round(&task, &EstimatorOpts::default()).unwrap();
            let err: f64 = est.values.iter().zip(xstar.iter()).map(|(v, x)| (v - x) * (v - x)).sum();
            assert!(err <= eps + 1e-4, "rounding error {err}");
        }
    }

    #[test]
    fn two_point_symmetric_system_stays_in_hull() {
        // {x² = 1}: pE[x] must lie in [−1, 1]
        let n = 1;
        let x = Polynomial::var(n, 0);
        let eq = x.mul(&x).sub(&Polynomial::constant(n, 1.0));
        let system = PolySystemSpec::new(n, QuotientRule::None, vec![eq.clone()], vec![]).unwrap();
        let task = EstimationTask { system, degree: 2, targets: vec![x.clone()] };
        let est = estimate_round(&task, &EstimatorOpts::default()).unwrap();
        assert!((-1.0 - 1e-6..=1.0 + 1e-6).contains(&est.values[0]));

        // adding x ≥ 0 restricts the degree-2 feasible interval to [0, 1]
        let system = PolySystemSpec::new(n, QuotientRule::None, vec![eq], vec![x.clone()]).unwrap();
        let task = EstimationTask { system, degree: 2, targets: vec![x] };
        let est = estimate_round(&task, &EstimatorOpts::default()).unwrap();
        assert!((-1e-6..=1.0 + 1e-6).contains(&est.values[0]), "got {}", est.values[0]);
    }

    #[test]
    fn estimate_validates_returned_pe() {
        let n = 2;
        let eqs: Vec<Polynomial> =
            (0..n).map(|i| Polynomial::var(n, i).sub(&Polynomial::constant(n, 0.25))).collect();
        let system = PolySystemSpec::new(n, QuotientRule::None, eqs, vec![]).unwrap();
        let task = EstimationTask { system, degree: 2, targets: vec![Polynomial::var(n, 0)] };
        let mut opts = EstimatorOpts::default();
        opts.validate = true;
        let est = estimate_round(&task, &opts).unwrap();
        let report = est.report.expect("validation requested");
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn matrix_completion_full_observation_is_pinned() {
        for r in [1usize, 2] {
            let n = 6;
            let q = random_orthonormal(n, r, 3 + r as u64);
            let x = &q * q.transpose();
            let omega: Vec<(usize, usize)> =
                (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
            let (xhat, _) = matrix_complete(&x, &omega, r, 4, &EstimatorOpts::default()).unwrap();
            let err = (&xhat - &x).abs().max();
            assert!(err <= 1e-6, "r={r}: entrywise error {err}");
        }
    }

    #[test]
    fn matrix_completion_diagonal_overflow_is_infeasible() {
        // observed diagonal entry 2 contradicts BᵀB = Id for r = 1
        let n = 4;
        let mut x = DMatrix::zeros(n, n);
        x[(0, 0)] = 2.0;
        let omega = vec![(0, 0)];
        let opts = EstimatorOpts {
            solve: SolveOpts { max_iters: 1500, ..Default::default() },
            ..Default::default()
        };
        match matrix_complete(&x, &omega, 1, 4, &opts) {
            Err(EstimatorsError::NoConvergence { residuals, .. }) => {
                assert!(residuals.affine.max(residuals.cone) > 1e-4);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn matrix_completion_estimate_is_symmetric_with_trace_r() {
        let n = 6;
        let r = 2;
        let q = random_orthonormal(n, r, 9);
        let x = &q * q.transpose();
        let omega = random_symmetric_mask(n, 0.9, 4);
        let (xhat, _) = matrix_complete(&x, &omega, r, 4, &EstimatorOpts::default()).unwrap();
        assert_eq!(xhat, xhat.transpose());
        assert!((xhat.trace() - r as f64).abs() <= 1e-4);
    }

    #[test]
    fn tensor_completion_fully_pinned() {
        let n = 4;
        let r = 2;
        let q = random_orthonormal(n, r, 11);
        let comps: Vec<(f64, Vec<f64>)> =
            (0..r).map(|a| (1.0, q.column(a).iter().copied().collect())).collect();
        let x = SymTensor::from_rank_one_sum(3, n, &comps);
        let omega: Vec<[usize; 3]> = {
            let mut v = Vec::new();
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        v.push([i, j, k]);
                    }
                }
            }
            v
        };
        let (xhat, _) = tensor_complete(&x, &omega, r, 6, &EstimatorOpts::default()).unwrap();
        let err = xhat
            .values()
            .iter()
            .zip(x.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err <= 1e-4, "entrywise error {err}");
    }

    #[test]
    fn tensor_completion_rank_zero_contradiction() {
        let n = 3;
        let vals = {
            let mut v = vec![0.0; 27];
            v[0] = 1.0; // X_000 = 1 cannot be matched by an empty decomposition
            v
        };
        let x = SymTensor::new_symmetric(3, n, vals).unwrap();
        let omega = vec![[0usize, 0, 0]];
        let opts = EstimatorOpts {
            solve: SolveOpts { max_iters: 500, ..Default::default() },
            ..Default::default()
        };
        match tensor_complete(&x, &omega, 0, 6, &opts) {
            Err(EstimatorsError::NoConvergence { residuals, .. }) => {
                assert!(residuals.affine >= 0.5, "affine residual {}", residuals.affine);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn lift_single_component() {
        let a = {
            let v = vec![0.8, -0.6, 0.0];
            v
        };
        let t3 = SymTensor::from_rank_one_sum(3, 3, &[(1.0, a.clone())]);
        let cfg = LiftConfig::orthonormal(1);
        let out = lift_3_to_6(&t3, &cfg, &EstimatorOpts::default()).unwrap();
        let expect = SymTensor::from_rank_one_sum(6, 3, &[(1.0, a)]);
        let err = out
            .tensor
            .values()
            .iter()
            .zip(expect.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(err <= 1e-4, "entrywise error {err}");
    }

    #[test]
    fn lift_rejects_low_degree_and_empty_beps() {
        let t3 = SymTensor::zeros(3, 2);
        let cfg = LiftConfig { r: 1, degree: 4, mode: ConstraintMode::Orthonormal };
        assert!(matches!(
            lift_3_to_6(&t3, &cfg, &EstimatorOpts::default()),
            Err(EstimatorsError::LiftDegree(4))
        ));
        // zero tensor with the Beps norm lower bound is contradictory
        let cfg = LiftConfig::beps(2, 0.1);
        let opts = EstimatorOpts {
            solve: SolveOpts { max_iters: 400, ..Default::default() },
            ..Default::default()
        };
        match lift_3_to_6(&t3, &cfg, &opts) {
            Err(EstimatorsError::NoConvergence { .. }) => {}
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn verify_identities_self_consistency() {
        let a = random_orthonormal(6, 3, 21);
        let rep = verify_lift_identities(&a, &a, 0.05).unwrap();
        let rf = 3.0;
        assert!((rep.sum3 - rf).abs() < 1e-9);
        assert!((rep.sum4 - rf).abs() < 1e-9);
        assert!((rep.sum6 - rf).abs() < 1e-9);
        assert!(rep.rho < 1e-9);
        assert!((rep.sigma - 1.0).abs() < 1e-9);
        assert!(rep.sum4_conclusion_holds && rep.sum6_conclusion_holds);
        assert_eq!(rep.cube_identity_applicable, 3);
        assert!(rep.cube_identity_max_residual < 1e-9);
        assert!(rep.beps_lower_slack_a >= 0.0 && rep.beps_upper_slack_a >= 0.0);
    }

    #[test]
    fn verify_identities_sign_and_permutation_invariance() {
        let a = random_orthonormal(5, 3, 31);
        let mut b = DMatrix::zeros(5, 3);
        // permute columns and flip signs
        b.set_column(0, &(-a.column(2)));
        b.set_column(1, &a.column(0));
        b.set_column(2, &(-a.column(1)));
        let base = verify_lift_identities(&a, &a, 0.1).unwrap();
        let perm = verify_lift_identities(&a, &b, 0.1).unwrap();
        assert!((base.sum4 - perm.sum4).abs() < 1e-9);
        assert!((base.sum6 - perm.sum6).abs() < 1e-9);
    }

    #[test]
    fn verify_identities_rejects_non_unit() {
        let mut a = random_orthonormal(4, 2, 41);
        a[(0, 0)] *= 2.0;
        assert!(matches!(
            verify_lift_identities(&a, &a.clone(), 0.1),
            Err(EstimatorsError::NonUnitColumn { .. })
        ));
    }

    #[test]
    fn random_components_incoherence_bracket() {
        // ρ ≤ 5·log(n)/√n over seeds, for r = n = 16 random unit vectors
        let n = 16;
        let r = 16;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let mut a = DMatrix::zeros(n, r);
            for c in 0..r {
                let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in v.iter_mut() {
                    *x /= norm;
                }
                a.set_column(c, &DMatrix::from_column_slice(n, 1, &v).column(0));
            }
            let rep = verify_lift_identities(&a, &a, 0.5).unwrap();
            let bound = 5.0 * (n as f64).ln() / (n as f64).sqrt();
            assert!(rep.rho <= bound, "seed {seed}: rho {} > {bound}", rep.rho);
            assert!(rep.rho >= 0.0);
        }
    }

    #[test]
    fn masks_are_symmetric_and_sized() {
        let omega = random_symmetric_mask(8, 0.85, 7);
        for &(i, j) in &omega {
            assert!(omega.contains(&(j, i)));
        }
        let distinct: std::collections::HashSet<_> =
            omega.iter().map(|&(i, j)| if i <= j { (i, j) } else { (j, i) }).collect();
        assert_eq!(distinct.len(), (0.85f64 * 36.0).round() as usize);
    }
}

//! Tensor decomposition by random contraction: draw a Gaussian vector, slice
//! the 3-tensor against it, and read components off the top eigenvector of
//! the contraction matrix. A deflation loop recovers several components.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::sdpsolve::sym_eigen_sorted;
use crate::tensors::{contract_mode, SymTensor, TensorError};

#[derive(Debug, Error)]
pub enum JennrichError {
    #[error("zero tensor: no signal to decompose")]
    NoSignal,
    #[error("tensor must have order 3, got {0}")]
    WrongOrder(usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Per-call knobs; `trials` defaults to `max(20, ⌈10·r·ln(r+1)⌉)`.
#[derive(Debug, Clone, Copy)]
pub struct JennrichOpts {
    pub trials: usize,
    pub seed: u64,
}

pub fn default_trials(r: usize) -> usize {
    ((10.0 * r as f64 * ((r + 1) as f64).ln()).ceil() as usize).max(20)
}

#[derive(Debug, Clone)]
pub struct RecoveryDiagnostics {
    /// `<T, u^{⊗3}>` of the returned vector (sign fixed nonnegative).
    pub score: f64,
    /// |λ₁|/|λ₂| of the winning contraction matrix.
    pub gap_ratio: f64,
    pub trials_used: usize,
    /// Rescaling applied so the reshaping spectral norms meet the ≤ 10 bound;
    /// 1.0 when the input already satisfied it.
    pub scale_applied: f64,
    /// max of the two rectangular reshaping spectral norms, after scaling.
    pub reshape_norm: f64,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    /// Unit vectors, sorted by descending score.
    pub components: Vec<Vec<f64>>,
    /// `<T, u^{⊗3}>` per component, sorted descending.
    pub scores: Vec<f64>,
    pub trials_used: usize,
    /// Gap ratio per accepted component.
    pub gap_ratios: Vec<f64>,
    /// Set when deflation stalled before recovering the requested count.
    pub stalled: bool,
}

/// `contract_mode(T, g)` symmetrized to `(M + Mᵀ)/2`.
pub fn random_contraction(t: &SymTensor, g: &[f64]) -> Result<DMatrix<f64>, JennrichError> {
    if t.order() != 3 {
        return Err(JennrichError::WrongOrder(t.order()));
    }
    let m = contract_mode(t, g)?;
    Ok((&m + m.transpose()) * 0.5)
}

/// Largest spectral norm among the two rectangular reshapings `{1,3}{2}` and
/// `{1}{2,3}`, computed from the square Gram of the `n×n²` unfolding.
pub fn reshape_norm_bound(t: &SymTensor) -> f64 {
    let n = t.dim();
    // rows indexed by the middle mode: M[j, (i,k)] = T[i,j,k]
    let mut gram_mid = DMatrix::zeros(n, n);
    let mut gram_first = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc_mid = 0.0;
            let mut acc_first = 0.0;
            for i in 0..n {
                for k in 0..n {
                    acc_mid += t.get(&[i, a, k]) * t.get(&[i, b, k]);
                    acc_first += t.get(&[a, i, k]) * t.get(&[b, i, k]);
                }
            }
            gram_mid[(a, b)] = acc_mid;
            gram_first[(a, b)] = acc_first;
        }
    }
    let top = |g: DMatrix<f64>| -> f64 {
        sym_eigen_sorted(g).map(|(vals, _)| vals[vals.len() - 1].max(0.0)).unwrap_or(0.0)
    };
    top(gram_mid).max(top(gram_first)).sqrt()
}

/// Recovers one component: over `trials` Gaussian contractions, takes the
/// eigenvector of largest |eigenvalue|, scores it by `<T, u^{⊗3}>` with the
/// sign chosen to make the score nonnegative, and returns the best scorer.
pub fn recover_one(
    t: &SymTensor,
    opts: &JennrichOpts,
) -> Result<(Vec<f64>, RecoveryDiagnostics), JennrichError> {
    if t.order() != 3 {
        return Err(JennrichError::WrongOrder(t.order()));
    }
    let fro = t.frobenius_norm();
    if fro == 0.0 {
        return Err(JennrichError::NoSignal);
    }
    // the analysis presumes reshaping norms ≤ 10; rescale to meet it and report
    let bound = reshape_norm_bound(t);
    let (work, scale_applied, reshape_norm) = if bound > 10.0 {
        let s = 10.0 / bound;
        let mut w = t.clone();
        for v in w.values_mut() {
            *v *= s;
        }
        (w, s, 10.0)
    } else {
        (t.clone(), 1.0, bound)
    };

    let n = work.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_score = f64::NEG_INFINITY;
    let mut best_u: Vec<f64> = Vec::new();
    let mut best_gap = 1.0;
    for _ in 0..opts.trials.max(1) {
        let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let m = random_contraction(&work, &g)?;
        let Ok((vals, vecs)) = sym_eigen_sorted(m) else { continue };
        let (lo, hi) = (vals[0], vals[n - 1]);
        let (top_ix, top_abs, second_abs) = if lo.abs() > hi.abs() {
            (0, lo.abs(), hi.abs().max(if n > 1 { vals[1].abs() } else { 0.0 }))
        } else {
            (n - 1, hi.abs(), lo.abs().max(if n > 1 { vals[n - 2].abs() } else { 0.0 }))
        };
        let mut u: Vec<f64> = vecs.column(top_ix).iter().copied().collect();
        let mut score = work.apply_power(&u);
        if score < 0.0 {
            for x in u.iter_mut() {
                *x = -*x;
            }
            score = -score;
        }
        if score > best_score {
            best_score = score;
            best_u = u;
            best_gap = if second_abs > 0.0 { top_abs / second_abs } else { f64::INFINITY };
        }
    }
    if best_u.is_empty() {
        return Err(JennrichError::NoSignal);
    }
    // score reported against the unscaled input
    let score = t.apply_power(&best_u).abs();
    Ok((
        best_u,
        RecoveryDiagnostics {
            score,
            gap_ratio: best_gap,
            trials_used: opts.trials.max(1),
            scale_applied,
            reshape_norm,
        },
    ))
}

/// Acceptance threshold for deflation: score at least this fraction of the
/// largest third-mode slice Frobenius norm of the current residual tensor.
const ACCEPT_FRACTION: f64 = 0.5;
/// Consecutive rejected attempts (of `trials` contractions each) before the
/// deflation loop stalls.
const STALL_ATTEMPTS: usize = 5;

/// Deflation loop around [`recover_one`]: accept a component when its score
/// clears the threshold, subtract `score·u^{⊗3}`, and repeat until `r`
/// components are found or the loop stalls. A stall yields a partial result
/// with `stalled` set.
pub fn recover_all(
    t: &SymTensor,
    r: usize,
    opts: &JennrichOpts,
) -> Result<DecompositionResult, JennrichError> {
    if t.order() != 3 {
        return Err(JennrichError::WrongOrder(t.order()));
    }
    let mut residual = t.clone();
    let mut components: Vec<Vec<f64>> = Vec::new();
    let mut scores: Vec<f64> = Vec::new();
    let mut gap_ratios: Vec<f64> = Vec::new();
    let mut rejects = 0usize;
    let mut attempt = 0u64;
    let mut trials_used = 0usize;
    while components.len() < r {
        let slice_scale = max_slice_norm(&residual);
        if slice_scale == 0.0 {
            break;
        }
        let sub = JennrichOpts { trials: opts.trials, seed: opts.seed.wrapping_add(attempt) };
        attempt += 1;
        let (u, diag) = match recover_one(&residual, &sub) {
            Ok(x) => x,
            Err(JennrichError::NoSignal) => break,
            Err(e) => return Err(e),
        };
        trials_used += diag.trials_used;
        let score = residual.apply_power(&u);
        if score >= ACCEPT_FRACTION * slice_scale {
            residual.subtract_rank_one(score, &u);
            components.push(u);
            scores.push(score);
            gap_ratios.push(diag.gap_ratio);
            rejects = 0;
        } else {
            rejects += 1;
            if rejects >= STALL_ATTEMPTS {
                break;
            }
        }
    }
    let stalled = components.len() < r;
    // sort by descending score, keeping components aligned
    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let components: Vec<Vec<f64>> = order.iter().map(|&i| components[i].clone()).collect();
    let gap_ratios: Vec<f64> = order.iter().map(|&i| gap_ratios[i]).collect();
    let mut scores: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
    // scores are reported against the original tensor per component
    for (s, u) in scores.iter_mut().zip(components.iter()) {
        *s = t.apply_power(u);
    }
    Ok(DecompositionResult { components, scores, trials_used, gap_ratios, stalled })
}

fn max_slice_norm(t: &SymTensor) -> f64 {
    let n = t.dim();
    let mut best = 0.0f64;
    for l in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = t.get(&[i, j, l]);
                acc += v * v;
            }
        }
        best = best.max(acc.sqrt());
    }
    best
}

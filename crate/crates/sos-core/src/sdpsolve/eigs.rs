//! Eigendecomposition utilities: PSD projection, extreme eigenpairs of dense
//! matrices and matrix-free operators.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SolveError;

/// Full symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn sym_eigen_sorted(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), SolveError> {
    let n = m.nrows();
    let eig = nalgebra::linalg::SymmetricEigen::try_new(m, f64::EPSILON, 100_000)
        .ok_or(SolveError::EigenFailure { side: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (slot, &i) in order.iter().enumerate() {
        vecs.set_column(slot, &eig.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// Nearest PSD matrix in Frobenius norm (eigenvalue clipping). Idempotent.
pub fn project_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>, SolveError> {
    let (vals, vecs) = sym_eigen_sorted(m.clone())?;
    if vals.first().map_or(true, |&l| l >= 0.0) {
        return Ok(m.clone());
    }
    let mut scaled = vecs.clone();
    for (i, &l) in vals.iter().enumerate() {
        scaled.column_mut(i).scale_mut(l.max(0.0));
    }
    let mut out = scaled * vecs.transpose();
    // exact symmetry despite floating-point accumulation order
    let n = out.nrows();
    for r in 0..n {
        for c in 0..r {
            let avg = 0.5 * (out[(r, c)] + out[(c, r)]);
            out[(r, c)] = avg;
            out[(c, r)] = avg;
        }
    }
    Ok(out)
}

/// Which end of the spectrum an iterative eigensolver should target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    LargestAlgebraic,
    SmallestAlgebraic,
    LargestMagnitude,
}

#[derive(Debug, Clone)]
pub struct EigPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖Mv − λv‖` computed against the actual operator.
    pub residual: f64,
}

/// Extreme eigenpair of a symmetric operator by restarted Lanczos with full
/// reorthogonalization. Accelerated power iteration: each restart grows a
/// Krylov basis from a fresh random vector and reads the requested extreme
/// Ritz pair off the tridiagonal.
pub fn lanczos_extreme(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    dim: usize,
    which: Which,
    restarts: usize,
    max_steps: usize,
    tol: f64,
    seed: u64,
) -> Result<EigPair, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<EigPair> = None;
    let steps = max_steps.min(dim);
    for _ in 0..restarts.max(1) {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        normalize(&mut v);
        q.push(v);
        let mut w = vec![0.0; dim];
        for j in 0..steps {
            apply(&q[j], &mut w);
            if w.iter().any(|x| !x.is_finite()) {
                return Err(SolveError::NonFinite { iteration: j });
            }
            let alpha = dot(&q[j], &w);
            for i in 0..dim {
                w[i] -= alpha * q[j][i];
            }
            if j > 0 {
                let beta_prev = betas[j - 1];
                for i in 0..dim {
                    w[i] -= beta_prev * q[j - 1][i];
                }
            }
            // full reorthogonalization keeps Ritz residual estimates honest
            for qk in q.iter() {
                let c = dot(qk, &w);
                for i in 0..dim {
                    w[i] -= c * qk[i];
                }
            }
            alphas.push(alpha);
            let beta = norm(&w);
            let m = alphas.len();
            // examine the requested Ritz pair every few steps (and at breakdown)
            let check = beta < 1e-13 || m == steps || (m >= 8 && m % 4 == 0);
            if check {
                if let Some((theta, s)) = ritz_pair(&alphas, &betas, which) {
                    let est = beta * s[m - 1].abs();
                    if est <= tol * (1.0 + theta.abs()) || beta < 1e-13 {
                        let mut vec = vec![0.0; dim];
                        for (k, qk) in q.iter().enumerate() {
                            let sk = s[k];
                            for i in 0..dim {
                                vec[i] += sk * qk[i];
                            }
                        }
                        normalize(&mut vec);
                        let mut mv = vec![0.0; dim];
                        apply(&vec, &mut mv);
                        let resid = residual(&mv, theta, &vec);
                        let cand = EigPair { value: theta, vector: vec, residual: resid };
                        if resid <= tol * (1.0 + theta.abs()) {
                            return Ok(better(best, cand, which));
                        }
                        best = Some(better(best, cand, which));
                    }
                }
            }
            if beta < 1e-13 {
                break;
            }
            betas.push(beta);
            let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
            q.push(next);
        }
    }
    match best {
        Some(p) if p.residual <= tol * (1.0 + p.value.abs()) => Ok(p),
        Some(p) => Err(SolveError::EigNotConverged { best_residual: p.residual }),
        None => Err(SolveError::EigNotConverged { best_residual: f64::INFINITY }),
    }
}

fn better(best: Option<EigPair>, cand: EigPair, which: Which) -> EigPair {
    match best {
        None => cand,
        Some(b) => {
            let key = |p: &EigPair| match which {
                Which::LargestAlgebraic => p.value,
                Which::SmallestAlgebraic => -p.value,
                Which::LargestMagnitude => p.value.abs(),
            };
            // prefer a converged pair; among converged, the more extreme one
            let conv = |p: &EigPair| p.residual <= 1e-8 * (1.0 + p.value.abs());
            if (conv(&cand), key(&cand)) > (conv(&b), key(&b)) {
                cand
            } else {
                b
            }
        }
    }
}

fn ritz_pair(alphas: &[f64], betas: &[f64], which: Which) -> Option<(f64, Vec<f64>)> {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(t, f64::EPSILON, 100_000)?;
    let mut pick = 0usize;
    let mut pick_key = f64::NEG_INFINITY;
    for i in 0..m {
        let l = eig.eigenvalues[i];
        let key = match which {
            Which::LargestAlgebraic => l,
            Which::SmallestAlgebraic => -l,
            Which::LargestMagnitude => l.abs(),
        };
        if key > pick_key {
            pick_key = key;
            pick = i;
        }
    }
    let s: Vec<f64> = eig.eigenvectors.column(pick).iter().copied().collect();
    Some((eig.eigenvalues[pick], s))
}

fn residual(mv: &[f64], theta: f64, v: &[f64]) -> f64 {
    mv.iter()
        .zip(v.iter())
        .map(|(a, b)| (a - theta * b) * (a - theta * b))
        .sum::<f64>()
        .sqrt()
}

/// Smallest eigenvalue and unit eigenvector of a symmetric matrix to 1e-8
/// residual, via Lanczos on the dense matvec.
pub fn min_eig(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>), SolveError> {
    let n = m.nrows();
    let mut apply = |x: &[f64], out: &mut [f64]| {
        let xv = DVector::from_column_slice(x);
        let y = m * xv;
        out.copy_from_slice(y.as_slice());
    };
    let pair = lanczos_extreme(&mut apply, n, Which::SmallestAlgebraic, 5, 300, 1e-9, 0x51ce)?;
    Ok((pair.value, DVector::from_vec(pair.vector)))
}

/// Smallest eigenvalue of a matrix-free symmetric operator.
pub fn min_eig_operator(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    dim: usize,
    seed: u64,
) -> Result<EigPair, SolveError> {
    lanczos_extreme(apply, dim, Which::SmallestAlgebraic, 5, 300, 1e-9, seed)
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    } else if !v.is_empty() {
        v[0] = 1.0;
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_sym(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn project_psd_fixes_psd_input() {
        let m = {
            let a = random_sym(8, 1);
            &a * &a // PSD
        };
        let p = project_psd(&m).unwrap();
        assert!((&p - &m).norm() < 1e-12 * m.norm());
    }

    #[test]
    fn project_psd_clips_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let p = project_psd(&m).unwrap();
        assert!((p[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(p[(1, 1)].abs() < 1e-14);
        assert!(p[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn project_psd_distance_is_negative_spectrum_norm() {
        // eigendecomposition oracle for the Frobenius projection distance
        for seed in 0..5 {
            let m = random_sym(20, seed);
            let p = project_psd(&m).unwrap();
            let dist = (&p - &m).norm();
            let (vals, _) = sym_eigen_sorted(m).unwrap();
            let neg: f64 = vals.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum::<f64>().sqrt();
            assert!((dist - neg).abs() < 1e-9, "seed {seed}: {dist} vs {neg}");
        }
    }

    #[test]
    fn min_eig_identity() {
        let m = DMatrix::<f64>::identity(6, 6);
        let (l, v) = min_eig(&m).unwrap();
        assert!((l - 1.0).abs() < 1e-9);
        assert!((v.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_eig_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -2.0, 5.0]));
        let (l, v) = min_eig(&m).unwrap();
        assert!((l + 2.0).abs() < 1e-9);
        assert!((v[1].abs() - 1.0).abs() < 1e-7);
        assert!(v[0].abs() < 1e-7 && v[2].abs() < 1e-7);
    }

    #[test]
    fn min_eig_matches_dense_oracle() {
        for seed in [3u64, 4, 5] {
            let m = random_sym(50, seed);
            let (l, v) = min_eig(&m).unwrap();
            let (vals, _) = sym_eigen_sorted(m.clone()).unwrap();
            assert!((l - vals[0]).abs() < 1e-8, "seed {seed}: {l} vs {}", vals[0]);
            let resid = (&m * &v - l * &v).norm();
            assert!(resid < 1e-8);
        }
    }

    #[test]
    fn lanczos_largest_magnitude_tracks_sign() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -9.0, 5.0, 1.0]));
        let mut apply = |x: &[f64], out: &mut [f64]| {
            let y = &m * DVector::from_column_slice(x);
            out.copy_from_slice(y.as_slice());
        };
        let p = lanczos_extreme(&mut apply, 4, Which::LargestMagnitude, 3, 50, 1e-10, 7).unwrap();
        assert!((p.value + 9.0).abs() < 1e-9);
    }
}

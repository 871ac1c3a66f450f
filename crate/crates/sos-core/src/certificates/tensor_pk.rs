//! Injective-norm certificate from symmetrized Kronecker powers: for an
//! order-4 symmetric tensor with n²×n² reshaping R,
//! `P_k = S · R^{⊗k} · S` (S the mode symmetrizer on (ℝⁿ)^{⊗2k}) satisfies
//! `<x^{⊗2k}, P_k x^{⊗2k}> = <T, x^{⊗4}>^k`, so `λmax(P_k)^{1/k}` bounds the
//! injective tensor norm. P_k is never materialized for k ≥ 2; the operator
//! is applied matrix-free and its top eigenvalue found by restarted Lanczos.

use nalgebra::DMatrix;

use super::{digest_f64s, CertError, CertificateReport, Witness};
use crate::sdpsolve::{lanczos_extreme, Which};
use crate::tensors::{reshape, symmetrize_apply, ModePartition, SymTensor};

/// One application `v ↦ S (R^{⊗k}) S v` on ℝ^{n^{2k}}.
pub fn pk_operator_apply(r_mat: &DMatrix<f64>, n: usize, k: usize, v: &[f64]) -> Vec<f64> {
    let sym = symmetrize_apply(v, n, 2 * k).expect("dimension checked by caller");
    let contracted = apply_kron_power(r_mat, k, &sym);
    symmetrize_apply(&contracted, n, 2 * k).expect("dimension preserved")
}

/// Applies `R^{⊗k}` to a vector in (ℝ^{n²})^{⊗k} by k tensor-times-matrix
/// contractions along the super-modes.
fn apply_kron_power(r_mat: &DMatrix<f64>, k: usize, v: &[f64]) -> Vec<f64> {
    let d = r_mat.nrows(); // n²
    let mut cur = v.to_vec();
    let total = v.len();
    for mode in 0..k {
        let stride: usize = d.pow((k - 1 - mode) as u32);
        let blocks = total / (d * stride);
        let mut next = vec![0.0; total];
        // contract mode `mode`: next[..., a, ...] = Σ_b R[a,b] cur[..., b, ...]
        for blk in 0..blocks {
            let base = blk * d * stride;
            for off in 0..stride {
                for a in 0..d {
                    let mut acc = 0.0;
                    let row = r_mat.row(a);
                    for b in 0..d {
                        acc += row[b] * cur[base + b * stride + off];
                    }
                    next[base + a * stride + off] = acc;
                }
            }
        }
        cur = next;
    }
    cur
}

pub fn tensor_pk_certificate(t: &SymTensor, k: usize) -> Result<CertificateReport, CertError> {
    if t.order() != 4 {
        return Err(CertError::WrongTensor(t.order()));
    }
    if !(1..=3).contains(&k) {
        return Err(CertError::BadLevel { got: k, msg: "tensor certificate supports k in 1..=3" });
    }
    let n = t.dim();
    let r_mat = reshape(t, &ModePartition::new(vec![0, 1], vec![2, 3]))?;
    let dim = n.pow(2 * k as u32);
    let mut apply = |v: &[f64], out: &mut [f64]| {
        out.copy_from_slice(&pk_operator_apply(&r_mat, n, k, v));
    };
    let pair = lanczos_extreme(&mut apply, dim, Which::LargestAlgebraic, 5, 260, 1e-9, 0x9e1a)?;
    let lambda = pair.value;
    let bound = signed_root(lambda, k);
    Ok(CertificateReport {
        certified_bound: bound,
        method: "tensor-pk",
        witness: Witness { eigenvalue: lambda, eigenvector: pair.vector, residual: pair.residual },
        margins: vec![
            ("lambda_max".into(), lambda),
            ("k".into(), k as f64),
            ("n".into(), n as f64),
        ],
        instance_digest: digest_f64s(t.values().iter().copied()),
    })
}

/// `λ^{1/k}` preserving sign for odd k; for even k, λmax is nonnegative since
/// `<T,x^{⊗4}>^k ≥ 0` is realized by the quadratic form.
fn signed_root(lambda: f64, k: usize) -> f64 {
    match k {
        1 => lambda,
        2 => lambda.max(0.0).sqrt(),
        _ => lambda.signum() * lambda.abs().powf(1.0 / k as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdpsolve::sym_eigen_sorted;
    use crate::tensors::{gen_instance, injective_norm_oracle, Instance, InstanceKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    fn kron_power(x: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![1.0];
        for _ in 0..k {
            let mut next = Vec::with_capacity(out.len() * x.len());
            for a in &out {
                for b in x {
                    next.push(a * b);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn spike_certificate_is_tight_at_k1() {
        let v = unit(vec![0.5, 1.0, -0.25]);
        let t = SymTensor::from_rank_one_sum(4, 3, &[(1.0, v)]);
        let rep = tensor_pk_certificate(&t, 1).unwrap();
        assert!((rep.certified_bound - 1.0).abs() < 1e-8, "bound {}", rep.certified_bound);
    }

    #[test]
    fn k1_matches_dense_eigendecomposition() {
        for seed in 0..3u64 {
            let Instance::Tensor(t) = gen_instance(&InstanceKind::GaussianSymTensor { n: 4, order: 4, sigma: 1.0 }, seed)
            else {
                panic!()
            };
            let rep = tensor_pk_certificate(&t, 1).unwrap();
            let r = reshape(&t, &ModePartition::new(vec![0, 1], vec![2, 3])).unwrap();
            let (vals, _) = sym_eigen_sorted(r).unwrap();
            let dense_top = vals[vals.len() - 1];
            assert!(
                (rep.certified_bound - dense_top).abs() <= 1e-7 * (1.0 + dense_top.abs()),
                "{} vs {dense_top}",
                rep.certified_bound
            );
        }
    }

    #[test]
    fn pk_quadratic_form_reproduces_power_identity() {
        // <x^{⊗2k}, P_k x^{⊗2k}> = <T, x^{⊗4}>^k on random unit x
        let n = 4;
        let Instance::Tensor(t) = gen_instance(&InstanceKind::GaussianSymTensor { n, order: 4, sigma: 1.0 }, 5)
        else {
            panic!()
        };
        let r = reshape(&t, &ModePartition::new(vec![0, 1], vec![2, 3])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in 1..=2usize {
            for _ in 0..25 {
                let x = unit((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
                let xk = kron_power(&x, 2 * k);
                let px = pk_operator_apply(&r, n, k, &xk);
                let lhs: f64 = xk.iter().zip(px.iter()).map(|(a, b)| a * b).sum();
                let rhs = t.apply_power(&x).powi(k as i32);
                assert!(
                    (lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()),
                    "k={k}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn bound_dominates_quadratic_probes() {
        let n = 4;
        let Instance::Tensor(t) = gen_instance(&InstanceKind::GaussianSymTensor { n, order: 4, sigma: 1.0 }, 9)
        else {
            panic!()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for k in 1..=2usize {
            let rep = tensor_pk_certificate(&t, k).unwrap();
            for _ in 0..100 {
                let x = unit((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
                let val = t.apply_power(&x);
                assert!(rep.certified_bound >= val - 1e-8, "k={k}: bound {} < {val}", rep.certified_bound);
            }
        }
    }

    #[test]
    fn bound_dominates_ascent_oracle() {
        for seed in 0..3u64 {
            let Instance::Tensor(t) = gen_instance(&InstanceKind::GaussianSymTensor { n: 5, order: 4, sigma: 1.0 }, seed)
            else {
                panic!()
            };
            let oracle = injective_norm_oracle(&t, 10, 150, seed);
            let rep = tensor_pk_certificate(&t, 2).unwrap();
            assert!(rep.certified_bound >= oracle - 1e-7, "bound {} < oracle {oracle}", rep.certified_bound);
        }
    }

    #[test]
    fn k2_no_looser_than_k1_usually() {
        let n = 6;
        let mut wins = 0;
        for seed in 0..10u64 {
            let Instance::Tensor(t) = gen_instance(&InstanceKind::GaussianSymTensor { n, order: 4, sigma: 1.0 }, 60 + seed)
            else {
                panic!()
            };
            let b1 = tensor_pk_certificate(&t, 1).unwrap().certified_bound;
            let b2 = tensor_pk_certificate(&t, 2).unwrap().certified_bound;
            if b2 <= b1 + 1e-9 {
                wins += 1;
            }
        }
        assert!(wins >= 9, "k=2 beat k=1 in only {wins}/10 seeds");
    }

    #[test]
    fn rejects_bad_level_and_order() {
        let t = SymTensor::zeros(4, 2);
        assert!(matches!(tensor_pk_certificate(&t, 0), Err(CertError::BadLevel { .. })));
        assert!(matches!(tensor_pk_certificate(&t, 4), Err(CertError::BadLevel { .. })));
        let t3 = SymTensor::zeros(3, 2);
        assert!(matches!(tensor_pk_certificate(&t3, 1), Err(CertError::WrongTensor(3))));
    }

    #[test]
    fn rank_one_probe_with_rng_smoke() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = unit((0..3).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let t = SymTensor::from_rank_one_sum(4, 3, &[(2.0, x.clone())]);
        let rep = tensor_pk_certificate(&t, 2).unwrap();
        // T = 2·x^{⊗4}: injective norm is 2, and P_2 is tight on rank-one input
        assert!((rep.certified_bound - 2.0).abs() < 1e-7);
    }
}

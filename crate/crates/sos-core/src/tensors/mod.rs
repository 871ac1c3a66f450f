//! Dense symmetric tensors, mode-partition reshapings, symmetrization, mode
//! contractions, and seeded random instance generators.
//!
//! Storage is dense in full row-major index order: desk scale (`n^k` up to
//! ~10^7) makes index arithmetic trivial and avoids symmetry bookkeeping bugs.

mod instances;
pub mod io;

pub use instances::{
    GraphInstance, Instance, InstanceKind, SpikedTensorInstance, XorConstraint, XorInstance,
    gen_instance, split_seed,
};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("tensor order {order} not supported (max 8)")]
    OrderTooLarge { order: usize },
    #[error("values length {got} does not match n^k = {expect}")]
    LengthMismatch { got: usize, expect: usize },
    #[error("tensor not symmetric: max deviation {dev:.3e} at flat index {index}")]
    NotSymmetric { dev: f64, index: usize },
    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },
    #[error("invalid mode partition: {msg}")]
    BadPartition { msg: String },
    #[error("dimension mismatch: expected {expect}, got {got}")]
    DimensionMismatch { expect: usize, got: usize },
    #[error("vector length {len} is not {n}^{m}")]
    NotAPower { len: usize, n: usize, m: usize },
    #[error("invalid instance parameters: {msg}")]
    BadInstance { msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Dense order-`k`, dimension-`n` real tensor in row-major full index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    order: usize,
    dim: usize,
    values: Vec<f64>,
    symmetric: bool,
}

const SYMMETRY_TOL: f64 = 1e-10;

impl SymTensor {
    /// Wraps a dense value array, verifying symmetry to 1e-10 absolute.
    pub fn new_symmetric(order: usize, dim: usize, values: Vec<f64>) -> Result<Self, TensorError> {
        let t = Self::validated(order, dim, values)?;
        let (dev, index) = t.symmetry_deviation();
        if dev > SYMMETRY_TOL {
            return Err(TensorError::NotSymmetric { dev, index });
        }
        Ok(SymTensor { symmetric: true, ..t })
    }

    /// Wraps a dense value array and symmetrizes it (orbit averaging).
    pub fn symmetrized(order: usize, dim: usize, values: Vec<f64>) -> Result<Self, TensorError> {
        let t = Self::validated(order, dim, values)?;
        let sym = symmetrize_apply(&t.values, dim, order)?;
        Ok(SymTensor { order, dim, values: sym, symmetric: true })
    }

    /// Wraps a dense value array without any symmetry claim.
    pub fn new_general(order: usize, dim: usize, values: Vec<f64>) -> Result<Self, TensorError> {
        Self::validated(order, dim, values)
    }

    fn validated(order: usize, dim: usize, values: Vec<f64>) -> Result<Self, TensorError> {
        if order > 8 {
            return Err(TensorError::OrderTooLarge { order });
        }
        let expect = dim.checked_pow(order as u32).expect("size overflow");
        if values.len() != expect {
            return Err(TensorError::LengthMismatch { got: values.len(), expect });
        }
        if let Some(ix) = values.iter().position(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite { index: ix });
        }
        Ok(SymTensor { order, dim, values, symmetric: false })
    }

    pub fn zeros(order: usize, dim: usize) -> Self {
        let len = dim.pow(order as u32);
        SymTensor { order, dim, values: vec![0.0; len], symmetric: true }
    }

    /// `Σ_i c_i · v_i^{⊗k}` for unit-free component vectors.
    pub fn from_rank_one_sum(order: usize, dim: usize, comps: &[(f64, Vec<f64>)]) -> Self {
        let len = dim.pow(order as u32);
        let mut values = vec![0.0; len];
        let mut idx = vec![0usize; order];
        for flat in 0..len {
            decode_index(flat, dim, &mut idx);
            let mut acc = 0.0;
            for (c, v) in comps {
                let mut prod = *c;
                for &i in idx.iter() {
                    prod *= v[i];
                }
                acc += prod;
            }
            values[flat] = acc;
        }
        SymTensor { order, dim, values, symmetric: true }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[encode_index(idx, self.dim)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `<T, x^{⊗k}>`.
    pub fn apply_power(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        let mut idx = vec![0usize; self.order];
        let mut acc = 0.0;
        for (flat, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            decode_index(flat, self.dim, &mut idx);
            let mut prod = v;
            for &i in idx.iter() {
                prod *= x[i];
            }
            acc += prod;
        }
        acc
    }

    /// Gradient of `x ↦ <T, x^{⊗k}>`, i.e. `k · T(·, x, …, x)` using symmetry.
    pub fn power_gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let k = self.order;
        let mut grad = vec![0.0; n];
        let mut idx = vec![0usize; k];
        for (flat, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            decode_index(flat, n, &mut idx);
            // derivative contribution through the first mode only; symmetry
            // supplies the factor k
            let mut prod = v;
            for &i in idx.iter().skip(1) {
                prod *= x[i];
            }
            grad[idx[0]] += prod;
        }
        for g in grad.iter_mut() {
            *g *= k as f64;
        }
        grad
    }

    /// Subtracts `c · u^{⊗k}` in place (deflation).
    pub fn subtract_rank_one(&mut self, c: f64, u: &[f64]) {
        let n = self.dim;
        let mut idx = vec![0usize; self.order];
        for flat in 0..self.values.len() {
            decode_index(flat, n, &mut idx);
            let mut prod = c;
            for &i in idx.iter() {
                prod *= u[i];
            }
            self.values[flat] -= prod;
        }
    }

    /// Reinterprets an order-`2m` tensor as an order-`m` tensor over dimension
    /// `n²` by grouping adjacent mode pairs. Row-major strides make this a
    /// pure relabeling of the same value array.
    pub fn group_mode_pairs(&self) -> Result<SymTensor, TensorError> {
        if self.order % 2 != 0 {
            return Err(TensorError::BadPartition { msg: format!("order {} is odd", self.order) });
        }
        Ok(SymTensor {
            order: self.order / 2,
            dim: self.dim * self.dim,
            values: self.values.clone(),
            symmetric: self.symmetric,
        })
    }

    fn symmetry_deviation(&self) -> (f64, usize) {
        let n = self.dim;
        let k = self.order;
        let mut idx = vec![0usize; k];
        let mut sorted = vec![0usize; k];
        let mut worst = (0.0f64, 0usize);
        for flat in 0..self.values.len() {
            decode_index(flat, n, &mut idx);
            sorted.copy_from_slice(&idx);
            sorted.sort_unstable();
            let canon = encode_index(&sorted, n);
            let dev = (self.values[flat] - self.values[canon]).abs();
            if dev > worst.0 {
                worst = (dev, flat);
            }
        }
        worst
    }
}

pub(crate) fn encode_index(idx: &[usize], n: usize) -> usize {
    let mut flat = 0usize;
    for &i in idx {
        flat = flat * n + i;
    }
    flat
}

pub(crate) fn decode_index(mut flat: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

/// Assignment of tensor modes to matrix rows and columns. Modes are 0-based;
/// `row_modes ∪ col_modes` must be a permutation of `0..k`.
#[derive(Debug, Clone)]
pub struct ModePartition {
    pub row_modes: Vec<usize>,
    pub col_modes: Vec<usize>,
}

impl ModePartition {
    pub fn new(row_modes: Vec<usize>, col_modes: Vec<usize>) -> Self {
        ModePartition { row_modes, col_modes }
    }

    fn validate(&self, order: usize) -> Result<(), TensorError> {
        let mut seen = vec![false; order];
        for &m in self.row_modes.iter().chain(self.col_modes.iter()) {
            if m >= order || seen[m] {
                return Err(TensorError::BadPartition {
                    msg: format!("modes {:?}|{:?} not a permutation of 0..{order}", self.row_modes, self.col_modes),
                });
            }
            seen[m] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(TensorError::BadPartition {
                msg: format!("modes {:?}|{:?} do not cover 0..{order}", self.row_modes, self.col_modes),
            });
        }
        Ok(())
    }
}

/// The `n^|row| × n^|col|` matrix reshaping of `T` under `part`. Bijective on
/// entries and exactly Frobenius-norm preserving.
pub fn reshape(t: &SymTensor, part: &ModePartition) -> Result<DMatrix<f64>, TensorError> {
    part.validate(t.order())?;
    let n = t.dim();
    let rows = n.pow(part.row_modes.len() as u32);
    let cols = n.pow(part.col_modes.len() as u32);
    let mut out = DMatrix::zeros(rows, cols);
    let mut full = vec![0usize; t.order()];
    let mut ridx = vec![0usize; part.row_modes.len()];
    let mut cidx = vec![0usize; part.col_modes.len()];
    for r in 0..rows {
        decode_index(r, n, &mut ridx);
        for (slot, &mode) in part.row_modes.iter().enumerate() {
            full[mode] = ridx[slot];
        }
        for c in 0..cols {
            decode_index(c, n, &mut cidx);
            for (slot, &mode) in part.col_modes.iter().enumerate() {
                full[mode] = cidx[slot];
            }
            out[(r, c)] = t.values[encode_index(&full, n)];
        }
    }
    Ok(out)
}

/// Inverse of [`reshape`]: scatters matrix entries back into a full tensor.
pub fn reshape_back(
    m: &DMatrix<f64>,
    part: &ModePartition,
    order: usize,
    dim: usize,
) -> Result<SymTensor, TensorError> {
    part.validate(order)?;
    let mut values = vec![0.0; dim.pow(order as u32)];
    let mut full = vec![0usize; order];
    let mut ridx = vec![0usize; part.row_modes.len()];
    let mut cidx = vec![0usize; part.col_modes.len()];
    for r in 0..m.nrows() {
        decode_index(r, dim, &mut ridx);
        for (slot, &mode) in part.row_modes.iter().enumerate() {
            full[mode] = ridx[slot];
        }
        for c in 0..m.ncols() {
            decode_index(c, dim, &mut cidx);
            for (slot, &mode) in part.col_modes.iter().enumerate() {
                full[mode] = cidx[slot];
            }
            values[encode_index(&full, dim)] = m[(r, c)];
        }
    }
    SymTensor::new_general(order, dim, values)
}

/// Averages a length-`n^m` vector over all `m!` mode permutations.
///
/// Computed by orbit averaging: the group average of `v` at index `i` equals
/// the plain average of `v` over the permutation orbit of `i`, since every
/// orbit element is hit by the same number of permutations. This is exact for
/// every `m` (no iterative scheme), and idempotent.
pub fn symmetrize_apply(v: &[f64], n: usize, m: usize) -> Result<Vec<f64>, TensorError> {
    if m > 8 || n.checked_pow(m as u32) != Some(v.len()) {
        return Err(TensorError::NotAPower { len: v.len(), n, m });
    }
    let mut idx = vec![0usize; m];
    let mut sorted = vec![0usize; m];
    // accumulate orbit sums and sizes keyed by the canonical (sorted) index
    let mut sum: std::collections::HashMap<usize, (f64, u32)> = std::collections::HashMap::new();
    for (flat, &val) in v.iter().enumerate() {
        decode_index(flat, n, &mut idx);
        sorted.copy_from_slice(&idx);
        sorted.sort_unstable();
        let key = encode_index(&sorted, n);
        let e = sum.entry(key).or_insert((0.0, 0));
        e.0 += val;
        e.1 += 1;
    }
    let mut out = vec![0.0; v.len()];
    for (flat, slot) in out.iter_mut().enumerate() {
        decode_index(flat, n, &mut idx);
        sorted.copy_from_slice(&idx);
        sorted.sort_unstable();
        let (s, c) = sum[&encode_index(&sorted, n)];
        *slot = s / c as f64;
    }
    Ok(out)
}

/// Contracts the third mode of an order-3 tensor against `v`:
/// returns `Σ_j v_j · T_j` where `T_j` is the j-th third-mode slice.
pub fn contract_mode(t: &SymTensor, v: &[f64]) -> Result<DMatrix<f64>, TensorError> {
    if t.order() != 3 {
        return Err(TensorError::BadPartition { msg: format!("contract_mode needs order 3, got {}", t.order()) });
    }
    if v.len() != t.dim() {
        return Err(TensorError::DimensionMismatch { expect: t.dim(), got: v.len() });
    }
    let n = t.dim();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let base = (i * n + j) * n;
            let mut acc = 0.0;
            for (l, &vl) in v.iter().enumerate() {
                acc += vl * t.values[base + l];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Best value of `<T, x^{⊗k}>` over unit `x` found by multi-start shifted
/// power ascent; a lower bound on the injective tensor norm. Returns `-inf`
/// for the zero tensor. The best value over restarts is monotone in the
/// restart count for a fixed seed stream.
pub fn injective_norm_oracle(t: &SymTensor, restarts: usize, iters: usize, seed: u64) -> f64 {
    let n = t.dim();
    if n == 0 || t.values.iter().all(|&v| v == 0.0) {
        return f64::NEG_INFINITY;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // shift makes the ascent step monotone for even orders
    let shift = t.frobenius_norm().max(1e-12);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..restarts.max(1) {
        let mut x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        normalize(&mut x);
        let mut value = t.apply_power(&x);
        for _ in 0..iters {
            let mut g = t.power_gradient(&x);
            for (gi, xi) in g.iter_mut().zip(x.iter()) {
                *gi += shift * xi;
            }
            normalize(&mut g);
            let cand = t.apply_power(&g);
            if cand <= value + 1e-8 * (1.0 + value.abs()) {
                if cand > value {
                    x = g;
                    value = cand;
                }
                break;
            }
            x = g;
            value = cand;
        }
        if value > best {
            best = value;
        }
    }
    best
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 {
        for a in v.iter_mut() {
            *a /= norm;
        }
    } else {
        v[0] = 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn unit(v: &[f64]) -> Vec<f64> {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter().map(|a| a / norm).collect()
    }

    #[test]
    fn reshape_of_spike_is_rank_one() {
        let v = unit(&[1.0, 2.0, -1.0]);
        let t = SymTensor::from_rank_one_sum(4, 3, &[(1.0, v.clone())]);
        let m = reshape(&t, &ModePartition::new(vec![0, 1], vec![2, 3])).unwrap();
        // top eigenvalue is ||v||^4 = 1, all other singular values vanish
        let svd = m.svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((sv[0] - 1.0).abs() < 1e-10);
        assert!(sv[1].abs() < 1e-10);
    }

    #[test]
    fn reshape_entry_matches_index_arithmetic() {
        // independent oracle: recompute one entry by hand index arithmetic
        let n = 2;
        let values: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let t = SymTensor::new_general(3, n, values.clone()).unwrap();
        let m = reshape(&t, &ModePartition::new(vec![1], vec![0, 2])).unwrap();
        // entry (row=i2, col=(i1,i3)) = T[i1,i2,i3] = values[i1*4 + i2*2 + i3]
        let (i1, i2, i3) = (1, 0, 1);
        assert_eq!(m[(i2, i1 * 2 + i3)], values[i1 * 4 + i2 * 2 + i3]);
    }

    #[test]
    fn reshape_roundtrip_bit_exact_and_norm_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 3;
        let values: Vec<f64> = (0..n * n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = SymTensor::new_general(4, n, values.clone()).unwrap();
        let part = ModePartition::new(vec![2, 0], vec![3, 1]);
        let m = reshape(&t, &part).unwrap();
        assert!((m.norm() - t.frobenius_norm()).abs() < 1e-12);
        let back = reshape_back(&m, &part, 4, n).unwrap();
        assert_eq!(back.values(), t.values());
    }

    #[test]
    fn symmetrize_transposition_average() {
        let n = 3;
        // e_0 ⊗ e_1 -> (e_0⊗e_1 + e_1⊗e_0)/2
        let mut v = vec![0.0; n * n];
        v[1] = 1.0; // (0,1)
        let s = symmetrize_apply(&v, n, 2).unwrap();
        assert_eq!(s[1], 0.5);
        assert_eq!(s[n], 0.5);
        assert_eq!(s[0], 0.0);
    }

    #[test]
    fn symmetrize_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (n, m): (usize, usize) = (3, 4);
        let v: Vec<f64> = (0..n.pow(m as u32)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s1 = symmetrize_apply(&v, n, m).unwrap();
        let s2 = symmetrize_apply(&s1, n, m).unwrap();
        for (a, b) in s1.iter().zip(s2.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetrize_invariant_under_any_single_transposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for m in 2..=4usize {
            let n = 3usize;
            let v: Vec<f64> = (0..n.pow(m as u32)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = symmetrize_apply(&v, n, m).unwrap();
            let mut idx = vec![0usize; m];
            for a in 0..m {
                for b in (a + 1)..m {
                    for flat in 0..s.len() {
                        decode_index(flat, n, &mut idx);
                        idx.swap(a, b);
                        let swapped = encode_index(&idx, n);
                        idx.swap(a, b);
                        assert!((s[flat] - s[swapped]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn symmetrizer_image_dimension() {
        // m=4, n=2: rank of the assembled projector is C(n+m-1, m) = 5
        let (n, m) = (2usize, 4usize);
        let dim = n.pow(m as u32);
        let mut proj = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            let col = symmetrize_apply(&e, n, m).unwrap();
            for i in 0..dim {
                proj[(i, j)] = col[i];
            }
        }
        let eig = proj.symmetric_eigen();
        let rank = eig.eigenvalues.iter().filter(|&&l| l > 0.5).count();
        assert_eq!(rank, 5);
    }

    #[test]
    fn symmetrize_rejects_bad_length() {
        assert!(symmetrize_apply(&[0.0; 7], 2, 3).is_err());
    }

    #[test]
    fn contract_basis_vector_gives_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 4;
        let values: Vec<f64> = (0..n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = SymTensor::new_general(3, n, values.clone()).unwrap();
        let i = 2;
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let m = contract_mode(&t, &e).unwrap();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(m[(a, b)], values[(a * n + b) * n + i]);
            }
        }
    }

    #[test]
    fn contract_orthonormal_components_recovers_projector() {
        // T = Σ a_j^{⊗3} with orthonormal a_j; contracting with a_i gives a_i a_iᵀ
        let n = 4;
        let comps: Vec<(f64, Vec<f64>)> = (0..3)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                (1.0, e)
            })
            .collect();
        // rotate by a fixed orthogonal matrix so the test is not axis-aligned
        let rot = {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            raw.qr().q()
        };
        let comps: Vec<(f64, Vec<f64>)> = comps
            .iter()
            .map(|(c, e)| {
                let v = &rot * DMatrix::from_column_slice(n, 1, e);
                (*c, v.column(0).iter().copied().collect())
            })
            .collect();
        let t = SymTensor::from_rank_one_sum(3, n, &comps);
        let a0 = &comps[0].1;
        let m = contract_mode(&t, a0).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!((m[(i, j)] - a0[i] * a0[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn contract_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 3;
        let values: Vec<f64> = (0..27).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = SymTensor::new_general(3, n, values).unwrap();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (alpha, beta) = (0.7, -1.3);
        let mixed: Vec<f64> = u.iter().zip(v.iter()).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = contract_mode(&t, &mixed).unwrap();
        let rhs = contract_mode(&t, &u).unwrap() * alpha + contract_mode(&t, &v).unwrap() * beta;
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn oracle_finds_unique_spike() {
        let v = unit(&[0.3, -0.5, 1.0, 0.2]);
        let t = SymTensor::from_rank_one_sum(4, 4, &[(1.0, v)]);
        let val = injective_norm_oracle(&t, 10, 200, 42);
        assert!((val - 1.0).abs() < 1e-6, "got {val}");
    }

    #[test]
    fn oracle_dominates_random_probes() {
        let t = match gen_instance(&InstanceKind::GaussianSymTensor { n: 5, order: 4, sigma: 1.0 }, 7) {
            Instance::Tensor(t) => t,
            _ => unreachable!(),
        };
        let val = injective_norm_oracle(&t, 20, 200, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let x = unit(&x);
            assert!(val >= t.apply_power(&x) - 1e-9);
        }
    }

    #[test]
    fn oracle_monotone_in_restarts() {
        let t = match gen_instance(&InstanceKind::GaussianSymTensor { n: 4, order: 4, sigma: 1.0 }, 3) {
            Instance::Tensor(t) => t,
            _ => unreachable!(),
        };
        let mut prev = f64::NEG_INFINITY;
        for restarts in [1, 2, 5, 10, 20] {
            let val = injective_norm_oracle(&t, restarts, 100, 77);
            assert!(val >= prev - 1e-12);
            prev = val;
        }
    }

    #[test]
    fn oracle_empty_tensor() {
        let t = SymTensor::zeros(4, 3);
        assert_eq!(injective_norm_oracle(&t, 5, 50, 0), f64::NEG_INFINITY);
    }

    #[test]
    fn oracle_gaussian_scaling_bracket() {
        // oracle / sqrt(n) stays within the calibrated bracket [1, 4]
        let n = 8;
        for seed in 0..20u64 {
            let t = match gen_instance(&InstanceKind::GaussianSymTensor { n, order: 4, sigma: 1.0 }, seed) {
                Instance::Tensor(t) => t,
                _ => unreachable!(),
            };
            let val = injective_norm_oracle(&t, 20, 200, seed ^ 0x5eed);
            let ratio = val / (n as f64).sqrt();
            assert!((1.0..=4.0).contains(&ratio), "seed {seed}: ratio {ratio}");
        }
    }
}

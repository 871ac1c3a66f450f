//! Seeded random instance generators for graphs, tensors, and XOR systems.
//!
//! Every generator is a pure function of (kind, seed): identical seeds yield
//! bit-identical instances across runs and platforms.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{SymTensor, TensorError};

/// Counter-based seed derivation for batch runs: instance `i` of a batch with
/// base seed `s` uses `split_seed(s, i)`. SplitMix64 keeps derived streams
/// decorrelated while letting an oracle replay any single instance.
pub fn split_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Which random instance to draw. The seed is supplied at generation time.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceKind {
    /// G(n, 1/2) as a ±1 edge vector (+1 edge, −1 non-edge).
    ErdosRenyiHalf { n: usize },
    /// G(n, 1/2) with a planted k-clique.
    PlantedClique { n: usize, k: usize },
    /// I.i.d. N(0, σ²) entries, then full symmetrization. After symmetrizing,
    /// an entry with all-distinct indices has variance σ²/k!.
    GaussianSymTensor { n: usize, order: usize, sigma: f64 },
    /// `v^{⊗order} + ζ` with ζ a symmetrized Gaussian noise tensor.
    SpikedTensor { n: usize, order: usize, sigma: f64, v: Vec<f64> },
    /// m constraints, each on four distinct sorted indices with a ±1 sign.
    /// Constraints are sampled independently with replacement, so `m` may
    /// exceed C(n,4); a 4-set drawn twice contributes two equations.
    RandomXor { n: usize, m: usize },
}

/// A graph over `[n]` as a dense ±1 vector over the C(n,2) vertex pairs in
/// lexicographic order: +1 edge, −1 non-edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    pub n: usize,
    pub y: Vec<f64>,
}

impl GraphInstance {
    pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < n);
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn num_pairs(n: usize) -> usize {
        n * (n - 1) / 2
    }

    pub fn edge_sign(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.y[Self::pair_index(self.n, a, b)]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_sign(i, j) > 0.0
    }

    /// Zero-diagonal 0/1 adjacency matrix.
    pub fn adjacency(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n;
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                if self.has_edge(i, j) {
                    a[(i, j)] = 1.0;
                    a[(j, i)] = 1.0;
                }
            }
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XorConstraint {
    /// Four distinct variable indices, sorted ascending.
    pub vars: [usize; 4],
    /// +1 or −1.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XorInstance {
    pub n: usize,
    pub constraints: Vec<XorConstraint>,
}

impl XorInstance {
    /// Signed sat–unsat gap `Σ_c sign_c · x_c` for x ∈ {±1}ⁿ.
    pub fn signed_gap(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.sign as f64 * c.vars.iter().map(|&v| x[v]).product::<f64>())
            .sum()
    }

    /// Dense order-4 tensor view: each constraint's sign is placed at all 4!
    /// permuted positions scaled by 1/4!, so `<T, x^{⊗4}>` equals the signed
    /// sat–unsat gap exactly.
    pub fn as_tensor(&self) -> SymTensor {
        let n = self.n;
        let mut t = SymTensor::zeros(4, n);
        let w = 1.0 / 24.0;
        for c in &self.constraints {
            let [a, b, cc, d] = c.vars;
            let sign = c.sign as f64;
            let mut perm = [a, b, cc, d];
            // distinct indices: the 24 permutations are distinct positions
            permute_all(&mut perm, 0, &mut |p| {
                let flat = ((p[0] * n + p[1]) * n + p[2]) * n + p[3];
                t.values_mut()[flat] += sign * w;
            });
        }
        SymTensor { symmetric: true, ..t }
    }
}

fn permute_all(arr: &mut [usize; 4], k: usize, f: &mut impl FnMut(&[usize; 4])) {
    if k == 4 {
        f(arr);
        return;
    }
    for i in k..4 {
        arr.swap(k, i);
        permute_all(arr, k + 1, f);
        arr.swap(k, i);
    }
}

/// A spiked-tensor draw together with its ground truth; `tensor` equals
/// spike + noise entrywise, bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedTensorInstance {
    pub tensor: SymTensor,
    pub spike: SymTensor,
    pub noise: SymTensor,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Graph(GraphInstance),
    /// Graph plus the planted clique's sorted vertex list.
    PlantedGraph { graph: GraphInstance, clique: Vec<usize> },
    Tensor(SymTensor),
    Spiked(SpikedTensorInstance),
    Xor(XorInstance),
}

/// Draws an instance; deterministic given `(kind, seed)`.
pub fn gen_instance(kind: &InstanceKind, seed: u64) -> Instance {
    try_gen_instance(kind, seed).expect("invalid instance parameters")
}

pub fn try_gen_instance(kind: &InstanceKind, seed: u64) -> Result<Instance, TensorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        InstanceKind::ErdosRenyiHalf { n } => Ok(Instance::Graph(random_graph(*n, &mut rng))),
        InstanceKind::PlantedClique { n, k } => {
            if *k < 1 || *k > *n {
                return Err(TensorError::BadInstance { msg: format!("clique size {k} not in 1..={n}") });
            }
            let mut graph = random_graph(*n, &mut rng);
            let mut verts: Vec<usize> = (0..*n).collect();
            verts.shuffle(&mut rng);
            let mut clique: Vec<usize> = verts[..*k].to_vec();
            clique.sort_unstable();
            for (a, &i) in clique.iter().enumerate() {
                for &j in clique.iter().skip(a + 1) {
                    graph.y[GraphInstance::pair_index(*n, i, j)] = 1.0;
                }
            }
            Ok(Instance::PlantedGraph { graph, clique })
        }
        InstanceKind::GaussianSymTensor { n, order, sigma } => {
            Ok(Instance::Tensor(gaussian_sym(*n, *order, *sigma, &mut rng)?))
        }
        InstanceKind::SpikedTensor { n, order, sigma, v } => {
            if v.len() != *n {
                return Err(TensorError::BadInstance { msg: format!("spike has length {}, expected {n}", v.len()) });
            }
            let noise = gaussian_sym(*n, *order, *sigma, &mut rng)?;
            let spike = SymTensor::from_rank_one_sum(*order, *n, &[(1.0, v.clone())]);
            let mut values = spike.values().to_vec();
            for (t, z) in values.iter_mut().zip(noise.values()) {
                *t += z;
            }
            let tensor = SymTensor { order: *order, dim: *n, values, symmetric: true };
            Ok(Instance::Spiked(SpikedTensorInstance { tensor, spike, noise, v: v.clone() }))
        }
        InstanceKind::RandomXor { n, m } => {
            if *n < 4 {
                return Err(TensorError::BadInstance { msg: format!("xor needs n >= 4, got {n}") });
            }
            if *m == 0 {
                return Err(TensorError::BadInstance { msg: "xor needs m >= 1".into() });
            }
            let mut constraints = Vec::with_capacity(*m);
            for _ in 0..*m {
                let mut vars = [0usize; 4];
                let mut filled = 0;
                while filled < 4 {
                    let c = rng.gen_range(0..*n);
                    if !vars[..filled].contains(&c) {
                        vars[filled] = c;
                        filled += 1;
                    }
                }
                vars.sort_unstable();
                let sign = if rng.gen::<bool>() { 1 } else { -1 };
                constraints.push(XorConstraint { vars, sign });
            }
            Ok(Instance::Xor(XorInstance { n: *n, constraints }))
        }
    }
}

fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> GraphInstance {
    let y = (0..GraphInstance::num_pairs(n))
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    GraphInstance { n, y }
}

fn gaussian_sym(n: usize, order: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Result<SymTensor, TensorError> {
    if order > 8 {
        return Err(TensorError::OrderTooLarge { order });
    }
    let len = n.pow(order as u32);
    let raw: Vec<f64> = (0..len).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    SymTensor::symmetrized(order, n, raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_clique_edges_present() {
        let inst = gen_instance(&InstanceKind::PlantedClique { n: 20, k: 6 }, 42);
        let Instance::PlantedGraph { graph, clique } = inst else { panic!() };
        assert_eq!(clique.len(), 6);
        for (a, &i) in clique.iter().enumerate() {
            for &j in clique.iter().skip(a + 1) {
                assert_eq!(graph.edge_sign(i, j), 1.0);
            }
        }
    }

    #[test]
    fn erdos_renyi_density_sane() {
        let Instance::Graph(g) = gen_instance(&InstanceKind::ErdosRenyiHalf { n: 200 }, 7) else { panic!() };
        let edges = g.y.iter().filter(|&&s| s > 0.0).count() as f64;
        let density = edges / g.y.len() as f64;
        assert!((density - 0.5).abs() < 0.05, "density {density}");
    }

    #[test]
    fn spiked_tensor_decomposes_exactly() {
        let v = vec![0.6, 0.8, 0.0];
        let kind = InstanceKind::SpikedTensor { n: 3, order: 4, sigma: 0.1, v: v.clone() };
        let Instance::Spiked(s) = gen_instance(&kind, 5) else { panic!() };
        let spike = SymTensor::from_rank_one_sum(4, 3, &[(1.0, v)]);
        for ((t, z), sp) in s.tensor.values().iter().zip(s.noise.values()).zip(spike.values()) {
            assert_eq!(t - z, *sp); // bit-exact by construction
        }
    }

    #[test]
    fn generators_reproducible() {
        for kind in [
            InstanceKind::ErdosRenyiHalf { n: 30 },
            InstanceKind::PlantedClique { n: 30, k: 7 },
            InstanceKind::GaussianSymTensor { n: 4, order: 3, sigma: 0.5 },
            InstanceKind::RandomXor { n: 12, m: 40 },
        ] {
            assert_eq!(gen_instance(&kind, 123), gen_instance(&kind, 123));
        }
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(try_gen_instance(&InstanceKind::PlantedClique { n: 5, k: 6 }, 0).is_err());
        assert!(try_gen_instance(&InstanceKind::RandomXor { n: 3, m: 5 }, 0).is_err());
        assert!(try_gen_instance(&InstanceKind::RandomXor { n: 10, m: 0 }, 0).is_err());
    }

    #[test]
    fn xor_tensor_view_matches_signed_gap() {
        let Instance::Xor(inst) = gen_instance(&InstanceKind::RandomXor { n: 8, m: 25 }, 9) else { panic!() };
        let t = inst.as_tensor();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let x: Vec<f64> = (0..8).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            let gap = inst.signed_gap(&x);
            let via_tensor = t.apply_power(&x);
            assert!((gap - via_tensor).abs() < 1e-9, "{gap} vs {via_tensor}");
        }
    }

    #[test]
    fn xor_constraints_sorted_distinct() {
        let Instance::Xor(inst) = gen_instance(&InstanceKind::RandomXor { n: 9, m: 100 }, 77) else { panic!() };
        for c in &inst.constraints {
            assert!(c.vars.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

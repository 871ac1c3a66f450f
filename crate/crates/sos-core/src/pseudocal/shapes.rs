//! Colored-graph shape matrices and their spectral-norm scaling.
//!
//! A shape is a small graph whose vertices carry left/right color lists; its
//! matrix against an instance y has rows and columns indexed by ordered
//! tuples of distinct vertices of [n], and entry (S, T) sums the product of
//! y over the shape's edges across all injective labelings of the uncolored
//! vertices. The predicted spectral-norm exponent is (t − p − c)/2 where p
//! counts vertex-disjoint paths from the left-only to the right-only colors
//! (computed by max-flow) and c the shared colored vertices.

use nalgebra::DMatrix;

use super::PseudocalError;
use crate::sdpsolve::{lanczos_extreme, Which};
use crate::tensors::{gen_instance, split_seed, GraphInstance, Instance, InstanceKind};

/// A colored shape: `t` vertices, an edge set, and color assignments
/// `left[a]` = vertex carrying color ℓ_{a+1}, `right[b]` = vertex carrying
/// color r_{b+1}. A vertex may carry several colors.
#[derive(Debug, Clone)]
pub struct Shape {
    pub t: usize,
    pub edges: Vec<(usize, usize)>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub name: String,
}

impl Shape {
    pub fn new(
        t: usize,
        edges: Vec<(usize, usize)>,
        left: Vec<usize>,
        right: Vec<usize>,
        name: impl Into<String>,
    ) -> Result<Self, PseudocalError> {
        if t == 0 || t > 24 {
            return Err(PseudocalError::BadShape { msg: format!("vertex count {t} outside 1..=24") });
        }
        if left.is_empty() || right.is_empty() {
            return Err(PseudocalError::BadShape { msg: "color lists must be nonempty".into() });
        }
        for &(u, v) in &edges {
            if u >= t || v >= t || u == v {
                return Err(PseudocalError::BadShape { msg: format!("bad edge ({u},{v})") });
            }
        }
        for &v in left.iter().chain(right.iter()) {
            if v >= t {
                return Err(PseudocalError::BadShape { msg: format!("colored vertex {v} out of range") });
            }
        }
        Ok(Shape { t, edges, left, right, name: name.into() })
    }

    /// Number of vertices carrying both a left and a right color.
    pub fn shared_colored(&self) -> usize {
        self.left.iter().filter(|v| self.right.contains(v)).count()
    }

    /// Maximum number of vertex-disjoint paths from left-only to right-only
    /// colored vertices, by unit-capacity max-flow on the split graph.
    pub fn vertex_disjoint_paths(&self) -> usize {
        let sources: Vec<usize> =
            self.left.iter().copied().filter(|v| !self.right.contains(v)).collect();
        let sinks: Vec<usize> =
            self.right.iter().copied().filter(|v| !self.left.contains(v)).collect();
        if sources.is_empty() || sinks.is_empty() {
            return 0;
        }
        // node-split digraph: v_in = 2v, v_out = 2v+1, plus source S and sink T
        let nodes = 2 * self.t + 2;
        let s = 2 * self.t;
        let t_sink = 2 * self.t + 1;
        let mut cap = vec![vec![0i32; nodes]; nodes];
        for v in 0..self.t {
            cap[2 * v][2 * v + 1] = 1;
        }
        for &(u, v) in &self.edges {
            cap[2 * u + 1][2 * v] = 1;
            cap[2 * v + 1][2 * u] = 1;
        }
        for &v in &sources {
            cap[s][2 * v] = 1;
        }
        for &v in &sinks {
            cap[2 * v + 1][t_sink] = 1;
        }
        // Edmonds-Karp
        let mut flow = 0usize;
        loop {
            let mut parent = vec![usize::MAX; nodes];
            parent[s] = s;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in 0..nodes {
                    if parent[v] == usize::MAX && cap[u][v] > 0 {
                        parent[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if parent[t_sink] == usize::MAX {
                break;
            }
            let mut v = t_sink;
            while v != s {
                let u = parent[v];
                cap[u][v] -= 1;
                cap[v][u] += 1;
                v = u;
            }
            flow += 1;
        }
        flow
    }

    /// `(t − p − c)/2`, the predicted log-norm growth exponent.
    pub fn predicted_exponent(&self) -> f64 {
        (self.t as f64 - self.vertex_disjoint_paths() as f64 - self.shared_colored() as f64) / 2.0
    }

    fn uncolored(&self) -> Vec<usize> {
        (0..self.t)
            .filter(|v| !self.left.contains(v) && !self.right.contains(v))
            .collect()
    }
}

/// Built-in shapes used across the experiments and tests.
pub mod fixtures {
    use super::Shape;

    /// Single vertex carrying (ℓ₁, r₁): the identity on singletons.
    pub fn single_vertex() -> Shape {
        Shape::new(1, vec![], vec![0], vec![0], "single-vertex").unwrap()
    }

    /// One edge between ℓ₁ and r₁: the signed adjacency matrix.
    pub fn single_edge() -> Shape {
        Shape::new(2, vec![(0, 1)], vec![0], vec![1], "single-edge").unwrap()
    }

    /// Two horizontal parallel edges ℓ₁—r₁, ℓ₂—r₂.
    pub fn sigma1() -> Shape {
        Shape::new(4, vec![(0, 2), (1, 3)], vec![0, 1], vec![2, 3], "sigma1").unwrap()
    }

    /// Two vertical edges ℓ₁—ℓ₂ and r₁—r₂.
    pub fn sigma2() -> Shape {
        Shape::new(4, vec![(0, 1), (2, 3)], vec![0, 1], vec![2, 3], "sigma2").unwrap()
    }

    /// Six vertices; ℓ₃ and r₃ share a vertex, one uncolored vertex on a
    /// two-step path: edges ℓ₁—r₁, ℓ₂—u, u—r₂.
    pub fn six_vertex_example() -> Shape {
        // vertices: 0=ℓ1, 1=ℓ2, 2=ℓ3&r3, 3=r1, 4=r2, 5=u
        Shape::new(6, vec![(0, 3), (1, 5), (5, 4)], vec![0, 1, 2], vec![3, 4, 2], "six-vertex").unwrap()
    }

    pub fn by_name(name: &str) -> Option<Shape> {
        match name {
            "single-vertex" => Some(single_vertex()),
            "single-edge" => Some(single_edge()),
            "sigma1" => Some(sigma1()),
            "sigma2" => Some(sigma2()),
            "six-vertex" => Some(six_vertex_example()),
            _ => None,
        }
    }

    pub fn all() -> Vec<Shape> {
        vec![single_vertex(), single_edge(), sigma1(), sigma2(), six_vertex_example()]
    }
}

/// Fast-path classification for shapes whose matrix-vector product reduces
/// to dense n×n matrix algebra.
#[derive(Debug, Clone, Copy)]
enum FastKind {
    /// Four distinct colored vertices (ℓ₁,ℓ₂|r₁,r₂), no uncolored, cross
    /// edges forming a sub-matching; column order possibly swapped so the
    /// matching aligns position-wise.
    TwoByTwo { c1: bool, c2: bool, e_left: bool, e_right: bool, swap: bool },
}

/// Matrix-free symmetric operator of a shape against an instance.
pub struct ShapeOperator<'a> {
    pub shape: &'a Shape,
    pub y: &'a GraphInstance,
    tuples: Vec<Vec<usize>>,
    fast: Option<FastKind>,
}

impl<'a> ShapeOperator<'a> {
    pub fn new(shape: &'a Shape, y: &'a GraphInstance) -> Result<Self, PseudocalError> {
        if shape.left.len() != shape.right.len() {
            return Err(PseudocalError::BadShape {
                msg: format!("operator needs |L| = |R|, got {} and {}", shape.left.len(), shape.right.len()),
            });
        }
        let tuples = ordered_tuples(y.n, shape.left.len());
        let fast = classify_fast(shape);
        Ok(ShapeOperator { shape, y, tuples, fast })
    }

    pub fn dim(&self) -> usize {
        self.tuples.len()
    }

    pub fn has_fast_path(&self) -> bool {
        self.fast.is_some()
    }

    /// Entry (S, T) by direct enumeration of injective uncolored labelings.
    pub fn entry(&self, s: &[usize], t: &[usize]) -> f64 {
        let shape = self.shape;
        let mut label = vec![usize::MAX; shape.t];
        let mut used = vec![false; self.y.n];
        // assign colored vertices; repeated colors must agree, labels injective
        for (slot, &v) in shape.left.iter().enumerate() {
            let lab = s[slot];
            if label[v] == usize::MAX {
                if used[lab] {
                    return 0.0;
                }
                label[v] = lab;
                used[lab] = true;
            } else if label[v] != lab {
                return 0.0;
            }
        }
        for (slot, &v) in shape.right.iter().enumerate() {
            let lab = t[slot];
            if label[v] == usize::MAX {
                if used[lab] {
                    return 0.0;
                }
                label[v] = lab;
                used[lab] = true;
            } else if label[v] != lab {
                return 0.0;
            }
        }
        let uncolored = shape.uncolored();
        self.sum_labelings(&uncolored, 0, &mut label, &mut used)
    }

    fn sum_labelings(
        &self,
        uncolored: &[usize],
        depth: usize,
        label: &mut [usize],
        used: &mut [bool],
    ) -> f64 {
        if depth == uncolored.len() {
            let mut prod = 1.0;
            for &(u, v) in &self.shape.edges {
                prod *= self.y.edge_sign(label[u], label[v]);
            }
            return prod;
        }
        let v = uncolored[depth];
        let mut acc = 0.0;
        for lab in 0..self.y.n {
            if !used[lab] {
                used[lab] = true;
                label[v] = lab;
                acc += self.sum_labelings(uncolored, depth + 1, label, used);
                used[lab] = false;
                label[v] = usize::MAX;
            }
        }
        acc
    }

    /// Dense assembly; intended for small n (tests, cross-validation).
    pub fn assemble_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, s) in self.tuples.iter().enumerate() {
            for (j, t) in self.tuples.iter().enumerate() {
                m[(i, j)] = self.entry(s, t);
            }
        }
        m
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        match self.fast {
            Some(FastKind::TwoByTwo { c1, c2, e_left, e_right, swap }) => {
                self.apply_two_by_two(v, out, c1, c2, e_left, e_right, swap)
            }
            None => self.apply_naive(v, out),
        }
    }

    fn apply_naive(&self, v: &[f64], out: &mut [f64]) {
        for (i, s) in self.tuples.iter().enumerate() {
            let mut acc = 0.0;
            for (j, t) in self.tuples.iter().enumerate() {
                let e = self.entry(s, t);
                if e != 0.0 {
                    acc += e * v[j];
                }
            }
            out[i] = acc;
        }
    }

    /// Inclusion–exclusion over label collisions for 2×2 colored shapes:
    /// with Y the zero-diagonal sign matrix and V the input as an n×n array,
    /// the injective sum equals the unconstrained product-term minus the
    /// four single collisions plus the two transpositions, each reducible to
    /// dense n×n products.
    fn apply_two_by_two(
        &self,
        v: &[f64],
        out: &mut [f64],
        c1: bool,
        c2: bool,
        e_left: bool,
        e_right: bool,
        swap: bool,
    ) {
        let n = self.y.n;
        let ymat = {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        m[(i, j)] = self.y.edge_sign(i, j);
                    }
                }
            }
            m
        };
        // V from the tuple-indexed vector; diagonal structurally zero
        let mut vm = DMatrix::zeros(n, n);
        for (ix, t) in self.tuples.iter().enumerate() {
            let (a, b) = (t[0], t[1]);
            if swap {
                vm[(b, a)] = v[ix];
            } else {
                vm[(a, b)] = v[ix];
            }
        }
        let g = if e_right { vm.component_mul(&ymat) } else { vm };
        let g_rowsum: Vec<f64> = (0..n).map(|i| g.row(i).sum()).collect();
        let g_colsum: Vec<f64> = (0..n).map(|j| g.column(j).sum()).collect();
        let g_total: f64 = g_rowsum.iter().sum();

        // ∅ term
        let a0: DMatrix<f64> = match (c1, c2) {
            (true, true) => &ymat * &g * &ymat,
            (true, false) => {
                let yg: Vec<f64> = {
                    let mut r = vec![0.0; n];
                    for s1 in 0..n {
                        r[s1] = (0..n).map(|t1| ymat[(s1, t1)] * g_rowsum[t1]).sum();
                    }
                    r
                };
                DMatrix::from_fn(n, n, |s1, _| yg[s1])
            }
            (false, true) => {
                let gy: Vec<f64> = {
                    let mut r = vec![0.0; n];
                    for s2 in 0..n {
                        r[s2] = (0..n).map(|t2| g_colsum[t2] * ymat[(s2, t2)]).sum();
                    }
                    r
                };
                DMatrix::from_fn(n, n, |_, s2| gy[s2])
            }
            (false, false) => DMatrix::from_element(n, n, g_total),
        };

        // single collisions (zero when the corresponding cross edge exists,
        // since the Y diagonal vanishes)
        let e1: DMatrix<f64> = if c1 {
            DMatrix::zeros(n, n)
        } else if c2 {
            // t1 = s1: Σ_{t2} G[s1,t2] Y[s2,t2]
            &g * ymat.transpose()
        } else {
            DMatrix::from_fn(n, n, |s1, _| g_rowsum[s1])
        };
        let e4: DMatrix<f64> = if c2 {
            DMatrix::zeros(n, n)
        } else if c1 {
            // t2 = s2: Σ_{t1} Y[s1,t1] G[t1,s2]
            &ymat * &g
        } else {
            DMatrix::from_fn(n, n, |_, s2| g_colsum[s2])
        };
        // t1 = s2: F1[s1,s2] · Σ_{t2} G[s2,t2] F2[s2,t2]
        let h: Vec<f64> = (0..n)
            .map(|a| {
                if c2 {
                    (0..n).map(|t2| g[(a, t2)] * ymat[(a, t2)]).sum()
                } else {
                    g_rowsum[a]
                }
            })
            .collect();
        let e2 = DMatrix::from_fn(n, n, |s1, s2| if c1 { ymat[(s1, s2)] * h[s2] } else { h[s2] });
        // t2 = s1: F2[s2,s1] · Σ_{t1} F1[s1,t1] G[t1,s1]
        let w: Vec<f64> = (0..n)
            .map(|a| {
                if c1 {
                    (0..n).map(|t1| ymat[(a, t1)] * g[(t1, a)]).sum()
                } else {
                    g_colsum[a]
                }
            })
            .collect();
        let e3 = DMatrix::from_fn(n, n, |s1, s2| if c2 { ymat[(s2, s1)] * w[s1] } else { w[s1] });

        // double collisions
        let d1 = if c1 || c2 { DMatrix::zeros(n, n) } else { g.clone() };
        let d2 = DMatrix::from_fn(n, n, |s1, s2| {
            let f1 = if c1 { ymat[(s1, s2)] } else { 1.0 };
            let f2 = if c2 { ymat[(s2, s1)] } else { 1.0 };
            f1 * f2 * g[(s2, s1)]
        });

        let mut total = a0 - e1 - e2 - e3 - e4 + d1 + d2;
        if e_left {
            total.component_mul_assign(&ymat);
        }
        for (ix, t) in self.tuples.iter().enumerate() {
            out[ix] = total[(t[0], t[1])];
        }
    }

    /// Spectral norm (max |eigenvalue|) by restarted Lanczos. `Err` means the
    /// eigensolver failed to converge; experiment drivers skip such samples.
    pub fn spectral_norm(&self, seed: u64) -> Result<f64, PseudocalError> {
        let dim = self.dim();
        let mut apply = |v: &[f64], out: &mut [f64]| self.apply(v, out);
        let pair = lanczos_extreme(&mut apply, dim, Which::LargestMagnitude, 3, 160, 1e-6, seed)?;
        Ok(pair.value.abs())
    }
}

fn classify_fast(shape: &Shape) -> Option<FastKind> {
    if shape.left.len() != 2 || shape.right.len() != 2 || shape.t != 4 {
        return None;
    }
    let (l1, l2) = (shape.left[0], shape.left[1]);
    let mut distinct: Vec<usize> = vec![l1, l2, shape.right[0], shape.right[1]];
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != 4 {
        return None;
    }
    let norm = |u: usize, v: usize| if u < v { (u, v) } else { (v, u) };
    let mut edges: Vec<(usize, usize)> = shape.edges.iter().map(|&(u, v)| norm(u, v)).collect();
    edges.sort_unstable();
    edges.dedup();
    for swap in [false, true] {
        let (r1, r2) = if swap {
            (shape.right[1], shape.right[0])
        } else {
            (shape.right[0], shape.right[1])
        };
        let allowed = [norm(l1, l2), norm(r1, r2), norm(l1, r1), norm(l2, r2)];
        if edges.iter().all(|e| allowed.contains(e)) {
            return Some(FastKind::TwoByTwo {
                c1: edges.contains(&norm(l1, r1)),
                c2: edges.contains(&norm(l2, r2)),
                e_left: edges.contains(&norm(l1, l2)),
                e_right: edges.contains(&norm(r1, r2)),
                swap,
            });
        }
    }
    None
}

fn ordered_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !cur.contains(&v) {
                cur.push(v);
                rec(n, len, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, len, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct ShapeNormExperiment {
    pub shape_name: String,
    /// (n, per-sample norms) per requested size.
    pub norms: Vec<(usize, Vec<f64>)>,
    pub medians: Vec<(usize, f64)>,
    /// Least-squares slope of log(median norm) against log(n).
    pub slope: f64,
    pub predicted_exponent: f64,
    /// Samples skipped because the eigensolver did not converge.
    pub skipped: usize,
}

impl ShapeNormExperiment {
    /// CSV rows `shape_id,n,seed,norm`.
    pub fn csv_rows(&self, base_seed: u64) -> String {
        let mut s = String::new();
        for (size_ix, (n, norms)) in self.norms.iter().enumerate() {
            for (sample_ix, norm) in norms.iter().enumerate() {
                let seed = split_seed(base_seed, (size_ix * 10_000 + sample_ix) as u64);
                s.push_str(&format!("{},{},{},{:.12e}\n", self.shape_name, n, seed, norm));
            }
        }
        s
    }
}

/// Median spectral norm per size over null draws, with the fitted log–log
/// slope and the shape's predicted exponent.
pub fn shape_norm_experiment(
    shape: &Shape,
    sizes: &[usize],
    samples: usize,
    base_seed: u64,
) -> Result<ShapeNormExperiment, PseudocalError> {
    if sizes.len() < 2 {
        return Err(PseudocalError::BadConfig { msg: "need at least two sizes for a slope".into() });
    }
    let mut norms: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut skipped = 0usize;
    for (size_ix, &n) in sizes.iter().enumerate() {
        let mut per: Vec<f64> = Vec::with_capacity(samples);
        let results: Vec<Option<f64>> = {
            use rayon::prelude::*;
            (0..samples)
                .into_par_iter()
                .map(|sample_ix| {
                    let seed = split_seed(base_seed, (size_ix * 10_000 + sample_ix) as u64);
                    let Instance::Graph(y) = gen_instance(&InstanceKind::ErdosRenyiHalf { n }, seed) else {
                        unreachable!()
                    };
                    let op = ShapeOperator::new(shape, &y).ok()?;
                    op.spectral_norm(seed ^ 0xa0).ok()
                })
                .collect()
        };
        for r in results {
            match r {
                Some(v) => per.push(v),
                None => skipped += 1,
            }
        }
        if per.is_empty() {
            return Err(PseudocalError::BadConfig { msg: format!("all samples failed at n = {n}") });
        }
        norms.push((n, per));
    }
    let medians: Vec<(usize, f64)> = norms
        .iter()
        .map(|(n, per)| {
            let mut sorted = per.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (*n, sorted[sorted.len() / 2])
        })
        .collect();
    let slope = {
        let pts: Vec<(f64, f64)> = medians
            .iter()
            .map(|&(n, m)| ((n as f64).ln(), m.max(1e-300).ln()))
            .collect();
        least_squares_slope(&pts)
    };
    Ok(ShapeNormExperiment {
        shape_name: shape.name.clone(),
        norms,
        medians,
        slope,
        predicted_exponent: shape.predicted_exponent(),
        skipped,
    })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn er(n: usize, seed: u64) -> GraphInstance {
        match gen_instance(&InstanceKind::ErdosRenyiHalf { n }, seed) {
            Instance::Graph(g) => g,
            _ => unreachable!(),
        }
    }

    #[test]
    fn predicted_exponents_match_hand_pinned_fixtures() {
        let expected = [
            ("single-vertex", 0.0),
            ("single-edge", 0.5),
            ("sigma1", 1.0),
            ("sigma2", 2.0),
            ("six-vertex", 1.5),
        ];
        for (name, exp) in expected {
            let shape = fixtures::by_name(name).unwrap();
            assert_eq!(shape.predicted_exponent(), exp, "{name}");
        }
    }

    #[test]
    fn max_flow_path_counts() {
        assert_eq!(fixtures::sigma1().vertex_disjoint_paths(), 2);
        assert_eq!(fixtures::sigma2().vertex_disjoint_paths(), 0);
        assert_eq!(fixtures::six_vertex_example().vertex_disjoint_paths(), 2);
        assert_eq!(fixtures::single_vertex().vertex_disjoint_paths(), 0);
    }

    #[test]
    fn single_vertex_shape_is_identity() {
        let shape = fixtures::single_vertex();
        let y = er(8, 1);
        let op = ShapeOperator::new(&shape, &y).unwrap();
        let m = op.assemble_dense();
        assert_eq!(m, DMatrix::identity(8, 8));
        assert!((op.spectral_norm(3).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_edge_shape_is_signed_adjacency() {
        let shape = fixtures::single_edge();
        let y = er(7, 2);
        let op = ShapeOperator::new(&shape, &y).unwrap();
        let m = op.assemble_dense();
        for i in 0..7 {
            for j in 0..7 {
                let expect = if i == j { 0.0 } else { y.edge_sign(i, j) };
                assert_eq!(m[(i, j)], expect);
            }
        }
    }

    #[test]
    fn sigma1_entries_match_brute_force_double_loop() {
        let shape = fixtures::sigma1();
        let y = er(8, 3);
        let op = ShapeOperator::new(&shape, &y).unwrap();
        for (i, s) in op.tuples.iter().enumerate() {
            for (j, t) in op.tuples.iter().enumerate() {
                let _ = (i, j);
                let expect = if s[0] != t[0] && s[0] != t[1] && s[1] != t[0] && s[1] != t[1] {
                    y.edge_sign(s[0], t[0]) * y.edge_sign(s[1], t[1])
                } else {
                    0.0
                };
                assert_eq!(op.entry(s, t), expect, "s={s:?} t={t:?}");
            }
        }
    }

    #[test]
    fn fast_apply_matches_naive_for_all_two_by_two_patterns() {
        // every subset of {cross1, cross2, left-internal, right-internal}
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 9;
        let y = er(n, 4);
        for bits in 0u32..16 {
            let mut edges = Vec::new();
            if bits & 1 != 0 {
                edges.push((0, 2));
            }
            if bits & 2 != 0 {
                edges.push((1, 3));
            }
            if bits & 4 != 0 {
                edges.push((0, 1));
            }
            if bits & 8 != 0 {
                edges.push((2, 3));
            }
            let shape = Shape::new(4, edges, vec![0, 1], vec![2, 3], format!("combo{bits}")).unwrap();
            let op = ShapeOperator::new(&shape, &y).unwrap();
            assert!(op.has_fast_path(), "combo {bits} missed the fast path");
            let dim = op.dim();
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut fast = vec![0.0; dim];
            op.apply(&v, &mut fast);
            let mut naive = vec![0.0; dim];
            op.apply_naive(&v, &mut naive);
            for (a, b) in fast.iter().zip(naive.iter()) {
                assert!((a - b).abs() < 1e-9, "combo {bits}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fast_apply_matches_naive_with_swapped_matching() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 8;
        let y = er(n, 7);
        // cross edges (ℓ1,r2) and (ℓ2,r1): anti-diagonal matching
        let shape = Shape::new(4, vec![(0, 3), (1, 2)], vec![0, 1], vec![2, 3], "swapped").unwrap();
        let op = ShapeOperator::new(&shape, &y).unwrap();
        assert!(op.has_fast_path());
        let dim = op.dim();
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut fast = vec![0.0; dim];
        op.apply(&v, &mut fast);
        let mut naive = vec![0.0; dim];
        op.apply_naive(&v, &mut naive);
        for (a, b) in fast.iter().zip(naive.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn six_vertex_example_entry_against_manual_sum() {
        // entry with explicit uncolored sum: Σ_u y[s1,t1]·y[s2,u]·y[u,t2]
        let shape = fixtures::six_vertex_example();
        let y = er(7, 9);
        let op = ShapeOperator::new(&shape, &y).unwrap();
        let s = vec![0usize, 1, 2];
        let t = vec![3usize, 4, 2];
        let assigned = [0usize, 1, 2, 3, 4];
        let mut expect = 0.0;
        for u in 0..7 {
            if !assigned.contains(&u) {
                expect += y.edge_sign(0, 3) * y.edge_sign(1, u) * y.edge_sign(u, 4);
            }
        }
        assert_eq!(op.entry(&s, &t), expect);
        // inconsistent shared-color assignment gives a zero entry
        let t_bad = vec![3usize, 4, 5];
        assert_eq!(op.entry(&s, &t_bad), 0.0);
    }

    #[test]
    fn spectral_norm_agrees_with_dense_eig_small() {
        for shape in [fixtures::sigma1(), fixtures::sigma2()] {
            let y = er(7, 11);
            let op = ShapeOperator::new(&shape, &y).unwrap();
            let m = op.assemble_dense();
            let (vals, _) = crate::sdpsolve::sym_eigen_sorted(m).unwrap();
            let dense = vals[0].abs().max(vals[vals.len() - 1].abs());
            let fast = op.spectral_norm(13).unwrap();
            assert!((fast - dense).abs() <= 1e-5 * (1.0 + dense), "{fast} vs {dense}");
        }
    }

    #[test]
    fn sigma2_norm_scales_like_n_squared_locally() {
        // single-size sanity: σ₂ norm ≈ n² (rank-one-ish structure)
        let n = 24;
        let y = er(n, 15);
        let shape = fixtures::sigma2();
        let op = ShapeOperator::new(&shape, &y).unwrap();
        let norm = op.spectral_norm(17).unwrap();
        let n2 = (n * n) as f64;
        assert!(norm > 0.5 * n2 && norm < 1.5 * n2, "norm {norm} vs n² = {n2}");
    }

    #[test]
    fn experiment_produces_slope_for_identity_shape() {
        let shape = fixtures::single_vertex();
        let exp = shape_norm_experiment(&shape, &[10, 20, 40], 3, 21).unwrap();
        assert!(exp.slope.abs() < 1e-6, "identity slope {}", exp.slope);
        assert_eq!(exp.predicted_exponent, 0.0);
        assert_eq!(exp.skipped, 0);
        let rows = exp.csv_rows(21);
        assert!(rows.lines().count() == 9);
    }
}

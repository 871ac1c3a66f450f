//! Pseudocalibration for planted clique: explicit pseudomoments by exact
//! Fourier enumeration, assembly of the candidate moment matrix, calibration
//! checks (scaling, PSDness, constraint residuals), a Monte-Carlo oracle for
//! the Fourier coefficients, and shape-matrix norm experiments.
//!
//! The pseudomoment of a vertex set A against an instance y is the truncated
//! Fourier sum `Σ_{α ⊆ E, |α| ≤ D} rate^{|v(α) ∪ A|} · y^α` with
//! `rate = 2k/n`, enumerated exactly over all edge subsets of the complete
//! graph (no sampling), under a hard per-matrix term budget.

pub mod shapes;

pub use shapes::{
    shape_norm_experiment, Shape, ShapeNormExperiment, ShapeOperator,
};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::moments::PolySystemSpec;
use crate::polyring::{monomial_basis, reduce_canonical, QuotientRule};
use crate::sdpsolve::sym_eigen_sorted;
use crate::tensors::GraphInstance;

#[derive(Debug, Error)]
pub enum PseudocalError {
    #[error("enumeration budget exceeded: {terms} terms (budget {budget}); reduce the truncation degree D")]
    BudgetExceeded { terms: u128, budget: u128 },
    #[error("invalid configuration: {msg}")]
    BadConfig { msg: String },
    #[error("monomial set {size} exceeds the pseudodistribution degree {d}")]
    SetTooLarge { size: usize, d: u32 },
    #[error("shape invalid: {msg}")]
    BadShape { msg: String },
    #[error(transparent)]
    Solve(#[from] crate::sdpsolve::SolveError),
}

/// Planted-clique calibration parameters. `k` is real-valued: only the rate
/// `2k/n` enters the coefficients.
#[derive(Debug, Clone, Copy)]
pub struct CliqueCalibConfig {
    pub n: usize,
    pub k: f64,
    /// Pseudodistribution degree in the hidden variables (even).
    pub d: u32,
    /// Truncation degree in the instance variables.
    pub big_d: usize,
}

impl CliqueCalibConfig {
    pub fn new(n: usize, k: f64, d: u32, big_d: usize) -> Result<Self, PseudocalError> {
        if !(1.0..=n as f64).contains(&k) {
            return Err(PseudocalError::BadConfig { msg: format!("k = {k} not in 1..={n}") });
        }
        if d < 2 || d % 2 != 0 {
            return Err(PseudocalError::BadConfig { msg: format!("d = {d} must be even and ≥ 2") });
        }
        Ok(CliqueCalibConfig { n, k, d, big_d })
    }

    pub fn rate(&self) -> f64 {
        2.0 * self.k / self.n as f64
    }
}

/// Hard budget on exact-enumeration terms per assembled matrix.
const TERM_BUDGET: u128 = 100_000_000;

fn enumeration_terms(num_edges: usize, big_d: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for s in 0..=big_d {
        if s > 0 {
            binom = binom * (num_edges - s + 1) as u128 / s as u128;
        }
        total += binom;
    }
    total
}

/// Exact pseudomoment `pE[x^A](y)`: sum over all edge subsets α with
/// |α| ≤ D of `rate^{|v(α) ∪ A|} · y^α`. Deterministic; errors when the
/// enumeration would exceed the term budget.
pub fn clique_pseudomoment(
    y: &GraphInstance,
    a_set: &[usize],
    cfg: &CliqueCalibConfig,
) -> Result<f64, PseudocalError> {
    if a_set.len() > cfg.d as usize {
        return Err(PseudocalError::SetTooLarge { size: a_set.len(), d: cfg.d });
    }
    let budget = enumeration_terms(GraphInstance::num_pairs(cfg.n), cfg.big_d);
    if budget > TERM_BUDGET {
        return Err(PseudocalError::BudgetExceeded { terms: budget, budget: TERM_BUDGET });
    }
    let mut a_mask: u64 = 0;
    for &v in a_set {
        a_mask |= 1 << v;
    }
    Ok(pseudomoment_masked(y, a_mask, cfg))
}

fn pseudomoment_masked(y: &GraphInstance, a_mask: u64, cfg: &CliqueCalibConfig) -> f64 {
    let n = cfg.n;
    let rate = cfg.rate();
    // rate powers up to n vertices
    let mut pow = vec![1.0; n + 1];
    for i in 1..=n {
        pow[i] = pow[i - 1] * rate;
    }
    let edges: Vec<(usize, u64)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .enumerate()
        .map(|(e, (i, j))| (e, (1u64 << i) | (1u64 << j)))
        .collect();
    let mut acc = 0.0;
    // depth-first over edge subsets of size ≤ D with incremental sign & mask
    fn recurse(
        y: &GraphInstance,
        edges: &[(usize, u64)],
        start: usize,
        depth_left: usize,
        sign: f64,
        mask: u64,
        pow: &[f64],
        acc: &mut f64,
    ) {
        *acc += sign * pow[mask.count_ones() as usize];
        if depth_left == 0 {
            return;
        }
        for e in start..edges.len() {
            let (edge_ix, vmask) = edges[e];
            recurse(
                y,
                edges,
                e + 1,
                depth_left - 1,
                sign * y.y[edge_ix],
                mask | vmask,
                pow,
                acc,
            );
        }
    }
    recurse(y, &edges, 0, cfg.big_d, 1.0, a_mask, &pow, &mut acc);
    acc
}

/// Candidate moment matrix indexed by vertex subsets of size ≤ d/2, with
/// entry (S, T) = pE[x^{S∪T}](y). Entries depend only on the union, so the
/// matrix is exactly symmetric and union-aliased by construction.
pub fn assemble_md(y: &GraphInstance, cfg: &CliqueCalibConfig) -> Result<DMatrix<f64>, PseudocalError> {
    let sets = index_sets(cfg.n, cfg.d / 2);
    let per_entry = enumeration_terms(GraphInstance::num_pairs(cfg.n), cfg.big_d);
    let mut unions: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    // count distinct unions first so the budget check covers the whole matrix
    for (i, &si) in sets.iter().enumerate() {
        for &sj in sets.iter().skip(i) {
            unions.entry(si | sj).or_insert(f64::NAN);
        }
    }
    let total = per_entry * unions.len() as u128;
    if total > TERM_BUDGET {
        return Err(PseudocalError::BudgetExceeded { terms: total, budget: TERM_BUDGET });
    }
    for (mask, slot) in unions.iter_mut() {
        *slot = pseudomoment_masked(y, *mask, cfg);
    }
    let s = sets.len();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let v = unions[&(sets[i] | sets[j])];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Vertex subsets of size ≤ `max_size` as bitmasks, in the canonical
/// monomial-basis order (constant first, then graded lexicographic).
pub fn index_sets(n: usize, max_size: u32) -> Vec<u64> {
    monomial_basis(n, max_size, QuotientRule::Boolean01)
        .iter()
        .map(|m| m.exponents().iter().fold(0u64, |acc, &(v, _)| acc | (1 << v)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub pe_one: f64,
    pub md_min_eig: f64,
    pub md_scale: f64,
    /// pE[Σ x_i].
    pub sum_x: f64,
    /// Largest |pE[r · x^A]| over non-edge pair axioms and admissible A.
    pub max_nonedge_residual: f64,
    pub nonedge_checks: usize,
    /// Largest residual over edge pairs: exactly 0 since the axiom carries
    /// the (1 − y_ij)/2 factor.
    pub max_edge_residual: f64,
    /// Largest |pE[r · x^A]| over the remaining equality axioms (Boolean
    /// axioms vanish identically under the set-indexed pseudomoments).
    pub max_other_residual: f64,
}

impl CalibrationReport {
    /// CSV row `n,k,d,D,seed,pE1,min_eig,max_eq_residual`.
    pub fn csv_row(&self, cfg: &CliqueCalibConfig, seed: u64) -> String {
        let max_resid = self
            .max_nonedge_residual
            .max(self.max_edge_residual)
            .max(self.max_other_residual);
        format!(
            "{},{},{},{},{},{:.12e},{:.12e},{:.12e}",
            cfg.n, cfg.k, cfg.d, cfg.big_d, seed, self.pe_one, self.md_min_eig, max_resid
        )
    }
}

/// Evaluates the calibration conditions on one instance: scaling `pE[1]`,
/// the minimum eigenvalue of M_d(y) (reported, never asserted), and the
/// pseudoexpectation residuals of the system's equality axioms against the
/// set-indexed pseudomoments.
pub fn check_calibration(
    y: &GraphInstance,
    cfg: &CliqueCalibConfig,
    sys: &PolySystemSpec,
) -> Result<CalibrationReport, PseudocalError> {
    let pe_one = clique_pseudomoment(y, &[], cfg)?;
    let md = assemble_md(y, cfg)?;
    let (vals, _) = sym_eigen_sorted(md)?;
    let md_min_eig = vals[0];
    let md_scale = vals[0].abs().max(vals[vals.len() - 1].abs());
    let sum_x: f64 = (0..cfg.n)
        .map(|i| pseudomoment_masked(y, 1 << i, cfg))
        .sum();

    // cache pseudomoments by union mask
    let mut cache: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let mut pm = |mask: u64, y: &GraphInstance| -> f64 {
        *cache.entry(mask).or_insert_with(|| pseudomoment_masked(y, mask, cfg))
    };

    let mut max_nonedge_residual = 0.0f64;
    let mut nonedge_checks = 0usize;
    let mut max_other_residual = 0.0f64;
    for r in &sys.equalities {
        let rb = reduce_canonical(r, QuotientRule::Boolean01);
        if rb.is_zero() {
            // Boolean axioms x_i² − x_i vanish identically on set-indexed moments
            continue;
        }
        if rb.degree() > cfg.d {
            continue;
        }
        // residual pE[r · x^A] for every vertex set A with deg(r·x^A) ≤ d
        let is_nonedge_pair = rb.num_terms() == 1 && rb.degree() == 2;
        for a in index_sets(cfg.n, cfg.d - rb.degree()) {
            let mut resid = 0.0;
            for (m, c) in rb.terms() {
                let mut mask = a;
                for &(v, _) in m.exponents() {
                    mask |= 1 << v;
                }
                resid += c * pm(mask, y);
            }
            if is_nonedge_pair {
                max_nonedge_residual = max_nonedge_residual.max(resid.abs());
                nonedge_checks += 1;
            } else {
                max_other_residual = max_other_residual.max(resid.abs());
            }
        }
    }

    // edge pairs: the axiom weight (1 − y_ij)/2 vanishes, so the residual is
    // an exact algebraic zero; evaluate it literally
    let mut max_edge_residual = 0.0f64;
    for i in 0..cfg.n {
        for j in (i + 1)..cfg.n {
            if y.has_edge(i, j) {
                let w = (1.0 - y.edge_sign(i, j)) / 2.0;
                let contribution = w * pm((1 << i) | (1 << j), y);
                max_edge_residual = max_edge_residual.max(contribution.abs());
            }
        }
    }

    Ok(CalibrationReport {
        pe_one,
        md_min_eig,
        md_scale,
        sum_x,
        max_nonedge_residual,
        nonedge_checks,
        max_edge_residual,
        max_other_residual,
    })
}

/// Monte-Carlo estimate of `E_{J*}[x^A y^α]`: samples x with i.i.d.
/// Bernoulli(2k/n) coordinates, plants the clique on the support, draws the
/// remaining edges uniformly ±1, and averages the monomial. Returns
/// (mean, standard error).
pub fn fourier_oracle_estimate(
    a_set: &[usize],
    alpha: &[(usize, usize)],
    cfg: &CliqueCalibConfig,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(samples >= 100, "oracle needs at least 100 samples");
    let rate = cfg.rate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let mut in_clique = vec![false; cfg.n];
        for flag in in_clique.iter_mut() {
            *flag = rng.gen::<f64>() < rate;
        }
        let mut value = 1.0f64;
        for &v in a_set {
            if !in_clique[v] {
                value = 0.0;
            }
        }
        // only the edges mentioned by α are needed
        for &(i, j) in alpha {
            let y_ij = if in_clique[i] && in_clique[j] {
                1.0
            } else if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            };
            value *= y_ij;
        }
        sum += value;
        sumsq += value * value;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    let stderr = (var / samples as f64).sqrt();
    (mean, stderr)
}

/// Closed-form Fourier coefficient of `y^α` in `pE[x^A](y)`:
/// `rate^{|v(α) ∪ A|}`.
pub fn fourier_coefficient(a_set: &[usize], alpha: &[(usize, usize)], cfg: &CliqueCalibConfig) -> f64 {
    let mut mask: u64 = 0;
    for &v in a_set {
        mask |= 1 << v;
    }
    for &(i, j) in alpha {
        mask |= (1 << i) | (1 << j);
    }
    cfg.rate().powi(mask.count_ones() as i32)
}

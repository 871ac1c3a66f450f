//! Pseudoexpectations, moment- and localizing-matrix assembly, compilation of
//! polynomial systems into affine + PSD feasibility data, and validity checks.
//!
//! A degree-d pseudoexpectation is stored as its moment vector indexed by
//! `monomial_basis(nvars, d, quotient)`. Moment-matrix entries alias repeated
//! monomials to a single unknown, so symmetry and well-definedness are
//! structural rather than constrained.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::polyring::{
    evaluate, monomial_basis, reduce_canonical, Monomial, PolyError, Polynomial, QuotientRule,
};
use crate::sdpsolve::{sym_eigen_sorted, BlockMap, FeasibilityProblem, SolveError};
use crate::tensors::GraphInstance;

#[derive(Debug, Error)]
pub enum MomentsError {
    #[error("pseudoexpectation degree must be even, got {0}")]
    OddDegree(u32),
    #[error("moment vector has length {got}, basis needs {need}")]
    MomentLength { need: usize, got: usize },
    #[error("axiom {axiom:?} has degree {degree}, exceeds relaxation degree {max}")]
    AxiomDegreeOverflow { axiom: String, degree: u32, max: u32 },
    #[error("polynomial degree {degree} exceeds pseudoexpectation degree {max}")]
    DegreeOverflow { degree: u32, max: u32 },
    #[error("system mentions variable {var} but nvars = {nvars}")]
    VariableOutOfRange { var: usize, nvars: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// A linear functional on polynomials of degree ≤ `degree`, represented by
/// its moment vector over the canonical monomial basis.
#[derive(Debug, Clone)]
pub struct PseudoExpectation {
    degree: u32,
    nvars: usize,
    quotient: QuotientRule,
    moments: Vec<f64>,
    basis: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl PseudoExpectation {
    pub fn from_moments(
        nvars: usize,
        degree: u32,
        quotient: QuotientRule,
        moments: Vec<f64>,
    ) -> Result<Self, MomentsError> {
        if degree % 2 != 0 {
            return Err(MomentsError::OddDegree(degree));
        }
        let basis = monomial_basis(nvars, degree, quotient);
        if moments.len() != basis.len() {
            return Err(MomentsError::MomentLength { need: basis.len(), got: moments.len() });
        }
        let index = basis.iter().cloned().zip(0..).collect();
        Ok(PseudoExpectation { degree, nvars, quotient, moments, basis, index })
    }

    /// The pseudoexpectation of a genuine point mass: moments are monomial
    /// evaluations at `point`.
    pub fn point_mass(
        nvars: usize,
        degree: u32,
        quotient: QuotientRule,
        point: &[f64],
    ) -> Result<Self, MomentsError> {
        if degree % 2 != 0 {
            return Err(MomentsError::OddDegree(degree));
        }
        let basis = monomial_basis(nvars, degree, quotient);
        let moments = basis.iter().map(|m| m.evaluate(point)).collect();
        let index = basis.iter().cloned().zip(0..).collect();
        Ok(PseudoExpectation { degree, nvars, quotient, moments, basis, index })
    }

    /// Uniform mixture of point masses.
    pub fn mixture(
        nvars: usize,
        degree: u32,
        quotient: QuotientRule,
        points: &[Vec<f64>],
    ) -> Result<Self, MomentsError> {
        let mut acc = Self::point_mass(nvars, degree, quotient, &points[0])?;
        for p in &points[1..] {
            let other = Self::point_mass(nvars, degree, quotient, p)?;
            for (a, b) in acc.moments.iter_mut().zip(other.moments.iter()) {
                *a += b;
            }
        }
        let w = 1.0 / points.len() as f64;
        for a in acc.moments.iter_mut() {
            *a *= w;
        }
        Ok(acc)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn quotient(&self) -> QuotientRule {
        self.quotient
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    fn moment_of(&self, m: &Monomial) -> Result<f64, MomentsError> {
        let canon = m.reduce(self.quotient);
        match self.index.get(&canon) {
            Some(&i) => Ok(self.moments[i]),
            None => Err(MomentsError::DegreeOverflow { degree: canon.degree(), max: self.degree }),
        }
    }
}

/// Applies the functional to a polynomial: `Σ coeff · moments[monomial]`.
pub fn pe_apply(pe: &PseudoExpectation, p: &Polynomial) -> Result<f64, MomentsError> {
    let reduced = reduce_canonical(p, pe.quotient);
    if reduced.degree() > pe.degree {
        return Err(MomentsError::DegreeOverflow { degree: reduced.degree(), max: pe.degree });
    }
    let mut acc = 0.0;
    for (m, c) in reduced.terms() {
        acc += c * pe.moment_of(m)?;
    }
    Ok(acc)
}

/// Moment matrix indexed by `monomial_basis(nvars, d/2)`: entry (S,T) is the
/// moment of the reduced product `x^S x^T`. Exactly symmetric by construction.
pub fn assemble_moment_matrix(pe: &PseudoExpectation) -> DMatrix<f64> {
    let half = monomial_basis(pe.nvars, pe.degree / 2, pe.quotient);
    let s = half.len();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let v = pe
                .moment_of(&half[i].mul(&half[j]))
                .expect("product of half-basis monomials stays within degree");
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Localizing matrix for an axiom `p`: entry (S,T) = pE[p · x^S · x^T], with
/// the index basis truncated to degree ⌊(d − deg p)/2⌋.
pub fn assemble_localizing_matrix(
    pe: &PseudoExpectation,
    p: &Polynomial,
) -> Result<DMatrix<f64>, MomentsError> {
    let p = reduce_canonical(p, pe.quotient);
    if p.degree() > pe.degree {
        return Err(MomentsError::DegreeOverflow { degree: p.degree(), max: pe.degree });
    }
    let trunc = (pe.degree - p.degree()) / 2;
    let half = monomial_basis(pe.nvars, trunc, pe.quotient);
    let s = half.len();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let prod = half[i].mul(&half[j]);
            let mut acc = 0.0;
            for (t, c) in p.terms() {
                acc += c * pe.moment_of(&t.mul(&prod))?;
            }
            m[(i, j)] = acc;
            m[(j, i)] = acc;
        }
    }
    Ok(m)
}

/// A polynomial system: equality axioms `r = 0` and inequality axioms
/// `p ≥ 0`, all reduced canonical at construction.
#[derive(Debug, Clone)]
pub struct PolySystemSpec {
    pub equalities: Vec<Polynomial>,
    pub inequalities: Vec<Polynomial>,
    pub nvars: usize,
    pub quotient: QuotientRule,
}

impl PolySystemSpec {
    pub fn new(
        nvars: usize,
        quotient: QuotientRule,
        equalities: Vec<Polynomial>,
        inequalities: Vec<Polynomial>,
    ) -> Result<Self, MomentsError> {
        for p in equalities.iter().chain(inequalities.iter()) {
            if let Some(v) = p.max_var() {
                if v >= nvars {
                    return Err(MomentsError::VariableOutOfRange { var: v, nvars });
                }
            }
        }
        let equalities = equalities.iter().map(|p| reduce_canonical(p, quotient)).collect();
        let inequalities = inequalities.iter().map(|p| reduce_canonical(p, quotient)).collect();
        Ok(PolySystemSpec { equalities, inequalities, nvars, quotient })
    }

    pub fn empty(nvars: usize, quotient: QuotientRule) -> Self {
        PolySystemSpec { equalities: Vec::new(), inequalities: Vec::new(), nvars, quotient }
    }
}

/// The clique polynomial system over 0/1 vertex indicators: Boolean axioms
/// `x_i² = x_i`, one axiom `(1−y_ij)/2 · x_i x_j = 0` per non-edge (edge
/// pairs contribute the zero polynomial and are dropped), and the inequality
/// `Σ x_i − k ≥ 0`.
pub fn clique_system(graph: &GraphInstance, k: f64) -> PolySystemSpec {
    let n = graph.n;
    let mut equalities = Vec::new();
    for i in 0..n {
        let xi = Polynomial::var(n, i);
        equalities.push(xi.mul(&xi).sub(&xi));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let w = (1.0 - graph.edge_sign(i, j)) / 2.0;
            if w != 0.0 {
                let p = Polynomial::var(n, i).mul(&Polynomial::var(n, j)).scale(w);
                equalities.push(p);
            }
        }
    }
    let sum_minus_k = (0..n)
        .fold(Polynomial::constant(n, -k), |acc, i| acc.add(&Polynomial::var(n, i)));
    PolySystemSpec { equalities, inequalities: vec![sum_minus_k], nvars: n, quotient: QuotientRule::None }
}

/// Compiles a polynomial system at relaxation degree `d` into affine + PSD
/// feasibility data over the moment vector.
///
/// Affine rows: the normalization `pE[1] = 1`, then for each equality axiom
/// `r` one row `pE[r · x^A] = 0` per basis monomial `x^A` with
/// `deg(r · x^A) ≤ d`. PSD blocks: the moment matrix, then one localizing
/// matrix per inequality axiom. Row and block order is deterministic, so
/// identical inputs produce bit-identical problems.
pub fn compile_system(sys: &PolySystemSpec, d: u32) -> Result<FeasibilityProblem, MomentsError> {
    if d % 2 != 0 {
        return Err(MomentsError::OddDegree(d));
    }
    for p in sys.equalities.iter().chain(sys.inequalities.iter()) {
        if let Some(v) = p.max_var() {
            if v >= sys.nvars {
                return Err(MomentsError::VariableOutOfRange { var: v, nvars: sys.nvars });
            }
        }
        let pr = reduce_canonical(p, sys.quotient);
        if pr.degree() > d {
            return Err(MomentsError::AxiomDegreeOverflow {
                axiom: summarize(&pr),
                degree: pr.degree(),
                max: d,
            });
        }
    }

    let basis = monomial_basis(sys.nvars, d, sys.quotient);
    let index: HashMap<Monomial, usize> = basis.iter().cloned().zip(0..).collect();
    let idx_of = |m: &Monomial| -> usize {
        *index.get(&m.reduce(sys.quotient)).expect("reduced product within degree")
    };

    let one_pos = idx_of(&Monomial::one());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![vec![(one_pos, 1.0)]];
    let mut rhs = vec![1.0];

    for r in &sys.equalities {
        let r = reduce_canonical(r, sys.quotient);
        if r.is_zero() {
            continue;
        }
        let multipliers = monomial_basis(sys.nvars, d - r.degree(), sys.quotient);
        for a in &multipliers {
            let shifted = reduce_canonical(&r.mul_monomial(a), sys.quotient);
            if shifted.is_zero() {
                continue;
            }
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(shifted.num_terms());
            for (m, c) in shifted.terms() {
                row.push((idx_of(m), c));
            }
            rows.push(row);
            rhs.push(0.0);
        }
    }

    let mut blocks = Vec::new();
    let mut block_labels = Vec::new();
    {
        let half = monomial_basis(sys.nvars, d / 2, sys.quotient);
        let s = half.len();
        let mut entries = vec![Vec::new(); s * (s + 1) / 2];
        for i in 0..s {
            for j in i..s {
                entries[BlockMap::tri_index(s, i, j)] = vec![(idx_of(&half[i].mul(&half[j])), 1.0)];
            }
        }
        blocks.push(BlockMap { side: s, entries });
        block_labels.push("moment".to_string());
    }
    for (k, p) in sys.inequalities.iter().enumerate() {
        let p = reduce_canonical(p, sys.quotient);
        let trunc = (d - p.degree()) / 2;
        let half = monomial_basis(sys.nvars, trunc, sys.quotient);
        let s = half.len();
        let mut entries = vec![Vec::new(); s * (s + 1) / 2];
        for i in 0..s {
            for j in i..s {
                let prod = half[i].mul(&half[j]);
                let mut form: HashMap<usize, f64> = HashMap::new();
                for (t, c) in p.terms() {
                    *form.entry(idx_of(&t.mul(&prod))).or_insert(0.0) += c;
                }
                let mut form: Vec<(usize, f64)> = form.into_iter().filter(|&(_, c)| c != 0.0).collect();
                form.sort_unstable_by_key(|&(u, _)| u);
                entries[BlockMap::tri_index(s, i, j)] = form;
            }
        }
        blocks.push(BlockMap { side: s, entries });
        block_labels.push(format!("ineq[{k}] deg {} ({})", p.degree(), summarize(&p)));
    }

    Ok(FeasibilityProblem { n_unknowns: basis.len(), rows, rhs, blocks, block_labels })
}

fn summarize(p: &Polynomial) -> String {
    let mut parts: Vec<String> = p
        .terms()
        .take(3)
        .map(|(m, c)| format!("{c:+.3}·{m}"))
        .collect();
    if p.num_terms() > 3 {
        parts.push("…".into());
    }
    parts.join(" ")
}

/// Outcome of checking a pseudoexpectation against the functional's defining
/// properties and the system's axioms.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub normalization_residual: f64,
    pub moment_min_eig: f64,
    pub moment_scale: f64,
    /// (label, min eigenvalue, scale) per localizing block.
    pub localizing_min_eigs: Vec<(String, f64, f64)>,
    pub max_equality_residual: f64,
    /// Worst slack over the randomized Cauchy–Schwarz checks
    /// `½pE[p²] + ½pE[q²] − pE[pq]`; nonnegative up to tolerance when valid.
    pub cauchy_schwarz_min_slack: f64,
    pub cauchy_schwarz_checks: usize,
    pub tol: f64,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.normalization_residual <= self.tol
            && self.moment_min_eig >= -self.tol * (1.0 + self.moment_scale)
            && self
                .localizing_min_eigs
                .iter()
                .all(|&(_, l, s)| l >= -self.tol * (1.0 + s))
            && self.max_equality_residual <= self.tol
            && self.cauchy_schwarz_min_slack >= -1e-9
    }

    /// Offending PSD block labels, for diagnostics.
    pub fn failing_blocks(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.moment_min_eig < -self.tol * (1.0 + self.moment_scale) {
            out.push("moment".to_string());
        }
        for (label, l, s) in &self.localizing_min_eigs {
            if *l < -self.tol * (1.0 + s) {
                out.push(label.clone());
            }
        }
        out
    }

    /// Machine-parsable flat key-value block.
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("normalization_residual={:.6e}\n", self.normalization_residual));
        s.push_str(&format!("moment_min_eig={:.6e}\n", self.moment_min_eig));
        s.push_str(&format!("moment_scale={:.6e}\n", self.moment_scale));
        for (label, l, sc) in &self.localizing_min_eigs {
            s.push_str(&format!("localizing_min_eig[{label}]={l:.6e} scale={sc:.6e}\n"));
        }
        s.push_str(&format!("max_equality_residual={:.6e}\n", self.max_equality_residual));
        s.push_str(&format!("cauchy_schwarz_min_slack={:.6e}\n", self.cauchy_schwarz_min_slack));
        s.push_str(&format!("cauchy_schwarz_checks={}\n", self.cauchy_schwarz_checks));
        s.push_str(&format!("tol={:.6e}\n", self.tol));
        s.push_str(&format!("passed={}\n", self.passed()));
        s
    }
}

impl std::fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "pseudoexpectation validity (tol {:.1e})", self.tol)?;
        writeln!(f, "  |pE[1] - 1|            = {:.3e}", self.normalization_residual)?;
        writeln!(
            f,
            "  moment matrix min eig  = {:.3e} (scale {:.3e})",
            self.moment_min_eig, self.moment_scale
        )?;
        for (label, l, s) in &self.localizing_min_eigs {
            writeln!(f, "  {label:<22} min eig = {l:.3e} (scale {s:.3e})")?;
        }
        writeln!(f, "  max equality residual  = {:.3e}", self.max_equality_residual)?;
        writeln!(
            f,
            "  Cauchy-Schwarz slack   = {:.3e} over {} checks",
            self.cauchy_schwarz_min_slack, self.cauchy_schwarz_checks
        )?;
        write!(f, "  verdict: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

const CS_CHECKS: usize = 100;
const CS_SEED: u64 = 0xc5c5_c5c5;

/// Checks normalization, PSDness of the moment and localizing matrices,
/// equality residuals, and randomized Cauchy–Schwarz inequalities. Reports
/// rather than errors; deterministic for a fixed pseudoexpectation.
pub fn validate_pe(pe: &PseudoExpectation, sys: &PolySystemSpec, tol: f64) -> ValidityReport {
    let normalization_residual =
        (pe_apply(pe, &Polynomial::constant(pe.nvars, 1.0)).unwrap_or(f64::NAN) - 1.0).abs();

    let mm = assemble_moment_matrix(pe);
    let (moment_min_eig, moment_scale) = min_eig_and_scale(&mm);

    let mut localizing_min_eigs = Vec::new();
    for (k, p) in sys.inequalities.iter().enumerate() {
        match assemble_localizing_matrix(pe, p) {
            Ok(lm) => {
                let (l, s) = min_eig_and_scale(&lm);
                localizing_min_eigs.push((format!("ineq[{k}]"), l, s));
            }
            Err(_) => localizing_min_eigs.push((format!("ineq[{k}] (degree overflow)"), f64::NEG_INFINITY, 0.0)),
        }
    }

    let mut max_equality_residual = 0.0f64;
    for r in &sys.equalities {
        let r = reduce_canonical(r, sys.quotient);
        if r.is_zero() || r.degree() > pe.degree {
            continue;
        }
        for a in monomial_basis(sys.nvars, pe.degree - r.degree(), sys.quotient) {
            let shifted = r.mul_monomial(&a);
            if let Ok(v) = pe_apply(pe, &shifted) {
                max_equality_residual = max_equality_residual.max(v.abs());
            }
        }
    }

    // Cauchy-Schwarz: pE[pq] ≤ ½pE[p²] + ½pE[q²] for random degree-d/2 pairs
    let half = monomial_basis(pe.nvars, pe.degree / 2, pe.quotient);
    let mut rng = ChaCha8Rng::seed_from_u64(CS_SEED);
    let mut cauchy_schwarz_min_slack = f64::INFINITY;
    for _ in 0..CS_CHECKS {
        let rand_poly = |rng: &mut ChaCha8Rng| {
            Polynomial::from_terms(
                pe.nvars,
                half.iter().map(|m| (m.clone(), rng.gen_range(-1.0..1.0))),
            )
        };
        let p = rand_poly(&mut rng);
        let q = rand_poly(&mut rng);
        let pq = pe_apply(pe, &p.mul(&q)).unwrap_or(f64::NAN);
        let p2 = pe_apply(pe, &p.mul(&p)).unwrap_or(f64::NAN);
        let q2 = pe_apply(pe, &q.mul(&q)).unwrap_or(f64::NAN);
        let slack = 0.5 * p2 + 0.5 * q2 - pq;
        if slack < cauchy_schwarz_min_slack {
            cauchy_schwarz_min_slack = slack;
        }
    }

    ValidityReport {
        normalization_residual,
        moment_min_eig,
        moment_scale,
        localizing_min_eigs,
        max_equality_residual,
        cauchy_schwarz_min_slack,
        cauchy_schwarz_checks: CS_CHECKS,
        tol,
    }
}

fn min_eig_and_scale(m: &DMatrix<f64>) -> (f64, f64) {
    match sym_eigen_sorted(m.clone()) {
        Ok((vals, _)) => {
            let lo = vals[0];
            let hi = vals[vals.len() - 1];
            (lo, lo.abs().max(hi.abs()))
        }
        Err(_) => (f64::NEG_INFINITY, 0.0),
    }
}

/// Convenience: evaluates every target polynomial against the functional.
pub fn pe_apply_many(pe: &PseudoExpectation, targets: &[Polynomial]) -> Result<Vec<f64>, MomentsError> {
    targets.iter().map(|t| pe_apply(pe, t)).collect()
}

/// Point-evaluation cross-check used by tests: a point mass's pe_apply must
/// agree with direct evaluation.
pub fn point_mass_consistency(p: &Polynomial, point: &[f64], degree: u32) -> Result<(f64, f64), MomentsError> {
    let pe = PseudoExpectation::point_mass(p.nvars(), degree, QuotientRule::None, point)?;
    Ok((pe_apply(&pe, p)?, evaluate(p, point)?))
}

//! Multivariate polynomial arithmetic with quotient-aware canonical monomials.
//!
//! Monomials are sparse exponent maps kept in canonical form under an optional
//! quotient rule (`x_i^2 = x_i`, `x_i^2 = 1`, or none). Polynomials are sparse
//! term maps ordered graded-lexicographically, which keeps every downstream
//! construction (moment indexing, constraint assembly) deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("evaluation point has dimension {got}, need at least {need}")]
    DimensionMismatch { need: usize, got: usize },
    #[error("polynomial mentions variable {var} but nvars = {nvars}")]
    VariableOutOfRange { var: usize, nvars: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Quotient rule applied when reducing monomials to canonical form.
///
/// `Sphere` carries the squared radius of the constraint `Σ x_i² = r²` but
/// performs no monomial-level reduction: the sphere ideal is not monomial-local,
/// so sphere constraints are instead passed to the moment compiler as explicit
/// equality axioms. The variant exists so a system can declare its intended
/// ambient quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuotientRule {
    None,
    /// `x_i² = x_i` (0/1 variables); canonical monomials are multilinear.
    Boolean01,
    /// `x_i² = 1` (±1 variables); canonical monomials are multilinear.
    PlusMinus1,
    /// `Σ x_i² = r²`; no canonical reduction is performed (see module notes).
    Sphere { radius_sq: f64 },
}

impl QuotientRule {
    /// True when canonical monomials are multilinear under this rule.
    pub fn is_multilinear(&self) -> bool {
        matches!(self, QuotientRule::Boolean01 | QuotientRule::PlusMinus1)
    }
}

/// A monomial as a sparse map variable index → positive exponent, sorted by
/// variable index, with the total degree cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exponents: Vec<(usize, u32)>,
    degree: u32,
}

impl Monomial {
    /// The constant monomial `1`.
    pub fn one() -> Self {
        Monomial { exponents: Vec::new(), degree: 0 }
    }

    /// The monomial `x_var`.
    pub fn var(var: usize) -> Self {
        Monomial { exponents: vec![(var, 1)], degree: 1 }
    }

    /// Builds a monomial from (variable, exponent) pairs; zero exponents are
    /// dropped and repeated variables merged.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        let exponents: Vec<(usize, u32)> = map.into_iter().collect();
        let degree = exponents.iter().map(|&(_, e)| e).sum();
        Monomial { exponents, degree }
    }

    pub fn exponents(&self) -> &[(usize, u32)] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Largest variable index mentioned, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.exponents.last().map(|&(v, _)| v)
    }

    /// Product of two monomials (no quotient reduction).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(usize, u32)> = Vec::with_capacity(self.exponents.len() + other.exponents.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exponents.len() && j < other.exponents.len() {
            let (va, ea) = self.exponents[i];
            let (vb, eb) = other.exponents[j];
            match va.cmp(&vb) {
                Ordering::Less => {
                    out.push((va, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((vb, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((va, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exponents[i..]);
        out.extend_from_slice(&other.exponents[j..]);
        let degree = self.degree + other.degree;
        Monomial { exponents: out, degree }
    }

    /// Canonical form under the quotient rule. Idempotent.
    pub fn reduce(&self, q: QuotientRule) -> Monomial {
        match q {
            QuotientRule::None | QuotientRule::Sphere { .. } => self.clone(),
            QuotientRule::Boolean01 => {
                if self.exponents.iter().all(|&(_, e)| e == 1) {
                    return self.clone();
                }
                let exps: Vec<(usize, u32)> = self.exponents.iter().map(|&(v, _)| (v, 1)).collect();
                let degree = exps.len() as u32;
                Monomial { exponents: exps, degree }
            }
            QuotientRule::PlusMinus1 => {
                let exps: Vec<(usize, u32)> = self
                    .exponents
                    .iter()
                    .filter(|&&(_, e)| e % 2 == 1)
                    .map(|&(v, _)| (v, 1))
                    .collect();
                let degree = exps.len() as u32;
                Monomial { exponents: exps, degree }
            }
        }
    }

    /// Evaluates the monomial at a point.
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.exponents
            .iter()
            .map(|&(v, e)| point[v].powi(e as i32))
            .product()
    }
}

/// Graded lexicographic order: by total degree, then lexicographically on the
/// expanded variable multiset. The constant monomial sorts first.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            let a = self.exponents.iter().flat_map(|&(v, e)| std::iter::repeat(v).take(e as usize));
            let b = other.exponents.iter().flat_map(|&(v, e)| std::iter::repeat(v).take(e as usize));
            a.cmp(b)
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(v, e) in &self.exponents {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", v + 1)?;
            } else {
                write!(f, "x{}^{}", v + 1, e)?;
            }
        }
        Ok(())
    }
}

/// A sparse real polynomial: term map monomial → coefficient, never storing
/// exact zeros. The term map is a `BTreeMap` so iteration order is the graded
/// lexicographic monomial order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
    nvars: usize,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { terms: BTreeMap::new(), nvars }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        if c != 0.0 {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        assert!(v < nvars, "variable index out of range");
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(v), 1.0);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, f64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max term degree; zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get() + c;
                if v == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.nvars = self.nvars.max(other.nvars);
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        if c == 0.0 {
            return Polynomial::zero(self.nvars);
        }
        let terms = self.terms.iter().map(|(m, &v)| (m.clone(), v * c)).collect();
        Polynomial { terms, nvars: self.nvars }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars.max(other.nvars));
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Multiply by a single monomial.
    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        let terms = self.terms.iter().map(|(t, &c)| (t.mul(m), c)).collect();
        Polynomial { terms, nvars: self.nvars }
    }

    /// Largest variable index mentioned in any term.
    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().filter_map(|m| m.max_var()).max()
    }
}

/// Reduces a polynomial modulo the quotient ideal, merging terms whose
/// monomials collide after reduction. Total and idempotent.
pub fn reduce_canonical(p: &Polynomial, q: QuotientRule) -> Polynomial {
    match q {
        QuotientRule::None | QuotientRule::Sphere { .. } => p.clone(),
        _ => {
            let mut out = Polynomial::zero(p.nvars());
            for (m, c) in p.terms() {
                out.add_term(m.reduce(q), c);
            }
            out
        }
    }
}

/// Evaluates `p` at `point`.
pub fn evaluate(p: &Polynomial, point: &[f64]) -> Result<f64, PolyError> {
    if point.len() < p.nvars() {
        return Err(PolyError::DimensionMismatch { need: p.nvars(), got: point.len() });
    }
    Ok(p.terms().map(|(m, c)| c * m.evaluate(point)).sum())
}

/// All canonical monomials of degree ≤ `d` in `nvars` variables under `q`,
/// in graded lexicographic order with the constant monomial first. The order
/// is a pure function of the arguments, stable across runs and platforms.
pub fn monomial_basis(nvars: usize, d: u32, q: QuotientRule) -> Vec<Monomial> {
    let multilinear = q.is_multilinear();
    let mut out = vec![Monomial::one()];
    for deg in 1..=d {
        if multilinear && deg as usize > nvars {
            break;
        }
        let mut current: Vec<usize> = Vec::with_capacity(deg as usize);
        emit_degree(nvars, deg as usize, multilinear, 0, &mut current, &mut out);
    }
    out
}

fn emit_degree(
    nvars: usize,
    deg: usize,
    multilinear: bool,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Monomial>,
) {
    if current.len() == deg {
        out.push(Monomial::from_pairs(current.iter().map(|&v| (v, 1))));
        return;
    }
    for v in start..nvars {
        current.push(v);
        let next = if multilinear { v + 1 } else { v };
        emit_degree(nvars, deg, multilinear, next, current, out);
        current.pop();
    }
}

/// Number of monomials of degree ≤ `d` (size of `monomial_basis`).
pub fn basis_len(nvars: usize, d: u32, q: QuotientRule) -> usize {
    // binomial-formula count, cross-checked against enumeration in tests
    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut r = 1usize;
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    }
    if q.is_multilinear() {
        (0..=d as usize).map(|s| binom(nvars, s)).sum()
    } else {
        binom(nvars + d as usize, d as usize)
    }
}

// --- text serialization -----------------------------------------------------
//
// One term per line: "coeff  i1^e1 i2^e2 ..." with 1-based variable indices;
// the constant term is written as "coeff  1". Used in test fixtures.

pub fn to_text(p: &Polynomial) -> String {
    let mut s = String::new();
    for (m, c) in p.terms() {
        s.push_str(&format!("{c:.17e} "));
        if m.is_one() {
            s.push_str(" 1");
        } else {
            for &(v, e) in m.exponents() {
                s.push_str(&format!(" {}^{}", v + 1, e));
            }
        }
        s.push('\n');
    }
    s
}

pub fn from_text(text: &str, nvars: usize) -> Result<Polynomial, PolyError> {
    let mut p = Polynomial::zero(nvars);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let coeff: f64 = fields
            .next()
            .ok_or_else(|| PolyError::Parse { line: lineno + 1, msg: "missing coefficient".into() })?
            .parse()
            .map_err(|e| PolyError::Parse { line: lineno + 1, msg: format!("bad coefficient: {e}") })?;
        let mut pairs = Vec::new();
        for f in fields {
            if f == "1" {
                continue;
            }
            let (vs, es) = f.split_once('^').unwrap_or((f, "1"));
            let v: usize = vs
                .parse()
                .map_err(|e| PolyError::Parse { line: lineno + 1, msg: format!("bad variable: {e}") })?;
            let e: u32 = es
                .parse()
                .map_err(|e| PolyError::Parse { line: lineno + 1, msg: format!("bad exponent: {e}") })?;
            if v == 0 {
                return Err(PolyError::Parse { line: lineno + 1, msg: "variable indices are 1-based".into() });
            }
            if v > nvars {
                return Err(PolyError::Parse { line: lineno + 1, msg: format!("variable {v} exceeds nvars {nvars}") });
            }
            pairs.push((v - 1, e));
        }
        p.add_term(Monomial::from_pairs(pairs), coeff);
    }
    Ok(p)
}

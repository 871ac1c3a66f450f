//! Spectral refutation certificates. Each method computes an instance-
//! dependent matrix whose top eigenvalue certifies a bound (implicitly a
//! low-degree sum-of-squares proof): the clique bound from the centered
//! adjacency matrix, the symmetrized Kronecker-power certificate for
//! injective tensor norms, the degree-4 refutation of random 4-XOR, and the
//! alternating-projection dual certificate for matrix completion.
//!
//! Every method sits behind the [`Certifier`] trait and is registered by
//! name in [`registry`], so harnesses select certificates at runtime.

mod clique;
mod mc_dual;
mod tensor_pk;
mod xor;

pub use clique::{clique_upper_bound, sos_identity_check_clique, CliqueIdentityReport};
pub use mc_dual::{mc_dual_certificate, McDualReport};
pub use tensor_pk::{pk_operator_apply, tensor_pk_certificate};
pub use xor::xor_refute;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::sdpsolve::SolveError;
use crate::tensors::{GraphInstance, SymTensor, TensorError, XorInstance};

#[derive(Debug, Error)]
pub enum CertError {
    #[error("certifier {method:?} expects a {expected} instance")]
    WrongInstance { method: &'static str, expected: &'static str },
    #[error("level {got} not supported: {msg}")]
    BadLevel { got: usize, msg: &'static str },
    #[error("empty instance")]
    EmptyInstance,
    #[error("matrix is not a 0/1 projector (eigenvalue {eig} at position {pos})")]
    NotAProjector { eig: f64, pos: usize },
    #[error("observation set is not symmetric: contains ({0}, {1}) without its transpose")]
    AsymmetricOmega(usize, usize),
    #[error("clique check input is not a 0/1 vector supported on a clique: {msg}")]
    NotCliqueSupported { msg: String },
    #[error("tensor must be symmetric order 4, got order {0}")]
    WrongTensor(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Spectral witness backing a certified bound.
#[derive(Debug, Clone)]
pub struct Witness {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    /// `‖Mv − λv‖` against the certificate matrix/operator.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub certified_bound: f64,
    pub method: &'static str,
    pub witness: Witness,
    /// Auxiliary quantities (spectral sandwich slack, raw eigenvalues, …).
    pub margins: Vec<(String, f64)>,
    /// FNV-1a hash of the instance's canonical encoding.
    pub instance_digest: String,
}

impl CertificateReport {
    /// Key-value text serialization (one `key=value` per line).
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("method={}\n", self.method));
        s.push_str(&format!("certified_bound={:.12e}\n", self.certified_bound));
        s.push_str(&format!("witness_eigenvalue={:.12e}\n", self.witness.eigenvalue));
        s.push_str(&format!("witness_residual={:.3e}\n", self.witness.residual));
        for (k, v) in &self.margins {
            s.push_str(&format!("{k}={v:.12e}\n"));
        }
        s.push_str(&format!("instance_digest={}\n", self.instance_digest));
        s
    }
}

/// Instance envelope accepted by the runtime-dispatched certifiers.
#[derive(Debug, Clone)]
pub enum CertInput {
    Graph(GraphInstance),
    Tensor4(SymTensor),
    Xor(XorInstance),
    Completion { x: DMatrix<f64>, omega: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOpts {
    /// Symmetrized-power level for the tensor certificate (k ∈ {1,2,3}).
    pub pk_level: usize,
    /// Refutation level for XOR (1 = degree-4 certificate).
    pub xor_level: usize,
}

impl Default for CertifyOpts {
    fn default() -> Self {
        CertifyOpts { pk_level: 1, xor_level: 1 }
    }
}

/// A refutation strategy selectable by name at runtime.
pub trait Certifier: Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn certify(&self, input: &CertInput, opts: &CertifyOpts) -> Result<CertificateReport, CertError>;
}

struct CliqueCertifier;

impl Certifier for CliqueCertifier {
    fn name(&self) -> &'static str {
        "clique"
    }

    fn describe(&self) -> &'static str {
        "clique-size upper bound 2·λmax(A − J/2) + 2"
    }

    fn certify(&self, input: &CertInput, _opts: &CertifyOpts) -> Result<CertificateReport, CertError> {
        match input {
            CertInput::Graph(g) => clique_upper_bound(g),
            _ => Err(CertError::WrongInstance { method: self.name(), expected: "graph" }),
        }
    }
}

struct TensorPkCertifier;

impl Certifier for TensorPkCertifier {
    fn name(&self) -> &'static str {
        "tensor-pk"
    }

    fn describe(&self) -> &'static str {
        "injective-norm bound λmax(P_k)^{1/k} from the symmetrized k-th Kronecker power"
    }

    fn certify(&self, input: &CertInput, opts: &CertifyOpts) -> Result<CertificateReport, CertError> {
        match input {
            CertInput::Tensor4(t) => tensor_pk_certificate(t, opts.pk_level),
            _ => Err(CertError::WrongInstance { method: self.name(), expected: "order-4 tensor" }),
        }
    }
}

struct XorCertifier;

impl Certifier for XorCertifier {
    fn name(&self) -> &'static str {
        "xor"
    }

    fn describe(&self) -> &'static str {
        "max-satisfiable-fraction bound ½ + n²·λmax/(2m) for 4-XOR"
    }

    fn certify(&self, input: &CertInput, opts: &CertifyOpts) -> Result<CertificateReport, CertError> {
        match input {
            CertInput::Xor(inst) => xor_refute(inst, opts.xor_level),
            _ => Err(CertError::WrongInstance { method: self.name(), expected: "xor" }),
        }
    }
}

struct McDualCertifier;

impl Certifier for McDualCertifier {
    fn name(&self) -> &'static str {
        "mc-dual"
    }

    fn describe(&self) -> &'static str {
        "matrix-completion dual certificate by alternating projection"
    }

    fn certify(&self, input: &CertInput, _opts: &CertifyOpts) -> Result<CertificateReport, CertError> {
        match input {
            CertInput::Completion { x, omega } => Ok(mc_dual_certificate(x, omega)?.into_report()),
            _ => Err(CertError::WrongInstance { method: self.name(), expected: "completion" }),
        }
    }
}

static REGISTRY: &[&dyn Certifier] = &[&CliqueCertifier, &TensorPkCertifier, &XorCertifier, &McDualCertifier];

/// All registered certificate methods.
pub fn registry() -> &'static [&'static dyn Certifier] {
    REGISTRY
}

/// Looks a certifier up by its registered name.
pub fn find(name: &str) -> Option<&'static dyn Certifier> {
    REGISTRY.iter().copied().find(|c| c.name() == name)
}

pub(crate) fn fnv1a(bytes: impl Iterator<Item = u8>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

pub(crate) fn digest_f64s(values: impl Iterator<Item = f64>) -> String {
    fnv1a(values.flat_map(|v| v.to_le_bytes()))
}

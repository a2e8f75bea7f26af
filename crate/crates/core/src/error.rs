//! Crate-wide error type.
//!
//! Errors split into two severities. Ordinary precondition and validation
//! failures are expected caller mistakes. [`Error::Defect`] marks a state
//! the underlying theory rules out (for instance an inconsistent Hensel
//! layer while lifting a smooth deformation); hitting one means the
//! implementation, not the input, is wrong.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus is not a monic irreducible polynomial of degree {degree} over Z/{ell}")]
    BadModulus { ell: u64, degree: usize },
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("multiplicative order of zero is undefined")]
    ZeroElement,
    #[error("{a} and {b} are not coprime")]
    NotCoprime { a: u64, b: u64 },
    #[error("element is not a principal unit (not congruent to 1 mod ell)")]
    NotPrincipalUnit,
    #[error("root degree {n} is divisible by ell = {ell}")]
    RootDegreeDivisibleByEll { n: u64, ell: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("eigenvalue of multiplicity structure lies outside the coefficient field; extend scalars first (degree {needed} over the prime field suffices)")]
    EigenvalueOutsideField { needed: usize },
    #[error("eigenvalue set is not closed under the q-power map (q = {q})")]
    OrbitNotClosed { q: u64 },
    #[error("eigenvalue order {order} shares a factor with q = {q}")]
    OrbitOrderSharesFactor { order: u64, q: u64 },
    #[error("tame pair relation S·T·S⁻¹ = T^q violated")]
    PairRelationViolated,
    #[error("linear system over Z/ell^m inconsistent at layer {layer}")]
    InconsistentAtLayer { layer: u32 },
    #[error("hom-vanishing fails between blocks {i} and {j} at twist {witness}; decomposition would not be unique")]
    HomVanishingFails { i: usize, j: usize, witness: i64 },
    #[error("similarity undecided: intertwiner space of dimension {space_dim} too large to exhaust and sampling found no invertible element")]
    SimilarityUndecided { space_dim: usize },
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed input: {0}")]
    BadInput(String),
    /// Internal defect: a state the theory guarantees cannot occur.
    #[error("internal defect: {0}")]
    Defect(String),
}

impl Error {
    /// True for states the underlying theory excludes; callers should
    /// treat these as bugs rather than input errors.
    pub fn is_defect(&self) -> bool {
        matches!(self, Error::Defect(_) | Error::SimilarityUndecided { .. })
    }

    pub fn pre<S: Into<String>>(msg: S) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn defect<S: Into<String>>(msg: S) -> Self {
        Error::Defect(msg.into())
    }
}

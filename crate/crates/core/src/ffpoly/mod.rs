//! Arithmetic foundations: the coefficient field F_q, the polynomial ring
//! A = F_q[t], its primes, residue rings A/p^n, and finite extension fields.
//!
//! Everything here is exact and deterministic. Elements are reduced
//! coefficient vectors, canonical by construction, so equality is structural
//! and enumeration order is the mixed-radix index order.

mod field;
mod fq;
mod linalg;
mod poly;
mod prime;
mod residue;

pub use field::{EmbedMap, FieldCtx};
pub use fq::{FqCtx, FqElt};
pub use linalg::{kernel_basis, rank, solve, solve_first_dependency, LinCtx};
pub use poly::{factor_monic, find_irreducible, is_irreducible, monic_of_degree, Poly};
pub use prime::{absolute_value, prime_data, PrimeInfo};
pub use residue::{ResCtx, ResElt};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FfError {
    #[error("polynomial is not irreducible over F_{q}: {poly}")]
    NotIrreducible { q: u64, poly: String },
    #[error("polynomial is not monic: {0}")]
    NotMonic(String),
    #[error("element is not a unit, valuation {val:?}")]
    NonUnitInverse { val: Option<u32> },
    #[error("zero element has no absolute value")]
    ZeroElement,
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("no embedding of a degree-{src} extension into a degree-{dst} extension")]
    NoEmbedding { src: usize, dst: usize },
}

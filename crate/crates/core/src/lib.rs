//! Torsion-level calculus over A = F_q[t].
//!
//! The crate has three layers:
//!
//! * `ffpoly`: exact arithmetic for F_q, A = F_q[t], primes, residue rings
//!   A/p^n, and finite extensions, with deterministic linear algebra.
//! * `tormod` and `admissible`: finite torsion A-modules, their automorphism
//!   groups, and the congruence-subgroup calculus on exponent matrices,
//!   including the filtration and its graded pieces.
//! * `drinfeld`, `formal`, `dickson`: module maps realized on polynomial and
//!   power-series models, level-structure checks and counts, and the
//!   invariant theory used to certify smoothness of level covers.
//!
//! Every nontrivial computation has a slow, independent cross-check somewhere
//! in the test suite; the `suites` module packages those checks so the CLI
//! and the acceptance tests run the same code.

pub mod admissible;
pub mod cli;
pub mod dickson;
pub mod drinfeld;
pub mod ffpoly;
pub mod formal;
pub mod series;
pub mod suites;
pub mod tormod;

pub use cli::run;

//! Factorization-model compiler and solver toolkit.
//!
//! Encodes semiprime factorization `N = p * q` as binary optimization
//! problems built from the column structure of long multiplication with
//! explicit carry propagation, then solves them with classical backends.
//!
//! - [`binmul`]: the forward arithmetic — column sums, carries and result
//!   bits of a binary multiplication, plus the worst-case carry bounds.
//! - [`pbpoly`]: multilinear pseudo-Boolean polynomials with exact integer
//!   coefficients.
//! - [`models`]: compilation of an instance into high-order (HUBO),
//!   quadratized (QUBO) and constrained quadratic (CQM) models, and
//!   encoding/decoding between factors and assignments.
//! - [`solvers`]: streaming exhaustive enumeration, simulated annealing and
//!   a penalty-method constrained solver, plus the `2^v * v` memory model
//!   of a stored-state enumerator.
//! - [`harness`]: seeded semiprime generation and reproducible experiment
//!   batches with CSV output.

pub mod binmul;
pub mod error;
pub mod harness;
pub mod models;
pub mod pbpoly;
pub mod solvers;

pub use error::{Error, Result};

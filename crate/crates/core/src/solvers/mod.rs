//! Classical solver backends behind one result type: streaming exhaustive
//! enumeration, simulated annealing for quadratic models, and a
//! penalty-method solver for constrained models.

mod anneal;
mod compiled;
mod cqm;
mod exact;
mod memory;

pub use anneal::{simulated_anneal, AnnealParams, BetaSchedule};
pub use cqm::cqm_solve;
pub use exact::{exact_solve, DEFAULT_LIMIT_VARS};
pub use memory::{estimate_memory, MemoryEstimate};

use std::borrow::Cow;
use std::time::Duration;

use num_bigint::BigUint;

use crate::error::Result;
use crate::models::{decode_factors, FactorizationInstance, HuboModel, QuboModel};
use crate::pbpoly::{Assignment, Polynomial, VarId};

/// An unconstrained binary model a solver can enumerate or anneal.
pub trait BinaryModel {
    fn objective_polynomial(&self) -> Cow<'_, Polynomial>;
    fn registry(&self) -> &[VarId];
    fn instance(&self) -> &FactorizationInstance;
}

impl BinaryModel for HuboModel {
    fn objective_polynomial(&self) -> Cow<'_, Polynomial> {
        Cow::Borrowed(&self.objective)
    }
    fn registry(&self) -> &[VarId] {
        &self.registry
    }
    fn instance(&self) -> &FactorizationInstance {
        &self.instance
    }
}

impl BinaryModel for QuboModel {
    fn objective_polynomial(&self) -> Cow<'_, Polynomial> {
        Cow::Owned(self.to_polynomial())
    }
    fn registry(&self) -> &[VarId] {
        &self.registry
    }
    fn instance(&self) -> &FactorizationInstance {
        &self.instance
    }
}

/// Solver bookkeeping attached to every result.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// States enumerated by the exhaustive backend.
    pub states_visited: Option<u128>,
    /// How many enumerated states attained the returned energy (exhaustive
    /// backend only).
    pub ties: Option<u128>,
    /// Total sweeps executed across restarts by the annealing backends.
    pub sweeps: Option<u64>,
    pub restarts: Option<u32>,
    pub seed: Option<u64>,
    pub elapsed: Duration,
}

impl SolveStats {
    /// Deterministic work measure: sweeps for annealers, states for the
    /// exhaustive backend.
    pub fn work_units(&self) -> u64 {
        self.sweeps
            .or_else(|| self.states_visited.map(|s| s.min(u64::MAX as u128) as u64))
            .unwrap_or(0)
    }
}

/// Outcome of a solve: the best assignment found, its independently
/// re-evaluated energy, and the decoded factor candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    /// Values of every free variable of the model that was solved.
    pub assignment: Assignment,
    /// Objective value at `assignment`, re-evaluated from the polynomial.
    pub energy: i128,
    /// Exact constraint feasibility; `None` for unconstrained models.
    pub feasible: Option<bool>,
    /// Decoded candidate factors, `p <= q`.
    pub p: u128,
    pub q: u128,
    /// `|p*q - N|`.
    pub abs_error: u128,
    pub stats: SolveStats,
}

/// Decodes factors and fills in the product error for a finished solve.
pub(crate) fn finish_result(
    instance: &FactorizationInstance,
    assignment: Assignment,
    energy: i128,
    feasible: Option<bool>,
    stats: SolveStats,
) -> Result<SolveResult> {
    let (p, q) = decode_factors(&assignment, instance)?;
    let abs_error = (p * q).abs_diff(instance.target());
    Ok(SolveResult {
        assignment,
        energy,
        feasible,
        p,
        q,
        abs_error,
        stats,
    })
}

/// Pure arithmetic check that `p * q = n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub valid: bool,
    /// `|p*q - n|`, saturated at `u128::MAX` if the product overflows.
    pub abs_error: u128,
}

pub fn verify_factorization(p: u128, q: u128, n: u128) -> Verification {
    match p.checked_mul(q) {
        Some(prod) => Verification {
            valid: prod == n,
            abs_error: prod.abs_diff(n),
        },
        None => {
            let prod = BigUint::from(p) * BigUint::from(q);
            let diff = prod - BigUint::from(n);
            Verification {
                valid: false,
                abs_error: u128::try_from(diff).unwrap_or(u128::MAX),
            }
        }
    }
}

/// Stable seed derivation for per-restart and per-trial randomness.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0x9E37_79B9_7F4A_7C15);
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

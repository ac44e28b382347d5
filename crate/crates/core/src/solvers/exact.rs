//! Streaming exhaustive enumeration.
//!
//! Visits all `2^v` assignments in Gray-code order so each step flips one
//! bit and reuses the incremental cursor; only the best state is retained,
//! so the working set is O(v) even though the visit count is exponential.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::pbpoly::Assignment;

use super::compiled::CompiledPoly;
use super::memory::estimate_memory;
use super::{finish_result, BinaryModel, SolveResult, SolveStats};

/// Default free-variable guard; 2^28 states keeps desk-scale runtimes.
pub const DEFAULT_LIMIT_VARS: usize = 28;

/// Hard cap regardless of the caller's limit: beyond this the enumeration
/// could not finish in any reasonable sitting.
const ABSOLUTE_LIMIT_VARS: usize = 48;

/// Finds the global minimum of an unconstrained model by enumerating every
/// assignment of its free variables.
///
/// Ties are broken toward the lexicographically smallest assignment in
/// canonical variable order.
pub fn exact_solve<M: BinaryModel>(model: &M, limit_vars: usize) -> Result<SolveResult> {
    let started = Instant::now();
    let registry = model.registry();
    let v = registry.len();
    let effective_limit = limit_vars.min(ABSOLUTE_LIMIT_VARS);
    if v > effective_limit {
        let est = estimate_memory(v as u32)?;
        return Err(Error::ResourceGuard {
            vars: v,
            limit: effective_limit,
            estimate: format!(
                "a stored-state solver would need {} bytes ({})",
                est.bytes, est.human_readable
            ),
        });
    }

    let poly = model.objective_polynomial();
    let cp = CompiledPoly::compile(&poly, registry)?;

    let mut bits = vec![0u8; v];
    let mut cursor = cp.cursor(&bits);
    let mut best_value = cursor.value();
    let mut best_bits = bits.clone();
    let mut ties: u128 = 1;

    let total: u64 = 1u64 << v;
    for k in 1..total {
        let j = k.trailing_zeros() as usize;
        let to_one = bits[j] == 0;
        cursor.apply_flip(&cp, j, to_one);
        bits[j] ^= 1;
        let value = cursor.value();
        if value < best_value {
            best_value = value;
            best_bits.copy_from_slice(&bits);
            ties = 1;
        } else if value == best_value {
            ties += 1;
            if bits < best_bits {
                best_bits.copy_from_slice(&bits);
            }
        }
    }

    let assignment: Assignment = registry
        .iter()
        .zip(&best_bits)
        .map(|(&var, &b)| (var, b))
        .collect();
    // Never trust the incremental bookkeeping: re-evaluate from scratch.
    let energy = poly.evaluate(&assignment)?;
    assert_eq!(energy, best_value, "incremental evaluation drifted");

    let stats = SolveStats {
        states_visited: Some(1u128 << v),
        ties: Some(ties),
        sweeps: None,
        restarts: None,
        seed: None,
        elapsed: started.elapsed(),
    };
    finish_result(model.instance(), assignment, energy, None, stats)
}

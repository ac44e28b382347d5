//! Memory model of a stored-state exhaustive solver: `2^v * v` bytes for
//! `v` binary variables.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Exact byte count a stored-state solver would need, plus a readable form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryEstimate {
    pub vars: u32,
    pub bytes: BigUint,
    pub human_readable: String,
}

/// Computes `2^v * v` exactly; never allocates anything of that size.
pub fn estimate_memory(vars: u32) -> Result<MemoryEstimate> {
    if vars < 1 {
        return Err(Error::Parameter(
            "variable count must be at least 1".into(),
        ));
    }
    let bytes = (BigUint::from(1u8) << vars) * BigUint::from(vars);
    let human_readable = format_binary_bytes(&bytes);
    Ok(MemoryEstimate {
        vars,
        bytes,
        human_readable,
    })
}

const UNITS: [&str; 9] = ["B", "KiB", "MiB", "GiB", "TiB", "PiB", "EiB", "ZiB", "YiB"];

fn format_binary_bytes(bytes: &BigUint) -> String {
    let mut unit = 0usize;
    let mut whole = bytes.clone();
    let kib = BigUint::from(1024u32);
    while whole >= kib && unit + 1 < UNITS.len() {
        whole = &whole >> 10;
        unit += 1;
    }
    let shift = 10 * unit as u32;
    let scaled = bytes >> shift;
    let remainder = bytes - (&scaled << shift);
    if remainder == BigUint::from(0u8) {
        format!("{} {}", scaled, UNITS[unit])
    } else {
        let value = bytes.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(shift as i32);
        format!("{:.2} {}", value, UNITS[unit])
    }
}

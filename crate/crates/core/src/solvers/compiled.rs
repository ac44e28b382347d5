//! Incremental polynomial evaluation for single-bit-flip search.
//!
//! A polynomial is compiled against a variable registry into flat arrays;
//! a cursor then tracks, per term, how many of its variables are currently
//! zero. A term contributes its coefficient exactly while that count is
//! zero, so a bit flip costs one pass over the terms containing the flipped
//! variable.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pbpoly::{Polynomial, VarId};

#[derive(Debug, Clone)]
pub(crate) struct CompiledPoly {
    pub constant: i128,
    coeffs: Vec<i128>,
    // term -> variable indices (CSR)
    term_offsets: Vec<u32>,
    term_vars: Vec<u32>,
    // variable -> term ids (CSR)
    var_offsets: Vec<u32>,
    var_terms: Vec<u32>,
    num_vars: usize,
}

impl CompiledPoly {
    pub fn compile(poly: &Polynomial, registry: &[VarId]) -> Result<Self> {
        let index: BTreeMap<VarId, u32> = registry
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32))
            .collect();

        let mut constant = 0i128;
        let mut coeffs = Vec::new();
        let mut term_offsets = vec![0u32];
        let mut term_vars = Vec::new();
        for (m, &c) in poly.terms() {
            if m.degree() == 0 {
                constant = c;
                continue;
            }
            for &v in m.vars() {
                let idx = *index
                    .get(&v)
                    .ok_or_else(|| Error::UnboundVariable(v.to_string()))?;
                term_vars.push(idx);
            }
            coeffs.push(c);
            term_offsets.push(term_vars.len() as u32);
        }

        let num_vars = registry.len();
        let mut counts = vec![0u32; num_vars];
        for &v in &term_vars {
            counts[v as usize] += 1;
        }
        let mut var_offsets = vec![0u32; num_vars + 1];
        for i in 0..num_vars {
            var_offsets[i + 1] = var_offsets[i] + counts[i];
        }
        let mut cursor = var_offsets[..num_vars].to_vec();
        let mut var_terms = vec![0u32; term_vars.len()];
        for t in 0..coeffs.len() {
            for k in term_offsets[t]..term_offsets[t + 1] {
                let v = term_vars[k as usize] as usize;
                var_terms[cursor[v] as usize] = t as u32;
                cursor[v] += 1;
            }
        }

        Ok(CompiledPoly {
            constant,
            coeffs,
            term_offsets,
            term_vars,
            var_offsets,
            var_terms,
            num_vars,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn terms_of(&self, var: usize) -> &[u32] {
        &self.var_terms[self.var_offsets[var] as usize..self.var_offsets[var + 1] as usize]
    }

    fn term_var_slice(&self, term: usize) -> &[u32] {
        &self.term_vars[self.term_offsets[term] as usize..self.term_offsets[term + 1] as usize]
    }

    /// Fresh cursor for the given bit string (indexed like the registry).
    pub fn cursor(&self, bits: &[u8]) -> PolyCursor {
        debug_assert_eq!(bits.len(), self.num_vars);
        let mut zero_count = vec![0u32; self.coeffs.len()];
        let mut value = self.constant;
        for (t, zc) in zero_count.iter_mut().enumerate() {
            let zeros = self
                .term_var_slice(t)
                .iter()
                .filter(|&&v| bits[v as usize] == 0)
                .count() as u32;
            *zc = zeros;
            if zeros == 0 {
                value += self.coeffs[t];
            }
        }
        PolyCursor { zero_count, value }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct PolyCursor {
    zero_count: Vec<u32>,
    value: i128,
}

impl PolyCursor {
    pub fn value(&self) -> i128 {
        self.value
    }

    /// Value change if `var` were flipped to `to_one`, without mutating.
    pub fn flip_delta(&self, cp: &CompiledPoly, var: usize, to_one: bool) -> i128 {
        let mut delta = 0i128;
        if to_one {
            for &t in cp.terms_of(var) {
                if self.zero_count[t as usize] == 1 {
                    delta += cp.coeffs[t as usize];
                }
            }
        } else {
            for &t in cp.terms_of(var) {
                if self.zero_count[t as usize] == 0 {
                    delta -= cp.coeffs[t as usize];
                }
            }
        }
        delta
    }

    /// Applies the flip of `var` to `to_one`.
    pub fn apply_flip(&mut self, cp: &CompiledPoly, var: usize, to_one: bool) {
        if to_one {
            for &t in cp.terms_of(var) {
                let zc = &mut self.zero_count[t as usize];
                *zc -= 1;
                if *zc == 0 {
                    self.value += cp.coeffs[t as usize];
                }
            }
        } else {
            for &t in cp.terms_of(var) {
                let zc = &mut self.zero_count[t as usize];
                if *zc == 0 {
                    self.value -= cp.coeffs[t as usize];
                }
                *zc += 1;
            }
        }
    }
}

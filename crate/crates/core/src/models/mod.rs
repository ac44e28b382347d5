//! Compilation of factorization instances into optimization models.
//!
//! A [`FactorizationInstance`] pins the target semiprime and the factor bit
//! width. Builders turn it into a high-order model ([`HuboModel`]), its
//! quadratized form ([`QuboModel`]), or a constrained quadratic model
//! ([`CqmModel`]); [`encode_solution`] and [`decode_factors`] map between
//! integer factors and variable assignments.

mod cqm;
mod hubo;
mod qubo;
mod serialize;

pub use cqm::{build_cqm, CqmConstraint, CqmModel, DEFAULT_EPSILON};
pub use hubo::{build_hubo, HuboModel};
pub use qubo::{default_penalty_weight, quadratize, quadratize_default, AuxDef, QuboModel};
pub use serialize::{read_model, write_model, AnyModel, ModelFile};

use std::collections::BTreeMap;

use crate::binmul::{carry_bound, encode_bits, multiplication_table};
use crate::error::{Error, Result};
use crate::pbpoly::{Assignment, Monomial, Polynomial, VarId};

/// The factorization target: an odd semiprime `N` plus the highest bit index
/// `msb` of its unknown factors (factors have `msb + 1` bits).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationInstance {
    n: u128,
    msb: u32,
    bits: Vec<u8>,
    fix_lsb: bool,
    fix_msb: bool,
}

impl FactorizationInstance {
    /// Builds an instance with the default bit-fixing flags (both on): the
    /// factors are odd and have their top bit set.
    pub fn new(n: u128, msb: u32) -> Result<Self> {
        Self::with_flags(n, msb, true, true)
    }

    pub fn with_flags(n: u128, msb: u32, fix_lsb: bool, fix_msb: bool) -> Result<Self> {
        if msb < 1 {
            return Err(Error::InvalidInstance(format!(
                "factor bit index bound must be at least 1, got {msb} (N={n} has no \
                 multi-column table of this shape)"
            )));
        }
        if msb > 62 {
            return Err(Error::Range {
                value: msb as u128,
                n: msb,
                max: 62,
            });
        }
        if n < 3 {
            return Err(Error::InvalidInstance(format!(
                "target must be at least 3, got {n}"
            )));
        }
        let width = 2 * msb + 2;
        if width < 128 && n >> width != 0 {
            return Err(Error::Range {
                value: n,
                n: msb,
                max: (1u128 << width) - 1,
            });
        }
        if fix_lsb && n % 2 == 0 {
            return Err(Error::InvalidInstance(format!(
                "target {n} is even but fix_lsb requires odd factors"
            )));
        }
        let bits = (0..width).map(|i| ((n >> i) & 1) as u8).collect();
        Ok(FactorizationInstance {
            n,
            msb,
            bits,
            fix_lsb,
            fix_msb,
        })
    }

    /// The target semiprime.
    pub fn target(&self) -> u128 {
        self.n
    }

    /// Highest factor bit index; factors have `msb + 1` bits.
    pub fn msb(&self) -> u32 {
        self.msb
    }

    /// Bit `i` of the target, for `i` up to `2*msb + 1`.
    pub fn bit(&self, i: u32) -> u8 {
        self.bits[i as usize]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn fix_lsb(&self) -> bool {
        self.fix_lsb
    }

    pub fn fix_msb(&self) -> bool {
        self.fix_msb
    }

    /// Number of 1 bits in the target; the negated ground energy of the
    /// high-order model.
    pub fn popcount(&self) -> u32 {
        self.n.count_ones()
    }

    /// The factor bits pinned by the instance flags.
    pub fn fixed_assignments(&self) -> BTreeMap<VarId, u8> {
        let mut fixed = BTreeMap::new();
        if self.fix_lsb {
            fixed.insert(VarId::p(0), 1);
            fixed.insert(VarId::q(0), 1);
        }
        if self.fix_msb {
            fixed.insert(VarId::p(self.msb), 1);
            fixed.insert(VarId::q(self.msb), 1);
        }
        fixed
    }

    /// Value of a factor bit if the flags pin it.
    fn flag_value(&self, v: VarId) -> Option<u8> {
        match v {
            VarId::P { index } | VarId::Q { index } => {
                if (index == 0 && self.fix_lsb) || (index == self.msb && self.fix_msb) {
                    Some(1)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Binary-encoded carry register layout: per column `i` in `1..=2*msb`, the
/// worst-case carry bound `B_i` and the number of bits needed to hold it.
///
/// Column 0 carries nothing (`S_0 <= 1` forces `C_0 = 0`), so it has no
/// variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarryLayout {
    msb: u32,
    bounds: Vec<u64>,
    widths: Vec<u32>,
}

impl CarryLayout {
    pub fn new(msb: u32) -> Self {
        let top = 2 * msb;
        let mut bounds = Vec::with_capacity(top as usize + 1);
        let mut widths = Vec::with_capacity(top as usize + 1);
        for i in 0..=top {
            let b = carry_bound(i, msb).expect("position within range");
            bounds.push(b);
            widths.push(bits_for(b));
        }
        CarryLayout {
            msb,
            bounds,
            widths,
        }
    }

    pub fn msb(&self) -> u32 {
        self.msb
    }

    /// Worst-case carry at column `i`.
    pub fn bound(&self, i: u32) -> u64 {
        self.bounds[i as usize]
    }

    /// Number of binary variables encoding the carry at column `i`.
    pub fn width(&self, i: u32) -> u32 {
        self.widths[i as usize]
    }

    /// All carry variables, in canonical order.
    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..=2 * self.msb).flat_map(move |i| (0..self.width(i)).map(move |m| VarId::carry(i, m)))
    }

    pub fn num_carry_bits(&self) -> usize {
        self.widths.iter().map(|&w| w as usize).sum()
    }

    /// The carry value at column `i` as a polynomial, `sum_m 2^m c_{i,m}`.
    pub fn carry_poly(&self, i: u32) -> Polynomial {
        let mut terms = Vec::new();
        for m in 0..self.width(i) {
            terms.push((Monomial::var(VarId::carry(i, m)), 1i128 << m));
        }
        Polynomial::from_terms(terms).expect("small carry coefficients")
    }
}

/// Bits needed to represent values `0..=bound`.
fn bits_for(bound: u64) -> u32 {
    if bound == 0 {
        0
    } else {
        64 - bound.leading_zeros()
    }
}

/// Per-role count of free binary variables in a built model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct VariableCensus {
    pub p_bits: usize,
    pub q_bits: usize,
    pub carry_bits: usize,
    pub aux_bits: usize,
    pub total: usize,
}

impl VariableCensus {
    pub fn from_registry(registry: &[VarId]) -> Self {
        let mut census = VariableCensus {
            p_bits: 0,
            q_bits: 0,
            carry_bits: 0,
            aux_bits: 0,
            total: registry.len(),
        };
        for v in registry {
            match v {
                VarId::P { .. } => census.p_bits += 1,
                VarId::Q { .. } => census.q_bits += 1,
                VarId::Carry { .. } => census.carry_bits += 1,
                VarId::Aux { .. } => census.aux_bits += 1,
            }
        }
        census
    }
}

impl std::fmt::Display for VariableCensus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "p_bits={} q_bits={} carry_bits={} aux_bits={} total={}",
            self.p_bits, self.q_bits, self.carry_bits, self.aux_bits, self.total
        )
    }
}

/// The free (unfixed) variables of an instance in canonical order: factor
/// bits not pinned by flags, then carry bits per the layout.
pub(crate) fn free_registry(inst: &FactorizationInstance, layout: &CarryLayout) -> Vec<VarId> {
    let fixed = inst.fixed_assignments();
    let mut registry: Vec<VarId> = Vec::new();
    for j in 0..=inst.msb() {
        let v = VarId::p(j);
        if !fixed.contains_key(&v) {
            registry.push(v);
        }
    }
    for j in 0..=inst.msb() {
        let v = VarId::q(j);
        if !fixed.contains_key(&v) {
            registry.push(v);
        }
    }
    registry.extend(layout.vars());
    registry.sort_unstable();
    registry
}

/// A factor bit as either a fixed constant or a variable polynomial.
pub(crate) fn factor_bit_poly(inst: &FactorizationInstance, v: VarId) -> Polynomial {
    match inst.flag_value(v) {
        Some(b) => Polynomial::constant(b as i128),
        None => Polynomial::var(v),
    }
}

/// Column sum `S_i` over free/fixed factor bits as a polynomial.
pub(crate) fn column_sum_poly(inst: &FactorizationInstance, i: u32) -> Result<Polynomial> {
    let n = inst.msb();
    let mut sum = Polynomial::zero();
    let lo = i.saturating_sub(n);
    let hi = i.min(n);
    for j in lo..=hi {
        let k = i - j;
        let term = factor_bit_poly(inst, VarId::p(j)).multiply(&factor_bit_poly(inst, VarId::q(k)))?;
        sum = sum.add(&term)?;
    }
    Ok(sum)
}

/// The column balance expression `S_i + C_{i-1} - 2 C_i` with fixed bits
/// substituted; the known result bit is not subtracted here.
pub(crate) fn column_balance_poly(
    inst: &FactorizationInstance,
    layout: &CarryLayout,
    i: u32,
) -> Result<Polynomial> {
    let mut expr = column_sum_poly(inst, i)?;
    if i >= 1 {
        expr = expr.add(&layout.carry_poly(i - 1))?;
    }
    expr = expr.sub(&layout.carry_poly(i).scale(2)?)?;
    Ok(expr)
}

/// Full expansion of the product `(sum_j p_j 2^j)(sum_k q_k 2^k)` with fixed
/// bits substituted; degree 2.
pub(crate) fn product_poly(inst: &FactorizationInstance) -> Result<Polynomial> {
    let n = inst.msb();
    let mut p_poly = Polynomial::zero();
    let mut q_poly = Polynomial::zero();
    for j in 0..=n {
        p_poly = p_poly.add(&factor_bit_poly(inst, VarId::p(j)).scale(1i128 << j)?)?;
        q_poly = q_poly.add(&factor_bit_poly(inst, VarId::q(j)).scale(1i128 << j)?)?;
    }
    p_poly.multiply(&q_poly)
}

/// Maps known factors to a full assignment over factor and carry variables.
///
/// Carry bits are the binary expansion of the actual column carries from the
/// forward multiplication table.
pub fn encode_solution(p: u128, q: u128, inst: &FactorizationInstance) -> Result<Assignment> {
    let n = inst.msb();
    let pb = encode_bits(p, n)?;
    let qb = encode_bits(q, n)?;
    // Factors must agree with the instance's pinned bits.
    for j in 0..=n {
        for (v, b) in [(VarId::p(j), pb.bit(j as usize)), (VarId::q(j), qb.bit(j as usize))] {
            if let Some(fixed) = inst.flag_value(v) {
                if fixed != b {
                    return Err(Error::Parameter(format!(
                        "factor bit {v} is fixed to {fixed} but the given factors set it to {b}"
                    )));
                }
            }
        }
    }
    let layout = CarryLayout::new(n);
    let table = multiplication_table(p, q, n)?;
    let mut assignment = Assignment::new();
    for j in 0..=n {
        assignment.set(VarId::p(j), pb.bit(j as usize));
        assignment.set(VarId::q(j), qb.bit(j as usize));
    }
    for i in 1..=2 * n {
        let c = table.c[i as usize];
        assert!(
            c <= layout.bound(i),
            "carry {c} at column {i} exceeds layout bound {}",
            layout.bound(i)
        );
        for m in 0..layout.width(i) {
            assignment.set(VarId::carry(i, m), ((c >> m) & 1) as u8);
        }
    }
    Ok(assignment)
}

/// Extends an assignment with auxiliary product values, in definition order.
pub fn extend_with_aux(assignment: &mut Assignment, aux_defs: &[AuxDef]) -> Result<()> {
    for def in aux_defs {
        let a = assignment
            .get(def.pair.0)
            .ok_or_else(|| Error::UnboundVariable(def.pair.0.to_string()))?;
        let b = assignment
            .get(def.pair.1)
            .ok_or_else(|| Error::UnboundVariable(def.pair.1.to_string()))?;
        assignment.set(def.aux, a * b);
    }
    Ok(())
}

/// Reads the factor bits back out of an assignment, applying flag-fixed bits,
/// and returns them in canonical `(min, max)` order.
pub fn decode_factors(assignment: &Assignment, inst: &FactorizationInstance) -> Result<(u128, u128)> {
    let mut p: u128 = 0;
    let mut q: u128 = 0;
    for j in 0..=inst.msb() {
        let pv = VarId::p(j);
        let qv = VarId::q(j);
        let pb = assignment
            .get(pv)
            .or_else(|| inst.flag_value(pv))
            .ok_or_else(|| Error::UnboundVariable(pv.to_string()))?;
        let qb = assignment
            .get(qv)
            .or_else(|| inst.flag_value(qv))
            .ok_or_else(|| Error::UnboundVariable(qv.to_string()))?;
        p |= (pb as u128) << j;
        q |= (qb as u128) << j;
    }
    Ok((p.min(q), p.max(q)))
}

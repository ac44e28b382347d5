//! High-order unconstrained model of the factorization circuit.
//!
//! One squared penalty per output column forces the column balance
//! `S_i + C_{i-1} - 2 C_i` to equal the known result bit, a final penalty
//! ties the top carry to the most significant result bit, and the constant
//! sum of squared result bits is folded in so a valid factorization sits at
//! energy `-popcount(N)`.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::pbpoly::{Polynomial, VarId};

use super::{
    column_balance_poly, free_registry, CarryLayout, FactorizationInstance, VariableCensus,
};

/// Degree-4 polynomial model over factor and carry bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuboModel {
    /// The objective polynomial over free variables only.
    pub objective: Polynomial,
    /// Free variables in canonical order.
    pub registry: Vec<VarId>,
    /// Variables pinned by the instance flags (plus the structurally forced
    /// column-0 carry, which has no variable at all).
    pub fixed: BTreeMap<VarId, u8>,
    /// The constant `-sum r_i^2 = -popcount(N)` folded into the objective.
    pub folded_offset: i128,
    pub layout: CarryLayout,
    pub instance: FactorizationInstance,
}

impl HuboModel {
    pub fn census(&self) -> VariableCensus {
        VariableCensus::from_registry(&self.registry)
    }

    /// Lowest possible objective value, attained exactly at valid
    /// factorizations.
    pub fn ground_energy(&self) -> i128 {
        self.folded_offset
    }
}

/// Builds the high-order model for an instance.
pub fn build_hubo(inst: &FactorizationInstance) -> Result<HuboModel> {
    let n = inst.msb();
    let layout = CarryLayout::new(n);

    let mut objective = Polynomial::zero();
    // Column penalties (S_i + C_{i-1} - 2 C_i - r_i)^2 for i = 0..=2n.
    // Column 0 has no carries at all, so its bracket is p0*q0 - r0.
    for i in 0..=2 * n {
        let bracket = column_balance_poly(inst, &layout, i)?
            .sub(&Polynomial::constant(inst.bit(i) as i128))?;
        objective = objective.add(&bracket.square()?)?;
    }
    // Top carry must equal the most significant result bit.
    let top = layout
        .carry_poly(2 * n)
        .sub(&Polynomial::constant(inst.bit(2 * n + 1) as i128))?;
    objective = objective.add(&top.square()?)?;

    // Fold in the constant -sum r_i^2.
    let folded_offset = -(inst.popcount() as i128);
    objective = objective.add(&Polynomial::constant(folded_offset))?;

    debug_assert!(objective.degree() <= 4, "column penalties square to degree 4");

    let registry = free_registry(inst, &layout);
    let fixed = inst.fixed_assignments();

    Ok(HuboModel {
        objective,
        registry,
        fixed,
        folded_offset,
        layout,
        instance: inst.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{encode_solution, FactorizationInstance};

    #[test]
    fn ground_truth_energy_at_true_factors() {
        let inst = FactorizationInstance::new(899, 4).unwrap();
        let model = build_hubo(&inst).unwrap();
        assert_eq!(model.ground_energy(), -5);
        let a = encode_solution(29, 31, &inst).unwrap();
        assert_eq!(model.objective.evaluate(&a).unwrap(), -5);
    }

    #[test]
    fn degree_at_most_four() {
        for (n, msb) in [(9u128, 1u32), (15, 2), (899, 4), (143, 3)] {
            let inst = FactorizationInstance::with_flags(n, msb, true, false).unwrap();
            let model = build_hubo(&inst).unwrap();
            assert!(model.objective.degree() <= 4);
            model.objective.assert_canonical();
        }
    }

    #[test]
    fn registry_excludes_fixed_bits() {
        let inst = FactorizationInstance::new(899, 4).unwrap();
        let model = build_hubo(&inst).unwrap();
        for v in [VarId::p(0), VarId::q(0), VarId::p(4), VarId::q(4)] {
            assert!(model.fixed.contains_key(&v));
            assert!(!model.registry.contains(&v));
        }
        let census = model.census();
        assert_eq!(census.p_bits, 3);
        assert_eq!(census.q_bits, 3);
        assert_eq!(census.carry_bits, 16);
        assert_eq!(census.aux_bits, 0);
        assert_eq!(census.total, 22);
    }

    #[test]
    fn objective_only_uses_registry_vars() {
        let inst = FactorizationInstance::with_flags(15, 2, true, false).unwrap();
        let model = build_hubo(&inst).unwrap();
        for v in model.objective.variables() {
            assert!(model.registry.contains(&v), "unregistered variable {v}");
        }
    }

    #[test]
    fn energy_is_bounded_below_by_ground() {
        // Every assignment scores at least -popcount(N): the objective is a
        // sum of squares plus that constant.
        let inst = FactorizationInstance::new(9, 1).unwrap();
        let model = build_hubo(&inst).unwrap();
        let v = model.registry.len();
        assert!(v <= 12);
        for mask in 0u32..(1 << v) {
            let a: crate::pbpoly::Assignment = model
                .registry
                .iter()
                .enumerate()
                .map(|(i, &var)| (var, ((mask >> i) & 1) as u8))
                .collect();
            assert!(model.objective.evaluate(&a).unwrap() >= model.ground_energy());
        }
    }
}

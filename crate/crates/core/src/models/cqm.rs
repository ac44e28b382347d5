//! Constrained quadratic model of the factorization circuit.
//!
//! The objective keeps only the column-1 penalty, which is quadratic once
//! the least significant factor bits are pinned to 1. Every other column
//! becomes a banded constraint `k_i - eps <= S_i + C_{i-1} - 2 C_i <= k_i + eps`,
//! the top carry is tied to the most significant result bit, and an optional
//! global constraint bands the full product expansion around the target.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pbpoly::{Assignment, Polynomial, VarId};

use super::{
    column_balance_poly, free_registry, product_poly, CarryLayout, FactorizationInstance,
    VariableCensus,
};

/// Band tolerance that is exact equality for integer-valued expressions
/// while still exercising the relaxation machinery.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// One banded quadratic constraint: `center - epsilon (<|<=) expr (<|<=) center + epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct CqmConstraint {
    pub label: String,
    /// Degree <= 2 expression over free variables.
    pub expr: Polynomial,
    /// The known value the expression is banded around.
    pub center: i128,
    pub epsilon: f64,
    /// Strict inequalities (the global product band) vs non-strict (bitwise).
    pub strict: bool,
}

impl CqmConstraint {
    pub fn lower(&self) -> f64 {
        self.center as f64 - self.epsilon
    }

    pub fn upper(&self) -> f64 {
        self.center as f64 + self.epsilon
    }

    /// Exact feasibility of an integer expression value. The distance to the
    /// band center is an exact integer, so no rounding can flip the verdict
    /// for any tolerance below 1.
    pub fn value_feasible(&self, value: i128) -> bool {
        let dist = value.abs_diff(self.center);
        let dist_f = dist as f64;
        if self.strict {
            dist_f < self.epsilon
        } else {
            dist_f <= self.epsilon
        }
    }

    /// Evaluates the expression and checks the band.
    pub fn feasible(&self, assignment: &Assignment) -> Result<bool> {
        Ok(self.value_feasible(self.expr.evaluate(assignment)?))
    }

    /// Distance from the value to the feasible band, zero inside it.
    pub fn violation(&self, value: i128) -> f64 {
        let dist = value.abs_diff(self.center) as f64;
        (dist - self.epsilon).max(0.0)
    }
}

/// Quadratic objective plus banded quadratic constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct CqmModel {
    /// Degree <= 2 objective; zero at any valid factorization.
    pub objective: Polynomial,
    pub constraints: Vec<CqmConstraint>,
    pub registry: Vec<VarId>,
    pub fixed: BTreeMap<VarId, u8>,
    pub epsilon: f64,
    pub global_on: bool,
    pub layout: CarryLayout,
    pub instance: FactorizationInstance,
}

impl CqmModel {
    pub fn census(&self) -> VariableCensus {
        VariableCensus::from_registry(&self.registry)
    }

    /// Exact integer feasibility of an assignment against every constraint.
    pub fn is_feasible(&self, assignment: &Assignment) -> Result<bool> {
        for c in &self.constraints {
            if !c.feasible(assignment)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds the constrained quadratic model.
///
/// Requires `fix_lsb`: with free least significant bits the column-1 penalty
/// would be quartic and could not serve as a quadratic objective.
pub fn build_cqm(inst: &FactorizationInstance, epsilon: f64, global_on: bool) -> Result<CqmModel> {
    if !(epsilon >= 0.0) {
        return Err(Error::Parameter(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    if !inst.fix_lsb() {
        return Err(Error::InvalidInstance(
            "the quadratic objective requires fix_lsb (odd factors)".into(),
        ));
    }
    if global_on && epsilon == 0.0 {
        return Err(Error::Parameter(
            "the global product band is strict; epsilon must be positive when it is on".into(),
        ));
    }
    let n = inst.msb();
    let layout = CarryLayout::new(n);

    // Objective: (p1 + q1 - 2 C_1 - r_1)^2, quadratic because S_1 is linear
    // once p0 = q0 = 1.
    let objective = column_balance_poly(inst, &layout, 1)?
        .sub(&Polynomial::constant(inst.bit(1) as i128))?
        .square()?;
    debug_assert!(objective.degree() <= 2);

    let mut constraints = Vec::new();
    for i in 2..=2 * n {
        constraints.push(CqmConstraint {
            label: format!("bit_{i}"),
            expr: column_balance_poly(inst, &layout, i)?,
            center: inst.bit(i) as i128,
            epsilon,
            strict: false,
        });
    }
    constraints.push(CqmConstraint {
        label: "top_carry".into(),
        expr: layout.carry_poly(2 * n),
        center: inst.bit(2 * n + 1) as i128,
        epsilon,
        strict: false,
    });
    if global_on {
        constraints.push(CqmConstraint {
            label: "global_product".into(),
            expr: product_poly(inst)?,
            center: i128::try_from(inst.target()).map_err(|_| Error::Overflow)?,
            epsilon,
            strict: true,
        });
    }

    for c in &constraints {
        debug_assert!(c.expr.degree() <= 2, "constraint {} not quadratic", c.label);
    }

    let registry = free_registry(inst, &layout);
    let fixed = inst.fixed_assignments();

    Ok(CqmModel {
        objective,
        constraints,
        registry,
        fixed,
        epsilon,
        global_on,
        layout,
        instance: inst.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::encode_solution;

    #[test]
    fn true_factors_are_feasible_with_zero_objective() {
        let inst = FactorizationInstance::new(899, 4).unwrap();
        let model = build_cqm(&inst, DEFAULT_EPSILON, true).unwrap();
        let a = encode_solution(29, 31, &inst).unwrap();
        assert!(model.is_feasible(&a).unwrap());
        assert_eq!(model.objective.evaluate(&a).unwrap(), 0);
    }

    #[test]
    fn constraint_count_matches_construction_rule() {
        let inst = FactorizationInstance::new(9, 1).unwrap();
        let model = build_cqm(&inst, 0.0, false).unwrap();
        // 2n - 1 bitwise constraints plus the top carry.
        assert_eq!(model.constraints.len(), 2);
        let with_global = build_cqm(&inst, DEFAULT_EPSILON, true).unwrap();
        assert_eq!(with_global.constraints.len(), 3);
    }

    #[test]
    fn feasible_with_global_forces_exact_product() {
        // Any integer product within (N - 0.5, N + 0.5) equals N.
        let inst = FactorizationInstance::new(15, 2).unwrap();
        let model = build_cqm(&inst, DEFAULT_EPSILON, true).unwrap();
        let global = model
            .constraints
            .iter()
            .find(|c| c.label == "global_product")
            .unwrap();
        assert!(global.value_feasible(15));
        assert!(!global.value_feasible(14));
        assert!(!global.value_feasible(16));
    }

    #[test]
    fn strict_band_at_zero_epsilon_rejected() {
        let inst = FactorizationInstance::new(15, 2).unwrap();
        assert!(matches!(
            build_cqm(&inst, 0.0, true),
            Err(Error::Parameter(_))
        ));
        assert!(build_cqm(&inst, 0.0, false).is_ok());
    }

    #[test]
    fn requires_fixed_lsb() {
        let inst = FactorizationInstance::with_flags(15, 2, false, false).unwrap();
        assert!(matches!(
            build_cqm(&inst, DEFAULT_EPSILON, true),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn zero_epsilon_equals_equality() {
        let inst = FactorizationInstance::with_flags(15, 2, true, false).unwrap();
        let model = build_cqm(&inst, 0.0, false).unwrap();
        let a = encode_solution(3, 5, &inst).unwrap();
        assert!(model.is_feasible(&a).unwrap());
        assert_eq!(model.objective.evaluate(&a).unwrap(), 0);
    }

    #[test]
    fn constraints_are_quadratic() {
        let inst = FactorizationInstance::new(899, 4).unwrap();
        let model = build_cqm(&inst, DEFAULT_EPSILON, true).unwrap();
        assert!(model.objective.degree() <= 2);
        for c in &model.constraints {
            assert!(c.expr.degree() <= 2, "{} has degree > 2", c.label);
        }
    }
}

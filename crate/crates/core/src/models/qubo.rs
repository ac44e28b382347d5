//! Degree reduction of the high-order model to a quadratic one.
//!
//! Monomials of degree three or four are rewritten by substituting an
//! auxiliary variable for a product of two existing variables, enforced by
//! the penalty `w * (xz - 2xy - 2zy + 3y)`, which is zero when `y = x*z` and
//! at least `w` otherwise. Pairs are chosen greedily by how many high-degree
//! monomials they appear in.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pbpoly::{Monomial, Polynomial, VarId};

use super::{CarryLayout, FactorizationInstance, HuboModel, VariableCensus};

/// One auxiliary substitution `aux = pair.0 * pair.1` with its penalty weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxDef {
    pub aux: VarId,
    pub pair: (VarId, VarId),
    pub weight: i128,
}

/// Quadratic model: linear and pairwise coefficients plus a constant offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuboModel {
    pub linear: BTreeMap<VarId, i128>,
    /// Keys are ordered pairs with `key.0 < key.1`.
    pub quadratic: BTreeMap<(VarId, VarId), i128>,
    pub offset: i128,
    /// Substitutions in creation order; later pairs may reference earlier
    /// auxiliaries.
    pub aux_defs: Vec<AuxDef>,
    pub registry: Vec<VarId>,
    pub fixed: BTreeMap<VarId, u8>,
    pub layout: CarryLayout,
    pub instance: FactorizationInstance,
}

impl QuboModel {
    /// The model as a polynomial (degree <= 2).
    pub fn to_polynomial(&self) -> Polynomial {
        let mut terms: Vec<(Monomial, i128)> = Vec::new();
        if self.offset != 0 {
            terms.push((Monomial::constant(), self.offset));
        }
        for (&v, &c) in &self.linear {
            terms.push((Monomial::var(v), c));
        }
        for (&(a, b), &c) in &self.quadratic {
            terms.push((Monomial::new([a, b]), c));
        }
        Polynomial::from_terms(terms).expect("maps hold merged coefficients")
    }

    pub fn census(&self) -> VariableCensus {
        VariableCensus::from_registry(&self.registry)
    }

    pub(crate) fn from_polynomial(
        poly: &Polynomial,
        aux_defs: Vec<AuxDef>,
        registry: Vec<VarId>,
        fixed: BTreeMap<VarId, u8>,
        layout: CarryLayout,
        instance: FactorizationInstance,
    ) -> Result<Self> {
        let mut linear = BTreeMap::new();
        let mut quadratic = BTreeMap::new();
        let mut offset = 0i128;
        for (m, &c) in poly.terms() {
            match m.vars() {
                [] => offset = c,
                [v] => {
                    linear.insert(*v, c);
                }
                [a, b] => {
                    quadratic.insert((*a, *b), c);
                }
                _ => {
                    return Err(Error::Parameter(format!(
                        "polynomial has degree {} > 2",
                        m.degree()
                    )))
                }
            }
        }
        Ok(QuboModel {
            linear,
            quadratic,
            offset,
            aux_defs,
            registry,
            fixed,
            layout,
            instance,
        })
    }
}

/// The default penalty weight `1 + sum |coefficients|`: violating one
/// substitution always costs more than the largest attainable gain.
pub fn default_penalty_weight(model: &HuboModel) -> Result<i128> {
    Ok(1 + model.objective.abs_coeff_sum()?)
}

pub fn quadratize_default(model: &HuboModel) -> Result<QuboModel> {
    quadratize(model, default_penalty_weight(model)?)
}

/// Rewrites every monomial of degree >= 3 using auxiliary product variables.
pub fn quadratize(model: &HuboModel, penalty_weight: i128) -> Result<QuboModel> {
    if penalty_weight <= 0 {
        return Err(Error::Parameter(format!(
            "penalty weight must be positive, got {penalty_weight}"
        )));
    }
    let mut poly = model.objective.clone();
    let mut aux_defs: Vec<AuxDef> = Vec::new();
    let mut penalties = Polynomial::zero();
    let mut next_aux = 0u32;

    loop {
        let Some((x, z)) = most_frequent_pair(&poly) else {
            break;
        };
        let aux = VarId::aux(next_aux);
        next_aux += 1;
        poly = substitute_pair(&poly, x, z, aux)?;
        penalties = penalties.add(&substitution_penalty(x, z, aux, penalty_weight)?)?;
        aux_defs.push(AuxDef {
            aux,
            pair: (x, z),
            weight: penalty_weight,
        });
    }

    let reduced = poly.add(&penalties)?;
    debug_assert!(reduced.degree() <= 2);

    let mut registry = model.registry.clone();
    registry.extend(aux_defs.iter().map(|d| d.aux));
    registry.sort_unstable();

    QuboModel::from_polynomial(
        &reduced,
        aux_defs,
        registry,
        model.fixed.clone(),
        model.layout.clone(),
        model.instance.clone(),
    )
}

/// The pair occurring in the most monomials of degree >= 3; ties broken by
/// canonical pair order so reduction is deterministic.
fn most_frequent_pair(poly: &Polynomial) -> Option<(VarId, VarId)> {
    let mut counts: BTreeMap<(VarId, VarId), usize> = BTreeMap::new();
    for (m, _) in poly.terms() {
        if m.degree() < 3 {
            continue;
        }
        let vars = m.vars();
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                *counts.entry((vars[i], vars[j])).or_insert(0) += 1;
            }
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .map(|(pair, _)| pair)
}

/// Replaces `{x, z}` with `aux` inside every monomial of degree >= 3 that
/// contains both.
fn substitute_pair(poly: &Polynomial, x: VarId, z: VarId, aux: VarId) -> Result<Polynomial> {
    let mut terms: Vec<(Monomial, i128)> = Vec::new();
    for (m, &c) in poly.terms() {
        if m.degree() >= 3 && m.contains(x) && m.contains(z) {
            let vars: Vec<VarId> = m
                .vars()
                .iter()
                .copied()
                .filter(|&v| v != x && v != z)
                .chain([aux])
                .collect();
            terms.push((Monomial::new(vars), c));
        } else {
            terms.push((m.clone(), c));
        }
    }
    Polynomial::from_terms(terms)
}

/// The penalty `w * (xz - 2*x*aux - 2*z*aux + 3*aux)`.
fn substitution_penalty(x: VarId, z: VarId, aux: VarId, weight: i128) -> Result<Polynomial> {
    Polynomial::from_terms([
        (Monomial::new([x, z]), weight),
        (Monomial::new([x, aux]), -2 * weight),
        (Monomial::new([z, aux]), -2 * weight),
        (Monomial::var(aux), 3 * weight),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_hubo, FactorizationInstance};
    use crate::pbpoly::Assignment;

    fn enumerate_min(poly: &Polynomial, registry: &[VarId]) -> (i128, Vec<Vec<u8>>) {
        let v = registry.len();
        assert!(v <= 20, "test enumeration too large");
        let mut best = i128::MAX;
        let mut argmins = Vec::new();
        for mask in 0u32..(1u32 << v) {
            let bits: Vec<u8> = (0..v).map(|i| ((mask >> i) & 1) as u8).collect();
            let a: Assignment = registry
                .iter()
                .zip(&bits)
                .map(|(&var, &b)| (var, b))
                .collect();
            let val = poly.evaluate(&a).unwrap();
            if val < best {
                best = val;
                argmins = vec![bits];
            } else if val == best {
                argmins.push(bits);
            }
        }
        (best, argmins)
    }

    #[test]
    fn degree_two_input_is_identity() {
        // msb=1 with everything fixed leaves only carry bits; the objective
        // is already quadratic.
        let inst = FactorizationInstance::new(9, 1).unwrap();
        let hubo = build_hubo(&inst).unwrap();
        assert!(hubo.objective.degree() <= 2);
        let qubo = quadratize_default(&hubo).unwrap();
        assert!(qubo.aux_defs.is_empty());
        assert_eq!(qubo.to_polynomial(), hubo.objective);
        assert_eq!(qubo.registry, hubo.registry);
    }

    #[test]
    fn single_cubic_term_preserved() {
        // xyz reduced with one auxiliary: minimum and factor-projection of
        // the argmin set survive.
        let x = VarId::p(1);
        let y = VarId::q(1);
        let z = VarId::carry(1, 0);
        let cubic = Polynomial::from_terms([(Monomial::new([x, y, z]), 1)]).unwrap();
        let inst = FactorizationInstance::new(9, 1).unwrap();
        let hubo = HuboModel {
            objective: cubic.clone(),
            registry: vec![x, y, z],
            fixed: BTreeMap::new(),
            folded_offset: 0,
            layout: CarryLayout::new(1),
            instance: inst,
        };
        let qubo = quadratize(&hubo, 1 + cubic.abs_coeff_sum().unwrap()).unwrap();
        assert_eq!(qubo.aux_defs.len(), 1);

        let (hubo_min, hubo_args) = enumerate_min(&cubic, &hubo.registry);
        let (qubo_min, qubo_args) = enumerate_min(&qubo.to_polynomial(), &qubo.registry);
        assert_eq!(hubo_min, qubo_min);

        // Project QUBO argmins onto the original variables.
        let orig_pos: Vec<usize> = hubo
            .registry
            .iter()
            .map(|v| qubo.registry.iter().position(|w| w == v).unwrap())
            .collect();
        let mut projected: Vec<Vec<u8>> = qubo_args
            .iter()
            .map(|bits| orig_pos.iter().map(|&i| bits[i]).collect())
            .collect();
        projected.sort_unstable();
        projected.dedup();
        let mut expect = hubo_args;
        expect.sort_unstable();
        assert_eq!(projected, expect);
    }

    #[test]
    fn penalty_gadget_values() {
        // Zero when aux = x*z, at least the weight otherwise.
        let x = VarId::p(1);
        let z = VarId::q(1);
        let aux = VarId::aux(0);
        let pen = substitution_penalty(x, z, aux, 7).unwrap();
        for xb in 0..=1u8 {
            for zb in 0..=1u8 {
                for ab in 0..=1u8 {
                    let a: Assignment =
                        [(x, xb), (z, zb), (aux, ab)].into_iter().collect();
                    let val = pen.evaluate(&a).unwrap();
                    if ab == xb * zb {
                        assert_eq!(val, 0);
                    } else {
                        assert!(val >= 7);
                    }
                }
            }
        }
    }

    #[test]
    fn consistent_assignments_preserve_value() {
        let inst = FactorizationInstance::with_flags(15, 2, true, false).unwrap();
        let hubo = build_hubo(&inst).unwrap();
        let qubo = quadratize_default(&hubo).unwrap();
        let qubo_poly = qubo.to_polynomial();

        let mut a = crate::models::encode_solution(3, 5, &inst).unwrap();
        crate::models::extend_with_aux(&mut a, &qubo.aux_defs).unwrap();
        assert_eq!(
            hubo.objective.evaluate(&a).unwrap(),
            qubo_poly.evaluate(&a).unwrap()
        );
        assert_eq!(qubo_poly.evaluate(&a).unwrap(), -4);
    }

    #[test]
    fn rejects_non_positive_weight() {
        let inst = FactorizationInstance::new(9, 1).unwrap();
        let hubo = build_hubo(&inst).unwrap();
        assert!(matches!(quadratize(&hubo, 0), Err(Error::Parameter(_))));
    }
}

//! Multilinear pseudo-Boolean polynomial algebra over named binary variables.
//!
//! Monomials are sets of distinct variables (x^2 = x is applied at
//! construction), coefficients are exact i128 integers, and zero coefficients
//! are never stored, so structurally equal polynomials compare equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named binary variable.
///
/// The derived ordering (role first, then indices) is the canonical variable
/// order used for monomial form, registry order and solver tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "lowercase")]
pub enum VarId {
    /// Bit `j` of the factor `p`.
    P { index: u32 },
    /// Bit `j` of the factor `q`.
    Q { index: u32 },
    /// Bit `m` of the binary expansion of the carry at column `pos`.
    Carry { pos: u32, bit: u32 },
    /// Auxiliary product variable introduced by quadratization.
    Aux { index: u32 },
}

impl VarId {
    pub fn p(index: u32) -> Self {
        VarId::P { index }
    }
    pub fn q(index: u32) -> Self {
        VarId::Q { index }
    }
    pub fn carry(pos: u32, bit: u32) -> Self {
        VarId::Carry { pos, bit }
    }
    pub fn aux(index: u32) -> Self {
        VarId::Aux { index }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::P { index } => write!(f, "p{}", index),
            VarId::Q { index } => write!(f, "q{}", index),
            VarId::Carry { pos, bit } => write!(f, "c{}_{}", pos, bit),
            VarId::Aux { index } => write!(f, "a{}", index),
        }
    }
}

/// Canonically sorted set of distinct variables. The empty monomial is the
/// constant term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial(Vec<VarId>);

impl Monomial {
    /// Builds a monomial from arbitrary variables, sorting and deduplicating.
    pub fn new(vars: impl IntoIterator<Item = VarId>) -> Self {
        let mut v: Vec<VarId> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Monomial(v)
    }

    pub fn constant() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![v])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Union of two variable sets (the product of the monomials).
    fn union(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Removes `v` if present; returns whether it was present.
    fn without(&self, v: VarId) -> (Monomial, bool) {
        match self.0.binary_search(&v) {
            Ok(idx) => {
                let mut out = self.0.clone();
                out.remove(idx);
                (Monomial(out), true)
            }
            Err(_) => (self.clone(), false),
        }
    }
}

/// Assignment of binary values to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<VarId, u8>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn set(&mut self, v: VarId, value: u8) {
        debug_assert!(value <= 1);
        self.0.insert(v, value);
    }

    pub fn get(&self, v: VarId) -> Option<u8> {
        self.0.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &u8)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(VarId, u8)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (VarId, u8)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Multilinear pseudo-Boolean polynomial with exact integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, i128>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: i128) -> Self {
        let mut p = Polynomial::zero();
        if c != 0 {
            p.terms.insert(Monomial::constant(), c);
        }
        p
    }

    pub fn var(v: VarId) -> Self {
        let mut p = Polynomial::zero();
        p.terms.insert(Monomial::var(v), 1);
        p
    }

    /// Builds a polynomial from (monomial, coefficient) pairs, merging
    /// duplicates and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, i128)>) -> Result<Self> {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c)?;
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: i128) -> Result<()> {
        if c == 0 {
            return Ok(());
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = e.get().checked_add(c).ok_or(Error::Overflow)?;
                if merged == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = merged;
                }
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &i128)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max monomial size; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Coefficient of the empty monomial.
    pub fn constant_term(&self) -> i128 {
        self.terms.get(&Monomial::constant()).copied().unwrap_or(0)
    }

    /// All distinct variables appearing in the polynomial.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms
            .keys()
            .flat_map(|m| m.vars().iter().copied())
            .collect()
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        let mut out = self.clone();
        for (m, &c) in other.terms.iter() {
            out.add_term(m.clone(), c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        let mut out = self.clone();
        for (m, &c) in other.terms.iter() {
            out.add_term(m.clone(), c.checked_neg().ok_or(Error::Overflow)?)?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: i128) -> Result<Polynomial> {
        let mut out = Polynomial::zero();
        for (m, &c) in self.terms.iter() {
            out.add_term(m.clone(), c.checked_mul(k).ok_or(Error::Overflow)?)?;
        }
        Ok(out)
    }

    /// Distributive product with idempotent monomial merge (x * x = x).
    pub fn multiply(&self, other: &Polynomial) -> Result<Polynomial> {
        let mut out = Polynomial::zero();
        for (ma, &ca) in self.terms.iter() {
            for (mb, &cb) in other.terms.iter() {
                let coeff = ca.checked_mul(cb).ok_or(Error::Overflow)?;
                out.add_term(ma.union(mb), coeff)?;
            }
        }
        Ok(out)
    }

    pub fn square(&self) -> Result<Polynomial> {
        self.multiply(self)
    }

    /// Exact integer value under `assignment`, which must cover every
    /// variable in the polynomial.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<i128> {
        let mut total: i128 = 0;
        for (m, &c) in self.terms.iter() {
            let mut on = true;
            for &v in m.vars() {
                match assignment.get(v) {
                    Some(1) => {}
                    Some(_) => {
                        on = false;
                        break;
                    }
                    None => return Err(Error::UnboundVariable(v.to_string())),
                }
            }
            if on {
                total = total.checked_add(c).ok_or(Error::Overflow)?;
            }
        }
        Ok(total)
    }

    /// Eliminates `v` by substituting a constant 0/1 value.
    pub fn fix_variable(&self, v: VarId, value: u8) -> Polynomial {
        debug_assert!(value <= 1);
        let mut out = Polynomial::zero();
        for (m, &c) in self.terms.iter() {
            let (reduced, had) = m.without(v);
            if had && value == 0 {
                continue;
            }
            // add_term only fails on i128 overflow, which substitution of a
            // 0/1 value cannot introduce beyond what the input already held.
            out.add_term(reduced, c).expect("fix_variable cannot overflow");
        }
        out
    }

    /// Sum of absolute coefficient values.
    pub fn abs_coeff_sum(&self) -> Result<i128> {
        let mut total: i128 = 0;
        for &c in self.terms.values() {
            total = total
                .checked_add(c.checked_abs().ok_or(Error::Overflow)?)
                .ok_or(Error::Overflow)?;
        }
        Ok(total)
    }

    /// Largest absolute coefficient value.
    pub fn max_abs_coeff(&self) -> i128 {
        self.terms
            .values()
            .map(|c| c.unsigned_abs())
            .max()
            .map(|u| u as i128)
            .unwrap_or(0)
    }

    /// Structural well-formedness check: multilinear monomials, no zero
    /// coefficients.
    pub fn assert_canonical(&self) {
        for (m, &c) in self.terms.iter() {
            assert_ne!(c, 0, "zero coefficient stored");
            let mut seen = BTreeSet::new();
            for &v in m.vars() {
                assert!(seen.insert(v), "repeated variable {v} in monomial");
            }
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter() {
            if first {
                write!(f, "{}", c)?;
                first = false;
            } else if *c >= 0 {
                write!(f, " + {}", c)?;
            } else {
                write!(f, " - {}", -c)?;
            }
            for v in m.vars() {
                write!(f, "*{}", v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x() -> VarId {
        VarId::p(0)
    }
    fn y() -> VarId {
        VarId::q(0)
    }

    #[test]
    fn add_cancellation() {
        let a = Polynomial::var(x());
        let b = a.scale(-1).unwrap();
        let sum = a.add(&b).unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn add_merges_terms() {
        let a = Polynomial::var(x()).add(&Polynomial::constant(1)).unwrap();
        let b = Polynomial::var(x());
        let sum = a.add(&b).unwrap();
        assert_eq!(sum, Polynomial::from_terms([
            (Monomial::var(x()), 2),
            (Monomial::constant(), 1),
        ]).unwrap());
    }

    #[test]
    fn multiply_idempotent() {
        let a = Polynomial::var(x());
        assert_eq!(a.multiply(&a).unwrap(), a);
    }

    #[test]
    fn square_of_binomial() {
        // (p1 + q1)^2 = p1 + q1 + 2 p1 q1 under x^2 = x.
        let p1 = VarId::p(1);
        let q1 = VarId::q(1);
        let s = Polynomial::var(p1).add(&Polynomial::var(q1)).unwrap();
        let sq = s.square().unwrap();
        let expect = Polynomial::from_terms([
            (Monomial::var(p1), 1),
            (Monomial::var(q1), 1),
            (Monomial::new([p1, q1]), 2),
        ])
        .unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn evaluate_examples() {
        let seven = Polynomial::constant(7);
        assert_eq!(seven.evaluate(&Assignment::new()).unwrap(), 7);

        // x + 2xy at x=1, y=1 -> 3
        let p = Polynomial::from_terms([
            (Monomial::var(x()), 1),
            (Monomial::new([x(), y()]), 2),
        ])
        .unwrap();
        let a: Assignment = [(x(), 1), (y(), 1)].into_iter().collect();
        assert_eq!(p.evaluate(&a).unwrap(), 3);
    }

    #[test]
    fn evaluate_unbound() {
        let p = Polynomial::var(x());
        assert!(matches!(
            p.evaluate(&Assignment::new()),
            Err(Error::UnboundVariable(_))
        ));
    }

    #[test]
    fn fix_variable_examples() {
        // xy + x
        let p = Polynomial::from_terms([
            (Monomial::new([x(), y()]), 1),
            (Monomial::var(x()), 1),
        ])
        .unwrap();
        let fixed1 = p.fix_variable(x(), 1);
        let expect = Polynomial::var(y()).add(&Polynomial::constant(1)).unwrap();
        assert_eq!(fixed1, expect);
        let fixed0 = p.fix_variable(x(), 0);
        assert!(fixed0.is_zero());
    }

    fn random_poly(rng: &mut ChaCha8Rng, pool: &[VarId]) -> Polynomial {
        let nterms = rng.gen_range(0..8);
        let mut p = Polynomial::zero();
        for _ in 0..nterms {
            let deg = rng.gen_range(0..=3usize);
            let vars: Vec<VarId> = (0..deg).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
            let coeff = rng.gen_range(-20i128..=20);
            p = p
                .add(&Polynomial::from_terms([(Monomial::new(vars), coeff)]).unwrap())
                .unwrap();
        }
        p
    }

    fn random_assignment(rng: &mut ChaCha8Rng, pool: &[VarId]) -> Assignment {
        pool.iter().map(|&v| (v, rng.gen_range(0..=1u8))).collect()
    }

    fn var_pool() -> Vec<VarId> {
        vec![
            VarId::p(0),
            VarId::p(1),
            VarId::q(0),
            VarId::q(1),
            VarId::carry(1, 0),
            VarId::carry(2, 1),
            VarId::aux(0),
        ]
    }

    #[test]
    fn ring_laws_via_evaluation() {
        let pool = var_pool();
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
        for _ in 0..200 {
            let a = random_poly(&mut rng, &pool);
            let b = random_poly(&mut rng, &pool);
            let c = random_poly(&mut rng, &pool);
            let asn = random_assignment(&mut rng, &pool);

            let va = a.evaluate(&asn).unwrap();
            let vb = b.evaluate(&asn).unwrap();
            let vc = c.evaluate(&asn).unwrap();

            // Addition and multiplication are evaluation homomorphisms.
            assert_eq!(a.add(&b).unwrap().evaluate(&asn).unwrap(), va + vb);
            assert_eq!(a.multiply(&b).unwrap().evaluate(&asn).unwrap(), va * vb);

            // Associativity and distributivity.
            let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            assert_eq!(ab_c, a_bc);
            let dist1 = a.multiply(&b.add(&c).unwrap()).unwrap();
            let dist2 = a.multiply(&b).unwrap().add(&a.multiply(&c).unwrap()).unwrap();
            assert_eq!(dist1, dist2);

            ab_c.assert_canonical();
            dist1.assert_canonical();
        }
    }

    #[test]
    fn fix_variable_consistency() {
        let pool = var_pool();
        let mut rng = ChaCha8Rng::seed_from_u64(0xF1A9);
        for _ in 0..100 {
            let p = random_poly(&mut rng, &pool);
            let v = pool[rng.gen_range(0..pool.len())];
            for value in 0..=1u8 {
                let fixed = p.fix_variable(v, value);
                let mut asn = random_assignment(&mut rng, &pool);
                asn.set(v, value);
                assert_eq!(p.evaluate(&asn).unwrap(), fixed.evaluate(&asn).unwrap());
                fixed.assert_canonical();
                assert!(!fixed.variables().contains(&v));
            }
        }
    }

    #[test]
    fn canonical_form_independent_of_construction_order() {
        let t1 = Polynomial::from_terms([
            (Monomial::new([x(), y()]), 3),
            (Monomial::var(x()), 1),
            (Monomial::constant(), -2),
        ])
        .unwrap();
        let t2 = Polynomial::from_terms([
            (Monomial::constant(), -2),
            (Monomial::new([y(), x()]), 3),
            (Monomial::var(x()), 1),
        ])
        .unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn overflow_detected() {
        let big = Polynomial::constant(i128::MAX);
        assert!(matches!(big.add(&Polynomial::constant(1)), Err(Error::Overflow)));
        assert!(matches!(big.multiply(&Polynomial::constant(2)), Err(Error::Overflow)));
    }
}

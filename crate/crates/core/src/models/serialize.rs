//! JSON model files.
//!
//! Schema: `{kind, instance: {N, n, fix_lsb, fix_msb}, registry, fixed,
//! objective, constraints?, aux_defs?}`. Coefficients, band centers and the
//! target are decimal strings so 128-bit values survive any JSON reader.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pbpoly::{Monomial, Polynomial, VarId};

use super::{
    AuxDef, CarryLayout, CqmConstraint, CqmModel, FactorizationInstance, HuboModel, QuboModel,
};

/// Any of the three model kinds, as read back from a model file.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Hubo(HuboModel),
    Qubo(QuboModel),
    Cqm(CqmModel),
}

impl AnyModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Hubo(_) => "hubo",
            AnyModel::Qubo(_) => "qubo",
            AnyModel::Cqm(_) => "cqm",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub kind: String,
    pub instance: InstanceJson,
    pub registry: Vec<VarId>,
    pub fixed: Vec<FixedJson>,
    pub objective: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<ConstraintJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_defs: Option<Vec<AuxDefJson>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    #[serde(rename = "N")]
    pub target: String,
    pub n: u32,
    pub fix_lsb: bool,
    pub fix_msb: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FixedJson {
    pub var: VarId,
    pub value: u8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub vars: Vec<VarId>,
    pub coeff: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub label: String,
    pub expr: Vec<TermJson>,
    pub center: String,
    pub epsilon: f64,
    pub strict: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AuxDefJson {
    pub aux: VarId,
    pub pair: (VarId, VarId),
    pub weight: String,
}

fn poly_to_terms(poly: &Polynomial) -> Vec<TermJson> {
    poly.terms()
        .map(|(m, c)| TermJson {
            vars: m.vars().to_vec(),
            coeff: c.to_string(),
        })
        .collect()
}

fn parse_i128(s: &str, what: &str) -> Result<i128> {
    s.parse()
        .map_err(|_| Error::Parameter(format!("{what} is not a decimal integer: {s:?}")))
}

fn terms_to_poly(terms: &[TermJson]) -> Result<Polynomial> {
    Polynomial::from_terms(
        terms
            .iter()
            .map(|t| Ok((Monomial::new(t.vars.iter().copied()), parse_i128(&t.coeff, "coefficient")?)))
            .collect::<Result<Vec<_>>>()?,
    )
}

fn instance_json(inst: &FactorizationInstance) -> InstanceJson {
    InstanceJson {
        target: inst.target().to_string(),
        n: inst.msb(),
        fix_lsb: inst.fix_lsb(),
        fix_msb: inst.fix_msb(),
    }
}

fn instance_from_json(j: &InstanceJson) -> Result<FactorizationInstance> {
    let target: u128 = j
        .target
        .parse()
        .map_err(|_| Error::Parameter(format!("N is not a decimal integer: {:?}", j.target)))?;
    FactorizationInstance::with_flags(target, j.n, j.fix_lsb, j.fix_msb)
}

fn fixed_json(fixed: &BTreeMap<VarId, u8>) -> Vec<FixedJson> {
    fixed
        .iter()
        .map(|(&var, &value)| FixedJson { var, value })
        .collect()
}

fn fixed_from_json(fixed: &[FixedJson]) -> BTreeMap<VarId, u8> {
    fixed.iter().map(|f| (f.var, f.value)).collect()
}

impl From<&HuboModel> for ModelFile {
    fn from(m: &HuboModel) -> Self {
        ModelFile {
            kind: "hubo".into(),
            instance: instance_json(&m.instance),
            registry: m.registry.clone(),
            fixed: fixed_json(&m.fixed),
            objective: poly_to_terms(&m.objective),
            constraints: None,
            aux_defs: None,
        }
    }
}

impl From<&QuboModel> for ModelFile {
    fn from(m: &QuboModel) -> Self {
        ModelFile {
            kind: "qubo".into(),
            instance: instance_json(&m.instance),
            registry: m.registry.clone(),
            fixed: fixed_json(&m.fixed),
            objective: poly_to_terms(&m.to_polynomial()),
            constraints: None,
            aux_defs: Some(
                m.aux_defs
                    .iter()
                    .map(|d| AuxDefJson {
                        aux: d.aux,
                        pair: d.pair,
                        weight: d.weight.to_string(),
                    })
                    .collect(),
            ),
        }
    }
}

impl From<&CqmModel> for ModelFile {
    fn from(m: &CqmModel) -> Self {
        ModelFile {
            kind: "cqm".into(),
            instance: instance_json(&m.instance),
            registry: m.registry.clone(),
            fixed: fixed_json(&m.fixed),
            objective: poly_to_terms(&m.objective),
            constraints: Some(
                m.constraints
                    .iter()
                    .map(|c| ConstraintJson {
                        label: c.label.clone(),
                        expr: poly_to_terms(&c.expr),
                        center: c.center.to_string(),
                        epsilon: c.epsilon,
                        strict: c.strict,
                    })
                    .collect(),
            ),
            aux_defs: None,
        }
    }
}

impl TryFrom<&ModelFile> for AnyModel {
    type Error = Error;

    fn try_from(f: &ModelFile) -> Result<AnyModel> {
        let instance = instance_from_json(&f.instance)?;
        let layout = CarryLayout::new(instance.msb());
        let registry = f.registry.clone();
        let fixed = fixed_from_json(&f.fixed);
        let objective = terms_to_poly(&f.objective)?;
        for v in objective.variables() {
            if !registry.contains(&v) {
                return Err(Error::Parameter(format!(
                    "objective uses unregistered variable {v}"
                )));
            }
        }
        match f.kind.as_str() {
            "hubo" => {
                let folded_offset = -(instance.popcount() as i128);
                Ok(AnyModel::Hubo(HuboModel {
                    objective,
                    registry,
                    fixed,
                    folded_offset,
                    layout,
                    instance,
                }))
            }
            "qubo" => {
                let aux_defs = f
                    .aux_defs
                    .as_deref()
                    .unwrap_or_default()
                    .iter()
                    .map(|d| {
                        Ok(AuxDef {
                            aux: d.aux,
                            pair: d.pair,
                            weight: parse_i128(&d.weight, "penalty weight")?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyModel::Qubo(QuboModel::from_polynomial(
                    &objective, aux_defs, registry, fixed, layout, instance,
                )?))
            }
            "cqm" => {
                let constraints_json = f.constraints.as_deref().ok_or_else(|| {
                    Error::Parameter("cqm model file is missing constraints".into())
                })?;
                let mut constraints = Vec::with_capacity(constraints_json.len());
                let mut epsilon = 0.0f64;
                let mut global_on = false;
                for c in constraints_json {
                    epsilon = c.epsilon;
                    if c.label == "global_product" {
                        global_on = true;
                    }
                    constraints.push(CqmConstraint {
                        label: c.label.clone(),
                        expr: terms_to_poly(&c.expr)?,
                        center: parse_i128(&c.center, "constraint center")?,
                        epsilon: c.epsilon,
                        strict: c.strict,
                    });
                }
                Ok(AnyModel::Cqm(CqmModel {
                    objective,
                    constraints,
                    registry,
                    fixed,
                    epsilon,
                    global_on,
                    layout,
                    instance,
                }))
            }
            other => Err(Error::Parameter(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Writes a model file as pretty JSON.
pub fn write_model(file: &ModelFile, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(file)?;
    fs::write(path, json + "\n")?;
    Ok(())
}

/// Reads a model file back into a typed model.
pub fn read_model(path: &Path) -> Result<AnyModel> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    AnyModel::try_from(&file)
}

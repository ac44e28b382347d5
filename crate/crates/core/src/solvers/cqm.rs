//! Penalty-method solver for constrained quadratic models.
//!
//! Presolve propagates variables that the bands force outright, then a
//! Metropolis anneal minimizes `objective + penalty_scale * sum w_c *
//! violation_c^2`, with each constraint normalized by its largest
//! coefficient magnitude so the global product band cannot drown out the
//! bitwise ones. Feasibility of the returned state is re-checked with exact
//! integer arithmetic against the original constraints.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{CqmConstraint, CqmModel};
use crate::pbpoly::{Assignment, Polynomial, VarId};

use super::compiled::{CompiledPoly, PolyCursor};
use super::{finish_result, AnnealParams, SolveResult, SolveStats};

struct Presolved {
    objective: Polynomial,
    constraints: Vec<CqmConstraint>,
    registry: Vec<VarId>,
    forced: BTreeMap<VarId, u8>,
}

/// Fixes every variable whose band admits a single value, propagating until
/// nothing more moves. Constant constraints outside their band are a
/// contradiction.
fn presolve(model: &CqmModel) -> Result<Presolved> {
    let mut objective = model.objective.clone();
    let mut constraints = model.constraints.clone();
    let mut registry: Vec<VarId> = model.registry.clone();
    let mut forced: BTreeMap<VarId, u8> = BTreeMap::new();

    loop {
        let mut fixes: BTreeMap<VarId, u8> = BTreeMap::new();
        for c in &constraints {
            let vars = c.expr.variables();
            match vars.len() {
                0 => {
                    let value = c.expr.constant_term();
                    if !c.value_feasible(value) {
                        return Err(Error::Infeasible(format!(
                            "constraint {} reduces to constant {} outside its band",
                            c.label, value
                        )));
                    }
                }
                1 => {
                    let v = *vars.iter().next().expect("one variable");
                    let base = c.expr.fix_variable(v, 0).constant_term();
                    let with = c.expr.fix_variable(v, 1).constant_term();
                    match (c.value_feasible(base), c.value_feasible(with)) {
                        (false, false) => {
                            return Err(Error::Infeasible(format!(
                                "constraint {} admits no value of {v}",
                                c.label
                            )));
                        }
                        (true, false) => fix_var(&mut fixes, c, v, 0)?,
                        (false, true) => fix_var(&mut fixes, c, v, 1)?,
                        (true, true) => {}
                    }
                }
                _ => {}
            }
        }
        fixes.retain(|v, _| !forced.contains_key(v));
        if fixes.is_empty() {
            break;
        }
        for (&v, &value) in &fixes {
            objective = objective.fix_variable(v, value);
            for c in &mut constraints {
                c.expr = c.expr.fix_variable(v, value);
            }
            registry.retain(|&r| r != v);
            forced.insert(v, value);
        }
    }

    // Constant constraints were verified above; the anneal only needs the
    // live ones.
    constraints.retain(|c| !c.expr.variables().is_empty());

    Ok(Presolved {
        objective,
        constraints,
        registry,
        forced,
    })
}

/// Records a forced value, refusing if another constraint already forced the
/// opposite one this round.
fn fix_var(
    fixes: &mut BTreeMap<VarId, u8>,
    c: &CqmConstraint,
    v: VarId,
    value: u8,
) -> Result<()> {
    if let Some(&prev) = fixes.get(&v) {
        if prev != value {
            return Err(Error::Infeasible(format!(
                "constraint {} forces {v}={value} but another constraint forces {prev}",
                c.label
            )));
        }
    }
    fixes.insert(v, value);
    Ok(())
}

struct CompiledCqm<'a> {
    objective: CompiledPoly,
    constraints: Vec<(&'a CqmConstraint, CompiledPoly, f64)>,
    /// Per variable, ids of constraints whose expression mentions it.
    var_constraints: Vec<Vec<u32>>,
    num_vars: usize,
}

fn compile_cqm<'a>(pre: &'a Presolved, penalty_scale: f64) -> Result<CompiledCqm<'a>> {
    let objective = CompiledPoly::compile(&pre.objective, &pre.registry)?;
    let mut constraints = Vec::with_capacity(pre.constraints.len());
    let mut var_constraints = vec![Vec::new(); pre.registry.len()];
    for (id, c) in pre.constraints.iter().enumerate() {
        let cp = CompiledPoly::compile(&c.expr, &pre.registry)?;
        let norm = penalty_scale / (c.expr.max_abs_coeff().max(1) as f64);
        let vars = c.expr.variables();
        for (vi, var) in pre.registry.iter().enumerate() {
            if vars.contains(var) {
                var_constraints[vi].push(id as u32);
            }
        }
        constraints.push((c, cp, norm));
    }
    Ok(CompiledCqm {
        objective,
        constraints,
        var_constraints,
        num_vars: pre.registry.len(),
    })
}

struct RestartState {
    bits: Vec<u8>,
    obj: PolyCursor,
    cons: Vec<PolyCursor>,
    penalty: f64,
    violated: usize,
}

impl RestartState {
    fn new(cc: &CompiledCqm<'_>, bits: Vec<u8>) -> Self {
        let obj = cc.objective.cursor(&bits);
        let mut penalty = 0.0;
        let mut violated = 0;
        let cons: Vec<PolyCursor> = cc
            .constraints
            .iter()
            .map(|(c, cp, w)| {
                let cur = cp.cursor(&bits);
                let viol = c.violation(cur.value());
                penalty += w * viol * viol;
                if viol > 0.0 {
                    violated += 1;
                }
                cur
            })
            .collect();
        RestartState {
            bits,
            obj,
            cons,
            penalty,
            violated,
        }
    }

    fn total_energy(&self) -> f64 {
        self.obj.value() as f64 + self.penalty
    }

    fn propose(&self, cc: &CompiledCqm<'_>, var: usize) -> f64 {
        let to_one = self.bits[var] == 0;
        let mut delta = self.obj.flip_delta(&cc.objective, var, to_one) as f64;
        for &id in &cc.var_constraints[var] {
            let (c, cp, w) = &cc.constraints[id as usize];
            let cur = &self.cons[id as usize];
            let old_val = cur.value();
            let new_val = old_val + cur.flip_delta(cp, var, to_one);
            let old_viol = c.violation(old_val);
            let new_viol = c.violation(new_val);
            delta += w * (new_viol * new_viol - old_viol * old_viol);
        }
        delta
    }

    fn apply(&mut self, cc: &CompiledCqm<'_>, var: usize) {
        let to_one = self.bits[var] == 0;
        self.obj.apply_flip(&cc.objective, var, to_one);
        for &id in &cc.var_constraints[var] {
            let (c, cp, w) = &cc.constraints[id as usize];
            let cur = &mut self.cons[id as usize];
            let old_viol = c.violation(cur.value());
            cur.apply_flip(cp, var, to_one);
            let new_viol = c.violation(cur.value());
            self.penalty += w * (new_viol * new_viol - old_viol * old_viol);
            match (old_viol > 0.0, new_viol > 0.0) {
                (false, true) => self.violated += 1,
                (true, false) => self.violated -= 1,
                _ => {}
            }
        }
        self.bits[var] ^= 1;
    }
}

struct CqmRestartOutcome {
    feasible_best: Option<(i128, Vec<u8>)>,
    penalized_best: (f64, Vec<u8>),
    sweeps_done: u64,
}

fn cqm_restart(
    cc: &CompiledCqm<'_>,
    params: &AnnealParams,
    restart: u32,
    warm: Option<&[u8]>,
) -> CqmRestartOutcome {
    let v = cc.num_vars;
    let mut rng = ChaCha8Rng::seed_from_u64(params.restart_seed(restart));
    let bits: Vec<u8> = match warm {
        Some(w) if restart == 0 => w.to_vec(),
        _ => (0..v).map(|_| rng.gen_range(0..=1u8)).collect(),
    };
    let mut state = RestartState::new(cc, bits);
    let mut feasible_best: Option<(i128, Vec<u8>)> = None;
    let mut penalized_best = (state.total_energy(), state.bits.clone());
    let note_state = |state: &RestartState,
                      feasible_best: &mut Option<(i128, Vec<u8>)>,
                      penalized_best: &mut (f64, Vec<u8>)| {
        let e = state.total_energy();
        if e < penalized_best.0 {
            *penalized_best = (e, state.bits.clone());
        }
        if state.violated == 0 {
            let obj = state.obj.value();
            match feasible_best {
                Some((best_obj, _)) if *best_obj <= obj => {}
                _ => *feasible_best = Some((obj, state.bits.clone())),
            }
        }
    };
    note_state(&state, &mut feasible_best, &mut penalized_best);

    for sweep in 0..params.sweeps {
        let beta = params.beta.beta_at(sweep, params.sweeps);
        for var in 0..v {
            let delta = state.propose(cc, var);
            let accept = delta <= 0.0 || {
                let u: f64 = rng.gen();
                u < (-delta * beta).exp()
            };
            if accept {
                state.apply(cc, var);
                note_state(&state, &mut feasible_best, &mut penalized_best);
            }
        }
    }

    CqmRestartOutcome {
        feasible_best,
        penalized_best,
        sweeps_done: params.sweeps,
    }
}

/// Solves a constrained quadratic model by annealing its penalized form.
///
/// `warm_start` seeds restart 0; the other restarts draw random initial
/// states. A result is flagged feasible only if the returned assignment
/// passes exact integer checks of every original constraint.
pub fn cqm_solve(
    model: &CqmModel,
    params: &AnnealParams,
    penalty_scale: f64,
    warm_start: Option<&Assignment>,
) -> Result<SolveResult> {
    if !(penalty_scale > 0.0) {
        return Err(Error::Parameter(format!(
            "penalty scale must be positive, got {penalty_scale}"
        )));
    }
    params.validate()?;
    let started = Instant::now();

    let pre = presolve(model)?;
    let cc = compile_cqm(&pre, penalty_scale)?;
    let v = pre.registry.len();

    let warm_bits: Option<Vec<u8>> = match warm_start {
        Some(a) => {
            let mut bits = Vec::with_capacity(v);
            for var in &pre.registry {
                bits.push(
                    a.get(*var)
                        .ok_or_else(|| Error::UnboundVariable(var.to_string()))?,
                );
            }
            Some(bits)
        }
        None => None,
    };

    let outcomes: Vec<CqmRestartOutcome> = if v == 0 {
        Vec::new()
    } else {
        match params.time_budget {
            Some(budget) => {
                let mut out = Vec::new();
                for r in 0..params.restarts {
                    out.push(cqm_restart(&cc, params, r, warm_bits.as_deref()));
                    if started.elapsed() >= budget {
                        break;
                    }
                }
                out
            }
            None => (0..params.restarts)
                .into_par_iter()
                .map(|r| cqm_restart(&cc, params, r, warm_bits.as_deref()))
                .collect(),
        }
    };

    // Prefer any feasible state (best objective), else the best penalized.
    let best_bits: Vec<u8> = if v == 0 {
        Vec::new()
    } else {
        let feasible = outcomes
            .iter()
            .filter_map(|o| o.feasible_best.as_ref())
            .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        match feasible {
            Some((_, bits)) => bits.clone(),
            None => {
                outcomes
                    .iter()
                    .map(|o| &o.penalized_best)
                    .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
                    .expect("at least one restart")
                    .1
                    .clone()
            }
        }
    };

    let mut assignment: Assignment = pre
        .registry
        .iter()
        .zip(&best_bits)
        .map(|(&var, &b)| (var, b))
        .collect();
    for (&var, &val) in &pre.forced {
        assignment.set(var, val);
    }

    // Exact, penalty-free verdicts on the original model.
    let energy = model.objective.evaluate(&assignment)?;
    let feasible = model.is_feasible(&assignment)?;

    let stats = SolveStats {
        states_visited: None,
        ties: None,
        sweeps: Some(outcomes.iter().map(|o| o.sweeps_done).sum()),
        restarts: Some(outcomes.len().max(1) as u32),
        seed: Some(params.seed),
        elapsed: started.elapsed(),
    };
    finish_result(&model.instance, assignment, energy, Some(feasible), stats)
}

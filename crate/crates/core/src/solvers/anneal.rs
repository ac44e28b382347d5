//! Single-bit-flip Metropolis annealing for quadratic models.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::QuboModel;
use crate::pbpoly::Assignment;

use super::compiled::CompiledPoly;
use super::{derive_seed, finish_result, BinaryModel, SolveResult, SolveStats};

/// Geometric inverse-temperature ramp from `beta_min` to `beta_max` over a
/// fixed number of levels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BetaSchedule {
    pub beta_min: f64,
    pub beta_max: f64,
    pub steps: u32,
}

impl Default for BetaSchedule {
    fn default() -> Self {
        // Wide geometric range: hot enough to cross quadratization-gadget
        // and product-band barriers (deltas in the thousands), cold enough
        // to settle unit-coefficient structure.
        BetaSchedule {
            beta_min: 1e-3,
            beta_max: 6.0,
            steps: 64,
        }
    }
}

impl BetaSchedule {
    fn validate(&self) -> Result<()> {
        if !(self.beta_min > 0.0) || !(self.beta_min < self.beta_max) {
            return Err(Error::Parameter(format!(
                "beta schedule needs 0 < beta_min < beta_max, got [{}, {}]",
                self.beta_min, self.beta_max
            )));
        }
        if self.steps < 1 {
            return Err(Error::Parameter("beta schedule needs at least one step".into()));
        }
        Ok(())
    }

    /// Inverse temperature for the given sweep.
    pub fn beta_at(&self, sweep: u64, sweeps: u64) -> f64 {
        if self.steps <= 1 {
            return self.beta_max;
        }
        let level = if sweeps <= 1 {
            self.steps as u64 - 1
        } else {
            (sweep * self.steps as u64 / sweeps).min(self.steps as u64 - 1)
        };
        let t = level as f64 / (self.steps - 1) as f64;
        self.beta_min * (self.beta_max / self.beta_min).powf(t)
    }
}

/// Annealing schedule and restart policy. Results are deterministic given
/// the full parameter set (including the seed) as long as no time budget
/// truncation kicks in.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnnealParams {
    /// Sweeps per restart; one sweep proposes a flip of every variable.
    pub sweeps: u64,
    pub beta: BetaSchedule,
    pub restarts: u32,
    pub seed: u64,
    /// Optional wall-clock budget checked between restarts; never truncates
    /// a restart mid-flight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget: Option<Duration>,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            sweeps: 4000,
            beta: BetaSchedule::default(),
            restarts: 48,
            seed: 42,
            time_budget: None,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps < 1 {
            return Err(Error::Parameter("sweeps must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Parameter("restarts must be at least 1".into()));
        }
        self.beta.validate()
    }

    pub fn restart_seed(&self, restart: u32) -> u64 {
        derive_seed(self.seed, &[restart as u64])
    }
}

struct RestartOutcome {
    best_value: i128,
    best_bits: Vec<u8>,
    sweeps_done: u64,
}

/// Fixups applied to freshly drawn states: auxiliary product variables start
/// consistent with their defining pairs so the hot phase is not spent
/// repairing gadgets.
struct InitFixups {
    // (aux index, pair indices) within the registry.
    defs: Vec<(usize, usize, usize)>,
}

impl InitFixups {
    fn for_model(model: &QuboModel) -> Self {
        let pos = |v| model.registry.iter().position(|&r| r == v);
        let defs = model
            .aux_defs
            .iter()
            .filter_map(|d| Some((pos(d.aux)?, pos(d.pair.0)?, pos(d.pair.1)?)))
            .collect();
        InitFixups { defs }
    }

    fn apply(&self, bits: &mut [u8]) {
        for &(aux, a, b) in &self.defs {
            bits[aux] = bits[a] * bits[b];
        }
    }
}

fn anneal_restart(
    cp: &CompiledPoly,
    fixups: &InitFixups,
    params: &AnnealParams,
    restart: u32,
) -> RestartOutcome {
    let v = cp.num_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(params.restart_seed(restart));
    let mut bits: Vec<u8> = (0..v).map(|_| rng.gen_range(0..=1u8)).collect();
    fixups.apply(&mut bits);
    let mut cursor = cp.cursor(&bits);
    let mut best_value = cursor.value();
    let mut best_bits = bits.clone();

    for sweep in 0..params.sweeps {
        let beta = params.beta.beta_at(sweep, params.sweeps);
        for var in 0..v {
            let to_one = bits[var] == 0;
            let delta = cursor.flip_delta(cp, var, to_one);
            let accept = delta <= 0 || {
                let u: f64 = rng.gen();
                u < (-(delta as f64) * beta).exp()
            };
            if accept {
                cursor.apply_flip(cp, var, to_one);
                bits[var] ^= 1;
                if cursor.value() < best_value {
                    best_value = cursor.value();
                    best_bits.copy_from_slice(&bits);
                }
            }
        }
    }

    // Zero-temperature tail: descend to the local minimum of the final
    // state so the restart reports a basin bottom, not a thermal sample.
    let quench_sweeps = quench(cp, &mut cursor, &mut bits);
    if cursor.value() < best_value {
        best_value = cursor.value();
        best_bits.copy_from_slice(&bits);
    }

    RestartOutcome {
        best_value,
        best_bits,
        sweeps_done: params.sweeps + quench_sweeps,
    }
}

/// Greedy single-flip descent until no flip improves; the beta -> infinity
/// limit of the Metropolis move set. Returns the sweeps it took.
fn quench(cp: &CompiledPoly, cursor: &mut super::compiled::PolyCursor, bits: &mut [u8]) -> u64 {
    let v = bits.len();
    let mut sweeps = 0u64;
    loop {
        sweeps += 1;
        let mut improved = false;
        for var in 0..v {
            let to_one = bits[var] == 0;
            if cursor.flip_delta(cp, var, to_one) < 0 {
                cursor.apply_flip(cp, var, to_one);
                bits[var] ^= 1;
                improved = true;
            }
        }
        if !improved || sweeps >= 1000 {
            return sweeps;
        }
    }
}

/// Best-of-restarts simulated annealing on a quadratic model.
pub fn simulated_anneal(model: &QuboModel, params: &AnnealParams) -> Result<SolveResult> {
    params.validate()?;
    let started = Instant::now();
    let registry = model.registry();
    let poly = model.to_polynomial();
    let cp = CompiledPoly::compile(&poly, registry)?;

    let fixups = InitFixups::for_model(model);
    let outcomes: Vec<RestartOutcome> = match params.time_budget {
        // A budget forces sequential restarts so truncation is well defined.
        Some(budget) => {
            let mut out = Vec::new();
            for r in 0..params.restarts {
                out.push(anneal_restart(&cp, &fixups, params, r));
                if started.elapsed() >= budget {
                    break;
                }
            }
            out
        }
        None => (0..params.restarts)
            .into_par_iter()
            .map(|r| anneal_restart(&cp, &fixups, params, r))
            .collect(),
    };

    // Order-independent reduction: energy first, then lexicographic bits.
    let best = outcomes
        .iter()
        .min_by(|a, b| {
            a.best_value
                .cmp(&b.best_value)
                .then_with(|| a.best_bits.cmp(&b.best_bits))
        })
        .expect("at least one restart");
    let total_sweeps: u64 = outcomes.iter().map(|o| o.sweeps_done).sum();

    let assignment: Assignment = registry
        .iter()
        .zip(&best.best_bits)
        .map(|(&var, &b)| (var, b))
        .collect();
    let energy = poly.evaluate(&assignment)?;
    assert_eq!(energy, best.best_value, "incremental evaluation drifted");

    let stats = SolveStats {
        states_visited: None,
        ties: None,
        sweeps: Some(total_sweeps),
        restarts: Some(outcomes.len() as u32),
        seed: Some(params.seed),
        elapsed: started.elapsed(),
    };
    finish_result(model.instance(), assignment, energy, None, stats)
}

//! Experiment driver: seeded semiprime batches with and without the global
//! constraint, and CSV emission for the memory model, success counts and
//! absolute-error summaries.
//!
//! Everything downstream of `ExperimentConfig` is deterministic: per-trial
//! seeds derive from the master seed, rows are sorted before writing, and
//! the work column records solver sweeps rather than wall time, so re-runs
//! are byte-identical.

mod primes;

pub use primes::{gen_prime, gen_semiprime, Semiprime};

use std::fs;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{build_cqm, build_hubo, quadratize_default, FactorizationInstance};
use crate::solvers::{
    cqm_solve, derive_seed, estimate_memory, exact_solve, simulated_anneal, verify_factorization,
    AnnealParams, MemoryEstimate, SolveResult, DEFAULT_LIMIT_VARS,
};

/// Salt for the instance stream so the two arms of a pair share their
/// semiprime but not their solver randomness.
const INSTANCE_SALT: u64 = 0x1157_A9CE;

fn default_trials() -> u32 {
    10
}

fn default_limit_vars() -> usize {
    DEFAULT_LIMIT_VARS
}

fn default_penalty_scale() -> f64 {
    8.0
}

fn default_epsilon() -> f64 {
    crate::models::DEFAULT_EPSILON
}

/// Which solver runs each trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum SolverBackend {
    /// Exhaustive enumeration of the high-order model.
    Exact {
        #[serde(default = "default_limit_vars")]
        limit_vars: usize,
    },
    /// Simulated annealing of the quadratized high-order model.
    Anneal {
        #[serde(default)]
        params: AnnealParams,
    },
    /// Penalty-method annealing of the constrained model.
    Cqm {
        #[serde(default)]
        params: AnnealParams,
        #[serde(default = "default_penalty_scale")]
        penalty_scale: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

/// Whether trials run with the global product constraint, without it, or
/// both arms paired on the same instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalMode {
    On,
    Off,
    Both,
}

impl GlobalMode {
    fn arms(self) -> &'static [bool] {
        match self {
            GlobalMode::On => &[true],
            GlobalMode::Off => &[false],
            GlobalMode::Both => &[false, true],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub bit_lengths: Vec<u32>,
    #[serde(default = "default_trials")]
    pub trials_per_point: u32,
    pub solver: SolverBackend,
    pub global_constraint: GlobalMode,
    pub master_seed: u64,
    /// Wall-clock budget per trial in seconds; checked between restarts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_per_trial_secs: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bit_lengths.is_empty() {
            return Err(Error::Parameter("bit_lengths must be non-empty".into()));
        }
        if self.trials_per_point < 1 {
            return Err(Error::Parameter("trials_per_point must be at least 1".into()));
        }
        Ok(())
    }

    fn time_budget(&self) -> Option<Duration> {
        self.time_budget_per_trial_secs.map(Duration::from_secs_f64)
    }
}

/// One solved trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRow {
    pub bits: u32,
    pub trial_index: u32,
    pub global_on: bool,
    pub success: bool,
    pub abs_error: u128,
    /// Deterministic work measure: sweeps for annealers, states for the
    /// exhaustive backend.
    pub elapsed_sweeps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fig2Row {
    pub bits: u32,
    pub global_on: bool,
    pub successes: u32,
    pub min: u32,
    pub max: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fig3Row {
    pub bits: u32,
    pub global_on: bool,
    /// Mean `|pq - N|` over the cell, rendered with six decimals.
    pub mean_abs_error: String,
    pub min: u128,
    pub max: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentOutput {
    pub rows: Vec<TrialRow>,
    pub fig2: Vec<Fig2Row>,
    pub fig3: Vec<Fig3Row>,
}

/// Runs every (bits, arm, trial) cell of the configured grid.
///
/// Solvers see only the instance; the generated ground-truth factors touch
/// nothing but the validation columns.
pub fn run_trials(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let arms = config.global_constraint.arms();
    let mut cells: Vec<(u32, bool, u32)> = Vec::new();
    for &bits in &config.bit_lengths {
        for &global_on in arms {
            for trial in 0..config.trials_per_point {
                cells.push((bits, global_on, trial));
            }
        }
    }

    let rows: Vec<TrialRow> = cells
        .par_iter()
        .map(|&(bits, global_on, trial)| run_one_trial(config, bits, global_on, trial))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = rows;
    rows.sort_by_key(|r| (r.bits, r.global_on, r.trial_index));

    let fig2 = summarize_fig2(&rows);
    let fig3 = summarize_fig3(&rows);
    Ok(ExperimentOutput { rows, fig2, fig3 })
}

fn run_one_trial(
    config: &ExperimentConfig,
    bits: u32,
    global_on: bool,
    trial: u32,
) -> Result<TrialRow> {
    // The instance stream ignores the arm so both arms share their N.
    let inst_seed = derive_seed(config.master_seed, &[bits as u64, trial as u64, INSTANCE_SALT]);
    let solver_seed = derive_seed(
        config.master_seed,
        &[bits as u64, trial as u64, global_on as u64],
    );
    let sp = gen_semiprime(bits, inst_seed)?;
    let inst = FactorizationInstance::new(sp.n, sp.msb)?;

    let result: SolveResult = match &config.solver {
        SolverBackend::Exact { limit_vars } => {
            let model = build_hubo(&inst)?;
            exact_solve(&model, *limit_vars)?
        }
        SolverBackend::Anneal { params } => {
            let model = quadratize_default(&build_hubo(&inst)?)?;
            let params = AnnealParams {
                seed: solver_seed,
                time_budget: config.time_budget(),
                ..*params
            };
            simulated_anneal(&model, &params)?
        }
        SolverBackend::Cqm {
            params,
            penalty_scale,
            epsilon,
        } => {
            let model = build_cqm(&inst, *epsilon, global_on)?;
            let params = AnnealParams {
                seed: solver_seed,
                time_budget: config.time_budget(),
                ..*params
            };
            cqm_solve(&model, &params, *penalty_scale, None)?
        }
    };

    let check = verify_factorization(result.p, result.q, sp.n);
    Ok(TrialRow {
        bits,
        trial_index: trial,
        global_on,
        success: check.valid,
        abs_error: check.abs_error,
        elapsed_sweeps: result.stats.work_units(),
        seed: solver_seed,
    })
}

fn summarize_fig2(rows: &[TrialRow]) -> Vec<Fig2Row> {
    group_cells(rows)
        .into_iter()
        .map(|(bits, global_on, cell)| {
            let per_trial: Vec<u32> = cell.iter().map(|r| r.success as u32).collect();
            Fig2Row {
                bits,
                global_on,
                successes: per_trial.iter().sum(),
                min: *per_trial.iter().min().expect("non-empty cell"),
                max: *per_trial.iter().max().expect("non-empty cell"),
            }
        })
        .collect()
}

fn summarize_fig3(rows: &[TrialRow]) -> Vec<Fig3Row> {
    group_cells(rows)
        .into_iter()
        .map(|(bits, global_on, cell)| {
            let sum: u128 = cell.iter().map(|r| r.abs_error).sum();
            Fig3Row {
                bits,
                global_on,
                mean_abs_error: format_mean(sum, cell.len() as u128),
                min: cell.iter().map(|r| r.abs_error).min().expect("non-empty"),
                max: cell.iter().map(|r| r.abs_error).max().expect("non-empty"),
            }
        })
        .collect()
}

fn group_cells(rows: &[TrialRow]) -> Vec<(u32, bool, Vec<&TrialRow>)> {
    let mut cells: Vec<(u32, bool, Vec<&TrialRow>)> = Vec::new();
    for row in rows {
        match cells.last_mut() {
            Some((bits, global_on, cell)) if *bits == row.bits && *global_on == row.global_on => {
                cell.push(row)
            }
            _ => cells.push((row.bits, row.global_on, vec![row])),
        }
    }
    cells
}

/// Exact decimal mean with six digits, round half up; no float formatting.
fn format_mean(sum: u128, count: u128) -> String {
    let scaled = sum * 1_000_000 + count / 2;
    let micro = scaled / count;
    format!("{}.{:06}", micro / 1_000_000, micro % 1_000_000)
}

impl ExperimentOutput {
    pub fn trials_csv(&self) -> String {
        let mut out = String::from("bits,trial_index,global_on,success,abs_error,elapsed_sweeps,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.bits, r.trial_index, r.global_on, r.success, r.abs_error, r.elapsed_sweeps, r.seed
            ));
        }
        out
    }

    pub fn fig2_csv(&self) -> String {
        let mut out = String::from("bits,global_on,successes,min,max\n");
        for r in &self.fig2 {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.bits, r.global_on, r.successes, r.min, r.max
            ));
        }
        out
    }

    pub fn fig3_csv(&self) -> String {
        let mut out = String::from("bits,global_on,mean_abs_error,min,max\n");
        for r in &self.fig3 {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.bits, r.global_on, r.mean_abs_error, r.min, r.max
            ));
        }
        out
    }

    /// Writes trials.csv, fig2.csv and fig3.csv into `dir`.
    pub fn write_csvs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("trials.csv"), self.trials_csv())?;
        fs::write(dir.join("fig2.csv"), self.fig2_csv())?;
        fs::write(dir.join("fig3.csv"), self.fig3_csv())?;
        Ok(())
    }
}

/// The memory-model table (one row per variable count).
pub fn memory_table(v_list: &[u32]) -> Result<Vec<MemoryEstimate>> {
    v_list.iter().map(|&v| estimate_memory(v)).collect()
}

/// Variable counts for the default memory table.
pub const DEFAULT_MEMORY_VARS: [u32; 5] = [4, 10, 16, 24, 32];

pub fn memory_table_csv(estimates: &[MemoryEstimate]) -> String {
    let mut out = String::from("vars,bytes,human_readable\n");
    for e in estimates {
        out.push_str(&format!("{},{},{}\n", e.vars, e.bytes, e.human_readable));
    }
    out
}

/// Writes fig1.csv for the given variable counts.
pub fn write_memory_table(v_list: &[u32], path: &Path) -> Result<()> {
    let estimates = memory_table(v_list)?;
    fs::write(path, memory_table_csv(&estimates))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_config(bits: Vec<u32>) -> ExperimentConfig {
        ExperimentConfig {
            bit_lengths: bits,
            trials_per_point: 10,
            solver: SolverBackend::Exact {
                limit_vars: DEFAULT_LIMIT_VARS,
            },
            global_constraint: GlobalMode::Both,
            master_seed: 42,
            time_budget_per_trial_secs: None,
        }
    }

    #[test]
    fn exact_backend_solves_ten_bit_cells() {
        let out = run_trials(&exact_config(vec![10])).unwrap();
        assert_eq!(out.rows.len(), 20);
        assert!(out.rows.iter().all(|r| r.success && r.abs_error == 0));
        for f in &out.fig2 {
            assert_eq!(f.successes, 10);
        }
        for f in &out.fig3 {
            assert_eq!(f.mean_abs_error, "0.000000");
        }
    }

    #[test]
    fn rows_are_paired_across_arms() {
        // Same per-pair instance: both arms must factor the same N, which we
        // observe indirectly through identical instance seeds.
        let config = exact_config(vec![10]);
        for trial in 0..3 {
            let s_off = derive_seed(config.master_seed, &[10, trial, INSTANCE_SALT]);
            let s_on = derive_seed(config.master_seed, &[10, trial, INSTANCE_SALT]);
            assert_eq!(s_off, s_on);
            assert_eq!(
                gen_semiprime(10, s_off).unwrap(),
                gen_semiprime(10, s_on).unwrap()
            );
        }
    }

    #[test]
    fn every_row_carries_a_decoded_candidate() {
        let out = run_trials(&exact_config(vec![8])).unwrap();
        // success implies zero error, and rows are never dropped.
        assert_eq!(out.rows.len(), 20);
        for r in &out.rows {
            assert!(!r.success || r.abs_error == 0);
        }
    }

    #[test]
    fn summaries_recompute_from_rows() {
        let out = run_trials(&exact_config(vec![8, 10])).unwrap();
        for f in &out.fig2 {
            let expect: u32 = out
                .rows
                .iter()
                .filter(|r| r.bits == f.bits && r.global_on == f.global_on && r.abs_error == 0)
                .count() as u32;
            assert_eq!(f.successes, expect);
        }
        for f in &out.fig3 {
            let cell: Vec<u128> = out
                .rows
                .iter()
                .filter(|r| r.bits == f.bits && r.global_on == f.global_on)
                .map(|r| r.abs_error)
                .collect();
            let sum: u128 = cell.iter().sum();
            assert_eq!(f.mean_abs_error, format_mean(sum, cell.len() as u128));
            assert_eq!(f.min, *cell.iter().min().unwrap());
            assert_eq!(f.max, *cell.iter().max().unwrap());
        }
    }

    #[test]
    fn csv_output_is_reproducible() {
        let config = exact_config(vec![8]);
        let a = run_trials(&config).unwrap();
        let b = run_trials(&config).unwrap();
        assert_eq!(a.trials_csv(), b.trials_csv());
        assert_eq!(a.fig2_csv(), b.fig2_csv());
        assert_eq!(a.fig3_csv(), b.fig3_csv());
    }

    #[test]
    fn mean_formatting_is_exact() {
        assert_eq!(format_mean(0, 10), "0.000000");
        assert_eq!(format_mean(10, 4), "2.500000");
        assert_eq!(format_mean(1, 3), "0.333333");
        assert_eq!(format_mean(2, 3), "0.666667");
    }

    #[test]
    fn memory_table_rows() {
        let table = memory_table(&DEFAULT_MEMORY_VARS).unwrap();
        assert_eq!(table.len(), 5);
        assert_eq!(table[0].bytes, 64u32.into());
        assert_eq!(table[4].bytes, 137_438_953_472u64.into());
        for pair in table.windows(2) {
            assert!(pair[0].bytes < pair[1].bytes, "bytes must increase");
        }
        let csv = memory_table_csv(&table);
        assert!(csv.starts_with("vars,bytes,human_readable\n"));
        assert!(csv.contains("32,137438953472,128 GiB"));
    }

    #[test]
    fn config_json_round_trip() {
        let config = ExperimentConfig {
            bit_lengths: vec![10, 16],
            trials_per_point: 10,
            solver: SolverBackend::Cqm {
                params: AnnealParams::default(),
                penalty_scale: 8.0,
                epsilon: 0.5,
            },
            global_constraint: GlobalMode::Both,
            master_seed: 7,
            time_budget_per_trial_secs: Some(60.0),
        };
        let json = serde_json::to_string_pretty(&config).unwrap();
        let parsed: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, config);

        // Minimal config relies on the serde defaults.
        let minimal: ExperimentConfig = serde_json::from_str(
            r#"{
                "bit_lengths": [10],
                "solver": {"backend": "exact"},
                "global_constraint": "both",
                "master_seed": 1
            }"#,
        )
        .unwrap();
        assert_eq!(minimal.trials_per_point, 10);
    }
}

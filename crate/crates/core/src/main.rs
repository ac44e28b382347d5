//! Command-line interface: build models, solve them, and run experiments.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qfactor::binmul::multiplication_table;
use qfactor::harness::{
    gen_semiprime, memory_table, memory_table_csv, run_trials, write_memory_table,
    ExperimentConfig, DEFAULT_MEMORY_VARS,
};
use qfactor::models::{
    build_cqm, build_hubo, quadratize, quadratize_default, read_model, write_model, AnyModel,
    FactorizationInstance, ModelFile,
};
use qfactor::solvers::{
    cqm_solve, estimate_memory, exact_solve, simulated_anneal, AnnealParams, SolveResult,
    DEFAULT_LIMIT_VARS,
};
use qfactor::{Error, Result};

#[derive(Parser)]
#[command(name = "qfactor", version, about = "Factorization-model compiler and solver toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the carry-propagation multiplication table for p * q.
    MultiplyTable {
        #[arg(long)]
        p: u128,
        #[arg(long)]
        q: u128,
        /// Highest factor bit index (factors have n+1 bits).
        #[arg(long)]
        n: u32,
    },
    /// Compile the high-order model (optionally quadratized) to JSON.
    BuildHubo {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Reduce to a quadratic model before writing.
        #[arg(long)]
        quadratize: bool,
        /// Penalty weight for the reduction; defaults to 1 + sum |coefficients|.
        #[arg(long)]
        penalty_weight: Option<i128>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile the constrained quadratic model to JSON.
    BuildCqm {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Band tolerance for the bitwise and global constraints.
        #[arg(long, default_value_t = qfactor::models::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Drop the global product constraint.
        #[arg(long)]
        no_global: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustively solve a hubo or qubo model file.
    SolveExact {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT_VARS)]
        limit_vars: usize,
    },
    /// Anneal a qubo model file (a hubo file is quadratized on the fly).
    SolveAnneal {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        anneal: AnnealArgs,
    },
    /// Solve a cqm model file with the penalty method.
    SolveCqm {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        anneal: AnnealArgs,
        #[arg(long, default_value_t = 8.0)]
        penalty_scale: f64,
    },
    /// Memory a stored-state exhaustive solver would need for v variables.
    EstimateMemory {
        #[arg(long)]
        vars: u32,
    },
    /// Run a trial batch from a JSON config and write trials/fig2/fig3 CSVs.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the CSV outputs.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write the memory-model table (fig1.csv).
    MemoryTable {
        /// Comma-separated variable counts.
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<u32>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded semiprime with equal-bit-length prime factors.
    GenSemiprime {
        #[arg(long)]
        bits: u32,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// The semiprime target.
    #[arg(long = "N")]
    target: u128,
    /// Highest factor bit index (factors have n+1 bits).
    #[arg(long)]
    n: u32,
    /// Leave the most significant factor bits free.
    #[arg(long)]
    no_fix_msb: bool,
    /// Leave the least significant factor bits free (HUBO only).
    #[arg(long)]
    no_fix_lsb: bool,
}

impl InstanceArgs {
    fn build(&self) -> Result<FactorizationInstance> {
        FactorizationInstance::with_flags(self.target, self.n, !self.no_fix_lsb, !self.no_fix_msb)
    }
}

#[derive(Args)]
struct AnnealArgs {
    #[arg(long)]
    sweeps: Option<u64>,
    #[arg(long)]
    restarts: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    /// Wall-clock budget in seconds, checked between restarts.
    #[arg(long)]
    time_budget: Option<f64>,
}

impl AnnealArgs {
    fn params(&self) -> AnnealParams {
        let mut p = AnnealParams::default();
        if let Some(s) = self.sweeps {
            p.sweeps = s;
        }
        if let Some(r) = self.restarts {
            p.restarts = r;
        }
        if let Some(s) = self.seed {
            p.seed = s;
        }
        if let Some(b) = self.beta_min {
            p.beta.beta_min = b;
        }
        if let Some(b) = self.beta_max {
            p.beta.beta_max = b;
        }
        p.time_budget = self.time_budget.map(Duration::from_secs_f64);
        p
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::MultiplyTable { p, q, n } => {
            let table = multiplication_table(p, q, n)?;
            println!("{:>6} {}", "i:", (0..table.s.len()).map(|i| format!("{i:>4}")).collect::<String>());
            println!("{:>6} {}", "S:", table.s.iter().map(|v| format!("{v:>4}")).collect::<String>());
            println!("{:>6} {}", "C:", table.c.iter().map(|v| format!("{v:>4}")).collect::<String>());
            println!("{:>6} {}", "r:", table.r.bits().iter().map(|v| format!("{v:>4}")).collect::<String>());
            println!("product: {}", table.product());
            let out = json!({
                "n": table.n,
                "S": table.s,
                "C": table.c,
                "r": table.r.bits(),
                "product": table.product().to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::BuildHubo {
            instance,
            quadratize: quad,
            penalty_weight,
            out,
        } => {
            let inst = instance.build()?;
            let hubo = build_hubo(&inst)?;
            let file = if quad {
                let qubo = match penalty_weight {
                    Some(w) => quadratize(&hubo, w)?,
                    None => quadratize_default(&hubo)?,
                };
                println!("variables: {}", qubo.census());
                ModelFile::from(&qubo)
            } else {
                println!("variables: {}", hubo.census());
                ModelFile::from(&hubo)
            };
            write_model(&file, &out)?;
            println!("wrote {}", out.display());
        }
        Command::BuildCqm {
            instance,
            epsilon,
            no_global,
            out,
        } => {
            let inst = instance.build()?;
            let cqm = build_cqm(&inst, epsilon, !no_global)?;
            println!("variables: {}", cqm.census());
            println!("constraints: {}", cqm.constraints.len());
            write_model(&ModelFile::from(&cqm), &out)?;
            println!("wrote {}", out.display());
        }
        Command::SolveExact { model, limit_vars } => {
            let result = match read_model(&model)? {
                AnyModel::Hubo(m) => exact_solve(&m, limit_vars)?,
                AnyModel::Qubo(m) => exact_solve(&m, limit_vars)?,
                AnyModel::Cqm(_) => {
                    return Err(Error::Parameter(
                        "exact enumeration handles hubo and qubo models; use solve-cqm".into(),
                    ))
                }
            };
            print_result(&result)?;
        }
        Command::SolveAnneal { model, anneal } => {
            let qubo = match read_model(&model)? {
                AnyModel::Qubo(m) => m,
                AnyModel::Hubo(m) => quadratize_default(&m)?,
                AnyModel::Cqm(_) => {
                    return Err(Error::Parameter(
                        "annealing handles hubo and qubo models; use solve-cqm".into(),
                    ))
                }
            };
            let result = simulated_anneal(&qubo, &anneal.params())?;
            print_result(&result)?;
        }
        Command::SolveCqm {
            model,
            anneal,
            penalty_scale,
        } => {
            let cqm = match read_model(&model)? {
                AnyModel::Cqm(m) => m,
                other => {
                    return Err(Error::Parameter(format!(
                        "solve-cqm needs a cqm model file, got kind {:?}",
                        other.kind()
                    )))
                }
            };
            let result = cqm_solve(&cqm, &anneal.params(), penalty_scale, None)?;
            print_result(&result)?;
        }
        Command::EstimateMemory { vars } => {
            let est = estimate_memory(vars)?;
            println!("{} bytes ({})", est.bytes, est.human_readable);
        }
        Command::Experiment { config, out_dir } => {
            let text = std::fs::read_to_string(&config)?;
            let config: ExperimentConfig = serde_json::from_str(&text)?;
            let output = run_trials(&config)?;
            output.write_csvs(&out_dir)?;
            let successes: usize = output.rows.iter().filter(|r| r.success).count();
            println!(
                "wrote trials.csv, fig2.csv, fig3.csv under {} ({} rows, {} successes)",
                out_dir.display(),
                output.rows.len(),
                successes
            );
        }
        Command::MemoryTable { vars, out } => {
            let vars = vars.unwrap_or_else(|| DEFAULT_MEMORY_VARS.to_vec());
            let out = out.unwrap_or_else(|| PathBuf::from("fig1.csv"));
            write_memory_table(&vars, &out)?;
            print!("{}", memory_table_csv(&memory_table(&vars)?));
            println!("wrote {}", out.display());
        }
        Command::GenSemiprime { bits, seed } => {
            let sp = gen_semiprime(bits, seed)?;
            let out = json!({
                "N": sp.n.to_string(),
                "p": sp.p.to_string(),
                "q": sp.q.to_string(),
                "n": sp.msb,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}

fn print_result(result: &SolveResult) -> Result<()> {
    let stats = &result.stats;
    let out = json!({
        "p": result.p.to_string(),
        "q": result.q.to_string(),
        "abs_error": result.abs_error.to_string(),
        "energy": result.energy.to_string(),
        "feasible": result.feasible,
        "stats": {
            "states_visited": stats.states_visited.map(|s| s.to_string()),
            "sweeps": stats.sweeps,
            "restarts": stats.restarts,
            "seed": stats.seed,
            "elapsed_secs": stats.elapsed.as_secs_f64(),
        },
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

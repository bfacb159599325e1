//! Command-line front end for the `bpmcf` solvers.
//!
//! Exit codes: 0 success, 1 infeasible, 2 usage or input error, 3 time limit
//! reached without a proven optimum.

pub mod bench;
pub mod error;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use bpmcf::bdd::Diagrams;
use bpmcf::instgen::{generate, stats, GenConfig};
use bpmcf::matching::{applies, solve_two_per_bin};
use bpmcf::mip::{
    detect_formulation, emit_anf, emit_ip, import_solution, parse_values, Formulation, ModelFile,
};
use bpmcf::oracle::{brute_force_solve, DEFAULT_LIMIT};
use bpmcf::search::{ConsistentPathSolver, SolverConfig};
use bpmcf::{canonical_order, objective_lower_bound, Instance, Outcome, SolveReport, Status};
use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{run_bench, write_reports, BenchConfig, DEFAULT_TIME_LIMIT_S};
use crate::error::{read, write, CliError, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TIME_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bpmcf",
    version,
    about = "Bin packing with minimum color fragmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    /// matching when no bin fits three items and capacities are equal, else bb
    Auto,
    Bb,
    Oracle,
    Matching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormulationArg {
    Ip,
    Anf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random instance as JSON.
    Generate {
        #[arg(long)]
        k: usize,
        #[arg(long = "B", value_name = "B")]
        capacity: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance and print the solution as JSON.
    Solve {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMethod::Auto)]
        method: SolveMethod,
        /// Seconds
        #[arg(long, default_value_t = DEFAULT_TIME_LIMIT_S)]
        time_limit: f64,
    },
    /// Write the integer program for an instance in LP format.
    EmitModel {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum)]
        formulation: FormulationArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read `name value` lines produced for an emitted model and print the
    /// corresponding assignment.
    ImportSolution {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        values: PathBuf,
    },
    /// Run a benchmark grid.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
    },
    /// Summarize a set of instance files.
    Stats {
        #[arg(long = "in", value_name = "FILE", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Generate {
            k,
            capacity,
            seed,
            out,
        } => {
            let instance = generate(&GenConfig::new(k, capacity, seed)?);
            write(&out, &instance.to_json())?;
            eprintln!(
                "wrote {} items in {} colors to {}",
                instance.num_items(),
                instance.colors().len(),
                out.display()
            );
            Ok(EXIT_OK)
        }
        Command::Solve {
            input,
            method,
            time_limit,
        } => {
            if time_limit.is_nan() || time_limit <= 0.0 {
                return Err(CliError::Usage("--time-limit must be positive".into()));
            }
            let instance = load_instance(&input)?;
            let (used, outcome) = solve(&instance, method, time_limit)?;
            println!("{}", outcome.to_json());
            let r = &outcome.report;
            eprintln!(
                "method={used:?} status={} lb={} ub={} gap={:.2}% time={:.3}s nodes={}",
                r.status,
                r.lower_bound,
                r.upper_bound.map_or("-".to_string(), |u| u.to_string()),
                r.gap_pct,
                r.elapsed_s,
                r.nodes_explored
            );
            Ok(match r.status {
                Status::Optimal | Status::Feasible => EXIT_OK,
                Status::Infeasible => EXIT_INFEASIBLE,
                Status::TimeLimit => EXIT_TIME_LIMIT,
            })
        }
        Command::EmitModel {
            input,
            formulation,
            out,
        } => {
            let instance = load_instance(&input)?;
            let formulation = match formulation {
                FormulationArg::Ip => Formulation::Ip,
                FormulationArg::Anf => Formulation::Anf,
            };
            let model = emit(&instance, formulation)?;
            write(&out, &model.text)?;
            eprintln!(
                "{} model: {} variables, {} constraints",
                model.formulation,
                model.num_vars(),
                model.num_rows
            );
            Ok(EXIT_OK)
        }
        Command::ImportSolution {
            input,
            model,
            values,
        } => {
            let instance = load_instance(&input)?;
            let text = read(&model)?;
            let formulation = detect_formulation(&text).ok_or_else(|| {
                CliError::Usage(format!("{}: no formulation header found", model.display()))
            })?;
            let expected = emit(&instance, formulation)?;
            if expected.text != text {
                return Err(CliError::Usage(format!(
                    "{} was not emitted for {}",
                    model.display(),
                    input.display()
                )));
            }
            let values = parse_values(&read(&values)?)?;
            let canonical = canonical_order(&instance);
            let solution = import_solution(&canonical.instance, &expected, &values)?;
            let solution = canonical.restore(&solution);
            let objective = solution.objective;
            let outcome = Outcome {
                solution: Some(solution),
                report: SolveReport::new(
                    Status::Feasible,
                    objective_lower_bound(&instance).min(objective),
                    Some(objective),
                    0.0,
                    0,
                ),
            };
            println!("{}", outcome.to_json());
            Ok(EXIT_OK)
        }
        Command::Bench { config, out_csv } => {
            let config = BenchConfig::from_json(&config)?;
            let rows = run_bench(&config, &out_csv, |row| {
                eprintln!(
                    "k={} B={} seed={} {}: {:?} lb={} ub={} time={:.3}s",
                    row.k,
                    row.capacity,
                    row.seed,
                    row.method,
                    row.status,
                    row.lb,
                    row.ub.map_or("-".to_string(), |u| u.to_string()),
                    row.time_s
                );
            })?;
            print!("{}", write_reports(&rows, &out_csv)?);
            Ok(EXIT_OK)
        }
        Command::Stats { inputs } => {
            let instances = inputs
                .iter()
                .map(|p| load_instance(p))
                .collect::<Result<Vec<_>>>()?;
            let st = stats(&instances);
            let freq: std::collections::BTreeMap<String, f64> = st
                .size_histogram
                .keys()
                .map(|&s| (s.to_string(), st.size_frequency(s)))
                .collect();
            let summary = serde_json::json!({
                "instances": st.instances,
                "items": st.items,
                "size_frequency": freq,
                "items_per_color": st.class_size_histogram,
                "colors_per_instance": st.color_count_histogram,
                "small_color_share": st.small_class_share(),
                "fill_min": if instances.is_empty() { None } else { Some(st.min_fill()) },
                "fill_max": if instances.is_empty() { None } else { Some(st.max_fill()) },
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
            Ok(EXIT_OK)
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&read(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Models are written over the canonical item order (color, then size
/// descending), so variable `x_b0_o3` refers to the third item in that order.
fn emit(instance: &Instance, formulation: Formulation) -> Result<ModelFile> {
    let canonical = canonical_order(instance).instance;
    Ok(match formulation {
        Formulation::Ip => emit_ip(&canonical),
        Formulation::Anf => emit_anf(&canonical, &Diagrams::build(&canonical)?),
    })
}

/// Runs the chosen method; `auto` resolves to matching or bb.
pub fn solve(
    instance: &Instance,
    method: SolveMethod,
    time_limit_s: f64,
) -> Result<(SolveMethod, Outcome)> {
    let method = match method {
        SolveMethod::Auto if applies(instance) && instance.uniform_capacity() => {
            SolveMethod::Matching
        }
        SolveMethod::Auto => SolveMethod::Bb,
        m => m,
    };
    let outcome = match method {
        SolveMethod::Bb => {
            let config = SolverConfig::default().with_time_limit(time_limit_s);
            ConsistentPathSolver::new(instance)?.solve(&config)
        }
        SolveMethod::Oracle => match brute_force_solve(instance, DEFAULT_LIMIT) {
            Ok(out) => out,
            Err(bpmcf::Error::BudgetExceeded { .. }) => Outcome {
                solution: None,
                report: SolveReport::new(
                    Status::TimeLimit,
                    objective_lower_bound(instance),
                    None,
                    0.0,
                    DEFAULT_LIMIT,
                ),
            },
            Err(e) => return Err(e.into()),
        },
        SolveMethod::Matching => {
            if !applies(instance) {
                return Err(CliError::Usage(
                    "--method matching needs an instance where no bin fits three items".into(),
                ));
            }
            solve_two_per_bin(instance)?
        }
        SolveMethod::Auto => unreachable!(),
    };
    Ok((method, outcome))
}

//! `sepkit`: command line front end.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when a
//! computation refuses (budget exhausted, precondition violated). Refusals
//! print a JSON reason on stdout.

mod commands;
mod input;
mod schema;
mod suite;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sepkit::amenability::format_ratio;
use sepkit::error::Error;

use commands::{Artifact, CombineArgs, SearchArgs};

/// Budget used when `--budget` is absent.
const BUDGET_ENV: &str = "SEPKIT_BUDGET";

#[derive(Parser)]
#[command(name = "sepkit", version, about = "Certified finite constructions for separability and generic actions")]
struct Cli {
    /// Output encoding; `dot` is available for commands that produce graphs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the artifact here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Point budget for orbit exploration and searches.
    #[arg(long, global = true, env = BUDGET_ENV, default_value_t = sepkit::amenability::DEFAULT_BUDGET)]
    budget: usize,
    /// Re-validate every emitted certificate before writing it.
    #[arg(long, global = true)]
    verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-index subgroup containing H and excluding the given elements.
    Separate {
        #[arg(long)]
        group: String,
        /// Comma separated generators of H.
        #[arg(long)]
        subgroup: String,
        /// Element to exclude; repeatable.
        #[arg(long = "element", required = true)]
        elements: Vec<String>,
    },
    /// Chabauty approximations.
    Chabauty {
        #[command(subcommand)]
        command: ChabautyCommand,
    },
    /// Orbit of a point, if it is finite within budget.
    Orbit {
        /// Action file (`{"group": .., "action": ..}`).
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        point: u64,
    },
    /// Følner sets and free-product surgery.
    Amen {
        #[command(subcommand)]
        command: AmenCommand,
    },
    /// Shorthand for `amen bs-witness`.
    BsWitness {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 5)]
        dmax: usize,
    },
    /// Fusion runs over schedules of density providers.
    Generic {
        #[command(subcommand)]
        command: GenericCommand,
    },
    /// Randomized self-check suites; cases run in parallel, results are
    /// merged by case index.
    Suite {
        #[arg(value_enum)]
        suite: suite::Suite,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Subcommand)]
enum ChabautyCommand {
    /// Finite-index K with K∩Ω = L∩Ω for Ω the ball of the given radius.
    Approx {
        #[arg(long)]
        group: String,
        #[arg(long)]
        subgroup: String,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        /// `finite-index` intersects one separating table per excluded
        /// element; `joint-separation` completes a single haired graph.
        #[arg(long, default_value = "finite-index")]
        method: String,
    },
}

#[derive(Subcommand)]
enum AmenCommand {
    /// Certify a given finite set.
    FolnerCheck {
        #[arg(long)]
        action: PathBuf,
        /// Comma separated points of F.
        #[arg(long)]
        set: String,
        #[arg(long)]
        omega: String,
        #[arg(long)]
        epsilon: String,
    },
    /// Search the orbit of a point for a Følner set.
    FolnerSearch {
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        point: u64,
        #[arg(long)]
        omega: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 1)]
        min_size: usize,
    },
    /// Re-validate a certificate file against an action.
    Verify {
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Combine factor actions so the orbit of a point holds a Følner set.
    Combine {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long)]
        point: u64,
        #[arg(long)]
        epsilon: String,
        /// Følner window in the left factor.
        #[arg(long, default_value = "")]
        s: String,
        /// Følner window in the right factor.
        #[arg(long, default_value = "")]
        t: String,
        /// Points on which both factors must keep their values.
        #[arg(long, default_value = "")]
        a: String,
    },
    /// Exhaustive check of homomorphisms BS(1,n) → S_d.
    BsWitness {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 5)]
        dmax: usize,
    },
}

#[derive(Subcommand)]
enum GenericCommand {
    /// Run a schedule file and print the transcript.
    Run {
        #[arg(long)]
        schedule: PathBuf,
        /// Use only the first N providers.
        #[arg(long)]
        stages: Option<usize>,
    },
    /// Re-check a transcript: nesting and every witness.
    Verify {
        #[arg(long)]
        transcript: PathBuf,
    },
}

fn dispatch(cli: &Cli) -> sepkit::error::Result<Artifact> {
    let budget = cli.budget;
    match &cli.command {
        Command::Separate { group, subgroup, elements } => commands::separate(group, subgroup, elements),
        Command::Chabauty {
            command: ChabautyCommand::Approx { group, subgroup, radius, method },
        } => commands::chabauty_approx(group, subgroup, *radius, method),
        Command::Orbit { action, point } => commands::orbit_cmd(action, *point, budget),
        Command::Amen { command } => match command {
            AmenCommand::FolnerCheck { action, set, omega, epsilon } => {
                commands::folner_check_cmd(action, set, omega, epsilon, cli.verify)
            }
            AmenCommand::FolnerSearch { action, point, omega, epsilon, min_size } => {
                commands::folner_search_cmd(&SearchArgs {
                    action,
                    point: *point,
                    omega,
                    epsilon,
                    min_size: *min_size,
                    budget,
                    verify: cli.verify,
                })
            }
            AmenCommand::Verify { action, certificate } => commands::folner_verify(action, certificate),
            AmenCommand::Combine { sigma, tau, point, epsilon, s, t, a } => commands::combine_cmd(&CombineArgs {
                sigma,
                tau,
                point: *point,
                epsilon,
                s,
                t,
                a,
                budget,
                verify: cli.verify,
            }),
            AmenCommand::BsWitness { n, dmax } => commands::bs_witness(*n, *dmax),
        },
        Command::BsWitness { n, dmax } => commands::bs_witness(*n, *dmax),
        Command::Generic { command } => match command {
            GenericCommand::Run { schedule, stages } => commands::generic_run(schedule, *stages, budget, cli.verify),
            GenericCommand::Verify { transcript } => commands::generic_verify(transcript, budget),
        },
        Command::Suite { suite, cases, jobs } => {
            suite::run(*suite, *cases, cli.seed, *jobs).map(|json| Artifact { json, dot: None })
        }
    }
}

fn refusal_json(e: &Error) -> serde_json::Value {
    match e {
        Error::Refusal(r) => json!({
            "status": "refused",
            "reason": r.reason,
            "stage": r.stage,
            "best_ratio": r.best_ratio.as_ref().map(format_ratio),
        }),
        Error::Precondition { reason, witness } => json!({
            "status": "precondition",
            "reason": reason,
            "witness": witness,
        }),
        other => json!({ "status": "error", "reason": other.to_string() }),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(artifact) => {
            let text = match cli.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&artifact.json).expect("JSON values serialize");
                    s.push('\n');
                    s
                }
                Format::Dot => match artifact.dot {
                    Some(dot) => dot,
                    None => {
                        eprintln!("error: this command has no DOT output");
                        return ExitCode::from(1);
                    }
                },
            };
            match emit(&cli, &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e @ (Error::Refusal(_) | Error::Precondition { .. })) => {
            eprintln!("{e}");
            println!("{}", refusal_json(&e));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

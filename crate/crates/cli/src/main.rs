//! `uptime`: evaluate, recommend, and simulate HA variants of a topology.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error or unexpected failure |
//! | 2 | a file could not be read, parsed, or written, or has the wrong schema version |
//! | 3 | inputs parsed but failed validation (unknown slot or option, bad SLA, ...) |
//! | 4 | `--mode pruned` on a non-monotone catalog without `--fallback-exhaustive` |

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use uptime_core::broker::load_catalog;
use uptime_core::optimizer::{optimize, tco, ChoiceMap, Objective, OptimizeOptions, SearchMode, SlaContract};
use uptime_core::oracle::{simulate_timeline, BreakdownRecovery, SimulationSpec};
use uptime_core::report::{Report, ReportInputs};
use uptime_core::topology::{Topology, TopologyFile};
use uptime_core::{system_availability, Error, Money};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NON_MONOTONE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "uptime",
    version,
    about = "Uptime-aware HA recommendation for serial cloud topologies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one architecture (unlisted slots use their baseline option).
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sla: SlaArgs,
        /// Choices as `slot=option,...`.
        #[arg(long)]
        choices: Option<String>,
    },
    /// Enumerate HA variants and recommend one.
    Recommend {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sla: SlaArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::MinTco)]
        objective: ObjectiveArg,
        /// Run exhaustively instead of failing when the catalog is not monotone.
        #[arg(long)]
        fallback_exhaustive: bool,
    },
    /// Monte-Carlo failure timelines for one architecture, next to the closed form.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        choices: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Horizon per trial, in years.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `node-repair`, `end-of-horizon`, or `hold=<minutes>`.
        #[arg(long, default_value = "node-repair", value_parser = parse_recovery)]
        recovery: BreakdownRecovery,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    topology: PathBuf,
    /// Broker catalog used to resolve reliability and rate-card references.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Flags take precedence over the topology file's `sla` block.
#[derive(Args)]
struct SlaArgs {
    /// Uptime SLA in percent, e.g. 98.
    #[arg(long, allow_negative_numbers = true)]
    sla: Option<f64>,
    /// Slippage penalty per hour below the SLA.
    #[arg(long, allow_negative_numbers = true)]
    penalty: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Pruned,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    MinTco,
    MinPenalty,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exhaustive => SearchMode::Exhaustive,
            ModeArg::Pruned => SearchMode::Pruned,
        }
    }
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::MinTco => Objective::MinTco,
            ObjectiveArg::MinPenalty => Objective::MinPenalty,
        }
    }
}

fn parse_recovery(s: &str) -> Result<BreakdownRecovery, String> {
    match s {
        "node-repair" => Ok(BreakdownRecovery::NodeRepair),
        "end-of-horizon" => Ok(BreakdownRecovery::EndOfHorizon),
        _ => {
            let minutes = s
                .strip_prefix("hold=")
                .ok_or_else(|| format!("unknown recovery policy `{s}`"))?;
            let m: f64 = minutes
                .parse()
                .map_err(|e| format!("bad hold minutes `{minutes}`: {e}"))?;
            Ok(BreakdownRecovery::HoldMinutes(m))
        }
    }
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            e if e.is_input_error() => EXIT_INPUT,
            Error::NonMonotone { .. } => EXIT_NON_MONOTONE,
            _ => EXIT_VALIDATION,
        };
        Failure { code, error: e.into() }
    }
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Evaluate { common, sla, choices } => {
            let topology = load_topology(&common)?;
            let contract = contract(&topology, &sla)?;
            let choices = choices_or_baseline(&topology, choices.as_deref())?;
            let (system, cha) = topology.catalog.assemble_choices(&choices)?;
            let mut candidate = tco(&system, cha, &contract)?;
            candidate.choices = choices.clone();
            let inputs = ReportInputs {
                choices: Some(choices),
                ..inputs(&common, Some(&contract))
            };
            emit(&common, &Report::evaluate(inputs, &candidate))
        }
        Command::Recommend {
            common,
            sla,
            mode,
            objective,
            fallback_exhaustive,
        } => {
            let topology = load_topology(&common)?;
            let contract = contract(&topology, &sla)?;
            let mut options = OptimizeOptions {
                mode: mode.into(),
                objective: objective.into(),
                as_is: topology.as_is.clone(),
            };
            let rec = match optimize(&topology.catalog, &contract, &options) {
                Err(e @ Error::NonMonotone { .. }) if fallback_exhaustive => {
                    eprintln!("warning: {e}; falling back to exhaustive search");
                    options.mode = SearchMode::Exhaustive;
                    optimize(&topology.catalog, &contract, &options)?
                }
                other => other?,
            };
            let inputs = ReportInputs {
                mode: Some(rec.mode),
                objective: Some(rec.objective),
                ..inputs(&common, Some(&contract))
            };
            emit(&common, &Report::recommend(inputs, &rec))
        }
        Command::Simulate {
            common,
            choices,
            trials,
            horizon,
            seed,
            recovery,
        } => {
            let topology = load_topology(&common)?;
            let choices = choices_or_baseline(&topology, choices.as_deref())?;
            let (system, _) = topology.catalog.assemble_choices(&choices)?;
            let closed_form = system_availability(&system)?;
            let mut spec = SimulationSpec::new(system, horizon, trials, seed)?;
            spec.recovery = recovery;
            spec.validate()?;
            let result = simulate_timeline(&spec)?;
            let inputs = ReportInputs {
                choices: Some(choices.clone()),
                ..inputs(&common, None)
            };
            let report = Report::simulate(
                inputs,
                choices,
                &closed_form,
                (trials, horizon, seed, recovery),
                &result,
            );
            emit(&common, &report)
        }
    }
}

fn load_topology(common: &CommonArgs) -> Result<Topology, Failure> {
    let file = TopologyFile::load(&common.topology)?;
    let broker = common.catalog.as_deref().map(load_catalog).transpose()?;
    Ok(file.resolve(broker.as_ref())?)
}

fn contract(topology: &Topology, flags: &SlaArgs) -> Result<SlaContract, Failure> {
    let sla = flags.sla.or(topology.sla.uptime_percent).ok_or_else(|| {
        fail(
            EXIT_VALIDATION,
            anyhow!("no uptime SLA: pass --sla or set `sla.uptime_percent` in the topology"),
        )
    })?;
    let penalty = match flags.penalty {
        Some(p) => {
            Money::from_f64(p).ok_or_else(|| fail(EXIT_VALIDATION, anyhow!("--penalty {p} is not a finite amount")))?
        }
        None => topology.sla.penalty_per_hour.unwrap_or(Money::ZERO),
    };
    Ok(SlaContract::new(sla, penalty)?)
}

fn choices_or_baseline(topology: &Topology, text: Option<&str>) -> Result<ChoiceMap, Failure> {
    let partial = match text {
        Some(t) => {
            ChoiceMap::parse(t).map_err(|e| fail(EXIT_VALIDATION, anyhow::Error::new(e).context("--choices")))?
        }
        None => ChoiceMap::default(),
    };
    Ok(topology.catalog.complete_with_baseline(&partial)?)
}

fn inputs(common: &CommonArgs, contract: Option<&SlaContract>) -> ReportInputs {
    ReportInputs {
        topology: common.topology.display().to_string(),
        catalog: common.catalog.as_ref().map(|p| p.display().to_string()),
        uptime_sla_percent: contract.map(|c| c.uptime_sla_percent),
        penalty_per_hour: contract.map(|c| c.penalty_per_hour),
        mode: None,
        objective: None,
        choices: None,
    }
}

fn emit(common: &CommonArgs, report: &Report) -> Result<(), Failure> {
    let text = match common.format {
        Format::Json => report.to_json(),
        Format::Table => report.to_table(),
    };
    match &common.output {
        Some(path) => write_file(path, &text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .context("writing report to stdout")
                .map_err(|e| fail(EXIT_USAGE, e))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .with_context(|| format!("writing report to {}", path.display()))
        .map_err(|e| fail(EXIT_INPUT, e))
}

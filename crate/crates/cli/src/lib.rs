//! Batch front end for `qubit-pbn`: reads an experiment configuration,
//! runs one mode and writes CSV tables whose first line records the mode,
//! the seed and the SHA-256 digest of every input file.
//!
//! Exit status: 0 on success, 2 for malformed configuration or unreadable
//! inputs, 3 for inputs that violate an invariant (non-unitary matrix,
//! unnormalized state, ...), 4 for infeasible requests.

pub mod config;
pub mod error;
pub mod inputs;
pub mod io;
pub mod modes;
pub mod validate;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::inputs::Session;
use crate::io::Inputs;
use crate::modes::Outcome;

#[derive(Debug, Parser)]
#[command(name = "qpbn", version, about = "Measurement-induced Boolean dynamics of qubit networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Flags override configuration values.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment configuration file.
    pub config: PathBuf,
    /// Override a configuration value, e.g. `--set run.runs=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Master seed; required by the stochastic modes unless `run.seed` is set.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output directory (default: `output.dir`, else the current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Upper bound on worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo and exact distributions of the global-measurement chain.
    SimulateGlobal(Common),
    /// Sample paths of the local-measurement process.
    SimulateLocal(Common),
    /// Transition matrix of a propagator under global measurement.
    Transition(Common),
    /// Boolean mappings and their probabilities (at most 2 qubits).
    Mappings(Common),
    /// Conditional probabilities of one local-measurement path.
    PathProb(Common),
    /// Fit a unitary to a doubly stochastic matrix.
    Realize(Common),
    /// Lie closure, classification and controllability report.
    LieCheck(Common),
    /// Empirical hitting-time distribution of a target outcome.
    Hitting(Common),
    /// Check all input files and list every violation.
    Validate(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SimulateGlobal,
    SimulateLocal,
    Transition,
    Mappings,
    PathProb,
    Realize,
    LieCheck,
    Hitting,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::SimulateGlobal => "simulate-global",
            Mode::SimulateLocal => "simulate-local",
            Mode::Transition => "transition",
            Mode::Mappings => "mappings",
            Mode::PathProb => "path-prob",
            Mode::Realize => "realize",
            Mode::LieCheck => "lie-check",
            Mode::Hitting => "hitting",
            Mode::Validate => "validate",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Mode::SimulateGlobal | Mode::SimulateLocal | Mode::Realize | Mode::Hitting
        )
    }
}

impl Command {
    pub fn split(&self) -> (Mode, &Common) {
        match self {
            Command::SimulateGlobal(c) => (Mode::SimulateGlobal, c),
            Command::SimulateLocal(c) => (Mode::SimulateLocal, c),
            Command::Transition(c) => (Mode::Transition, c),
            Command::Mappings(c) => (Mode::Mappings, c),
            Command::PathProb(c) => (Mode::PathProb, c),
            Command::Realize(c) => (Mode::Realize, c),
            Command::LieCheck(c) => (Mode::LieCheck, c),
            Command::Hitting(c) => (Mode::Hitting, c),
            Command::Validate(c) => (Mode::Validate, c),
        }
    }
}

/// Read the configuration and apply `--set` and the dedicated flags.
pub fn load_session(mode: Mode, common: &Common) -> CliResult<Session> {
    let mut inputs = Inputs::default();
    let label = common
        .config
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| common.config.to_string_lossy().into_owned());
    let bytes = inputs.read(&common.config, &label)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Malformed(format!("{label} is not UTF-8 text")))?;
    let base = common.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut config = Config::parse(&text, &base)?;
    if let Some(m) = config.get("mode") {
        if m != mode.name() {
            return Err(CliError::Malformed(format!(
                "configuration is for mode `{m}`, invoked as `{}`",
                mode.name()
            )));
        }
    }
    for assignment in &common.set {
        config.set(assignment)?;
    }
    if let Some(seed) = common.seed {
        config.insert("run.seed", seed);
    }
    if let Some(runs) = common.runs {
        config.insert("run.runs", runs);
    }
    if let Some(steps) = common.steps {
        config.insert("run.steps", steps);
    }
    Ok(Session::new(config, inputs))
}

fn output_dir(common: &Common, session: &Session) -> PathBuf {
    match (&common.out, session.config.get("output.dir")) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => session.config.resolve(dir),
        (None, None) => PathBuf::from("."),
    }
}

/// Compute a mode without writing anything.
pub fn execute(mode: Mode, session: &mut Session) -> CliResult<Outcome> {
    if mode.is_stochastic() {
        session.seed()?;
    }
    match mode {
        Mode::SimulateGlobal => modes::simulate_global(session),
        Mode::SimulateLocal => modes::simulate_local(session),
        Mode::Transition => modes::transition(session),
        Mode::Mappings => modes::mappings(session),
        Mode::PathProb => modes::path_prob(session),
        Mode::Realize => modes::realize(session),
        Mode::LieCheck => modes::lie_check(session),
        Mode::Hitting => modes::hitting(session),
        Mode::Validate => {
            let (report, deferred) = validate::run(session)?;
            Ok(Outcome {
                tables: Vec::new(),
                report,
                deferred,
            })
        }
    }
}

/// Run one invocation: compute, write the tables, print the report, and
/// return the exit status.
pub fn run(cli: &Cli) -> i32 {
    let (mode, common) = cli.command.split();
    match run_mode(mode, common) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_mode(mode: Mode, common: &Common) -> CliResult<()> {
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(CliError::Malformed("--threads must be positive".into()));
        }
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let mut session = load_session(mode, common)?;
    let outcome = execute(mode, &mut session)?;
    let dir = output_dir(common, &session);
    for table in &outcome.tables {
        let path = table.write(&dir)?;
        println!("wrote {}", path.display());
    }
    print!("{}", outcome.report);
    match outcome.deferred {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

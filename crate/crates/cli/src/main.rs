//! File-based front end for the entanglement measures: read states, run the
//! measures, emit reports, and run the built-in verification sweeps.
//!
//! Exit codes: 0 success, 1 validation error, 2 property or monogamy
//! failure, 3 optimizer non-convergence (unless `--allow-nonconverged`).

mod format;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use qtangle::concurrence::{mixed_concurrence_sq, pure_concurrence_sq};
use qtangle::state::{random_pure, Bipartition, State};
use qtangle::tangle::residual_entanglement;

use format::{
    ConcurrenceReportFile, ConfigEcho, Metadata, ReportFile, StateFile, StateKind, SCHEMA_VERSION,
};

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 1;
const EXIT_PROPERTY: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qtangle",
    version,
    about = "Bipartite concurrence and multipartite residual entanglement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct OptimizerFlags {
    /// Independent optimizer restarts.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Iteration cap per restart.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Stall tolerance of the optimizer's convergence window.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Base seed for optimizer restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OptimizerFlags {
    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            restarts: self.restarts,
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the residual entanglement of a state file.
    Compute {
        /// Input state file (JSON).
        input: PathBuf,
        #[command(flatten)]
        optimizer: OptimizerFlags,
        /// Write the full report to this path.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Exit successfully even if some optimizer run hit its iteration cap.
        #[arg(long)]
        allow_nonconverged: bool,
    },
    /// Compute the squared concurrence across a chosen focus cut.
    Concurrence {
        /// Input state file (JSON).
        input: PathBuf,
        /// Focus party indices, comma separated (e.g. 0,2).
        #[arg(long, value_delimiter = ',', required = true)]
        focus: Vec<usize>,
        #[command(flatten)]
        optimizer: OptimizerFlags,
        /// Write a small report to this path.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        allow_nonconverged: bool,
    },
    /// Write a Haar-random pure state file.
    Random {
        /// Party dimensions, comma separated (e.g. 2,2,2).
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional label stored in the file metadata.
        #[arg(long)]
        label: Option<String>,
    },
    /// Run a built-in verification sweep.
    Verify {
        #[arg(long, value_enum)]
        suite: verify::Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Party dimensions for the sweep (suite-specific default).
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not failures.
            let code = if err.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Compute {
            input,
            optimizer,
            output,
            allow_nonconverged,
        } => cmd_compute(&input, &optimizer, output.as_deref(), allow_nonconverged),
        Command::Concurrence {
            input,
            focus,
            optimizer,
            output,
            allow_nonconverged,
        } => cmd_concurrence(
            &input,
            &focus,
            &optimizer,
            output.as_deref(),
            allow_nonconverged,
        ),
        Command::Random {
            dims,
            seed,
            out,
            label,
        } => cmd_random(&dims, seed, &out, label),
        Command::Verify {
            suite,
            trials,
            dims,
            seed,
        } => {
            let run = verify::run(suite, trials.max(1), dims, seed)?;
            Ok(if run.passed { EXIT_OK } else { EXIT_PROPERTY })
        }
    }
}

fn state_kind(state: &State) -> StateKind {
    if state.is_pure() {
        StateKind::Pure
    } else {
        StateKind::Density
    }
}

fn cmd_compute(
    input: &std::path::Path,
    optimizer: &OptimizerFlags,
    output: Option<&std::path::Path>,
    allow_nonconverged: bool,
) -> Result<u8> {
    let state = StateFile::load(input)?;
    let n = state.n_parties();
    if n < 2 {
        return Err(anyhow!("residual entanglement needs at least 2 parties"));
    }
    if n == 2 {
        println!(
            "notice: 2-party state; the residual entanglement is undefined, \
             computing the plain bipartite concurrence instead"
        );
        return cmd_concurrence(input, &[0], optimizer, output, allow_nonconverged);
    }

    let cfg = optimizer.echo().to_optimizer();
    let started = Instant::now();
    let report = residual_entanglement(&state, &cfg)?;
    let runtime = started.elapsed().as_secs_f64();

    println!(
        "dims: {:?} ({})",
        report.dims,
        if state.is_pure() {
            "pure"
        } else {
            "density, lower-bound semantics"
        }
    );
    println!("foci evaluated: {}", report.foci.len());
    for f in &report.foci {
        let pairs: Vec<String> = f
            .pair_sq
            .iter()
            .map(|(j, v)| format!("{j}:{v:.6}"))
            .collect();
        println!(
            "  focus {:?}: total_sq = {:.6}, pair_sq = {{{}}}, tau = {:.6}{}{}",
            f.focus.focus(),
            f.total_sq,
            pairs.join(", "),
            f.tau,
            if f.converged { "" } else { " [non-converged]" },
            if f.monogamy_violation {
                " [monogamy violation]"
            } else {
                ""
            },
        );
    }
    println!(
        "argmin focus: {:?} (raw minimum {:.6e})",
        report.argmin_focus().focus(),
        report.residual_raw
    );
    println!("residual = {:.6}", report.residual);

    if let Some(path) = output {
        let file = ReportFile::new(&report, state_kind(&state), optimizer.echo(), runtime);
        file.save(path)?;
        println!("report written to {}", path.display());
    }

    if report.any_monogamy_violation {
        eprintln!(
            "monogamy violation: some focus has tau < -{:.0e} on a pure input",
            qtangle::tangle::MONOGAMY_TOL
        );
        return Ok(EXIT_PROPERTY);
    }
    if !report.all_converged && !allow_nonconverged {
        eprintln!("optimizer did not converge on every focus (see report; --allow-nonconverged to accept)");
        return Ok(EXIT_NONCONVERGED);
    }
    Ok(EXIT_OK)
}

fn cmd_concurrence(
    input: &std::path::Path,
    focus: &[usize],
    optimizer: &OptimizerFlags,
    output: Option<&std::path::Path>,
    allow_nonconverged: bool,
) -> Result<u8> {
    let state = StateFile::load(input)?;
    let bip = Bipartition::new(focus, state.dims())?;
    let cfg = optimizer.echo().to_optimizer();
    let started = Instant::now();
    let (c_sq, converged) = match &state {
        State::Pure(psi) => (pure_concurrence_sq(psi, &bip)?, true),
        State::Density(rho) => {
            let mc = mixed_concurrence_sq(&rho.group(&bip)?, &cfg)?;
            (mc.value, mc.converged)
        }
    };
    let runtime = started.elapsed().as_secs_f64();
    println!("C^2[{:?} | {:?}] = {:.6}", bip.focus(), bip.rest(), c_sq);

    if let Some(path) = output {
        let file = ConcurrenceReportFile {
            schema: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            kind: state_kind(&state),
            dims: state.dims().to_vec(),
            focus: bip.focus().to_vec(),
            semantics: if state.is_pure() {
                "exact"
            } else {
                "lower-bound"
            }
            .to_string(),
            concurrence_sq: c_sq,
            converged,
            config: optimizer.echo(),
            runtime_seconds: runtime,
        };
        let text = serde_json::to_string_pretty(&file).expect("report serializes");
        std::fs::write(path, text + "\n")?;
        println!("report written to {}", path.display());
    }

    if !converged && !allow_nonconverged {
        eprintln!("optimizer did not converge (--allow-nonconverged to accept)");
        return Ok(EXIT_NONCONVERGED);
    }
    Ok(EXIT_OK)
}

fn cmd_random(
    dims: &[usize],
    seed: u64,
    out: &std::path::Path,
    label: Option<String>,
) -> Result<u8> {
    if dims.len() < 2 {
        return Err(anyhow!(
            "random states need at least 2 parties (a single party has no entanglement structure)"
        ));
    }
    let psi = random_pure(dims, seed)?;
    let file = StateFile::from_state(
        &State::Pure(psi),
        Some(Metadata {
            label,
            seed: Some(seed),
        }),
    );
    file.save(out)?;
    println!(
        "wrote Haar-random pure state {:?} (seed {seed}) to {}",
        dims,
        out.display()
    );
    Ok(EXIT_OK)
}

//! `clifftest`: batch front end for the Clifford testing laboratory.
//!
//! Every command prints a JSON run manifest (or writes it to `--output`).
//! Exit codes: 0 pass, 1 invariant failure, 2 usage error, 3 budget exceeded.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clifftest::verify::Suite;

#[derive(Parser, Debug)]
#[command(name = "clifftest", version, about = "Clifford testing laboratory")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the manifest here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a suite of invariant checks.
    Verify(VerifyArgs),
    /// Re-emit a saved manifest as JSON or CSV.
    Report(ReportArgs),
    /// Run the 4-query tester on a unitary.
    Test4(Test4Args),
    /// Run the auxiliary-free single-copy tester on a unitary.
    Sctest(SctestArgs),
    /// Exact acceptance probabilities of a unitary.
    Pacc(PaccArgs),
    /// Leaf distributions of a fixed single-qubit strategy.
    Discriminate(DiscriminateArgs),
    /// Q^k norm of a unitary and U^k norm of its Choi state.
    Norms(NormsArgs),
    /// Characteristic distribution of a unitary or a state.
    Chardist(ChardistArgs),
    /// Self-dual code enumeration and unitary partial transposes.
    Commutant {
        #[command(subcommand)]
        command: CommutantCommand,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,
    #[arg(long)]
    n: Option<usize>,
    /// Random samples per qubit count.
    #[arg(long)]
    seeds: Option<usize>,
    /// Master seed for the sampled checks (fixed default).
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: clifftest::Error| e.to_string())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct Test4Args {
    #[arg(long)]
    input: PathBuf,
    /// Independent shots; the verdict accepts iff all of them accept.
    #[arg(long, required_unless_present = "repeated")]
    shots: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Use the repetition count that rejects ε-far unitaries with probability 2/3.
    #[arg(long)]
    repeated: bool,
    /// Omit the per-shot log from the manifest.
    #[arg(long)]
    no_log: bool,
}

#[derive(Args, Debug)]
struct SctestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    p_floor: Option<f64>,
    /// Probability that the stand-in stabilizer tester flips its verdict.
    #[arg(long, default_value_t = 0.0)]
    failure_prob: f64,
}

#[derive(Args, Debug)]
struct PaccArgs {
    #[arg(long)]
    input: PathBuf,
    /// Exact values (the only mode; accepted for scripts).
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct DiscriminateArgs {
    #[arg(long)]
    t: usize,
    #[arg(long)]
    strategy: PathBuf,
}

#[derive(Args, Debug)]
struct NormsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: usize,
}

#[derive(Args, Debug)]
struct ChardistArgs {
    /// A unitary `{"n", "re", "im"}` with matrix parts, or a state with vector parts.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Subcommand, Debug)]
enum CommutantCommand {
    /// Enumerate SD(2t) and run the partial-transpose algorithm on each code.
    Enum {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        check_all: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command).and_then(|o| commands::emit(&o, cli.output.as_deref()).map(|_| o)) {
        Ok(o) if o.passed => ExitCode::SUCCESS,
        Ok(o) => {
            eprintln!("invariant failed: {}", o.failure.as_deref().unwrap_or("unknown check"));
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

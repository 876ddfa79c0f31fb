//! `laxforge`: verification suites, charge tables and magnon checks.

mod charges;
mod failure;
mod family;
mod magnon;
mod references;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "laxforge", version, about = "Exact checks for Yang-Baxter integrable spin chains")]
struct Cli {
    /// Built-in model name (yangian-gl2, yangian-gl(3), ...) or a JSON model file.
    #[arg(long, global = true, default_value = "yangian-gl2")]
    model: String,
    /// Seed for random rational sampling.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Directory receiving the JSON and CSV reports.
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one verification suite.
    Verify(VerifyArgs),
    /// Charge table of the undeformed or a deformed chain.
    Charges(ChargesArgs),
    /// Bethe roots and eigenvector checks of the deformed XXX chain.
    Magnon(MagnonArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Ybe,
    Sutherland,
    Coproduct,
    Lemmas,
    Conjecture,
    Twist,
    Associator,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Ybe => "ybe",
            Suite::Sutherland => "sutherland",
            Suite::Coproduct => "coproduct",
            Suite::Lemmas => "lemmas",
            Suite::Conjecture => "conjecture",
            Suite::Twist => "twist",
            Suite::Associator => "associator",
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Charge index (largest index for the conjecture suite).
    #[arg(long)]
    k: Option<u32>,
    /// Deformation family: boost, boostK, bilocal, bilocalK_L, local, localK.
    #[arg(long)]
    family: Option<String>,
    /// Chain length for suites that build a chain.
    #[arg(long = "L")]
    length: Option<usize>,
    /// Number of random samples.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ChargesArgs {
    #[arg(long = "L")]
    length: usize,
    #[arg(long = "k-max", default_value_t = 3)]
    k_max: u32,
    /// Deformation family; without it the undeformed charges are listed.
    #[arg(long)]
    family: Option<String>,
    /// Family index for `boost`, `bilocal` and `local`.
    #[arg(long)]
    k: Option<u32>,
    /// Order in the deformation parameter; only 1 is supported.
    #[arg(long, default_value_t = 1)]
    order: u32,
}

#[derive(Args, Debug)]
pub struct MagnonArgs {
    #[arg(long = "L")]
    length: usize,
    #[arg(long = "N")]
    magnons: usize,
    /// Spectral parameter of the transfer matrix, as an exact rational.
    #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
    u: String,
    /// Working precision in decimal digits.
    #[arg(long, default_value_t = 50)]
    precision: usize,
}

/// Shared run settings, recorded in every report.
pub struct RunConfig {
    pub model_selector: String,
    pub model: laxforge::Model,
    pub seed: u64,
    pub out: PathBuf,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("LAXFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("LAXFORGE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    let model = laxforge::Model::load(&cli.model).map_err(|e| Failure::Config(e.to_string()))?;
    let cfg = RunConfig { model_selector: cli.model, model, seed: cli.seed, out: cli.out };
    let report = match cli.command {
        Command::Verify(a) => verify::run(&cfg, &a)?,
        Command::Charges(a) => charges::run(&cfg, &a)?,
        Command::Magnon(a) => magnon::run(&cfg, &a)?,
    };
    let paths = report.write(&cfg.out).map_err(|e| Failure::Config(format!("writing report: {e}")))?;
    for c in &report.checks {
        println!("{} {} residual={}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.residual);
    }
    for p in paths {
        println!("report {}", p.display());
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(2),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use warpcert::scenario::{emit, load_scenario, run, CheckKind, Format, RunOptions, Scenario};

/// Directory searched for scenario names that are not paths.
const FIXTURES_ENV: &str = "WARPCERT_FIXTURES";
const APPENDIX_A: &str = include_str!("../../fixtures/appendix_a.toml");

#[derive(Parser)]
#[command(name = "warpcert", version, about = "Certify warped-product identities against a tensor oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "text")]
    format: Format,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a scenario file.
    Verify {
        /// Path, or a name looked up in $WARPCERT_FIXTURES.
        scenario: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// List the check kinds a scenario may use.
    ListChecks,
    /// Run the built-in concurrent-field suite on the two-dimensional space-time.
    AppendixA {
        #[command(flatten)]
        args: RunArgs,
    },
}

fn fixture_dir() -> PathBuf {
    std::env::var_os(FIXTURES_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

fn locate(name: &str) -> PathBuf {
    let direct = PathBuf::from(name);
    if direct.exists() {
        return direct;
    }
    let dir = fixture_dir();
    [dir.join(name), dir.join(format!("{name}.toml"))]
        .into_iter()
        .find(|p| p.exists())
        .unwrap_or(direct)
}

fn execute(scenario: &Scenario, args: &RunArgs) -> ExitCode {
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            eprintln!("error: --tol must be positive");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions {
        seed: args.seed,
        tol: args.tol,
        samples: args.samples,
    };
    let report = run(scenario, &opts);
    print!("{}", emit(&report, args.format));
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListChecks => {
            for k in CheckKind::ALL {
                let (lo, hi) = k.field_arity();
                let fields = if lo == hi { lo.to_string() } else { format!("{lo}-{hi}") };
                let params = k.allowed_params().join(",");
                println!(
                    "{:<28} {:<9} fields={:<4} params={:<16} {}",
                    k.name(),
                    k.target().as_str(),
                    fields,
                    if params.is_empty() { "-".into() } else { params },
                    k.description()
                );
            }
            ExitCode::SUCCESS
        }
        Command::Verify { scenario, args } => match load_scenario(locate(&scenario)) {
            Ok(s) => execute(&s, &args),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::AppendixA { args } => match Scenario::from_toml(APPENDIX_A, "appendix_a") {
            Ok(s) => execute(&s, &args),
            Err(e) => {
                eprintln!("error: built-in suite: {e}");
                ExitCode::from(2)
            }
        },
    }
}

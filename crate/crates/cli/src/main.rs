use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deltakick_cli::config::{default_text, MAX_EXACT_INTEGER};
use deltakick_cli::{execute, Kind, RunConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "deltakick", version, about = "Delta-kick cooling and dipole-barrier simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Flat `key = value` config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Single kick experiment: result.csv, expansion.csv.
    Kick(RunArgs),
    /// Temperature against kick strength: scan.csv.
    ScanStrength(RunArgs),
    /// Best cooling against expansion ratio: scan.csv, strengths.csv.
    ScanExpansion(RunArgs),
    /// Kick of a cloud spread over sublevels: spins.csv, profile.csv, bimodal.csv.
    Multispin(RunArgs),
    /// On-axis field of a coil pair: field.csv, summary.csv.
    CoilField(RunArgs),
    /// Velocity selection by a swept barrier: sweep.csv, states.csv, result.csv.
    QmSweep(RunArgs),
    /// Transfer against barrier height: transfer_vs_depth.csv.
    QmDepthScan(RunArgs),
    /// Tunneling out of the auxiliary well: survival.csv, result.csv.
    QmDecay(RunArgs),
    /// Print the default config for an experiment.
    Defaults {
        experiment: String,
    },
}

fn config_error(line: Option<usize>, field: &str, message: &str) {
    let line = line.map_or("-".to_string(), |l| l.to_string());
    eprintln!("error\tconfig\t{line}\t{field}\t{message}");
}

fn run(kind: Kind, args: RunArgs) -> ExitCode {
    let text = match &args.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                config_error(None, &p.display().to_string(), &e.to_string());
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => String::new(),
    };
    let mut config = match RunConfig::parse(kind, &text) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                config_error(e.line, &e.field, &e.message);
            }
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = args.seed {
        if seed as f64 > MAX_EXACT_INTEGER {
            config_error(None, "--seed", "must be below 2^53");
            return ExitCode::from(EXIT_CONFIG);
        }
        config.set_seed(seed);
    }
    if let Some(n) = args.threads {
        if n == 0 {
            config_error(None, "--threads", "must be at least 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error\truntime\t-\t--threads\t{e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    let outputs = match execute(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error\truntime\t-\t{kind}\t{e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    match outputs.write_to(&args.out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error\truntime\t-\t{}\t{e}", args.out.display());
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Kick(a) => (Kind::Kick, a),
        Command::ScanStrength(a) => (Kind::ScanStrength, a),
        Command::ScanExpansion(a) => (Kind::ScanExpansion, a),
        Command::Multispin(a) => (Kind::Multispin, a),
        Command::CoilField(a) => (Kind::CoilField, a),
        Command::QmSweep(a) => (Kind::QmSweep, a),
        Command::QmDepthScan(a) => (Kind::QmDepthScan, a),
        Command::QmDecay(a) => (Kind::QmDecay, a),
        Command::Defaults { experiment } => {
            return match Kind::from_name(&experiment) {
                Some(k) => {
                    print!("{}", default_text(k));
                    ExitCode::SUCCESS
                }
                None => {
                    config_error(None, "experiment", &format!("unknown experiment `{experiment}`"));
                    ExitCode::from(EXIT_CONFIG)
                }
            };
        }
    };
    run(kind, args)
}

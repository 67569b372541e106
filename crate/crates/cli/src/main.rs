use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oas_cli::report::report;
use oas_cli::{generate_synthetic, run_experiment, run_oracle, CliError, CliResult, ExperimentConfig, SynthName};

#[derive(Parser)]
#[command(name = "oas", version, about = "Ordered allocation sampler for mixture models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the chains of one or more config files.
    Run { configs: Vec<PathBuf> },
    /// Write a synthetic data set.
    Synth { name: String, seed: u64, out: PathBuf },
    /// Write the exact partition posterior of a small data set.
    Oracle { config: PathBuf },
    /// Print IAT and deviance tables for saved traces.
    Report { traces: Vec<PathBuf> },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { configs } => {
            if configs.is_empty() {
                return Err(CliError::Config("no config files given".into()));
            }
            let cfgs = configs.iter().map(|p| ExperimentConfig::load(p)).collect::<CliResult<Vec<_>>>()?;
            for cfg in &cfgs {
                for out in run_experiment(cfg)? {
                    let s = &out.summary;
                    let tau = |i: Option<oas_cli::experiment::IatSummary>| i.map_or("n/a".to_string(), |i| format!("{:.2}", i.tau));
                    println!(
                        "{}: kept {} in {:.1}s, iat(k) {}, iat(D) {}, mean k {:.2} -> {}",
                        out.sampler,
                        s.kept,
                        s.runtime_seconds,
                        tau(s.iat_k),
                        tau(s.iat_deviance),
                        s.mean_k,
                        out.dir.display()
                    );
                    if let Some(tv) = s.oracle_tv {
                        println!("{}: total variation to the exact posterior {tv:.4}", out.sampler);
                    }
                }
            }
            Ok(())
        }
        Command::Synth { name, seed, out } => {
            let name: SynthName = name.parse()?;
            generate_synthetic(name, seed).save(&out)
        }
        Command::Oracle { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (table, path) = run_oracle(&cfg)?;
            for (k, p) in table.k_pmf() {
                println!("P(k = {k}) = {p:.6}");
            }
            println!("{} partitions -> {}", table.len(), path.display());
            Ok(())
        }
        Command::Report { traces } => {
            if traces.is_empty() {
                return Err(CliError::Config("no trace files given".into()));
            }
            print!("{}", report(&traces)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

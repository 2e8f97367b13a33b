use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use modalsim::{run_to_dir, RunError, Scenario, ScenarioConfig};

/// Runs one simulator scenario and writes `<scenario>.csv` and
/// `<scenario>.summary.txt`.
#[derive(Debug, Parser)]
#[command(name = "modalsim", version)]
struct Args {
    #[arg(long, value_parser = parse_scenario, required_unless_present = "list_scenarios")]
    scenario: Option<Scenario>,
    /// Key-value file; missing keys take the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir` from the file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    list_scenarios: bool,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse()
}

fn load(args: &Args) -> Result<ScenarioConfig, RunError> {
    let text = match &args.config {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|e| RunError::Validation(format!("cannot read {}: {e}", p.display())))?
        }
        None => String::new(),
    };
    let mut cfg = ScenarioConfig::parse(&text, args.scenario)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    // clap's own failure status is 2, which is reserved for invariant violations
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if args.list_scenarios {
        for s in Scenario::ALL {
            println!("{s}");
        }
        return ExitCode::SUCCESS;
    }
    let cfg = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let dir = PathBuf::from(&cfg.output_dir);
    match run_to_dir(&cfg, &dir) {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {}", if c.passed() { "PASS" } else { "FAIL" }, c.name);
            }
            println!("wrote {}", dir.join(format!("{}.summary.txt", cfg.scenario)).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

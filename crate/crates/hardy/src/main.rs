use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use hardy::cli::{load_config, run_config};
use hardy::geometry::{ConvexityClass, Domain};
use hardy::reference::{ahlfors_lower_bound, smooth_constant, threshold_report, tidblom_angles};

#[derive(Parser)]
#[command(name = "hardy", version, about = "Weighted boundary Hardy constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its reports.
    Run { config: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// List the domain catalogue keys.
    ListDomains,
    /// Print the closed-form values for one weight exponent.
    Reference {
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value = "convex")]
        domain_class: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match run_config(&config) {
            Ok(outcome) => {
                for run in &outcome.runs {
                    match &run.error {
                        Some(e) => eprintln!("FAILED {}: {e}", run.label),
                        None => println!("ok     {}", run.label),
                    }
                }
                for path in &outcome.written {
                    println!("wrote  {}", path.display());
                }
                ExitCode::from(outcome.exit_code())
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::Validate { config } => match load_config(&config) {
            Ok(cfg) => {
                println!("{}: valid {} config", config.display(), cfg.experiment.key());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::ListDomains => {
            for (key, description) in Domain::catalogue() {
                println!("{key:<28} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Reference { delta, domain_class } => {
            let class = match ConvexityClass::parse(&domain_class) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let show = |r: hardy::Result<f64>| match r {
                Ok(v) => json!(v),
                Err(e) => json!({ "error": e.to_string() }),
            };
            let threshold = match threshold_report(class, delta) {
                Ok(t) => json!(t),
                Err(e) => json!({ "error": e.to_string() }),
            };
            let out = json!({
                "delta": delta,
                "domain_class": domain_class,
                "smooth_constant": show(smooth_constant(delta)),
                "ahlfors_lower_bound_planar": show(ahlfors_lower_bound(2, 1.0, delta)),
                "thresholds": threshold,
                "critical_angles": tidblom_angles(),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
            ExitCode::SUCCESS
        }
    }
}

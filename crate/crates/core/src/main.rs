use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hdqchain::adversary::{detection_oracle, AttackScenario};
use hdqchain::runner::{self, parse_config, EXIT_ACCEPTANCE, EXIT_OK};
use hdqchain::Error;

#[derive(Parser)]
#[command(name = "hdqchain", version, about = "Time-entangled qudit blockchain simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios of a JSON config and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Master seed; beats both the config and HDQCHAIN_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for report.json and report.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Print the analytic detection probability of an attack per dimension.
    Oracle {
        /// Attack kind, or a full scenario as JSON.
        #[arg(long)]
        attack: String,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        blocks: usize,
        #[arg(long, default_value_t = 1)]
        symbols: usize,
    },
    /// Print the committed reference transcript (4 blocks, N = 2, m = 1, seed 0).
    Transcript,
    /// Run the acceptance suite and print its JSON report.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("hdqchain: {e}");
    if let Error::Config(list) = e {
        for msg in list {
            eprintln!("  {msg}");
        }
    }
    ExitCode::from(runner::exit_code(e) as u8)
}

fn seed_or_env(seed: Option<u64>) -> Result<Option<u64>, Error> {
    match seed {
        Some(s) => Ok(Some(s)),
        None => runner::seed_from_env(),
    }
}

fn scenario_from_arg(attack: &str) -> Result<AttackScenario, Error> {
    let text = if attack.trim_start().starts_with('{') { attack.to_string() } else { format!(r#"{{"kind":"{attack}"}}"#) };
    serde_json::from_str(&text).map_err(|e| Error::Config(vec![format!("attack: {e}")]))
}

fn real_main(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run { config, seed, out, trials } => {
            let mut cfg = parse_config(&config)?;
            if let Some(s) = seed_or_env(seed)? {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let outputs = runner::resolve_outputs(&cfg, out.as_deref());
            let report = runner::execute(&cfg, &outputs)?;
            if outputs.report.is_none() {
                print!("{}", report.to_json());
            }
            for r in report.rows.iter().filter(|r| !r.pass) {
                eprintln!(
                    "FAIL {} N={}: rate {} oracle {:?}",
                    r.scenario_kind, r.qudit_dim, r.stats.detection_rate, r.oracle
                );
            }
            Ok(if report.all_pass { EXIT_OK } else { EXIT_ACCEPTANCE })
        }
        Command::Oracle { attack, dims, blocks, symbols } => {
            let scenario = scenario_from_arg(&attack)?;
            println!("N,detection_probability");
            for d in dims {
                match detection_oracle(&scenario, blocks, d, symbols) {
                    Ok(p) => println!("{d},{p}"),
                    Err(Error::Unsupported(msg)) => println!("{d},unsupported ({msg})"),
                    Err(e) => return Err(e),
                }
            }
            Ok(EXIT_OK)
        }
        Command::Transcript => {
            println!("{}", runner::golden_transcript()?.transcript_json());
            Ok(EXIT_OK)
        }
        Command::Selftest { seed, out } => {
            let seed = seed_or_env(seed)?.unwrap_or(0);
            let report = runner::selftest(seed);
            for c in &report.criteria {
                eprintln!("{} {:>2} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
            }
            for id in &report.wall_clock.over_budget {
                eprintln!("OVER BUDGET criterion {id}");
            }
            let json = report.to_json();
            if let Some(p) = out {
                std::fs::write(&p, &json).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            }
            print!("{json}");
            Ok(if report.succeeded() { EXIT_OK } else { EXIT_ACCEPTANCE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_argument_forms() {
        assert_eq!(scenario_from_arg("honest").unwrap(), AttackScenario::Honest);
        assert!(matches!(scenario_from_arg(r#"{"kind":"timing_violation"}"#), Ok(AttackScenario::TimingViolation { .. })));
        assert!(matches!(scenario_from_arg("nonsense"), Err(Error::Config(_))));
        assert_eq!(runner::EXIT_CONFIG, 2);
    }
}

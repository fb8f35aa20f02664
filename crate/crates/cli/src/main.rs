use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nmcm::config::parse_overrides;
use nmcm::{run, thread_budget, RunConfig, Scenario};

/// Collision-model scenario runner.
///
/// Any parameter of the configuration file can be overridden with
/// `--key value`; flags win over the file.
#[derive(Debug, Parser)]
#[command(name = "nmcm", version)]
struct Args {
    scenario: Scenario,

    /// TOML file with flat key = value pairs.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (same as `--output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Parameter overrides, e.g. `--lambda 0.1 --models cm,exact`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let outcome = parse_overrides(&args.overrides).and_then(|mut overrides| {
        if let Some(out) = &args.out {
            overrides.push(("output_dir".into(), out.display().to_string()));
        }
        let cfg = RunConfig::load(args.scenario, args.config.as_deref(), &overrides)?;
        let threads = thread_budget()?;
        run(&cfg, threads)
    });
    match outcome {
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Ok(report) => match report.first_failure() {
            Some(check) => {
                let at = check.t.map(|t| format!(" at t = {t}")).unwrap_or_default();
                eprintln!(
                    "certification failed: {}{at} (value {:.3e}, threshold {:.3e})",
                    check.name, check.value, check.threshold
                );
                ExitCode::from(1)
            }
            None => {
                println!("ok: {} checks passed, outputs in {}", report.checks.len(), report.config.output_dir.display());
                ExitCode::SUCCESS
            }
        },
    }
}

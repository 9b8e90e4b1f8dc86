use std::path::PathBuf;
use std::process::ExitCode;

use akns_lab_cli::commands::{self, Outcome, Output};
use akns_lab_cli::config::{self, ExperimentConfig};
use akns_lab_cli::{selftest, CliError, EXIT_OK, EXIT_PROPERTY, EXIT_USAGE};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "akns-lab", version, about = "Green's functions, conserved quantities and flows of the NLS/mKdV hierarchy")]
struct Cli {
    /// TOML experiment config; unset keys take their defaults.
    #[arg(long, global = true, env = "AKNS_LAB_CONFIG")]
    config: Option<PathBuf>,

    /// Output directory (overrides `output`).
    #[arg(long, global = true, env = "AKNS_LAB_OUT")]
    out: Option<PathBuf>,

    /// Worker threads, 0 = all cores (overrides `threads`).
    #[arg(long, global = true, env = "AKNS_LAB_THREADS")]
    threads: Option<usize>,

    /// Seed for randomized suites (overrides `seed`).
    #[arg(long, global = true, env = "AKNS_LAB_SEED")]
    seed: Option<u64>,

    /// Override one config key, e.g. `--set grid.N=512`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Diagonal Green's functions and identity residuals.
    Green,
    /// Hamiltonians, A(kappa), alpha(kappa) and expansion errors.
    Conserved,
    /// Integrate the configured flow and save the trajectory.
    Evolve,
    /// Local smoothing, tightness and equicontinuity tables.
    Smoothing,
    /// Microscopic conservation residuals.
    Micro,
    /// Norm inflation experiment.
    Inflate,
    /// Convergence of a difference flow in kappa.
    Sweep,
    /// Run the property suite.
    Selftest,
    /// Print the annotated default config.
    Defaults,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut overrides = config::env_overrides(std::env::vars());
    for s in &cli.set {
        let (k, v) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {s}")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(o) = &cli.out {
        overrides.push(("output".into(), format!("{:?}", o.display().to_string())));
    }
    if let Some(t) = cli.threads {
        overrides.push(("threads".into(), t.to_string()));
    }
    if let Some(s) = cli.seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    ExperimentConfig::resolve(cli.config.as_deref(), &overrides)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Command::Defaults = cli.command {
        print!("{}", config::reference());
        return Ok(Outcome { lines: Vec::new(), passed: true });
    }
    let cfg = resolve(cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure threads: {e}")))?;
    }
    let out = Output::create(&cfg.output, &cfg)?;
    match cli.command {
        Command::Green => commands::green(&cfg, &out),
        Command::Conserved => commands::conserved(&cfg, &out),
        Command::Evolve => commands::evolve_cmd(&cfg, &out),
        Command::Smoothing => commands::smoothing(&cfg, &out),
        Command::Micro => commands::micro(&cfg, &out),
        Command::Inflate => commands::inflate(&cfg, &out),
        Command::Sweep => commands::sweep(&cfg, &out),
        Command::Selftest => {
            let checks = selftest::run(&cfg)?;
            out.csv("selftest.csv", &selftest::table(&checks))?;
            let mut lines: Vec<String> = checks
                .iter()
                .map(|c| {
                    format!("{} {:<28} {:.3e} in [{:.1e}, {:.1e}]", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.low, c.high)
                })
                .collect();
            let failed = checks.iter().filter(|c| !c.passed).count();
            lines.push(format!("{} of {} checks passed", checks.len() - failed, checks.len()));
            Ok(Outcome { lines, passed: failed == 0 })
        }
        Command::Defaults => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            for l in &outcome.lines {
                println!("{l}");
            }
            ExitCode::from(if outcome.passed { EXIT_OK } else { EXIT_PROPERTY } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

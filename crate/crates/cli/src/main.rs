use anyhow::Context;
use clap::{Parser, Subcommand};
use gauge_moduli_cli::artifacts;
use gauge_moduli_cli::config::{ConfigError, ExperimentConfig, Suite};
use gauge_moduli_cli::export::{export, Format};
use gauge_moduli_cli::pipeline::{execute, write_run, Severity};
use gauge_moduli_cli::run_suite;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gauge-moduli", version, about = "Run gauge-moduli experiments and verification suites")]
struct Cli {
    /// Seed for random inputs; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Run one or more check suites and report pass/fail per check.
    Check {
        #[arg(required = true, value_enum)]
        suites: Vec<Suite>,
    },
    /// Flatten run directories into tables.
    Export {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

/// Exit code for I/O and other failures outside the experiment itself.
const INTERNAL_ERROR: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { ref config } => run(config, cli.seed, cli.out.as_deref()),
        Command::Check { ref suites } => check(suites, cli.seed.unwrap_or(0), cli.out.as_deref()),
        Command::Export { ref dir, format } => {
            let out = cli.out.clone().unwrap_or_else(|| dir.join("export"));
            export(dir, format, &out).map(|files| {
                for f in files {
                    println!("{}", f.display());
                }
                0
            })
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<ConfigError>() {
                Some(_) => Severity::Invalid.exit_code() as u8,
                None => INTERNAL_ERROR,
            };
            ExitCode::from(code)
        }
    }
}

fn run(path: &Path, seed: Option<u64>, out: Option<&Path>) -> anyhow::Result<i32> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = match out.map(Path::to_path_buf).or_else(|| cfg.out.clone()) {
        Some(d) => d,
        None => PathBuf::from(format!("run-{}", &cfg.hash()[..12])),
    };
    let exp = execute(&cfg)?;
    let man = write_run(&exp, &dir).with_context(|| format!("writing artifacts to {}", dir.display()))?;
    for s in &exp.stages {
        println!("{}: {:?} after {} iterations, residual {:.3e}", s.name, s.stop, s.iterations, s.residual_max);
    }
    if let Some(rep) = &exp.continuation {
        for s in &rep.steps {
            let k = s.kernel.as_ref().map_or("-".into(), |k| k.kernel_dim.to_string());
            println!("alpha {:.4}: residual {:.3e}, kernel {k}, drift {:.1e}", s.alpha, s.residual_max, s.scalar_drift);
        }
    }
    for m in &exp.moduli {
        let r = &m.report;
        println!(
            "moduli at alpha {}: dim {}, signature {}/{}/{}, nondegenerate {}, compatibility {:.1e}",
            m.alpha, m.basis_dim, r.signature.positive, r.signature.negative, r.signature.zero, r.nondegenerate, r.compatibility_error
        );
    }
    for s in &exp.suites {
        for c in &s.checks {
            println!("{}: {}", s.suite, c.line());
        }
    }
    for f in &man.failures {
        eprintln!("failure: {f}");
    }
    println!("artifacts in {} (exit {})", dir.display(), man.exit_code);
    Ok(man.exit_code)
}

fn check(suites: &[Suite], seed: u64, out: Option<&Path>) -> anyhow::Result<i32> {
    let mut worst = Severity::Pass;
    for &suite in suites {
        let report = run_suite(suite, seed);
        for c in &report.checks {
            println!("{}: {}", report.suite, c.line());
        }
        if !report.passed {
            worst = worst.max(Severity::CheckFailed);
        }
        if let Some(dir) = out {
            artifacts::write_json(&dir.join(format!("check_{}.json", suite.name())), &report)?;
        }
    }
    Ok(worst.exit_code())
}

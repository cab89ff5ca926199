mod config;
mod regress;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pqec_core::channel::Channel;
use pqec_core::Error;

use config::Study;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_COMPILE: u8 = 3;

#[derive(Parser)]
#[command(name = "pqec", version, about = "Logical-channel extraction, compilation and resource studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract logical channels from a surface-code memory round.
    Extract(StudyArgs),
    /// Fit logical channels to dissipative targets.
    Fit(StudyArgs),
    /// Simulate compiled trajectories against the continuous-time oracle.
    Dynamics(StudyArgs),
    /// Compare code distances and footprints across error budgets.
    Resources(StudyArgs),
    /// Check a channel document for complete positivity and trace preservation.
    ValidateChannel {
        path: PathBuf,
    },
    /// Rerun the golden-data fixtures and compare against their expected outputs.
    Regress {
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
        /// Overwrite the expected outputs with the current results.
        #[arg(long)]
        bless: bool,
        /// Run with a different default `lambda_unit`.
        #[arg(long, value_name = "X")]
        perturb_lambda_unit: Option<f64>,
        /// Restrict to the named fixtures.
        #[arg(long = "only", value_name = "NAME")]
        only: Vec<String>,
    },
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Results root; defaults to the config's `out`, then `results`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// `section.key=value`, applied on top of the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run_study(study: Study, args: &StudyArgs) -> ExitCode {
    let source = args.config.display().to_string();
    let mut cfg = match config::load(&args.config, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = cfg.resolve(study, args.seed, &source) {
        eprintln!("{e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let root = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let label = args.label.clone().or_else(|| cfg.label.clone()).unwrap_or_else(|| "default".into());

    let output = match run::run_study(&cfg) {
        Ok(o) => o,
        Err(Error::CompileFailure { fit, eta }) => {
            eprintln!("compile failure: residual {:e} exceeds {eta:e}", fit.residual);
            eprintln!("{}", serde_json::to_string_pretty(&fit).unwrap_or_default());
            return ExitCode::from(EXIT_COMPILE);
        }
        Err(e @ (Error::InvalidParameter(_) | Error::InfeasibleBudget { .. })) => {
            eprintln!("config error in {source}: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    match run::write_outputs(&cfg, &root, &label, &output) {
        Ok(dir) => println!("wrote {}", dir.display()),
        Err(e) => {
            eprintln!("error: cannot write outputs: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    if output.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} compile failure(s):", output.failures.len());
        eprintln!("{}", serde_json::to_string_pretty(&output.failures).unwrap_or_default());
        ExitCode::from(EXIT_COMPILE)
    }
}

fn validate_channel(path: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let channel = match Channel::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let report = channel.validate();
    println!("min_choi_eigenvalue {:.6e}", report.min_choi_eigenvalue);
    println!("tp_defect {:.6e}", report.tp_defect);
    println!("hermiticity_defect {:.6e}", report.hermiticity_defect);
    if let Some(row) = &report.ptm_first_row {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        println!("ptm_first_row [{}]", cells.join(", "));
    }
    if report.is_cptp() {
        println!("CPTP");
        ExitCode::SUCCESS
    } else {
        let mut why = Vec::new();
        if !report.is_cp() {
            why.push("not completely positive");
        }
        if !report.is_tp() {
            why.push("not trace preserving");
        }
        println!("NOT CPTP ({})", why.join(", "));
        ExitCode::from(1)
    }
}

fn regress(options: regress::RegressOptions, root: &Path) -> ExitCode {
    match regress::run_all(root, &options) {
        Ok(results) => {
            if options.bless {
                for r in &results {
                    println!("BLESSED {}", r.name);
                }
                return ExitCode::SUCCESS;
            }
            print!("{}", regress::render(&results));
            if results.iter().all(|r| r.passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Extract(a) => run_study(Study::Extract, &a),
        Command::Fit(a) => run_study(Study::Fit, &a),
        Command::Dynamics(a) => run_study(Study::Dynamics, &a),
        Command::Resources(a) => run_study(Study::Resources, &a),
        Command::ValidateChannel { path } => validate_channel(&path),
        Command::Regress { fixtures, bless, perturb_lambda_unit, only } => {
            regress(regress::RegressOptions { bless, perturb_lambda_unit, only }, &fixtures)
        }
    }
}

//! `dyck`: constants, construction, systole, area, hexagon and capacity
//! certificates for the extremal nonpositively curved Dyck's surface.

mod checks;
mod commands;
mod config;
mod error;
mod report;

use clap::{Parser, Subcommand};
use commands::{BuildTarget, CapacityAction, ExportTarget};
use config::{GlobalArgs, RunConfig};
use error::{CliError, EXIT_ACCEPTANCE, EXIT_BAD_INPUT, EXIT_OK};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dyck", version, about = "Certificates for the extremal nonpositively curved Dyck's surface")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Registry of closed-form constants
    Constants,
    /// Build a surface and report its topology and curvature
    Build {
        #[arg(value_enum, default_value = "dyck")]
        target: BuildTarget,
    },
    /// Systole of D≤0 by closed geodesic enumeration up to --lmax
    Systole,
    /// Hexagon minimization, Möbius tradeoff and case bounds
    Hexopt,
    /// Capacity bounds of the two collars
    Capacity {
        #[arg(value_enum)]
        action: CapacityAction,
    },
    /// Equality-case certificate
    Certify,
    /// Full pipeline with the twelve acceptance checks
    Verify,
    /// Write meshes, geodesics or the collar profile
    Export {
        #[arg(value_enum)]
        target: ExportTarget,
        /// OBJ instead of JSON for meshes
        #[arg(long)]
        obj: bool,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let (rendered, code) = match cli.command {
        Command::Constants => (commands::cmd_constants(&cfg)?, EXIT_OK),
        Command::Build { target } => (commands::cmd_build(&cfg, target)?, EXIT_OK),
        Command::Systole => (commands::cmd_systole(&cfg)?, EXIT_OK),
        Command::Hexopt => (commands::cmd_hexopt(&cfg)?, EXIT_OK),
        Command::Capacity { action } => {
            let (r, ok) = commands::cmd_capacity(&cfg, action)?;
            (r, if ok { EXIT_OK } else { EXIT_ACCEPTANCE })
        }
        Command::Certify => {
            let r = checks::run_certify(&cfg)?;
            let code = if r.certified { EXIT_OK } else { EXIT_ACCEPTANCE };
            (checks::render_certify(&cfg, &r), code)
        }
        Command::Verify => {
            let r = checks::run_verify(&cfg);
            for s in &r.stages {
                if let Some(e) = &s.error {
                    eprintln!("error: {e}");
                }
            }
            if let Some(stage) = r.first_failing_stage {
                eprintln!("first failing stage: {stage}");
            }
            (checks::render_verify(&cfg, &r), r.exit_code)
        }
        Command::Export { target, obj } => (commands::cmd_export(&cfg, target, obj)?, EXIT_OK),
    };
    report::emit(&cfg, &rendered.select(cfg.format)?)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

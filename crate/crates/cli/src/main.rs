use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

mod args;
mod commands;
mod error;
mod input;
mod report;

use args::Cli;
use error::CliError;
use report::Output;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let start = Instant::now();
    if let Some(threads) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("eigenshape: cannot configure {threads} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let mut out = match Output::new(&cli.common.out) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("eigenshape: {e}");
            return ExitCode::from(1);
        }
    };
    let config = json!({
        "mesh": cli.common.mesh,
        "seed": cli.common.seed,
        "options": cli.command.options(),
    });
    let outcome = execute(&cli, &mut out);
    if let Err(e) = &outcome {
        eprintln!("eigenshape: {e}");
    }
    let code = outcome.as_ref().err().map_or(0, CliError::exit_code);
    let report = report::report(cli.command.name(), config, &outcome, out.files());
    if let Err(e) = out.finish(&report, start.elapsed().as_secs_f64()) {
        eprintln!("eigenshape: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}

fn execute(cli: &Cli, out: &mut Output) -> Result<serde_json::Value, CliError> {
    let spec = cli
        .common
        .mesh
        .as_deref()
        .ok_or_else(|| CliError::Usage("--mesh is required".into()))?;
    let mesh = out.timed("load", || input::load_mesh_spec(spec))?;
    let mut ctx = commands::Context {
        mesh,
        seed: cli.common.seed,
        out,
    };
    commands::run(&cli.command, &mut ctx)
}

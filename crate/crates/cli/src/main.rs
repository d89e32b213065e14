mod args;
mod commands;
mod config;
mod error;
mod sweep;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::{Ctx, Output};
use crate::config::Resolver;
use crate::error::{usage, CliError};
use crate::table::Format;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let mut resolver = Resolver::load(g.config.as_deref())?;
    let format = resolver.string("format", g.format.map(|f| format!("{f:?}").to_lowercase()), Some("csv"))?;
    let format: Format = format.unwrap_or_default().parse().map_err(usage)?;
    let out = resolver.string("out", g.out.map(|p| p.display().to_string()), None)?.map(PathBuf::from);
    if let Some(n) = resolver.usize("threads", g.threads, None)? {
        if n == 0 {
            return Err(usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("cannot start {n} worker threads: {e}")))?;
    }
    let grid_nodes = resolver.usize("grid_nodes", g.grid_nodes, None)?;
    let mut ctx = Ctx { resolver, grid_nodes, cutoff_flag: g.cutoff };
    let Output { mut table, failure } = match &cli.command {
        Command::Propagator(a) => commands::propagator::run(a, &mut ctx)?,
        Command::Beta(a) => commands::beta::run(a, &mut ctx)?,
        Command::Mstar(a) => commands::mstar::run(a, &mut ctx)?,
        Command::Evolve(a) => commands::evolve::run(a, &mut ctx)?,
        Command::Verify(a) => commands::verify::run(a, &mut ctx)?,
    };
    let derived = std::mem::take(&mut table.params);
    ctx.resolver.echo(&mut table);
    for (k, v) in derived {
        table.param(&k, v);
    }
    table.write(format, out.as_deref())?;
    match failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

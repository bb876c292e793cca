//! `qplab`: batch runner for quasi-periodic Schrödinger experiments.
//!
//! Exit codes: 0 success, 1 i/o failure or a failing selftest check,
//! 2 validation error, 3 numeric failure.

mod commands;
mod config;
mod model;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{CliError, CliResult, Config};

fn command_list() -> String {
    let mut s = String::from("Commands:\n");
    for c in commands::COMMANDS {
        s.push_str(&format!("  {:<14}{}\n", c.name, c.about));
    }
    s.push_str(&format!("  {:<14}{}\n", "selftest", "fast closed-form and determinism checks"));
    s
}

#[derive(Parser, Debug)]
#[command(name = "qplab", version, about = "Numerical lab for quasi-periodic Schrödinger operators")]
#[command(after_help = command_list())]
struct Cli {
    /// subcommand to run (see the list below)
    command: String,
    /// flat `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// override a config key; may be repeated
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// output directory (default qplab-out/<command>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// working precision in bits for the frequency arithmetic
    #[arg(long)]
    precision: Option<u32>,
    /// accepted for interface compatibility; computations are sequential
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> CliResult<u8> {
    let default_out = || PathBuf::from("qplab-out").join(&cli.command);
    if cli.command == "selftest" {
        let out = cli.out.clone().unwrap_or_else(default_out);
        return Ok(if selftest::run(&out) { 0 } else { 1 });
    }
    let cmd = commands::find(&cli.command)
        .ok_or_else(|| CliError::invalid("", format!("unknown command `{}`\n{}", cli.command, command_list())))?;
    let mut cfg = Config::load(cli.config.as_deref(), &cli.set)?;
    if let Some(p) = cli.precision {
        cfg.set("precision", p.to_string());
    }
    if let Some(t) = cli.threads {
        cfg.set("threads", t.to_string());
    }
    let out = match (&cli.out, cfg.peek("out")) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => cfg.path(&o),
        (None, None) => default_out(),
    };
    commands::execute(cmd, &cfg, &out)?;
    println!("{}: outputs written to {}", cmd.name, out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qplab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
